//! Parse expressions, differentiate them and decide zero-equivalence.
//!
//! ```bash
//! cargo run --example symbolic_calculus
//! ```

use hamiltonian_noether::expr::{is_zero, partial_diff, simplify, total_derivative, Symbol, ZeroTest};
use hamiltonian_noether::parser::{parse_expression, ParseContext};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ctx = ParseContext::phase_space(1).with_jet(true);
    let h = parse_expression("p1^2/2 + 1/(2*q1^2)", &ctx)?;
    println!("H          = {h}");
    println!("dH/dq1     = {}", partial_diff(&h, &Symbol::Coord(1)));
    println!("dH/dp1     = {}", partial_diff(&h, &Symbol::Momentum(1)));
    println!("D(H)       = {}", total_derivative(&h)?);

    let test = ZeroTest::default();
    let pythagoras = parse_expression("sin(t)^2 + cos(t)^2 - 1", &ctx)?;
    println!("sin^2 + cos^2 - 1: {:?}", is_zero(&pythagoras, &test));

    let fraction = parse_expression("(q1^2 - p1^2)/(q1 - p1) - q1 - p1", &ctx)?;
    println!("normal form of {fraction}: {}", simplify(&fraction));
    println!("verdict: {}", is_zero(&fraction, &test).status());

    let wrong = parse_expression("(q1 + p1)^2 - q1^2 - p1^2", &ctx)?;
    println!("(q1 + p1)^2 - q1^2 - p1^2 -> {}", simplify(&wrong));
    Ok(())
}
