//! A symmetry of the canonical equations that yields no first integral:
//! the scaling of the one-dimensional Coulomb problem.
//!
//! ```bash
//! cargo run --example noether_failure
//! ```

use hamiltonian_noether::cli::load_example;
use hamiltonian_noether::expr::simplify;
use hamiltonian_noether::hamiltonian::{analyze, first_integral, DivergenceSearch};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = load_example("coulomb")?;
    let sys = &spec.system;
    let scaling = &spec.symmetries[1].symmetry;
    let report = analyze(sys, scaling, None)?;

    println!("H = {}", sys.hamiltonian());
    println!("residual on solutions: {}", simplify(&report.residual_on_shell));
    println!("action invariance: {:?}", report.verdict_theorem1);
    if let Some(DivergenceSearch::NoVExists { condition, verdict }) = &report.search {
        println!("no divergence term: {condition} is {}", verdict.status());
    }
    let all_hold = |v: &[hamiltonian_noether::expr::ZeroVerdict]| v.iter().all(|v| v.is_zero());
    println!("symmetry conditions hold: {}", all_hold(&report.theorem4_verdicts));
    println!("equations invariant:      {}", all_hold(&report.direct_invariance_verdicts));

    match first_integral(sys, scaling, None, false) {
        Ok(i) => println!("unexpected integral {}", i.expr),
        Err(e) => println!("refused: {e}"),
    }
    let forced = first_integral(sys, scaling, None, true)?;
    println!("forced candidate {} is conserved: {}", forced.expr, forced.verified.status());
    Ok(())
}
