//! Invariance of the Hamiltonian action under point symmetries, including
//! the search for a divergence term.
//!
//! ```bash
//! cargo run --example invariance
//! ```

use hamiltonian_noether::expr::{simplify, Expr};
use hamiltonian_noether::hamiltonian::{analyze, HamiltonianSystem, PointSymmetry};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (t, q, p) = (Expr::t(), Expr::q(1), Expr::p(1));
    let h = (p.powi(2) + q.powi(-2)) / Expr::int(2);
    let sys = HamiltonianSystem::new(1, h)?.with_singularities(vec![q.clone()])?;

    let symmetries = [
        PointSymmetry::new("time shift", Expr::one(), vec![Expr::zero()], vec![Expr::zero()]),
        PointSymmetry::new("dilation", Expr::int(2) * &t, vec![q.clone()], vec![-&p]),
        PointSymmetry::new("projective", t.powi(2), vec![&t * &q], vec![&q - &t * &p]),
    ];
    for x in &symmetries {
        let report = analyze(&sys, x, None)?;
        println!("{}", x.name);
        println!("  residual on solutions: {}", simplify(&report.residual_on_shell));
        println!("  invariant: {}", report.verdict_theorem1.status());
        if let Some((term, verdict)) = &report.divergence {
            println!("  divergence term V = {} ({:?}, {})", term.v, term.provenance, verdict.status());
        }
        println!("  admits a first integral: {}", report.admits_integral());
    }
    Ok(())
}
