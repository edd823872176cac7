//! Numerical conservation: drift of first integrals under RK4 and the
//! implicit midpoint rule, and the observed order under step halving.
//!
//! ```bash
//! cargo run --release --example drift
//! ```

use std::f64::consts::TAU;

use hamiltonian_noether::cli::load_example;
use hamiltonian_noether::numerics::{convergence_order, drift, integrate, IntegratorConfig, Method, Monitored};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = load_example("oscillator")?;
    let sys = &spec.system;
    let energy = Monitored::new("energy", sys.hamiltonian().clone());
    let phase = &spec.integrals[0];
    let angle = Monitored::new("phase", phase.expr.clone()).with_period(phase.period.unwrap_or(0.0));

    for method in [Method::Rk4, Method::ImplicitMidpoint] {
        for periods in [10.0, 100.0] {
            let cfg = IntegratorConfig::new(method, 0.05, 0.0, periods * TAU);
            let traj = integrate(sys, &[1.0, 0.3], &cfg)?;
            let report = drift(sys, &[energy.clone(), angle.clone()], &traj)?;
            for e in &report.entries {
                println!("{method:17} {periods:>4} periods  {:6} relative drift {:.3e}", e.integral, e.relative);
            }
        }
    }

    let est = convergence_order(sys, &[1.0, 0.3], Method::Rk4, sys.hamiltonian(), 10.0, 0.1)?;
    println!("rk4 energy drift {:.3e} -> {:.3e}, order {:.2}", est.drift_h, est.drift_half, est.order);
    Ok(())
}
