//! Describe a system in a TOML file and run the full report on it.
//!
//! ```bash
//! cargo run --example system_file
//! ```

use hamiltonian_noether::cli::{cmd_check, cmd_simulate, SimulateOptions};
use hamiltonian_noether::numerics::Method;
use hamiltonian_noether::parser::{format_system_file, parse_system_file};

const FREE_FALL: &str = r#"
[system]
n = 1
hamiltonian = "p1^2/2 + g*q1"
parameters = { g = "981/100" }

[[symmetry]]
name = "shift"
xi = "1"
eta = ["0"]
zeta = ["0"]
integral = "E"

[[symmetry]]
name = "galilei"
xi = "0"
eta = ["t"]
zeta = ["1"]
integral = "G"
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = parse_system_file(FREE_FALL)?;
    println!("{}", format_system_file(&spec));
    print!("{}", cmd_check(&spec, None)?);

    let opts = SimulateOptions::new(vec![0.0, 2.0], Method::Rk4, 0.01, 0.0, 1.0);
    let (report, traj) = cmd_simulate(&spec, &opts)?;
    if let Some(drift) = &report.drift {
        for d in drift {
            println!("{}: {:.2e}", d.integral, d.relative);
        }
    }
    println!("final state {:?}", traj.point(traj.len() - 1));
    Ok(())
}
