//! Randomized check of the variational identities behind the symmetry
//! conditions, and what a broken identity looks like.
//!
//! ```bash
//! cargo run --example identities
//! ```

use hamiltonian_noether::cli::cmd_identity_check;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for n in 1..=3 {
        let report = cmd_identity_check(n, 3, 10, 42, false)?;
        print!("{report}");
    }
    let broken = cmd_identity_check(1, 2, 2, 42, true)?;
    println!("with a sign flipped:");
    print!("{broken}");
    Ok(())
}
