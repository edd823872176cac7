//! Energy, angular momentum and the Runge-Lenz vector of spatial Kepler
//! motion, the relations between them and their functional rank.
//!
//! ```bash
//! cargo run --example kepler_integrals
//! ```

use std::collections::BTreeMap;

use hamiltonian_noether::cli::load_example;
use hamiltonian_noether::hamiltonian::{first_integral, functional_independence, relation_check};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = load_example("kepler3")?;
    let sys = &spec.system;
    let mut integrals = BTreeMap::new();
    for entry in &spec.symmetries {
        match first_integral(sys, &entry.symmetry, entry.v.as_ref(), false) {
            Ok(i) => {
                println!("{:3} from {:3}: {}", entry.integral_name(), entry.symmetry.name, i.verified.status());
                integrals.insert(entry.integral_name().to_string(), i.expr);
            }
            Err(e) => println!("{:3}: {e}", entry.symmetry.name),
        }
    }
    for r in &spec.relations {
        let verdict = relation_check(sys, &integrals, &r.expr, &r.equals)?;
        println!("{} = {}: {}", r.expr, r.equals, verdict.status());
    }
    let all: Vec<_> = integrals.values().cloned().collect();
    println!("{} integrals, functional rank {}", all.len(), functional_independence(sys, &all, 7)?);
    Ok(())
}
