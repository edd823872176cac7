use hamiltonian_noether::cli::{cmd_simulate, load_example, SimulateOptions};
use hamiltonian_noether::expr::{is_zero, simplify, Expr};
use hamiltonian_noether::hamiltonian::{
    check_divergence_invariance, check_invariance, evolutionary_form, first_integral,
    hamiltonian_field_divergence, hamiltonian_vector_field, integral_expression, verify_first_integral,
};
use hamiltonian_noether::numerics::{compile, drift, integrate, IntegratorConfig, Method, Monitored};

/// With `A = 2 I1` and `B = I2` every orbit lies on
/// `A q^2 + (A t - B)^2 + 1 = 0`.
#[test]
fn example1_orbits_lie_on_conics() {
    let spec = load_example("example1").unwrap();
    let sys = &spec.system;
    let i1 = first_integral(sys, &spec.symmetries[0].symmetry, None, false).unwrap().expr;
    let i2 = first_integral(sys, &spec.symmetries[1].symmetry, None, false).unwrap().expr;
    let (a, b) = (Expr::int(2) * i1, i2);
    let conic = &a * Expr::q(1).powi(2) + (&a * Expr::t() - &b).powi(2) + Expr::one();
    assert!(is_zero(&conic, &sys.zero_test()).is_zero());

    let traj = integrate(sys, &[1.0, 0.0], &IntegratorConfig::new(Method::Rk4, 1e-3, 0.0, 1.0)).unwrap();
    let f = compile(&conic, 1, &sys.parameter_values()).unwrap();
    for k in 0..traj.len() {
        assert!(f.eval(&traj.point(k)).unwrap().abs() < 1e-9);
        // the orbit through (1, 0) is q = sqrt(1 + t^2)
        let t = traj.times[k];
        assert!((traj.states[k][0] - (1.0 + t * t).sqrt()).abs() < 1e-10);
    }
}

#[test]
fn kepler_circular_orbit_conserves_everything() {
    let spec = load_example("kepler3").unwrap();
    let opts = SimulateOptions::new(vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0], Method::Rk4, 1e-2, 0.0, 10.0);
    let (report, _) = cmd_simulate(&spec, &opts).unwrap();
    let drift = report.drift.unwrap();
    assert_eq!(drift.iter().filter(|d| !d.integral.starts_with("relation:")).count(), 7);
    for d in &drift {
        assert!(d.relative <= 1e-8, "{}: {:e}", d.integral, d.relative);
    }
}

#[test]
fn eccentric_kepler_orbit_halving() {
    let spec = load_example("kepler2").unwrap();
    let sys = &spec.system;
    let a1 = first_integral(sys, &spec.symmetries[3].symmetry, spec.symmetries[3].v.as_ref(), false).unwrap();
    let monitored = [Monitored::new("A1", a1.expr)];
    let run = |h: f64| {
        let traj = integrate(sys, &[1.0, 0.0, 0.0, 0.7], &IntegratorConfig::new(Method::Rk4, h, 0.0, 20.0)).unwrap();
        drift(sys, &monitored, &traj).unwrap().entries[0].relative
    };
    let (coarse, fine) = (run(0.04), run(0.02));
    assert!(coarse / fine >= 12.0, "{coarse:e} {fine:e}");
}

/// `X_I` leaves the action invariant only up to the divergence
/// `p ∂I/∂p − I`, and with that term it gives back `I`.
#[test]
fn hamiltonian_vector_fields_reproduce_their_integral() {
    let spec = load_example("kepler3").unwrap();
    let sys = &spec.system;
    for entry in &spec.symmetries {
        let Ok(i) = first_integral(sys, &entry.symmetry, entry.v.as_ref(), false) else { continue };
        let x = hamiltonian_vector_field(sys, &i.expr).unwrap();
        let v = hamiltonian_field_divergence(sys, &i.expr);
        assert!(check_divergence_invariance(sys, &x, &v).unwrap().is_zero(), "{}", entry.symmetry.name);
        let back = integral_expression(sys, &x, Some(&v));
        assert!(is_zero(&(back - &i.expr), &sys.zero_test()).is_zero());
    }
    // the angular momenta are linear in p, so no divergence is needed
    let l3 = first_integral(sys, &spec.symmetries[4].symmetry, None, false).unwrap();
    let x = hamiltonian_vector_field(sys, &l3.expr).unwrap();
    assert!(check_invariance(sys, &x).unwrap().is_zero());
    // the Runge-Lenz components are quadratic in p, so one is
    let a1 = first_integral(sys, &spec.symmetries[5].symmetry, spec.symmetries[5].v.as_ref(), false).unwrap();
    let x = hamiltonian_vector_field(sys, &a1.expr).unwrap();
    assert!(check_invariance(sys, &x).unwrap().is_nonzero());
}

#[test]
fn evolutionary_form_keeps_the_integral() {
    let spec = load_example("example1").unwrap();
    let sys = &spec.system;
    let x2 = &spec.symmetries[1].symmetry;
    let ev = evolutionary_form(sys, x2).unwrap();
    let original = first_integral(sys, x2, None, false).unwrap().expr;
    let v = hamiltonian_field_divergence(sys, &original);
    let shifted = integral_expression(sys, &ev, Some(&v));
    assert!(verify_first_integral(sys, &shifted).unwrap().is_zero());
    assert!(simplify(&(shifted - original)).is_zero());
}
