use std::collections::BTreeMap;

use super::invariance::{check_divergence_invariance, check_invariance, d, on_shell, HamiltonianError};
use super::system::{HamiltonianSystem, PointSymmetry, SystemError};
use crate::expr::{evaluate, is_zero, partial_diff, Expr, Rational, Symbol, ZeroVerdict};

/// A function of `(t, q, p)` together with the verdict on `D(I) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstIntegral {
    pub name: String,
    pub expr: Expr,
    pub verified: ZeroVerdict,
}

/// `I = pᵢ ηⁱ − ξ H − V` without any invariance check.
pub fn integral_expression(sys: &HamiltonianSystem, x: &PointSymmetry, v: Option<&Expr>) -> Expr {
    let mut terms: Vec<Expr> = (0..sys.n()).map(|i| Expr::p(i + 1) * &x.eta[i]).collect();
    terms.push(-(&x.xi * sys.hamiltonian()));
    if let Some(v) = v {
        terms.push(-v);
    }
    Expr::sum(terms)
}

/// First integral generated by `x` (with divergence term `v`, if any).
///
/// Refuses to build `I` when the invariance check fails unless `force` is
/// set; the returned integral always carries its own verification verdict.
pub fn first_integral(
    sys: &HamiltonianSystem,
    x: &PointSymmetry,
    v: Option<&Expr>,
    force: bool,
) -> Result<FirstIntegral, HamiltonianError> {
    let verdict = match v {
        Some(v) => check_divergence_invariance(sys, x, v)?,
        None => check_invariance(sys, x)?,
    };
    if !verdict.is_zero() && !force {
        return Err(HamiltonianError::NotInvariant { symmetry: x.name.clone(), verdict });
    }
    let expr = integral_expression(sys, x, v);
    let verified = verify_first_integral(sys, &expr)?;
    Ok(FirstIntegral { name: x.name.clone(), expr, verified })
}

/// Whether `D(I)` vanishes on the solutions.
pub fn verify_first_integral(sys: &HamiltonianSystem, i: &Expr) -> Result<ZeroVerdict, SystemError> {
    sys.check_phase_expr(i, "integral")?;
    Ok(is_zero(&on_shell(sys, &d(i)), &sys.zero_test()))
}

/// `X_I = ∂I/∂pᵢ ∂qⁱ − ∂I/∂qⁱ ∂pᵢ`.
pub fn hamiltonian_vector_field(sys: &HamiltonianSystem, i: &Expr) -> Result<PointSymmetry, SystemError> {
    sys.check_phase_expr(i, "integral")?;
    let n = sys.n();
    Ok(PointSymmetry::new(
        "X_I",
        Expr::zero(),
        (1..=n).map(|k| partial_diff(i, &Symbol::Momentum(k))).collect(),
        (1..=n).map(|k| -partial_diff(i, &Symbol::Coord(k))).collect(),
    ))
}

/// The divergence term under which `X_I` reproduces `I`:
/// `V = pᵢ ∂I/∂pᵢ − I`.
pub fn hamiltonian_field_divergence(sys: &HamiltonianSystem, i: &Expr) -> Expr {
    let terms = (1..=sys.n()).map(|k| Expr::p(k) * partial_diff(i, &Symbol::Momentum(k)));
    Expr::sum(terms) - i
}

/// Representative with `ξ = 0`, equivalent to `x` on the solutions.
pub fn evolutionary_form(sys: &HamiltonianSystem, x: &PointSymmetry) -> Result<PointSymmetry, SystemError> {
    x.validate(sys)?;
    let h = sys.hamiltonian();
    let n = sys.n();
    let eta = (1..=n)
        .map(|k| &x.eta[k - 1] - &x.xi * partial_diff(h, &Symbol::Momentum(k)))
        .collect();
    let zeta = (1..=n)
        .map(|k| &x.zeta[k - 1] + &x.xi * partial_diff(h, &Symbol::Coord(k)))
        .collect();
    Ok(PointSymmetry::new(x.name.clone(), Expr::zero(), eta, zeta))
}

/// Checks `relation = constant` after replacing integral names by their
/// expressions. Names are parameter symbols in `relation`.
pub fn relation_check(
    sys: &HamiltonianSystem,
    integrals: &BTreeMap<String, Expr>,
    relation: &Expr,
    constant: &Rational,
) -> Result<ZeroVerdict, HamiltonianError> {
    let mut map = BTreeMap::new();
    for s in relation.free_symbols() {
        if let Symbol::Parameter(name) = &s {
            match integrals.get(name.as_ref()) {
                Some(e) => {
                    map.insert(s.clone(), e.clone());
                }
                None if sys.parameters().contains_key(name.as_ref()) => {}
                None => return Err(HamiltonianError::UnknownIntegral(name.to_string())),
            }
        }
    }
    let e = relation.substitute(&map) - Expr::constant(constant.clone());
    sys.check_phase_expr(&e, "relation")?;
    Ok(is_zero(&e, &sys.zero_test()))
}

const RANK_TOLERANCE: f64 = 1e-8;
const RANK_POINTS: usize = 8;
const MIN_RANK_POINTS: usize = 5;

/// Numerical rank of `[r₀; r₁; ...]` by Gaussian elimination with partial
/// pivoting after scaling each row to unit max-norm.
pub fn numeric_rank(mut rows: Vec<Vec<f64>>, tolerance: f64) -> usize {
    for row in &mut rows {
        let scale = row.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale > 0.0 {
            row.iter_mut().for_each(|v| *v /= scale);
        }
    }
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows.len() {
            break;
        }
        let pivot = (rank..rows.len())
            .max_by(|&a, &b| rows[a][col].abs().total_cmp(&rows[b][col].abs()))
            .unwrap();
        if rows[pivot][col].abs() <= tolerance {
            continue;
        }
        rows.swap(rank, pivot);
        let (head, tail) = rows.split_at_mut(rank + 1);
        let pivot_row = &head[rank];
        for row in tail {
            let factor = row[col] / pivot_row[col];
            for (x, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= factor * p;
            }
        }
        rank += 1;
    }
    rank
}

/// Largest rank of the Jacobian `∂(I₁, …, I_m)/∂(q, p)` over several
/// random non-singular points.
pub fn functional_independence(
    sys: &HamiltonianSystem,
    integrals: &[Expr],
    seed: u64,
) -> Result<usize, HamiltonianError> {
    for (k, i) in integrals.iter().enumerate() {
        sys.check_phase_expr(i, &format!("integral[{k}]"))?;
    }
    let n = sys.n();
    let vars: Vec<Symbol> = (1..=n).map(Symbol::Coord).chain((1..=n).map(Symbol::Momentum)).collect();
    let jacobian: Vec<Vec<Expr>> = integrals
        .iter()
        .map(|i| vars.iter().map(|v| partial_diff(i, v)).collect())
        .collect();
    let mut symbols = vars.clone();
    symbols.push(Symbol::Time);

    let test = sys.zero_test().with_seed(seed);
    let mut best = 0;
    let mut valid = 0;
    let mut attempts = 0;
    for candidate in test.sampler(&symbols) {
        attempts += 1;
        let Some(point) = candidate else { continue };
        let rows: Result<Vec<Vec<f64>>, _> = jacobian
            .iter()
            .map(|row| row.iter().map(|e| evaluate(e, &point)).collect())
            .collect();
        let Ok(rows) = rows else { continue };
        best = best.max(numeric_rank(rows, RANK_TOLERANCE));
        valid += 1;
        if valid == RANK_POINTS {
            break;
        }
    }
    if valid < MIN_RANK_POINTS {
        return Err(HamiltonianError::Sampling { attempts });
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::simplify;

    fn example1() -> HamiltonianSystem {
        let (q, p) = (Expr::q(1), Expr::p(1));
        let h = (p.powi(2) + q.powi(-2)) / Expr::int(2);
        HamiltonianSystem::new(1, h).unwrap().with_singularities(vec![q]).unwrap()
    }

    fn x2() -> PointSymmetry {
        let (t, q, p) = (Expr::t(), Expr::q(1), Expr::p(1));
        PointSymmetry::new("X2", Expr::int(2) * t, vec![q], vec![-p])
    }

    #[test]
    fn dilation_integral() {
        let sys = example1();
        let i = first_integral(&sys, &x2(), None, false).unwrap();
        let (t, q, p) = (Expr::t(), Expr::q(1), Expr::p(1));
        let expected = &p * &q - t * (p.powi(2) + q.powi(-2));
        assert!(simplify(&(&i.expr - expected)).is_zero());
        assert!(i.verified.is_zero());
    }

    #[test]
    fn refuses_without_invariance() {
        let sys = example1();
        let x = PointSymmetry::new("bad", Expr::zero(), vec![Expr::one()], vec![Expr::zero()]);
        let err = first_integral(&sys, &x, None, false).unwrap_err();
        assert!(matches!(err, HamiltonianError::NotInvariant { .. }));
        let forced = first_integral(&sys, &x, None, true).unwrap();
        assert!(forced.verified.is_nonzero());
    }

    #[test]
    fn free_particle_position_is_not_conserved() {
        let sys = HamiltonianSystem::new(1, Expr::p(1).powi(2) / Expr::int(2)).unwrap();
        assert!(verify_first_integral(&sys, &Expr::q(1)).unwrap().is_nonzero());
        assert!(verify_first_integral(&sys, &Expr::p(1)).unwrap().is_zero());
        assert!(verify_first_integral(&sys, &Expr::dq(1)).is_err());
    }

    #[test]
    fn evolutionary_forms() {
        let sys = example1();
        let ev = evolutionary_form(&sys, &x2()).unwrap();
        let (t, q, p) = (Expr::t(), Expr::q(1), Expr::p(1));
        assert!(ev.xi.is_zero());
        assert!(simplify(&(&ev.eta[0] - (&q - Expr::int(2) * &t * &p))).is_zero());
        assert!(simplify(&(&ev.zeta[0] + (&p + Expr::int(2) * &t * q.powi(-3)))).is_zero());
    }

    #[test]
    fn vector_field_of_energy() {
        let sys = example1();
        let x = hamiltonian_vector_field(&sys, &-sys.hamiltonian().clone()).unwrap();
        assert_eq!(x.eta[0], -Expr::p(1));
        assert_eq!(x.zeta[0], -Expr::q(1).powi(-3));
        let c = hamiltonian_vector_field(&sys, &Expr::int(7)).unwrap();
        assert!(c.eta[0].is_zero() && c.zeta[0].is_zero());
    }

    #[test]
    fn rank_of_simple_matrices() {
        assert_eq!(numeric_rank(vec![vec![1.0, 2.0], vec![2.0, 4.0]], 1e-8), 1);
        assert_eq!(numeric_rank(vec![vec![1.0, 0.0], vec![0.0, 1e-3]], 1e-8), 2);
        assert_eq!(numeric_rank(vec![vec![0.0, 0.0]], 1e-8), 0);
        let sys = example1();
        assert_eq!(functional_independence(&sys, &[sys.hamiltonian().clone()], 1).unwrap(), 1);
    }

    #[test]
    fn unknown_name_in_relation() {
        let sys = example1();
        let integrals = BTreeMap::from([("I1".to_string(), sys.hamiltonian().clone())]);
        let rel = Expr::param("I2");
        let err = relation_check(&sys, &integrals, &rel, &Rational::from_integer(0.into()));
        assert_eq!(err, Err(HamiltonianError::UnknownIntegral("I2".into())));
    }
}
