use std::collections::BTreeMap;

use thiserror::Error;

use super::system::{DivergenceTerm, HamiltonianSystem, PointSymmetry, Provenance, SystemError};
use crate::expr::{
    is_zero, partial_diff, simplify, total_derivative, Expr, Symbol, ZeroVerdict,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HamiltonianError {
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("symmetry `{symmetry}` does not leave the action invariant ({})", .verdict.status())]
    NotInvariant { symmetry: String, verdict: ZeroVerdict },
    #[error("relation refers to unknown integral `{0}`")]
    UnknownIntegral(String),
    #[error("no valid sample point found after {attempts} attempts")]
    Sampling { attempts: usize },
}

/// Total derivative of a jet-free or first-order expression.
pub(crate) fn d(e: &Expr) -> Expr {
    total_derivative(e).expect("argument has jet order at most one")
}

/// Right-hand sides `(∂H/∂pᵢ, −∂H/∂qⁱ)` of the canonical equations.
pub fn canonical_equations(sys: &HamiltonianSystem) -> (Vec<Expr>, Vec<Expr>) {
    let h = sys.hamiltonian();
    let dq = (1..=sys.n()).map(|i| partial_diff(h, &Symbol::Momentum(i))).collect();
    let dp = (1..=sys.n()).map(|i| -partial_diff(h, &Symbol::Coord(i))).collect();
    (dq, dp)
}

fn shell_map(sys: &HamiltonianSystem, second_order: bool) -> BTreeMap<Symbol, Expr> {
    let (dq, dp) = canonical_equations(sys);
    let mut map = BTreeMap::new();
    for (i, (f, g)) in dq.iter().zip(&dp).enumerate() {
        map.insert(Symbol::CoordDeriv(i + 1, 1), f.clone());
        map.insert(Symbol::MomentumDeriv(i + 1, 1), g.clone());
    }
    if second_order {
        let first = map.clone();
        for (i, (f, g)) in dq.iter().zip(&dp).enumerate() {
            map.insert(Symbol::CoordDeriv(i + 1, 2), d(f).substitute(&first));
            map.insert(Symbol::MomentumDeriv(i + 1, 2), d(g).substitute(&first));
        }
    }
    map
}

/// Restricts `e` to the solutions of the canonical equations: jet symbols
/// are replaced by the right-hand sides and their differential
/// consequences. The result contains no jet symbols.
pub fn on_shell(sys: &HamiltonianSystem, e: &Expr) -> Expr {
    let order = e.jet_order();
    if order == 0 {
        return e.clone();
    }
    e.substitute(&shell_map(sys, order >= 2))
}

/// `ζᵢ q̇ⁱ + pᵢ D(ηⁱ) − X(H) − H D(ξ)`, off-shell.
pub fn invariance_residual(sys: &HamiltonianSystem, x: &PointSymmetry) -> Result<Expr, SystemError> {
    x.validate(sys)?;
    let h = sys.hamiltonian();
    let mut terms = Vec::with_capacity(2 * sys.n() + 2);
    for i in 0..sys.n() {
        terms.push(&x.zeta[i] * Expr::dq(i + 1));
        terms.push(Expr::p(i + 1) * d(&x.eta[i]));
    }
    terms.push(-x.apply(h));
    terms.push(-(h * d(&x.xi)));
    Ok(Expr::sum(terms))
}

/// Invariance of the Hamiltonian action on the solutions.
pub fn check_invariance(sys: &HamiltonianSystem, x: &PointSymmetry) -> Result<ZeroVerdict, SystemError> {
    let r = invariance_residual(sys, x)?;
    Ok(is_zero(&on_shell(sys, &r), &sys.zero_test()))
}

/// Invariance up to the total derivative of `v`, on the solutions.
pub fn check_divergence_invariance(
    sys: &HamiltonianSystem,
    x: &PointSymmetry,
    v: &Expr,
) -> Result<ZeroVerdict, SystemError> {
    sys.check_phase_expr(v, &format!("{}.v", x.name))?;
    let r = invariance_residual(sys, x)? - d(v);
    Ok(is_zero(&on_shell(sys, &r), &sys.zero_test()))
}

/// Outcome of the search for a divergence term.
#[derive(Debug, Clone, PartialEq)]
pub enum DivergenceSearch {
    Found(DivergenceTerm),
    /// A compatibility condition between the coefficients fails, so no
    /// `V(t, q, p)` can match the residual.
    NoVExists { condition: String, verdict: ZeroVerdict },
    /// The coefficients are compatible (or undecided) but not integrable
    /// by monomial antidifferentiation.
    NotSynthesizable { reason: String },
}

impl DivergenceSearch {
    pub fn term(&self) -> Option<&DivergenceTerm> {
        match self {
            DivergenceSearch::Found(t) => Some(t),
            _ => None,
        }
    }

    pub fn status(&self) -> &'static str {
        match self {
            DivergenceSearch::Found(_) => "found",
            DivergenceSearch::NoVExists { .. } => "no_v_exists",
            DivergenceSearch::NotSynthesizable { .. } => "not_synthesizable",
        }
    }
}

/// Writes the off-shell residual as `A + Bᵢ q̇ⁱ + Cⁱ ṗᵢ` and looks for `V`
/// with `∂V/∂t = A`, `∂V/∂qⁱ = Bᵢ`, `∂V/∂pᵢ = Cⁱ`.
pub fn find_divergence_term(
    sys: &HamiltonianSystem,
    x: &PointSymmetry,
) -> Result<DivergenceSearch, SystemError> {
    let n = sys.n();
    let r = simplify(&invariance_residual(sys, x)?);
    let test = sys.zero_test();
    if r.is_zero() {
        return Ok(DivergenceSearch::Found(DivergenceTerm {
            v: Expr::zero(),
            provenance: Provenance::Synthesized,
        }));
    }

    // (variable, required partial derivative of V)
    let mut targets: Vec<(Symbol, Expr)> = Vec::with_capacity(2 * n + 1);
    let mut jets = BTreeMap::new();
    for i in 1..=n {
        targets.push((Symbol::Coord(i), simplify(&partial_diff(&r, &Symbol::CoordDeriv(i, 1)))));
        jets.insert(Symbol::CoordDeriv(i, 1), Expr::zero());
    }
    for i in 1..=n {
        targets.push((Symbol::Momentum(i), simplify(&partial_diff(&r, &Symbol::MomentumDeriv(i, 1)))));
        jets.insert(Symbol::MomentumDeriv(i, 1), Expr::zero());
    }
    targets.push((Symbol::Time, simplify(&r.substitute(&jets))));

    if targets.iter().any(|(_, g)| g.jet_order() > 0) {
        return Ok(DivergenceSearch::NotSynthesizable {
            reason: "residual is not affine in the jet symbols".into(),
        });
    }

    let mut undecided = false;
    for a in 0..targets.len() {
        for b in a + 1..targets.len() {
            let (xa, ga) = &targets[a];
            let (xb, gb) = &targets[b];
            let cross = partial_diff(ga, xb) - partial_diff(gb, xa);
            let verdict = is_zero(&cross, &test);
            if verdict.is_nonzero() {
                let condition = format!("d/d{xb} of the {xa} coefficient equals d/d{xa} of the {xb} coefficient");
                return Ok(DivergenceSearch::NoVExists { condition, verdict });
            }
            undecided |= !verdict.is_zero();
        }
    }

    let mut v = Expr::zero();
    for (var, target) in &targets {
        let remaining = simplify(&(target - partial_diff(&v, var)));
        if remaining.is_zero() {
            continue;
        }
        match crate::expr::antiderivative(&remaining, var) {
            Some(piece) => v = v + piece,
            None => {
                let reason = if undecided {
                    "compatibility undecided and coefficients not polynomial".to_string()
                } else {
                    format!("coefficient of d{var} is not a polynomial in {var}")
                };
                return Ok(DivergenceSearch::NotSynthesizable { reason });
            }
        }
    }
    let v = simplify(&v);
    let check = is_zero(&(&r - d(&v)), &test);
    if !check.is_zero() {
        return Ok(DivergenceSearch::NotSynthesizable {
            reason: format!("candidate V fails verification ({})", check.status()),
        });
    }
    Ok(DivergenceSearch::Found(DivergenceTerm { v, provenance: Provenance::Synthesized }))
}
