//! Invariance of the Hamiltonian action, divergence terms, first integrals
//! and the identities relating them.

mod identities;
mod integral;
mod invariance;
mod system;

pub use identities::{
    equation_invariance_direct, identity_suite, lemma1_residual, lemma2_residuals, lemma2_residuals_corrupted,
    random_pair, random_polynomial, theorem4_conditions, variational_derivative_p, variational_derivative_q,
    IdentityCase,
};
pub use integral::{
    evolutionary_form, first_integral, functional_independence, hamiltonian_field_divergence,
    hamiltonian_vector_field, integral_expression, numeric_rank, relation_check, verify_first_integral,
    FirstIntegral,
};
pub use invariance::{
    canonical_equations, check_divergence_invariance, check_invariance, find_divergence_term, invariance_residual,
    on_shell, DivergenceSearch, HamiltonianError,
};
pub use system::{DivergenceTerm, HamiltonianSystem, PointSymmetry, Provenance, SystemError};

use crate::expr::{Expr, ZeroVerdict};

/// Everything known about one symmetry of one system.
#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    pub residual_off_shell: Expr,
    pub residual_on_shell: Expr,
    pub verdict_theorem1: ZeroVerdict,
    /// Search result when no divergence term was supplied.
    pub search: Option<DivergenceSearch>,
    /// The divergence term in use (supplied or synthesized) and its verdict.
    pub divergence: Option<(DivergenceTerm, ZeroVerdict)>,
    pub theorem4_verdicts: Vec<ZeroVerdict>,
    pub direct_invariance_verdicts: Vec<ZeroVerdict>,
}

impl InvarianceReport {
    /// Whether the action is invariant, possibly up to a divergence.
    pub fn admits_integral(&self) -> bool {
        self.verdict_theorem1.is_zero() || self.divergence.as_ref().is_some_and(|(_, v)| v.is_zero())
    }

    /// The divergence term to use when building the first integral.
    pub fn divergence_term(&self) -> Option<&Expr> {
        if self.verdict_theorem1.is_zero() {
            return None;
        }
        self.divergence.as_ref().filter(|(_, v)| v.is_zero()).map(|(t, _)| &t.v)
    }
}

/// Runs every invariance check on `x`. When `v` is absent and the action is
/// not invariant, a divergence term is searched for.
pub fn analyze(
    sys: &HamiltonianSystem,
    x: &PointSymmetry,
    v: Option<&Expr>,
) -> Result<InvarianceReport, SystemError> {
    let residual_off_shell = invariance_residual(sys, x)?;
    let residual_on_shell = on_shell(sys, &residual_off_shell);
    let verdict_theorem1 = crate::expr::is_zero(&residual_on_shell, &sys.zero_test());
    let (search, divergence) = match v {
        Some(v) => {
            let term = DivergenceTerm { v: v.clone(), provenance: Provenance::UserSupplied };
            let verdict = check_divergence_invariance(sys, x, v)?;
            (None, Some((term, verdict)))
        }
        None if verdict_theorem1.is_zero() => (None, None),
        None => {
            let search = find_divergence_term(sys, x)?;
            let divergence = match search.term() {
                Some(term) => Some((term.clone(), check_divergence_invariance(sys, x, &term.v)?)),
                None => None,
            };
            (Some(search), divergence)
        }
    };
    Ok(InvarianceReport {
        residual_off_shell,
        residual_on_shell,
        verdict_theorem1,
        search,
        divergence,
        theorem4_verdicts: theorem4_conditions(sys, x)?,
        direct_invariance_verdicts: equation_invariance_direct(sys, x)?,
    })
}
