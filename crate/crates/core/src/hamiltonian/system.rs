use std::collections::BTreeMap;

use num::ToPrimitive;
use thiserror::Error;

use crate::expr::{Expr, Rational, Singularities, Symbol, ZeroTest};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SystemError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("{what} contains jet symbol `{symbol}`")]
    JetSymbol { what: String, symbol: Symbol },
    #[error("{what} refers to `{symbol}` but the system has dimension {n}")]
    IndexOutOfRange { what: String, symbol: Symbol, n: usize },
    #[error("{what} uses parameter `{name}` which has no value")]
    UnboundParameter { what: String, name: String },
    #[error("symmetry `{name}` has {found} {field} entries, expected {expected}")]
    Arity { name: String, field: &'static str, found: usize, expected: usize },
}

/// A canonical Hamiltonian system `q̇ = ∂H/∂p`, `ṗ = −∂H/∂q`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSystem {
    n: usize,
    hamiltonian: Expr,
    parameters: BTreeMap<String, Rational>,
    singularities: Vec<Expr>,
    seed: u64,
    tolerance: f64,
}

impl HamiltonianSystem {
    /// A system without parameters.
    pub fn new(n: usize, hamiltonian: Expr) -> Result<Self, SystemError> {
        Self::with_parameters(n, hamiltonian, BTreeMap::new())
    }

    pub fn with_parameters(
        n: usize,
        hamiltonian: Expr,
        parameters: BTreeMap<String, Rational>,
    ) -> Result<Self, SystemError> {
        if n == 0 {
            return Err(SystemError::ZeroDimension);
        }
        let sys = HamiltonianSystem {
            n,
            hamiltonian,
            parameters,
            singularities: Vec::new(),
            seed: 0,
            tolerance: 1e-9,
        };
        sys.check_phase_expr(&sys.hamiltonian, "hamiltonian")?;
        Ok(sys)
    }

    /// Declares expressions whose zero sets are excluded when sampling.
    pub fn with_singularities(mut self, exprs: Vec<Expr>) -> Result<Self, SystemError> {
        for (i, g) in exprs.iter().enumerate() {
            self.check_phase_expr(g, &format!("singular[{i}]"))?;
        }
        self.singularities = exprs;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn hamiltonian(&self) -> &Expr {
        &self.hamiltonian
    }

    pub fn parameters(&self) -> &BTreeMap<String, Rational> {
        &self.parameters
    }

    pub fn singularities(&self) -> &[Expr] {
        &self.singularities
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Exact values of the parameters, keyed by symbol.
    pub fn parameter_substitution(&self) -> BTreeMap<Symbol, Expr> {
        self.parameters
            .iter()
            .map(|(k, v)| (Symbol::param(k), Expr::constant(v.clone())))
            .collect()
    }

    pub fn parameter_values(&self) -> BTreeMap<Symbol, f64> {
        self.parameters
            .iter()
            .map(|(k, v)| (Symbol::param(k), v.to_f64().unwrap_or(f64::NAN)))
            .collect()
    }

    /// The zero test configured for this system: its seed, tolerance,
    /// parameter values and singularities.
    pub fn zero_test(&self) -> ZeroTest {
        ZeroTest {
            seed: self.seed,
            tolerance: self.tolerance,
            fixed: self.parameter_values(),
            singularities: Singularities::new(self.singularities.clone()),
            ..ZeroTest::default()
        }
    }

    /// Checks that `e` is a function of `(t, q, p)` and bound parameters.
    pub fn check_phase_expr(&self, e: &Expr, what: &str) -> Result<(), SystemError> {
        for s in e.free_symbols() {
            if s.jet_order() > 0 {
                return Err(SystemError::JetSymbol { what: what.into(), symbol: s });
            }
            if s.index().is_some_and(|i| i == 0 || i > self.n) {
                return Err(SystemError::IndexOutOfRange { what: what.into(), symbol: s, n: self.n });
            }
            if let Symbol::Parameter(name) = &s {
                if !self.parameters.contains_key(name.as_ref()) {
                    return Err(SystemError::UnboundParameter {
                        what: what.into(),
                        name: name.to_string(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// A Lie point symmetry `ξ ∂t + ηⁱ ∂qⁱ + ζᵢ ∂pᵢ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSymmetry {
    pub name: String,
    pub xi: Expr,
    pub eta: Vec<Expr>,
    pub zeta: Vec<Expr>,
}

impl PointSymmetry {
    pub fn new(name: impl Into<String>, xi: Expr, eta: Vec<Expr>, zeta: Vec<Expr>) -> Self {
        PointSymmetry { name: name.into(), xi, eta, zeta }
    }

    /// The zero field in dimension `n`.
    pub fn zero(n: usize) -> Self {
        PointSymmetry::new("0", Expr::zero(), vec![Expr::zero(); n], vec![Expr::zero(); n])
    }

    /// Checks arity and that all coefficients are functions of `(t, q, p)`.
    pub fn validate(&self, sys: &HamiltonianSystem) -> Result<(), SystemError> {
        for (field, list) in [("eta", &self.eta), ("zeta", &self.zeta)] {
            if list.len() != sys.n() {
                return Err(SystemError::Arity {
                    name: self.name.clone(),
                    field,
                    found: list.len(),
                    expected: sys.n(),
                });
            }
        }
        sys.check_phase_expr(&self.xi, &format!("{}.xi", self.name))?;
        for (i, e) in self.eta.iter().enumerate() {
            sys.check_phase_expr(e, &format!("{}.eta[{i}]", self.name))?;
        }
        for (i, z) in self.zeta.iter().enumerate() {
            sys.check_phase_expr(z, &format!("{}.zeta[{i}]", self.name))?;
        }
        Ok(())
    }

    /// `X(f) = ξ ∂f/∂t + ηⁱ ∂f/∂qⁱ + ζᵢ ∂f/∂pᵢ`.
    pub fn apply(&self, f: &Expr) -> Expr {
        use crate::expr::partial_diff;
        let mut terms = vec![&self.xi * partial_diff(f, &Symbol::Time)];
        for (i, e) in self.eta.iter().enumerate() {
            terms.push(e * partial_diff(f, &Symbol::Coord(i + 1)));
        }
        for (i, z) in self.zeta.iter().enumerate() {
            terms.push(z * partial_diff(f, &Symbol::Momentum(i + 1)));
        }
        Expr::sum(terms)
    }
}

/// How a divergence term was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    UserSupplied,
    Synthesized,
}

/// A function `V(t, q, p)` with `residual = D(V)` on the solutions.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceTerm {
    pub v: Expr,
    pub provenance: Provenance,
}
