use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::invariance::{d, invariance_residual, on_shell};
use super::system::{HamiltonianSystem, PointSymmetry, SystemError};
use crate::expr::{
    is_zero, partial_diff, total_derivative, Expr, ExprError, Symbol, ZeroTest, ZeroVerdict,
};

/// `δe/δpⱼ = ∂e/∂pⱼ − D(∂e/∂ṗⱼ)`.
pub fn variational_derivative_p(e: &Expr, j: usize) -> Result<Expr, ExprError> {
    let inner = partial_diff(e, &Symbol::MomentumDeriv(j, 1));
    Ok(partial_diff(e, &Symbol::Momentum(j)) - total_derivative(&inner)?)
}

/// `δe/δqʲ = ∂e/∂qʲ − D(∂e/∂q̇ʲ)`.
pub fn variational_derivative_q(e: &Expr, j: usize) -> Result<Expr, ExprError> {
    let inner = partial_diff(e, &Symbol::CoordDeriv(j, 1));
    Ok(partial_diff(e, &Symbol::Coord(j)) - total_derivative(&inner)?)
}

fn delta_p(e: &Expr, j: usize) -> Expr {
    variational_derivative_p(e, j).expect("first-order argument")
}

fn delta_q(e: &Expr, j: usize) -> Expr {
    variational_derivative_q(e, j).expect("first-order argument")
}

struct Pieces {
    h_t: Expr,
    h_q: Vec<Expr>,
    h_p: Vec<Expr>,
    dh: Expr,
    dxi: Expr,
}

impl Pieces {
    fn new(sys: &HamiltonianSystem, x: &PointSymmetry) -> Self {
        let h = sys.hamiltonian();
        let n = sys.n();
        Pieces {
            h_t: partial_diff(h, &Symbol::Time),
            h_q: (1..=n).map(|i| partial_diff(h, &Symbol::Coord(i))).collect(),
            h_p: (1..=n).map(|i| partial_diff(h, &Symbol::Momentum(i))).collect(),
            dh: d(h),
            dxi: d(&x.xi),
        }
    }

    /// `ṗᵢ + ∂H/∂qⁱ`
    fn p_eq(&self, i: usize) -> Expr {
        Expr::dp(i + 1) + &self.h_q[i]
    }

    /// `q̇ⁱ − ∂H/∂pᵢ`
    fn q_eq(&self, i: usize) -> Expr {
        Expr::dq(i + 1) - &self.h_p[i]
    }
}

/// Left side minus right side of the identity expressing the invariance
/// residual through the canonical equations and `D(pᵢηⁱ − ξH)`. Vanishes
/// for every `H` and `X`.
pub fn lemma1_residual(sys: &HamiltonianSystem, x: &PointSymmetry) -> Result<Expr, SystemError> {
    let lhs = invariance_residual(sys, x)?;
    let pc = Pieces::new(sys, x);
    let h = sys.hamiltonian();
    let mut rhs = vec![&x.xi * (&pc.dh - &pc.h_t)];
    let mut generator = vec![-(&x.xi * h)];
    for i in 0..sys.n() {
        rhs.push(-(&x.eta[i] * pc.p_eq(i)));
        rhs.push(&x.zeta[i] * pc.q_eq(i));
        generator.push(Expr::p(i + 1) * &x.eta[i]);
    }
    rhs.push(d(&Expr::sum(generator)));
    Ok(lhs - Expr::sum(rhs))
}

fn lemma2(sys: &HamiltonianSystem, x: &PointSymmetry, kronecker_sign: i64) -> Result<Vec<Expr>, SystemError> {
    let r = invariance_residual(sys, x)?;
    let pc = Pieces::new(sys, x);
    let n = sys.n();
    let kron = Expr::int(kronecker_sign) * &pc.dxi;
    let mut out = Vec::with_capacity(2 * n);
    for j in 0..n {
        let pj = Symbol::Momentum(j + 1);
        let mut rhs = vec![
            d(&x.eta[j]),
            -(Expr::dq(j + 1) * &pc.dxi),
            -x.apply(&pc.h_p[j]),
            partial_diff(&x.xi, &pj) * (&pc.dh - &pc.h_t),
        ];
        for i in 0..n {
            rhs.push(-(partial_diff(&x.eta[i], &pj) * pc.p_eq(i)));
            let mut coeff = partial_diff(&x.zeta[i], &pj);
            if i == j {
                coeff = coeff + &kron;
            }
            rhs.push(coeff * pc.q_eq(i));
        }
        out.push(delta_p(&r, j + 1) - Expr::sum(rhs));
    }
    for j in 0..n {
        let qj = Symbol::Coord(j + 1);
        let mut rhs = vec![
            -d(&x.zeta[j]),
            Expr::dp(j + 1) * &pc.dxi,
            -x.apply(&pc.h_q[j]),
            partial_diff(&x.xi, &qj) * (&pc.dh - &pc.h_t),
        ];
        for i in 0..n {
            let mut coeff = partial_diff(&x.eta[i], &qj);
            if i == j {
                coeff = coeff + &pc.dxi;
            }
            rhs.push(-(coeff * pc.p_eq(i)));
            rhs.push(partial_diff(&x.zeta[i], &qj) * pc.q_eq(i));
        }
        out.push(delta_q(&r, j + 1) - Expr::sum(rhs));
    }
    Ok(out)
}

/// Differences between the variational derivatives of the invariance
/// residual and their expansions, `δ/δpⱼ` first, then `δ/δqʲ`. Each
/// vanishes identically for every `H` and `X`.
pub fn lemma2_residuals(sys: &HamiltonianSystem, x: &PointSymmetry) -> Result<Vec<Expr>, SystemError> {
    lemma2(sys, x, 1)
}

/// [`lemma2_residuals`] with the sign of the Kronecker term flipped in the
/// `δ/δpⱼ` expansion. Used to check that the identity checker detects a
/// broken identity.
#[doc(hidden)]
pub fn lemma2_residuals_corrupted(sys: &HamiltonianSystem, x: &PointSymmetry) -> Result<Vec<Expr>, SystemError> {
    lemma2(sys, x, -1)
}

/// On-shell verdicts for `δ/δpⱼ` and `δ/δqʲ` of the invariance residual;
/// all zero exactly when the canonical equations admit `x`.
pub fn theorem4_conditions(sys: &HamiltonianSystem, x: &PointSymmetry) -> Result<Vec<ZeroVerdict>, SystemError> {
    let r = invariance_residual(sys, x)?;
    let test = sys.zero_test();
    let n = sys.n();
    let exprs = (1..=n).map(|j| delta_p(&r, j)).chain((1..=n).map(|j| delta_q(&r, j)));
    Ok(exprs.map(|e| is_zero(&on_shell(sys, &e), &test)).collect())
}

/// On-shell verdicts for the direct invariance conditions of the
/// canonical equations, `q` equations first.
pub fn equation_invariance_direct(
    sys: &HamiltonianSystem,
    x: &PointSymmetry,
) -> Result<Vec<ZeroVerdict>, SystemError> {
    x.validate(sys)?;
    let pc = Pieces::new(sys, x);
    let test = sys.zero_test();
    let n = sys.n();
    let q_conditions =
        (0..n).map(|j| d(&x.eta[j]) - Expr::dq(j + 1) * &pc.dxi - x.apply(&pc.h_p[j]));
    let p_conditions =
        (0..n).map(|j| d(&x.zeta[j]) - Expr::dp(j + 1) * &pc.dxi + x.apply(&pc.h_q[j]));
    Ok(q_conditions
        .chain(p_conditions)
        .map(|e| is_zero(&on_shell(sys, &e), &test))
        .collect())
}

/// Random polynomial in `vars` with small integer coefficients and total
/// degree at most `degree`.
pub fn random_polynomial(rng: &mut impl Rng, vars: &[Symbol], degree: u32, max_terms: usize) -> Expr {
    let terms = rng.gen_range(1..=max_terms.max(1));
    Expr::sum((0..terms).map(|_| {
        let mut c = rng.gen_range(-3i64..=3);
        if c == 0 {
            c = 1;
        }
        let total = rng.gen_range(0..=degree);
        let factors = (0..total).map(|_| Expr::var(vars[rng.gen_range(0..vars.len())].clone()));
        Expr::product(std::iter::once(Expr::int(c)).chain(factors))
    }))
}

/// A random polynomial Hamiltonian of the given degree together with a
/// random symmetry with coefficients of degree at most 2.
pub fn random_pair(n: usize, degree: u32, rng: &mut impl Rng) -> (HamiltonianSystem, PointSymmetry) {
    let vars: Vec<Symbol> = std::iter::once(Symbol::Time)
        .chain((1..=n).map(Symbol::Coord))
        .chain((1..=n).map(Symbol::Momentum))
        .collect();
    let h = random_polynomial(rng, &vars, degree, 4);
    let xd = degree.min(2);
    let mut coeff = || random_polynomial(rng, &vars, xd, 3);
    let xi = coeff();
    let eta = (0..n).map(|_| coeff()).collect();
    let zeta = (0..n).map(|_| coeff()).collect();
    let sys = HamiltonianSystem::new(n, h).expect("polynomial over t, q, p");
    (sys, PointSymmetry::new("X", xi, eta, zeta))
}

/// Verdicts for one random `(H, X)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCase {
    pub hamiltonian: Expr,
    pub symmetry: PointSymmetry,
    pub lemma1: ZeroVerdict,
    pub lemma2: Vec<ZeroVerdict>,
}

impl IdentityCase {
    pub fn passed(&self) -> bool {
        self.lemma1.is_zero() && self.lemma2.iter().all(ZeroVerdict::is_zero)
    }
}

/// Checks both identities on `count` random pairs, each at up to 100
/// random jet points.
pub fn identity_suite(n: usize, degree: u32, count: usize, seed: u64, corrupt: bool) -> Vec<IdentityCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let test = ZeroTest::default().with_seed(seed).with_points(100);
    (0..count)
        .map(|_| {
            let (sys, x) = random_pair(n, degree, &mut rng);
            let l1 = lemma1_residual(&sys, &x).expect("generated pair is valid");
            let l2 = if corrupt { lemma2_residuals_corrupted(&sys, &x) } else { lemma2_residuals(&sys, &x) }
                .expect("generated pair is valid");
            IdentityCase {
                hamiltonian: sys.hamiltonian().clone(),
                lemma1: is_zero(&l1, &test),
                lemma2: l2.iter().map(|e| is_zero(e, &test)).collect(),
                symmetry: x,
            }
        })
        .collect()
}
