use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use super::compile::{compile, CompileError, CompiledFunction};
use crate::expr::EvalError;
use crate::hamiltonian::{canonical_equations, HamiltonianSystem};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("invalid integrator configuration: {0}")]
    Config(String),
    #[error("initial state has {found} components, expected {expected}")]
    StateLength { found: usize, expected: usize },
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error("singular evaluation at t = {time}: {source}")]
    Singular {
        time: f64,
        #[source]
        source: EvalError,
    },
    #[error("implicit solver did not converge in {iterations} iterations at t = {time}")]
    NoConvergence { time: f64, iterations: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Rk4,
    ImplicitMidpoint,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Rk4 => "rk4",
            Method::ImplicitMidpoint => "implicit_midpoint",
        })
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rk4" => Ok(Method::Rk4),
            "implicit_midpoint" | "midpoint" => Ok(Method::ImplicitMidpoint),
            other => Err(format!("unknown method `{other}` (expected rk4 or implicit_midpoint)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Requested step; the interval is split into `ceil((t1 - t0) / h)`
    /// equal steps.
    pub h: f64,
    pub t0: f64,
    pub t1: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl IntegratorConfig {
    pub fn new(method: Method, h: f64, t0: f64, t1: f64) -> Self {
        IntegratorConfig { method, h, t0, t1, tolerance: 1e-12, max_iterations: 50 }
    }

    pub fn validate(&self) -> Result<(), NumericsError> {
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(NumericsError::Config(format!("step must be positive, got {}", self.h)));
        }
        if !(self.t0.is_finite() && self.t1.is_finite() && self.t1 > self.t0) {
            return Err(NumericsError::Config(format!(
                "need t1 > t0, got [{}, {}]",
                self.t0, self.t1
            )));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 || self.max_iterations == 0 {
            return Err(NumericsError::Config("solver tolerance and iteration limit must be positive".into()));
        }
        Ok(())
    }

    /// Number of steps and the uniform step actually taken.
    pub fn steps(&self) -> (usize, f64) {
        let span = self.t1 - self.t0;
        let ratio = span / self.h;
        let steps = ((ratio - 1e-9 * ratio).ceil() as usize).max(1);
        (steps, span / steps as f64)
    }
}

/// Samples `(t_k, q(t_k), p(t_k))` at uniform times.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub n: usize,
    pub times: Vec<f64>,
    /// `[q1..qn, p1..pn]` per sample.
    pub states: Vec<Vec<f64>>,
}

impl Trajectory {
    /// The sample as a compiled-function argument `[t, q.., p..]`.
    pub fn point(&self, k: usize) -> Vec<f64> {
        std::iter::once(self.times[k]).chain(self.states[k].iter().copied()).collect()
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// CSV with header `t,q1,..,qn,p1,..,pn` and 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t");
        for i in 1..=self.n {
            out.push_str(&format!(",q{i}"));
        }
        for i in 1..=self.n {
            out.push_str(&format!(",p{i}"));
        }
        out.push('\n');
        for k in 0..self.len() {
            let row: Vec<String> = self.point(k).iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Compiled right-hand side of the canonical equations.
#[derive(Debug, Clone)]
pub struct VectorField {
    n: usize,
    rhs: Vec<CompiledFunction>,
}

impl VectorField {
    pub fn new(sys: &HamiltonianSystem) -> Result<Self, CompileError> {
        let (dq, dp) = canonical_equations(sys);
        let params = sys.parameter_values();
        let rhs = dq
            .iter()
            .chain(&dp)
            .map(|e| compile(e, sys.n(), &params))
            .collect::<Result<_, _>>()?;
        Ok(VectorField { n: sys.n(), rhs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn eval(&self, t: f64, y: &[f64], out: &mut [f64], buf: &mut Vec<f64>) -> Result<(), NumericsError> {
        buf.clear();
        buf.push(t);
        buf.extend_from_slice(y);
        for (o, f) in out.iter_mut().zip(&self.rhs) {
            *o = f.eval(buf).map_err(|source| NumericsError::Singular { time: t, source })?;
        }
        Ok(())
    }
}

/// Compensated update `y += delta`.
fn kahan_add(y: &mut [f64], comp: &mut [f64], delta: &[f64]) {
    for i in 0..y.len() {
        let adj = delta[i] - comp[i];
        let sum = y[i] + adj;
        comp[i] = (sum - y[i]) - adj;
        y[i] = sum;
    }
}

/// Integrates the canonical equations of `sys` from `state0 = [q.., p..]`.
pub fn integrate(
    sys: &HamiltonianSystem,
    state0: &[f64],
    config: &IntegratorConfig,
) -> Result<Trajectory, NumericsError> {
    integrate_field(&VectorField::new(sys)?, state0, config)
}

pub fn integrate_field(
    field: &VectorField,
    state0: &[f64],
    config: &IntegratorConfig,
) -> Result<Trajectory, NumericsError> {
    config.validate()?;
    let dim = 2 * field.n;
    if state0.len() != dim {
        return Err(NumericsError::StateLength { found: state0.len(), expected: dim });
    }
    if let Some(bad) = state0.iter().find(|v| !v.is_finite()) {
        return Err(NumericsError::Config(format!("initial state has non-finite component {bad}")));
    }
    let (steps, h) = config.steps();
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut y = state0.to_vec();
    let mut comp = vec![0.0; dim];
    let mut buf = Vec::with_capacity(dim + 1);
    let mut k = vec![vec![0.0; dim]; 4];
    let mut tmp = vec![0.0; dim];
    let mut delta = vec![0.0; dim];
    times.push(config.t0);
    states.push(y.clone());
    field.eval(config.t0, &y, &mut k[0], &mut buf)?;

    for step in 0..steps {
        let t = config.t0 + step as f64 * h;
        match config.method {
            Method::Rk4 => {
                let (k1, rest) = k.split_at_mut(1);
                let (k2, rest) = rest.split_at_mut(1);
                let (k3, k4) = rest.split_at_mut(1);
                let (k1, k2, k3, k4) = (&mut k1[0], &mut k2[0], &mut k3[0], &mut k4[0]);
                field.eval(t, &y, k1, &mut buf)?;
                for i in 0..dim {
                    tmp[i] = y[i] + 0.5 * h * k1[i];
                }
                field.eval(t + 0.5 * h, &tmp, k2, &mut buf)?;
                for i in 0..dim {
                    tmp[i] = y[i] + 0.5 * h * k2[i];
                }
                field.eval(t + 0.5 * h, &tmp, k3, &mut buf)?;
                for i in 0..dim {
                    tmp[i] = y[i] + h * k3[i];
                }
                field.eval(t + h, &tmp, k4, &mut buf)?;
                for i in 0..dim {
                    delta[i] = h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
            Method::ImplicitMidpoint => {
                let tm = t + 0.5 * h;
                // explicit Euler predictor for the increment
                field.eval(t, &y, &mut k[0], &mut buf)?;
                for i in 0..dim {
                    delta[i] = h * k[0][i];
                }
                // iterate to the tolerance, then on until the increment
                // stops changing; a truncated iteration drifts secularly
                let mut converged = false;
                let mut last_change = f64::INFINITY;
                for _ in 0..config.max_iterations {
                    for i in 0..dim {
                        tmp[i] = y[i] + 0.5 * delta[i];
                    }
                    field.eval(tm, &tmp, &mut k[1], &mut buf)?;
                    let mut change = 0.0f64;
                    let mut scale = 0.0f64;
                    for i in 0..dim {
                        let next = h * k[1][i];
                        change = change.max((next - delta[i]).abs());
                        scale = scale.max((y[i] + next).abs());
                        delta[i] = next;
                    }
                    converged |= change <= config.tolerance * (1.0 + scale);
                    if converged && (change == 0.0 || change >= last_change) {
                        break;
                    }
                    last_change = change;
                }
                if !converged {
                    return Err(NumericsError::NoConvergence { time: t, iterations: config.max_iterations });
                }
            }
        }
        kahan_add(&mut y, &mut comp, &delta);
        let t_next = if step + 1 == steps { config.t1 } else { config.t0 + (step + 1) as f64 * h };
        if y.iter().any(|v| !v.is_finite()) {
            return Err(NumericsError::Singular {
                time: t_next,
                source: EvalError::Singular {
                    expr: crate::expr::Expr::zero(),
                    reason: "state became non-finite",
                },
            });
        }
        times.push(t_next);
        states.push(y.clone());
    }
    Ok(Trajectory { n: field.n, times, states })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;

    fn oscillator() -> HamiltonianSystem {
        let h = (Expr::p(1).powi(2) + Expr::q(1).powi(2)) / Expr::int(2);
        HamiltonianSystem::new(1, h).unwrap()
    }

    #[test]
    fn oscillator_returns_after_one_period() {
        let cfg = IntegratorConfig::new(Method::Rk4, 1e-3, 0.0, std::f64::consts::TAU);
        let traj = integrate(&oscillator(), &[1.0, 0.0], &cfg).unwrap();
        let last = traj.states.last().unwrap();
        assert!((last[0] - 1.0).abs() < 1e-9 && last[1].abs() < 1e-9, "{last:?}");
        assert_eq!(traj.len(), 6284 + 1);
        assert_eq!(*traj.times.last().unwrap(), std::f64::consts::TAU);
    }

    #[test]
    fn example1_orbit_is_hyperbola() {
        // from (1, 0) the solution is q = sqrt(1 + t^2)
        let h = (Expr::p(1).powi(2) + Expr::q(1).powi(-2)) / Expr::int(2);
        let sys = HamiltonianSystem::new(1, h).unwrap();
        for method in [Method::Rk4, Method::ImplicitMidpoint] {
            let cfg = IntegratorConfig::new(method, 1e-3, 0.0, 1.0);
            let traj = integrate(&sys, &[1.0, 0.0], &cfg).unwrap();
            let tol = if method == Method::Rk4 { 1e-11 } else { 1e-6 };
            for (t, s) in traj.times.iter().zip(&traj.states) {
                assert!((s[0] - (1.0 + t * t).sqrt()).abs() < tol, "{method} at {t}");
            }
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let sys = oscillator();
        for cfg in [
            IntegratorConfig::new(Method::Rk4, 0.0, 0.0, 1.0),
            IntegratorConfig::new(Method::Rk4, -1.0, 0.0, 1.0),
            IntegratorConfig::new(Method::Rk4, 0.1, 1.0, 1.0),
        ] {
            assert!(matches!(integrate(&sys, &[1.0, 0.0], &cfg), Err(NumericsError::Config(_))));
        }
        let cfg = IntegratorConfig::new(Method::Rk4, 0.1, 0.0, 1.0);
        assert!(matches!(integrate(&sys, &[1.0], &cfg), Err(NumericsError::StateLength { .. })));
    }

    #[test]
    fn aborts_at_singularity() {
        let h = Expr::p(1).powi(2) / Expr::int(2) - Expr::q(1).powi(-1);
        let sys = HamiltonianSystem::new(1, h).unwrap();
        let cfg = IntegratorConfig::new(Method::Rk4, 1e-2, 0.0, 10.0);
        match integrate(&sys, &[0.0, 1.0], &cfg) {
            Err(NumericsError::Singular { time, .. }) => assert_eq!(time, 0.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn deterministic() {
        let cfg = IntegratorConfig::new(Method::ImplicitMidpoint, 0.05, 0.0, 3.0);
        let a = integrate(&oscillator(), &[0.3, -0.2], &cfg).unwrap();
        let b = integrate(&oscillator(), &[0.3, -0.2], &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.to_csv().starts_with("t,q1,p1\n0.0000000000000000e0,"));
    }
}
