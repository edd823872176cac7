use serde::Serialize;

use super::compile::compile;
use super::integrate::{integrate_field, IntegratorConfig, Method, NumericsError, Trajectory, VectorField};
use crate::expr::Expr;
use crate::hamiltonian::HamiltonianSystem;

/// A quantity whose conservation is monitored along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Monitored {
    pub name: String,
    pub expr: Expr,
    /// Values differing by a multiple of `period` count as equal.
    pub period: Option<f64>,
}

impl Monitored {
    pub fn new(name: impl Into<String>, expr: Expr) -> Self {
        Monitored { name: name.into(), expr, period: None }
    }

    pub fn with_period(mut self, period: f64) -> Self {
        self.period = Some(period);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftEntry {
    pub integral: String,
    pub initial: f64,
    pub max_abs: f64,
    /// `max_abs / max(1, |initial|)`.
    pub relative: f64,
    #[serde(skip)]
    pub series: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DriftReport {
    pub entries: Vec<DriftEntry>,
}

impl DriftReport {
    pub fn get(&self, name: &str) -> Option<&DriftEntry> {
        self.entries.iter().find(|e| e.integral == name)
    }

    pub fn max_relative(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.relative))
    }
}

fn wrap(diff: f64, period: Option<f64>) -> f64 {
    match period {
        Some(p) => diff - p * (diff / p).round(),
        None => diff,
    }
}

/// Evaluates every integral at every sample of `traj`.
pub fn drift(
    sys: &HamiltonianSystem,
    integrals: &[Monitored],
    traj: &Trajectory,
) -> Result<DriftReport, NumericsError> {
    let params = sys.parameter_values();
    let mut entries = Vec::with_capacity(integrals.len());
    for m in integrals {
        let f = compile(&m.expr, sys.n(), &params)?;
        let mut series = Vec::with_capacity(traj.len());
        for k in 0..traj.len() {
            let v = f
                .eval(&traj.point(k))
                .map_err(|source| NumericsError::Singular { time: traj.times[k], source })?;
            series.push(v);
        }
        let initial = series.first().copied().unwrap_or(0.0);
        let max_abs = series
            .iter()
            .fold(0.0f64, |acc, v| acc.max(wrap(v - initial, m.period).abs()));
        entries.push(DriftEntry {
            integral: m.name.clone(),
            initial,
            max_abs,
            relative: max_abs / initial.abs().max(1.0),
            series,
        });
    }
    Ok(DriftReport { entries })
}

/// Drift at steps `h` and `h/2` and the observed order `log2` of their
/// ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceEstimate {
    pub drift_h: f64,
    pub drift_half: f64,
    pub factor: f64,
    pub order: f64,
    /// Set when the finer drift is at the rounding floor, so the ratio
    /// carries no information.
    pub inconclusive: bool,
}

/// Relative drift below which step halving is not measurable.
const DRIFT_FLOOR: f64 = 1e-14;

pub fn convergence_order(
    sys: &HamiltonianSystem,
    state0: &[f64],
    method: Method,
    integral: &Expr,
    t1: f64,
    h: f64,
) -> Result<ConvergenceEstimate, NumericsError> {
    let field = VectorField::new(sys)?;
    let monitored = [Monitored::new("I", integral.clone())];
    let mut drifts = [0.0; 2];
    for (slot, step) in drifts.iter_mut().zip([h, h / 2.0]) {
        let traj = integrate_field(&field, state0, &IntegratorConfig::new(method, step, 0.0, t1))?;
        *slot = drift(sys, &monitored, &traj)?.entries[0].relative;
    }
    let [drift_h, drift_half] = drifts;
    let inconclusive = drift_half <= DRIFT_FLOOR || drift_h <= DRIFT_FLOOR;
    let factor = drift_h / drift_half;
    Ok(ConvergenceEstimate {
        drift_h,
        drift_half,
        factor,
        order: factor.log2(),
        inconclusive,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate;

    fn oscillator() -> HamiltonianSystem {
        let h = (Expr::p(1).powi(2) + Expr::q(1).powi(2)) / Expr::int(2);
        HamiltonianSystem::new(1, h).unwrap()
    }

    #[test]
    fn constant_integral_has_no_drift() {
        let sys = oscillator();
        let traj = integrate(&sys, &[1.0, 0.0], &IntegratorConfig::new(Method::Rk4, 0.1, 0.0, 1.0)).unwrap();
        let report = drift(&sys, &[Monitored::new("one", Expr::one())], &traj).unwrap();
        assert_eq!(report.entries[0].max_abs, 0.0);
        assert_eq!(report.get("one").unwrap().series.len(), traj.len());
    }

    #[test]
    fn angle_integral_modulo_period() {
        let sys = oscillator();
        let traj = integrate(
            &sys,
            &[1.0, 0.0],
            &IntegratorConfig::new(Method::Rk4, 1e-3, 0.0, std::f64::consts::TAU),
        )
        .unwrap();
        let angle = (Expr::p(1) / Expr::q(1)).arctan() + Expr::t();
        let raw = drift(&sys, &[Monitored::new("a", angle.clone())], &traj);
        // Q passes through zero, where p/q is singular or the branch jumps
        if let Ok(r) = raw {
            assert!(r.entries[0].max_abs > 1.0);
        }
        let wrapped = Monitored::new("a", angle).with_period(std::f64::consts::PI);
        let traj = integrate(
            &sys,
            &[1.0, 0.1],
            &IntegratorConfig::new(Method::Rk4, 1e-3, 0.0, std::f64::consts::TAU),
        )
        .unwrap();
        let r = drift(&sys, &[wrapped], &traj).unwrap();
        assert!(r.entries[0].relative < 1e-9, "{}", r.entries[0].relative);
    }

    #[test]
    fn exact_conservation_is_inconclusive() {
        let sys = oscillator();
        let est = convergence_order(&sys, &[1.0, 0.0], Method::Rk4, &Expr::one(), 1.0, 0.1).unwrap();
        assert!(est.inconclusive);
    }

    #[test]
    fn rk4_is_fourth_order_on_energy() {
        let sys = oscillator();
        let est = convergence_order(&sys, &[1.0, 0.0], Method::Rk4, sys.hamiltonian(), 10.0, 0.1).unwrap();
        assert!(!est.inconclusive);
        assert!((est.order - 5.0).abs() < 0.6 || (est.order - 4.0).abs() < 0.4, "{est:?}");
    }
}
