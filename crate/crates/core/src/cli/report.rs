use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::expr::ZeroVerdict;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemSummary {
    pub n: usize,
    pub hamiltonian: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceSummary {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<String>,
    /// A verdict status when a term is in use, otherwise `not_required`,
    /// `no_v_exists` or `not_synthesizable`.
    pub status: String,
    /// `user_supplied` or `synthesized`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegralSummary {
    pub expr: String,
    pub verified: ZeroVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetrySummary {
    pub name: String,
    pub theorem1: ZeroVerdict,
    pub divergence: DivergenceSummary,
    pub theorem4: Vec<&'static str>,
    pub direct: Vec<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integral: Option<IntegralSummary>,
}

impl SymmetrySummary {
    pub fn admits_integral(&self) -> bool {
        self.theorem1.is_zero() || matches!(self.divergence.status.as_str(), "proven_zero" | "numerically_zero")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationSummary {
    pub name: String,
    /// A verdict status, or `unavailable` when an integral it needs was not
    /// constructed.
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftSummary {
    pub integral: String,
    pub max_abs: f64,
    pub relative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifySummary {
    pub expr: String,
    pub verdict: ZeroVerdict,
}

/// Result of `check`, `integral`, `verify` and `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub version: &'static str,
    pub seed: u64,
    pub system: SystemSummary,
    pub symmetries: Vec<SymmetrySummary>,
    pub relations: Vec<RelationSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drift: Option<Vec<DriftSummary>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifySummary>,
    /// Set when the command did not produce what was asked for.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip)]
    pub passed: bool,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            super::EXIT_PASS
        } else {
            super::EXIT_VERDICT
        }
    }
}

fn verdict_text(v: &ZeroVerdict) -> String {
    match v {
        ZeroVerdict::ProvenZero => "proven zero".into(),
        ZeroVerdict::NumericallyZero { points, tolerance } => {
            format!("numerically zero ({points} points, tol {tolerance:e})")
        }
        ZeroVerdict::NonZero { witness, value } => {
            let at: Vec<String> = witness.iter().map(|(k, v)| format!("{k}={v}")).collect();
            format!("nonzero, {value:e} at {}", at.join(", "))
        }
        ZeroVerdict::Inconclusive { attempts, valid_points } => {
            format!("inconclusive ({valid_points} valid points in {attempts} attempts)")
        }
    }
}

fn statuses(list: &[&str]) -> String {
    if list.iter().all(|s| matches!(*s, "proven_zero" | "numerically_zero")) {
        format!("all {} hold", list.len())
    } else {
        list.join(", ")
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n = {}, H = {}", self.system.n, self.system.hamiltonian)?;
        for s in &self.symmetries {
            writeln!(f, "{}:", s.name)?;
            writeln!(f, "  action invariance: {}", verdict_text(&s.theorem1))?;
            let d = &s.divergence;
            match (&d.v, &d.source) {
                (Some(v), Some(src)) => writeln!(f, "  divergence term ({src}): V = {v}, {}", d.status)?,
                _ => writeln!(f, "  divergence term: {}", d.status)?,
            }
            writeln!(f, "  symmetry conditions: {}", statuses(&s.theorem4))?;
            writeln!(f, "  equation invariance: {}", statuses(&s.direct))?;
            if let Some(i) = &s.integral {
                writeln!(f, "  integral: {}", i.expr)?;
                writeln!(f, "  conserved: {}", verdict_text(&i.verified))?;
            }
        }
        for r in &self.relations {
            writeln!(f, "relation {}: {}", r.name, r.status)?;
        }
        if let Some(v) = &self.verify {
            writeln!(f, "D({}) on solutions: {}", v.expr, verdict_text(&v.verdict))?;
        }
        if let Some(drift) = &self.drift {
            let width = drift.iter().map(|d| d.integral.len()).max().unwrap_or(0);
            for d in drift {
                writeln!(f, "drift {:width$}  max {:.3e}  relative {:.3e}", d.integral, d.max_abs, d.relative)?;
            }
        }
        if let Some(e) = &self.error {
            writeln!(f, "error: {e}")?;
        }
        Ok(())
    }
}

/// Everything needed to replay a failed identity case.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reproducer {
    pub hamiltonian: String,
    pub xi: String,
    pub eta: Vec<String>,
    pub zeta: Vec<String>,
    /// `lemma1` or `lemma2[j]`.
    pub identity: String,
    pub point: BTreeMap<String, f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCaseSummary {
    pub lemma1: &'static str,
    pub lemma2: Vec<&'static str>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub version: &'static str,
    pub seed: u64,
    pub n: usize,
    pub degree: u32,
    pub count: usize,
    pub cases: Vec<IdentityCaseSummary>,
    pub failures: Vec<Reproducer>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
            && self.cases.iter().all(|c| {
                std::iter::once(&c.lemma1)
                    .chain(&c.lemma2)
                    .all(|s| matches!(*s, "proven_zero" | "numerically_zero"))
            })
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            super::EXIT_PASS
        } else {
            super::EXIT_VERDICT
        }
    }
}

impl fmt::Display for IdentityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ok = self.cases.len() - self.failures.len().min(self.cases.len());
        writeln!(
            f,
            "{ok}/{} random pairs pass (n = {}, degree {}, seed {})",
            self.cases.len(),
            self.n,
            self.degree,
            self.seed
        )?;
        for r in &self.failures {
            let mut at = String::new();
            for (k, v) in &r.point {
                let _ = write!(at, " {k}={v:e}");
            }
            writeln!(f, "{} violated: value {:e}", r.identity, r.value)?;
            writeln!(f, "  H = {}", r.hamiltonian)?;
            writeln!(f, "  xi = {}, eta = [{}], zeta = [{}]", r.xi, r.eta.join(", "), r.zeta.join(", "))?;
            writeln!(f, "  at{at}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExampleInfo {
    pub name: &'static str,
    pub description: &'static str,
}
