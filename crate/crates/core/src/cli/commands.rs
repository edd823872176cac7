use std::collections::BTreeMap;

use super::report::{
    DivergenceSummary, DriftSummary, ExampleInfo, IdentityCaseSummary, IdentityReport, IntegralSummary,
    RelationSummary, Report, Reproducer, SymmetrySummary, SystemSummary, VerifySummary, VERSION,
};
use super::{CliError, EXAMPLES};
use crate::expr::{simplify, Expr, Symbol, ZeroVerdict};
use crate::hamiltonian::{
    analyze, check_divergence_invariance, check_invariance, find_divergence_term, identity_suite,
    integral_expression, relation_check, verify_first_integral, DivergenceSearch, HamiltonianError,
    HamiltonianSystem, Provenance,
};
use crate::numerics::{drift, integrate, IntegratorConfig, Method, Monitored, Trajectory};
use crate::parser::{parse_expression, ParseContext, RelationEntry, SymmetryEntry, SystemSpec};

fn base_report(sys: &HamiltonianSystem) -> Report {
    Report {
        version: VERSION,
        seed: sys.seed(),
        system: SystemSummary { n: sys.n(), hamiltonian: sys.hamiltonian().to_string() },
        symmetries: Vec::new(),
        relations: Vec::new(),
        drift: None,
        verify: None,
        error: None,
        passed: true,
    }
}

/// Analysis of one symmetry together with the integral it generates, if
/// any. `force` builds the integral even without invariance.
fn summarize(
    sys: &HamiltonianSystem,
    entry: &SymmetryEntry,
    force: bool,
) -> Result<(SymmetrySummary, Option<Expr>), CliError> {
    let x = &entry.symmetry;
    let report = analyze(sys, x, entry.v.as_ref())?;
    let divergence = match (&report.divergence, &report.search) {
        (Some((term, verdict)), _) => DivergenceSummary {
            v: Some(term.v.to_string()),
            status: verdict.status().into(),
            source: Some(
                match term.provenance {
                    Provenance::UserSupplied => "user_supplied",
                    Provenance::Synthesized => "synthesized",
                }
                .into(),
            ),
        },
        (None, Some(search)) => DivergenceSummary { v: None, status: search.status().into(), source: None },
        (None, None) => DivergenceSummary { v: None, status: "not_required".into(), source: None },
    };
    let v = report.divergence.as_ref().filter(|(_, verdict)| verdict.is_zero()).map(|(t, _)| &t.v);
    let admits = report.admits_integral();
    let integral = if admits || force {
        Some(compact(integral_expression(sys, x, v)))
    } else {
        None
    };
    let summary = SymmetrySummary {
        name: x.name.clone(),
        theorem1: report.verdict_theorem1,
        divergence,
        theorem4: report.theorem4_verdicts.iter().map(ZeroVerdict::status).collect(),
        direct: report.direct_invariance_verdicts.iter().map(ZeroVerdict::status).collect(),
        integral: match &integral {
            Some(i) => Some(IntegralSummary { expr: i.to_string(), verified: verify_first_integral(sys, i)? }),
            None => None,
        },
    };
    Ok((summary, integral))
}

/// The normal form of `e` when it is smaller than `e` itself.
fn compact(e: Expr) -> Expr {
    let normal = simplify(&e);
    if normal.size() < e.size() {
        normal
    } else {
        e
    }
}

fn summary_passed(s: &SymmetrySummary) -> bool {
    let holds = |st: &&str| matches!(*st, "proven_zero" | "numerically_zero");
    s.admits_integral()
        && s.theorem4.iter().all(holds)
        && s.direct.iter().all(holds)
        && s.integral.as_ref().is_some_and(|i| i.verified.is_zero())
}

/// Runs the per-symmetry analyses concurrently; results keep input order.
fn summarize_all(
    sys: &HamiltonianSystem,
    entries: &[&SymmetryEntry],
) -> Result<Vec<(SymmetrySummary, Option<Expr>)>, CliError> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = entries
            .iter()
            .map(|entry| scope.spawn(move || summarize(sys, entry, false)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|panic| std::panic::resume_unwind(panic)))
            .collect()
    })
}

fn check_relations(
    sys: &HamiltonianSystem,
    relations: &[RelationEntry],
    integrals: &BTreeMap<String, Expr>,
) -> Result<Vec<RelationSummary>, CliError> {
    relations
        .iter()
        .map(|r| {
            let status = match relation_check(sys, integrals, &r.expr, &r.equals) {
                Ok(verdict) => verdict.status().to_string(),
                Err(HamiltonianError::UnknownIntegral(_)) => "unavailable".to_string(),
                Err(e) => return Err(e.into()),
            };
            Ok(RelationSummary { name: r.name.clone(), status })
        })
        .collect()
}

/// Full analysis of every symmetry (or only `filter`), the integrals they
/// generate and the declared relations between them.
///
/// Relations are skipped when a filter is given.
pub fn cmd_check(spec: &SystemSpec, filter: Option<&str>) -> Result<Report, CliError> {
    let sys = &spec.system;
    let entries: Vec<&SymmetryEntry> = match filter {
        Some(name) => vec![find_symmetry(spec, name)?],
        None => spec.symmetries.iter().collect(),
    };
    let mut report = base_report(sys);
    let mut integrals: BTreeMap<String, Expr> =
        spec.integrals.iter().map(|i| (i.name.clone(), i.expr.clone())).collect();
    for (entry, (summary, integral)) in entries.iter().zip(summarize_all(sys, &entries)?) {
        report.passed &= summary_passed(&summary);
        if let Some(i) = integral {
            integrals.insert(entry.integral_name().to_string(), i);
        }
        report.symmetries.push(summary);
    }
    if filter.is_none() {
        report.relations = check_relations(sys, &spec.relations, &integrals)?;
        report.passed &= report.relations.iter().all(|r| matches!(r.status.as_str(), "proven_zero" | "numerically_zero"));
    }
    Ok(report)
}

fn find_symmetry<'a>(spec: &'a SystemSpec, name: &str) -> Result<&'a SymmetryEntry, CliError> {
    spec.symmetries.iter().find(|s| s.symmetry.name == name).ok_or_else(|| {
        let known: Vec<&str> = spec.symmetries.iter().map(|s| s.symmetry.name.as_str()).collect();
        CliError::Usage(format!("no symmetry `{name}` (declared: {})", known.join(", ")))
    })
}

/// The first integral generated by one symmetry. Without `force`, a
/// symmetry that leaves the action invariant neither exactly nor up to a
/// divergence produces no integral and a failing report.
pub fn cmd_integral(spec: &SystemSpec, name: &str, force: bool) -> Result<Report, CliError> {
    let sys = &spec.system;
    let entry = find_symmetry(spec, name)?;
    let (summary, _) = summarize(sys, entry, force)?;
    let mut report = base_report(sys);
    report.passed = summary.integral.as_ref().is_some_and(|i| i.verified.is_zero());
    if summary.integral.is_none() {
        report.error = Some(format!(
            "{}",
            HamiltonianError::NotInvariant { symmetry: name.to_string(), verdict: summary.theorem1.clone() }
        ));
    }
    report.symmetries.push(summary);
    Ok(report)
}

fn parse_in(spec: &SystemSpec, text: &str) -> Result<Expr, CliError> {
    let sys = &spec.system;
    let ctx = ParseContext::new(sys.n(), sys.parameters().keys().cloned(), false)?;
    parse_expression(text, &ctx).map_err(|source| CliError::Parse { text: text.to_string(), source })
}

/// Whether `text` is a first integral of the system.
pub fn cmd_verify(spec: &SystemSpec, text: &str) -> Result<Report, CliError> {
    let sys = &spec.system;
    let e = parse_in(spec, text)?;
    let verdict = verify_first_integral(sys, &e)?;
    let mut report = base_report(sys);
    report.passed = verdict.is_zero();
    report.verify = Some(VerifySummary { expr: e.to_string(), verdict });
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateOptions {
    /// `(q1..qn, p1..pn)` at `t0`.
    pub state: Vec<f64>,
    pub method: Method,
    pub h: f64,
    pub t0: f64,
    pub t1: f64,
    /// Additional `(name, expression)` pairs to monitor.
    pub integrals: Vec<(String, String)>,
    /// Fail when any relative drift exceeds this.
    pub max_drift: Option<f64>,
}

impl SimulateOptions {
    pub fn new(state: Vec<f64>, method: Method, h: f64, t0: f64, t1: f64) -> Self {
        SimulateOptions { state, method, h, t0, t1, integrals: Vec::new(), max_drift: None }
    }
}

/// Integral of a symmetry without the extra diagnostics of [`cmd_check`].
fn symmetry_integral(sys: &HamiltonianSystem, entry: &SymmetryEntry) -> Result<Option<Expr>, CliError> {
    let x = &entry.symmetry;
    if let Some(v) = &entry.v {
        if check_divergence_invariance(sys, x, v)?.is_zero() {
            return Ok(Some(integral_expression(sys, x, Some(v))));
        }
    }
    if check_invariance(sys, x)?.is_zero() {
        return Ok(Some(integral_expression(sys, x, None)));
    }
    if entry.v.is_none() {
        if let DivergenceSearch::Found(term) = find_divergence_term(sys, x)? {
            if check_divergence_invariance(sys, x, &term.v)?.is_zero() {
                return Ok(Some(integral_expression(sys, x, Some(&term.v))));
            }
        }
    }
    Ok(None)
}

fn substitute_integrals(relation: &Expr, integrals: &BTreeMap<String, Expr>) -> Expr {
    let map = relation
        .free_symbols()
        .into_iter()
        .filter_map(|s| match &s {
            Symbol::Parameter(name) => integrals.get(name.as_ref()).map(|e| (s.clone(), e.clone())),
            _ => None,
        })
        .collect();
    relation.substitute(&map)
}

/// Integrates from `opts.state` and reports the drift of every integral the
/// system provides, plus the deviation of each relation from its constant.
pub fn cmd_simulate(spec: &SystemSpec, opts: &SimulateOptions) -> Result<(Report, Trajectory), CliError> {
    let sys = &spec.system;
    let mut monitored = Vec::new();
    let mut integrals = BTreeMap::new();
    for entry in &spec.symmetries {
        if let Some(i) = symmetry_integral(sys, entry)? {
            integrals.insert(entry.integral_name().to_string(), i.clone());
            monitored.push(Monitored::new(entry.integral_name(), i));
        }
    }
    for i in &spec.integrals {
        integrals.insert(i.name.clone(), i.expr.clone());
        let m = Monitored::new(i.name.clone(), i.expr.clone());
        monitored.push(match i.period {
            Some(p) => m.with_period(p),
            None => m,
        });
    }
    for (name, text) in &opts.integrals {
        let e = parse_in(spec, text)?;
        integrals.insert(name.clone(), e.clone());
        monitored.push(Monitored::new(name.clone(), e));
    }
    let mut relations = Vec::new();
    for r in &spec.relations {
        let e = substitute_integrals(&r.expr, &integrals);
        let resolved = e.free_symbols().into_iter().all(|s| match &s {
            Symbol::Parameter(name) => sys.parameters().contains_key(name.as_ref()),
            _ => true,
        });
        if resolved {
            relations.push((r, e - Expr::constant(r.equals.clone())));
        }
    }

    let cfg = IntegratorConfig::new(opts.method, opts.h, opts.t0, opts.t1);
    let traj = integrate(sys, &opts.state, &cfg)?;
    let mut summaries: Vec<DriftSummary> = drift(sys, &monitored, &traj)?
        .entries
        .into_iter()
        .map(|e| DriftSummary { integral: e.integral, max_abs: e.max_abs, relative: e.relative })
        .collect();
    let residuals: Vec<Monitored> =
        relations.iter().map(|(r, e)| Monitored::new(format!("relation:{}", r.name), e.clone())).collect();
    for (entry, (r, _)) in drift(sys, &residuals, &traj)?.entries.into_iter().zip(&relations) {
        let max_abs = entry.series.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let scale = crate::expr::const_to_f64(&r.equals).abs().max(1.0);
        summaries.push(DriftSummary { integral: entry.integral, max_abs, relative: max_abs / scale });
    }

    let mut report = base_report(sys);
    if let Some(limit) = opts.max_drift {
        report.passed = summaries.iter().all(|d| d.relative <= limit);
    }
    report.relations = check_relations(sys, &spec.relations, &integrals)?;
    report.drift = Some(summaries);
    Ok((report, traj))
}

fn reproducer(case: &crate::hamiltonian::IdentityCase) -> Option<Reproducer> {
    let failing = std::iter::once(("lemma1".to_string(), &case.lemma1))
        .chain(case.lemma2.iter().enumerate().map(|(j, v)| (format!("lemma2[{j}]"), v)))
        .find(|(_, v)| !v.is_zero())?;
    let (point, value) = match failing.1 {
        ZeroVerdict::NonZero { witness, value } => (witness.clone(), *value),
        _ => (BTreeMap::new(), f64::NAN),
    };
    let x = &case.symmetry;
    Some(Reproducer {
        hamiltonian: case.hamiltonian.to_string(),
        xi: x.xi.to_string(),
        eta: x.eta.iter().map(Expr::to_string).collect(),
        zeta: x.zeta.iter().map(Expr::to_string).collect(),
        identity: failing.0,
        point,
        value,
    })
}

/// Evaluates both variational identities on `count` random polynomial
/// pairs. `corrupt` swaps in a deliberately wrong identity so the failure
/// path can be exercised.
pub fn cmd_identity_check(
    n: usize,
    degree: u32,
    count: usize,
    seed: u64,
    corrupt: bool,
) -> Result<IdentityReport, CliError> {
    if n == 0 {
        return Err(CliError::Usage("dimension must be at least 1".into()));
    }
    let cases = identity_suite(n, degree, count, seed, corrupt);
    Ok(IdentityReport {
        version: VERSION,
        seed,
        n,
        degree,
        count,
        failures: cases.iter().filter_map(reproducer).collect(),
        cases: cases
            .iter()
            .map(|c| IdentityCaseSummary {
                lemma1: c.lemma1.status(),
                lemma2: c.lemma2.iter().map(ZeroVerdict::status).collect(),
            })
            .collect(),
    })
}

pub fn cmd_examples() -> Vec<ExampleInfo> {
    EXAMPLES.iter().map(|(name, description, _)| ExampleInfo { name, description }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::load_example;

    fn statuses(r: &Report) -> Vec<(&str, &str, &str)> {
        r.symmetries
            .iter()
            .map(|s| (s.name.as_str(), s.theorem1.status(), s.divergence.status.as_str()))
            .collect()
    }

    #[test]
    fn example1_verdicts() {
        let r = cmd_check(&load_example("example1").unwrap(), None).unwrap();
        assert_eq!(
            statuses(&r),
            [("X1", "proven_zero", "not_required"), ("X2", "proven_zero", "not_required"), ("X3", "nonzero", "proven_zero")]
        );
        assert_eq!(r.symmetries[2].divergence.v.as_deref(), Some("q1^2/2"));
        assert_eq!(r.symmetries[2].divergence.source.as_deref(), Some("synthesized"));
        assert_eq!(r.relations[0].status, "proven_zero");
        assert!(r.passed);
    }

    #[test]
    fn coulomb_scaling_fails_but_satisfies_symmetry_conditions() {
        let spec = load_example("coulomb").unwrap();
        let r = cmd_check(&spec, None).unwrap();
        assert_eq!(statuses(&r)[1], ("X2", "nonzero", "no_v_exists"));
        assert!(r.symmetries[1].theorem4.iter().chain(&r.symmetries[1].direct).all(|s| *s == "proven_zero"));
        assert!(r.symmetries[1].integral.is_none());
        assert_eq!(r.exit_code(), 1);

        let refused = cmd_integral(&spec, "X2", false).unwrap();
        assert!(refused.error.is_some() && !refused.passed);
        let forced = cmd_integral(&spec, "X2", true).unwrap();
        assert!(forced.symmetries[0].integral.as_ref().unwrap().verified.is_nonzero());
        assert!(matches!(cmd_integral(&spec, "X9", false), Err(CliError::Usage(_))));
    }

    #[test]
    fn kepler_scaling_filter() {
        let r = cmd_check(&load_example("kepler3").unwrap(), Some("X1")).unwrap();
        assert_eq!(r.symmetries.len(), 1);
        assert!(!r.symmetries[0].admits_integral() && r.symmetries[0].integral.is_none());
        assert!(r.relations.is_empty());
    }

    #[test]
    fn verify_examples() {
        let osc = load_example("oscillator").unwrap();
        assert!(cmd_verify(&osc, "arctan(p1/q1) + t").unwrap().passed);
        let r = cmd_verify(&load_example("example1").unwrap(), "q1").unwrap();
        assert!(r.verify.unwrap().verdict.is_nonzero());
        assert!(cmd_verify(&load_example("kepler3").unwrap(), "q1*p2 - q2*p1").unwrap().passed);
        assert!(matches!(cmd_verify(&osc, "q1 +"), Err(CliError::Parse { .. })));
        assert!(matches!(cmd_verify(&osc, "dq1"), Err(CliError::Parse { .. })));
    }

    #[test]
    fn simulate_example1_relation() {
        let spec = load_example("example1").unwrap();
        let opts = SimulateOptions::new(vec![1.0, 0.0], Method::Rk4, 1e-3, 0.0, 1.0);
        let (report, traj) = cmd_simulate(&spec, &opts).unwrap();
        let drift = report.drift.unwrap();
        let rel = drift.iter().find(|d| d.integral == "relation:dependence").unwrap();
        assert!(rel.max_abs <= 1e-9, "{rel:?}");
        assert_eq!(drift.len(), 4);
        assert_eq!(*traj.times.last().unwrap(), 1.0);

        let bad = SimulateOptions::new(vec![1.0, 0.0], Method::Rk4, 0.0, 0.0, 1.0);
        let err = cmd_simulate(&spec, &bad).unwrap_err();
        assert_eq!(err.exit_code(), crate::cli::EXIT_USAGE);
        let singular = SimulateOptions::new(vec![0.0, 1.0], Method::Rk4, 1e-3, 0.0, 1.0);
        assert_eq!(cmd_simulate(&spec, &singular).unwrap_err().exit_code(), crate::cli::EXIT_NUMERIC);
    }

    #[test]
    fn identity_check_and_reproducer() {
        assert!(cmd_identity_check(2, 3, 10, 42, false).unwrap().passed());
        assert!(cmd_identity_check(1, 0, 5, 1, false).unwrap().passed());
        let bad = cmd_identity_check(1, 2, 3, 0, true).unwrap();
        assert!(!bad.passed());
        let r = &bad.failures[0];
        assert!(r.identity.starts_with("lemma2") && !r.point.is_empty());
        assert!(matches!(cmd_identity_check(0, 1, 1, 0, false), Err(CliError::Usage(_))));
    }

    #[test]
    fn json_is_reproducible() {
        let spec = load_example("kepler2").unwrap();
        let a = serde_json::to_string(&cmd_check(&spec, None).unwrap()).unwrap();
        let b = serde_json::to_string(&cmd_check(&spec, None).unwrap()).unwrap();
        assert_eq!(a, b);
        let v: serde_json::Value = serde_json::from_str(&a).unwrap();
        for key in ["version", "seed", "system", "symmetries", "relations"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        let sym = &v["symmetries"][0];
        for key in ["name", "theorem1", "divergence", "theorem4", "direct", "integral"] {
            assert!(sym.get(key).is_some(), "{key}");
        }
        assert_eq!(sym["theorem4"].as_array().unwrap().len(), 4);
    }
}
