use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::expr::{is_reserved, parse_expression, ContextError, ParseContext, ParseError};
use super::format::format_expression;
use crate::expr::{Expr, Rational};
use crate::hamiltonian::{HamiltonianSystem, PointSymmetry, SystemError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SystemFileError {
    #[error("malformed system file: {0}")]
    Syntax(String),
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("{path}: cannot parse `{text}`: {source}")]
    Expression {
        path: String,
        text: String,
        #[source]
        source: ParseError,
    },
    #[error("system.parameters: {0}")]
    Parameters(#[from] ContextError),
    #[error(transparent)]
    System(#[from] SystemError),
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> SystemFileError {
    SystemFileError::Schema { path: path.into(), message: message.into() }
}

/// A symmetry as declared in a system file.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryEntry {
    pub symmetry: PointSymmetry,
    /// Divergence term supplied by the user.
    pub v: Option<Expr>,
    /// Name under which the resulting first integral is referred to;
    /// defaults to the symmetry name.
    pub integral: Option<String>,
}

impl SymmetryEntry {
    pub fn integral_name(&self) -> &str {
        self.integral.as_deref().unwrap_or(&self.symmetry.name)
    }
}

/// A claimed constant relation among named first integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationEntry {
    pub name: String,
    /// Integral names appear as parameter symbols.
    pub expr: Expr,
    pub equals: Rational,
}

/// An explicitly given function to be checked as a first integral.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralEntry {
    pub name: String,
    pub expr: Expr,
    /// Values differing by a multiple of `period` are identified when
    /// measuring drift (e.g. angle-valued integrals).
    pub period: Option<f64>,
}

/// Parsed contents of a system file.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub system: HamiltonianSystem,
    pub symmetries: Vec<SymmetryEntry>,
    pub integrals: Vec<IntegralEntry>,
    pub relations: Vec<RelationEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    system: RawSystem,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    symmetry: Vec<RawSymmetry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    integral: Vec<RawIntegral>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    relation: Vec<RawRelation>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    n: i64,
    hamiltonian: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    parameters: BTreeMap<String, RawNumber>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    singular: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSymmetry {
    name: String,
    xi: String,
    eta: Vec<String>,
    zeta: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    v: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    integral: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawIntegral {
    name: String,
    expr: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    period: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRelation {
    name: String,
    expr: String,
    equals: RawNumber,
}

/// A rational given as a TOML integer, float or string such as `"1/2"`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum RawNumber {
    Int(i64),
    Float(f64),
    Text(String),
}

impl RawNumber {
    fn to_rational(&self, path: &str) -> Result<Rational, SystemFileError> {
        let text = match self {
            RawNumber::Int(i) => return Ok(Rational::from_integer((*i).into())),
            RawNumber::Float(f) if f.is_finite() => f.to_string(),
            RawNumber::Float(_) => return Err(schema(path, "value must be finite")),
            RawNumber::Text(s) => s.clone(),
        };
        let e = parse_expression(&text, &ParseContext::phase_space(1))
            .map_err(|source| SystemFileError::Expression { path: path.into(), text: text.clone(), source })?;
        e.as_const()
            .cloned()
            .ok_or_else(|| schema(path, format!("`{text}` is not a rational constant")))
    }

    fn from_rational(r: &Rational) -> RawNumber {
        if r.is_integer() {
            if let Ok(i) = i64::try_from(r.to_integer()) {
                return RawNumber::Int(i);
            }
        }
        RawNumber::Text(format_expression(&Expr::constant(r.clone())))
    }
}

fn parse_at(text: &str, ctx: &ParseContext, path: &str) -> Result<Expr, SystemFileError> {
    parse_expression(text, ctx).map_err(|source| SystemFileError::Expression {
        path: path.into(),
        text: text.into(),
        source,
    })
}

fn check_name(name: &str, path: &str) -> Result<(), SystemFileError> {
    let valid = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        && name.chars().all(|c| c.is_ascii_alphanumeric());
    if !valid {
        return Err(schema(path, format!("`{name}` is not a valid identifier")));
    }
    Ok(())
}

/// Parses a system definition.
///
/// ```toml
/// [system]
/// n = 1
/// hamiltonian = "(p1^2 + 1/q1^2)/2"
/// singular = ["q1"]
///
/// [[symmetry]]
/// name = "X1"
/// xi = "1"
/// eta = ["0"]
/// zeta = ["0"]
/// ```
pub fn parse_system_file(text: &str) -> Result<SystemSpec, SystemFileError> {
    let raw: RawFile = toml::from_str(text).map_err(|e| SystemFileError::Syntax(e.to_string()))?;

    let n = usize::try_from(raw.system.n)
        .ok()
        .filter(|n| *n >= 1)
        .ok_or_else(|| schema("system.n", "must be a positive integer"))?;
    let mut parameters = BTreeMap::new();
    for (name, value) in &raw.system.parameters {
        let path = format!("system.parameters.{name}");
        parameters.insert(name.clone(), value.to_rational(&path)?);
    }
    let ctx = ParseContext::new(n, parameters.keys().cloned(), false)?;
    let hamiltonian = parse_at(&raw.system.hamiltonian, &ctx, "system.hamiltonian")?;
    let singular = raw
        .system
        .singular
        .iter()
        .enumerate()
        .map(|(i, s)| parse_at(s, &ctx, &format!("system.singular[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let system = HamiltonianSystem::with_parameters(n, hamiltonian, parameters.clone())?
        .with_singularities(singular)?;

    let mut symmetries = Vec::new();
    let mut names = BTreeMap::new();
    for (k, s) in raw.symmetry.iter().enumerate() {
        let base = format!("symmetry[{k}]");
        check_name(&s.name, &format!("{base}.name"))?;
        if names.insert(s.name.clone(), k).is_some() {
            return Err(schema(format!("{base}.name"), format!("duplicate symmetry `{}`", s.name)));
        }
        for (field, list) in [("eta", &s.eta), ("zeta", &s.zeta)] {
            if list.len() != n {
                return Err(schema(
                    format!("{base}.{field}"),
                    format!("expected {n} entries, found {}", list.len()),
                ));
            }
        }
        let xi = parse_at(&s.xi, &ctx, &format!("{base}.xi"))?;
        let eta = s
            .eta
            .iter()
            .enumerate()
            .map(|(i, e)| parse_at(e, &ctx, &format!("{base}.eta[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let zeta = s
            .zeta
            .iter()
            .enumerate()
            .map(|(i, e)| parse_at(e, &ctx, &format!("{base}.zeta[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let v = s.v.as_ref().map(|v| parse_at(v, &ctx, &format!("{base}.v"))).transpose()?;
        if let Some(name) = &s.integral {
            check_name(name, &format!("{base}.integral"))?;
        }
        let symmetry = PointSymmetry::new(s.name.clone(), xi, eta, zeta);
        symmetry.validate(&system)?;
        symmetries.push(SymmetryEntry { symmetry, v, integral: s.integral.clone() });
    }

    let mut integrals = Vec::new();
    for (k, i) in raw.integral.iter().enumerate() {
        let base = format!("integral[{k}]");
        check_name(&i.name, &format!("{base}.name"))?;
        let expr = parse_at(&i.expr, &ctx, &format!("{base}.expr"))?;
        if let Some(p) = i.period {
            if !(p.is_finite() && p > 0.0) {
                return Err(schema(format!("{base}.period"), "must be positive"));
            }
        }
        integrals.push(IntegralEntry { name: i.name.clone(), expr, period: i.period });
    }

    let mut integral_names: Vec<String> = symmetries
        .iter()
        .map(|s| s.integral_name().to_string())
        .chain(integrals.iter().map(|i| i.name.clone()))
        .collect();
    integral_names.sort();
    integral_names.dedup();

    let mut relations = Vec::new();
    for (k, r) in raw.relation.iter().enumerate() {
        let base = format!("relation[{k}]");
        check_name(&r.name, &format!("{base}.name"))?;
        if let Some(name) = integral_names.iter().find(|n| is_reserved(n) || parameters.contains_key(*n)) {
            return Err(schema(
                format!("{base}.expr"),
                format!("integral name `{name}` clashes with a reserved token or parameter"),
            ));
        }
        let rctx = ParseContext::new(n, parameters.keys().chain(integral_names.iter()).cloned(), false)?;
        let expr = parse_at(&r.expr, &rctx, &format!("{base}.expr"))?;
        let equals = r.equals.to_rational(&format!("{base}.equals"))?;
        relations.push(RelationEntry { name: r.name.clone(), expr, equals });
    }

    Ok(SystemSpec { system, symmetries, integrals, relations })
}

/// Writes `spec` in the system file format accepted by [`parse_system_file`].
pub fn format_system_file(spec: &SystemSpec) -> String {
    let sys = &spec.system;
    let raw = RawFile {
        system: RawSystem {
            n: sys.n() as i64,
            hamiltonian: format_expression(sys.hamiltonian()),
            parameters: sys
                .parameters()
                .iter()
                .map(|(k, v)| (k.clone(), RawNumber::from_rational(v)))
                .collect(),
            singular: sys.singularities().iter().map(format_expression).collect(),
        },
        symmetry: spec
            .symmetries
            .iter()
            .map(|s| RawSymmetry {
                name: s.symmetry.name.clone(),
                xi: format_expression(&s.symmetry.xi),
                eta: s.symmetry.eta.iter().map(format_expression).collect(),
                zeta: s.symmetry.zeta.iter().map(format_expression).collect(),
                v: s.v.as_ref().map(format_expression),
                integral: s.integral.clone(),
            })
            .collect(),
        integral: spec
            .integrals
            .iter()
            .map(|i| RawIntegral { name: i.name.clone(), expr: format_expression(&i.expr), period: i.period })
            .collect(),
        relation: spec
            .relations
            .iter()
            .map(|r| RawRelation {
                name: r.name.clone(),
                expr: format_expression(&r.expr),
                equals: RawNumber::from_rational(&r.equals),
            })
            .collect(),
    };
    toml::to_string(&raw).expect("system file tables always serialize")
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
[system]
n = 1
hamiltonian = "(p1^2 + 1/q1^2)/2"
singular = ["q1"]

[[symmetry]]
name = "X1"
xi = "1"
eta = ["0"]
zeta = ["0"]
integral = "I1"

[[symmetry]]
name = "X3"
xi = "t^2"
eta = ["t*q1"]
zeta = ["q1 - t*p1"]
v = "q1^2/2"
integral = "I3"

[[relation]]
name = "product"
expr = "4*I1*I3"
equals = "-1/2"
"#;

    #[test]
    fn parses_example() {
        let spec = parse_system_file(EXAMPLE).unwrap();
        assert_eq!(spec.system.n(), 1);
        assert_eq!(spec.symmetries.len(), 2);
        assert_eq!(spec.symmetries[1].v, Some(Expr::q(1).powi(2) / Expr::int(2)));
        assert_eq!(spec.symmetries[0].integral_name(), "I1");
        assert_eq!(spec.relations[0].equals, Rational::new((-1).into(), 2.into()));
        assert_eq!(spec.system.singularities(), &[Expr::q(1)]);
    }

    #[test]
    fn round_trips() {
        let spec = parse_system_file(EXAMPLE).unwrap();
        let text = format_system_file(&spec);
        assert_eq!(parse_system_file(&text).unwrap(), spec);
    }

    #[test]
    fn schema_errors_name_the_field() {
        let err = parse_system_file("[system]\nn = 1\n").unwrap_err();
        assert!(matches!(err, SystemFileError::Syntax(ref m) if m.contains("hamiltonian")), "{err}");

        let text = "[system]\nn = 2\nhamiltonian = \"p1^2\"\n[[symmetry]]\nname = \"X\"\nxi = \"1\"\neta = [\"0\"]\nzeta = [\"0\", \"0\"]\n";
        let err = parse_system_file(text).unwrap_err();
        assert!(matches!(err, SystemFileError::Schema { ref path, .. } if path == "symmetry[0].eta"));

        let text = "[system]\nn = 1\nhamiltonian = \"p1^2 + K\"\n";
        let err = parse_system_file(text).unwrap_err();
        assert!(matches!(err, SystemFileError::Expression { ref path, .. } if path == "system.hamiltonian"));

        let text = "[system]\nn = 1\nhamiltonian = \"p1\"\nextra = 3\n";
        assert!(matches!(parse_system_file(text), Err(SystemFileError::Syntax(_))));

        let text = "[system]\nn = 0\nhamiltonian = \"p1\"\n";
        assert!(matches!(parse_system_file(text), Err(SystemFileError::Schema { .. })));
    }

    #[test]
    fn parameter_values() {
        let text = "[system]\nn = 1\nhamiltonian = \"p1^2/2 - K^2/q1\"\nparameters = { K = 1, m = 0.25, g = \"-3/4\" }\n";
        let spec = parse_system_file(text).unwrap();
        let params = spec.system.parameters();
        assert_eq!(params["K"], Rational::from_integer(1.into()));
        assert_eq!(params["m"], Rational::new(1.into(), 4.into()));
        assert_eq!(params["g"], Rational::new((-3).into(), 4.into()));
        let text = "[system]\nn = 1\nhamiltonian = \"p1\"\nparameters = { q1 = 1 }\n";
        assert!(matches!(parse_system_file(text), Err(SystemFileError::Parameters(_))));
    }
}
