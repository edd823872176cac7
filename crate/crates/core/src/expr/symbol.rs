use std::fmt;
use std::sync::Arc;

/// A variable of the (truncated) jet space over `(t, q, p)`, or a named
/// parameter.
///
/// Indices are 1-based. Jet orders are 1 (`q̇`, `ṗ`) or 2 (`q̈`, `p̈`).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    Time,
    Coord(usize),
    Momentum(usize),
    CoordDeriv(usize, u8),
    MomentumDeriv(usize, u8),
    Parameter(Arc<str>),
}

pub const MAX_JET_ORDER: u8 = 2;

impl Symbol {
    pub fn param(name: &str) -> Self {
        Symbol::Parameter(Arc::from(name))
    }

    /// Jet order of the symbol: 0 for `t`, `q`, `p` and parameters.
    pub fn jet_order(&self) -> u8 {
        match self {
            Symbol::CoordDeriv(_, k) | Symbol::MomentumDeriv(_, k) => *k,
            _ => 0,
        }
    }

    pub fn index(&self) -> Option<usize> {
        match self {
            Symbol::Coord(i)
            | Symbol::Momentum(i)
            | Symbol::CoordDeriv(i, _)
            | Symbol::MomentumDeriv(i, _) => Some(*i),
            _ => None,
        }
    }

    pub fn is_parameter(&self) -> bool {
        matches!(self, Symbol::Parameter(_))
    }

    /// The symbol that `D` maps this one to, if any.
    ///
    /// `t ↦ 1` is handled by the caller; parameters are constants.
    pub(crate) fn time_successor(&self) -> Option<Symbol> {
        match self {
            Symbol::Coord(i) => Some(Symbol::CoordDeriv(*i, 1)),
            Symbol::Momentum(i) => Some(Symbol::MomentumDeriv(*i, 1)),
            Symbol::CoordDeriv(i, k) => Some(Symbol::CoordDeriv(*i, k + 1)),
            Symbol::MomentumDeriv(i, k) => Some(Symbol::MomentumDeriv(*i, k + 1)),
            Symbol::Time | Symbol::Parameter(_) => None,
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Time => write!(f, "t"),
            Symbol::Coord(i) => write!(f, "q{i}"),
            Symbol::Momentum(i) => write!(f, "p{i}"),
            Symbol::CoordDeriv(i, k) => write!(f, "{}q{i}", "d".repeat(*k as usize)),
            Symbol::MomentumDeriv(i, k) => write!(f, "{}p{i}", "d".repeat(*k as usize)),
            Symbol::Parameter(name) => write!(f, "{name}"),
        }
    }
}
