//! Immutable symbolic expressions over the jet variables `t, q, p, q̇, ṗ,
//! q̈, p̈` and named parameters.
//!
//! Every constructor returns an automatically simplified tree: nested sums
//! and products are flattened, constants are folded, like terms and like
//! powers are collected and operands are kept in one fixed order. Two trees
//! built from the same operands in different orders are therefore
//! structurally identical. Heavier normalization (expansion and rational
//! function normalization) lives in [`simplify`].

mod diff;
mod eval;
mod rational;
mod symbol;
mod zero;

pub use diff::{partial_diff, total_derivative};
pub use eval::{evaluate, EvalError, EvaluationPoint, RealExponent};
pub use rational::simplify;
pub(crate) use eval::{apply_func, const_to_f64};
pub(crate) use rational::antiderivative;
pub use symbol::{Symbol, MAX_JET_ORDER};
pub use zero::{is_zero, magnitude, Singularities, ZeroTest, ZeroVerdict};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num::bigint::BigInt;
use num::{BigRational, One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("expression contains jet symbol `{0}` of order {1}; at most {2} is allowed here")]
    JetOrderExceeded(Symbol, u8, u8),
}

/// Unary elementary functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Arctan,
    Exp,
    Log,
}

impl Func {
    pub const ALL: [Func; 6] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Arctan,
        Func::Exp,
        Func::Log,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Arctan => "arctan",
            Func::Exp => "exp",
            Func::Log => "log",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Const(Rational),
    Var(Symbol),
    Sum(Vec<Expr>),
    Product(Vec<Expr>),
    Power(Expr, Rational),
    Apply(Func, Expr),
}

/// Shared, immutable expression tree.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr(Arc<Node>);

/// Largest integer exponent folded for constant bases.
const MAX_FOLD_EXPONENT: i64 = 1024;
/// Largest bit size of a folded constant power.
const MAX_FOLD_BITS: u64 = 1 << 16;

impl Expr {
    fn from_node(node: Node) -> Self {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn constant(value: Rational) -> Self {
        Expr::from_node(Node::Const(value))
    }

    pub fn int(value: i64) -> Self {
        Expr::constant(Rational::from_integer(BigInt::from(value)))
    }

    pub fn rational(num: i64, den: i64) -> Self {
        Expr::constant(Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn zero() -> Self {
        Expr::int(0)
    }

    pub fn one() -> Self {
        Expr::int(1)
    }

    pub fn var(symbol: Symbol) -> Self {
        Expr::from_node(Node::Var(symbol))
    }

    pub fn t() -> Self {
        Expr::var(Symbol::Time)
    }

    pub fn q(i: usize) -> Self {
        Expr::var(Symbol::Coord(i))
    }

    pub fn p(i: usize) -> Self {
        Expr::var(Symbol::Momentum(i))
    }

    pub fn dq(i: usize) -> Self {
        Expr::var(Symbol::CoordDeriv(i, 1))
    }

    pub fn dp(i: usize) -> Self {
        Expr::var(Symbol::MomentumDeriv(i, 1))
    }

    pub fn param(name: &str) -> Self {
        Expr::var(Symbol::param(name))
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match self.node() {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.as_const().is_some_and(|c| c.is_one())
    }

    /// Canonical sum of the given operands.
    pub fn sum<I: IntoIterator<Item = Expr>>(operands: I) -> Expr {
        let mut constant = Rational::zero();
        let mut terms: BTreeMap<Expr, Rational> = BTreeMap::new();
        let mut stack: Vec<Expr> = operands.into_iter().collect();
        stack.reverse();
        while let Some(op) = stack.pop() {
            match op.node() {
                Node::Const(c) => constant += c,
                Node::Sum(inner) => stack.extend(inner.iter().rev().cloned()),
                _ => {
                    let (c, rest) = op.split_coefficient();
                    *terms.entry(rest).or_insert_with(Rational::zero) += c;
                }
            }
        }

        let mut out = Vec::with_capacity(terms.len() + 1);
        let mut nested = Vec::new();
        for (rest, c) in terms {
            if c.is_zero() {
                continue;
            }
            if c.is_one() {
                if let Node::Sum(inner) = rest.node() {
                    nested.extend(inner.iter().cloned());
                    continue;
                }
                out.push(rest);
            } else {
                out.push(Expr::product([Expr::constant(c), rest]));
            }
        }
        if !nested.is_empty() {
            nested.extend(out);
            nested.push(Expr::constant(constant));
            return Expr::sum(nested);
        }
        if !constant.is_zero() {
            out.insert(0, Expr::constant(constant));
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::from_node(Node::Sum(out)),
        }
    }

    /// Canonical product of the given operands.
    pub fn product<I: IntoIterator<Item = Expr>>(operands: I) -> Expr {
        let mut coefficient = Rational::one();
        let mut bases: BTreeMap<Expr, Rational> = BTreeMap::new();
        let mut stack: Vec<Expr> = operands.into_iter().collect();
        while let Some(op) = stack.pop() {
            match op.node() {
                Node::Const(c) => coefficient *= c,
                Node::Product(inner) => stack.extend(inner.iter().cloned()),
                Node::Power(base, e) => {
                    *bases.entry(base.clone()).or_insert_with(Rational::zero) += e;
                }
                _ => *bases.entry(op.clone()).or_insert_with(Rational::zero) += Rational::one(),
            }
        }
        if coefficient.is_zero() {
            return Expr::zero();
        }

        let mut factors = Vec::with_capacity(bases.len() + 1);
        let mut redo = Vec::new();
        for (base, e) in bases {
            if e.is_zero() {
                continue;
            }
            let f = Expr::pow(base, e);
            match f.node() {
                Node::Const(c) => coefficient *= c,
                Node::Product(_) => redo.push(f),
                _ => factors.push(f),
            }
        }
        if !redo.is_empty() {
            redo.extend(factors);
            redo.push(Expr::constant(coefficient));
            return Expr::product(redo);
        }
        if coefficient.is_zero() {
            return Expr::zero();
        }
        factors.sort();
        let undefined = factors
            .iter()
            .any(|f| matches!(f.node(), Node::Power(b, _) if b.as_const().is_some_and(|c| c.is_zero())));
        if undefined {
            // undefined everywhere, whatever the other factors
            return Expr::pow(Expr::zero(), -Rational::one());
        }
        if factors.is_empty() {
            return Expr::constant(coefficient);
        }
        if coefficient.is_one() && factors.len() == 1 {
            return factors.pop().unwrap();
        }
        if !coefficient.is_one() {
            factors.insert(0, Expr::constant(coefficient));
        }
        Expr::from_node(Node::Product(factors))
    }

    /// `base ^ exponent` with a rational exponent.
    pub fn pow(base: Expr, exponent: Rational) -> Expr {
        if exponent.is_zero() {
            return Expr::one();
        }
        if exponent.is_one() {
            return base;
        }
        match base.node() {
            Node::Const(c) => match fold_const_pow(c, &exponent) {
                Some(v) => Expr::constant(v),
                // every negative power of zero is the same undefined value
                None if c.is_zero() && exponent.is_negative() => {
                    Expr::from_node(Node::Power(base, -Rational::one()))
                }
                None => Expr::from_node(Node::Power(base, exponent)),
            },
            Node::Power(inner, a) => {
                // (x^a)^e = x^(a e) for real x when e is an integer or the
                // numerator of a is odd; otherwise |x| would be lost.
                if exponent.is_integer() || a.numer().is_odd_int() {
                    Expr::pow(inner.clone(), a * &exponent)
                } else {
                    Expr::from_node(Node::Power(base, exponent))
                }
            }
            Node::Product(factors) if exponent.is_integer() => {
                Expr::product(factors.iter().map(|f| Expr::pow(f.clone(), exponent.clone())))
            }
            _ => Expr::from_node(Node::Power(base, exponent)),
        }
    }

    pub fn powi(&self, exponent: i64) -> Expr {
        Expr::pow(self.clone(), Rational::from_integer(exponent.into()))
    }

    pub fn sqrt(&self) -> Expr {
        Expr::pow(self.clone(), Rational::new(1.into(), 2.into()))
    }

    pub fn apply(func: Func, arg: Expr) -> Expr {
        if let Some(c) = arg.as_const() {
            let folded = match func {
                Func::Sin | Func::Tan | Func::Arctan if c.is_zero() => Some(Expr::zero()),
                Func::Cos | Func::Exp if c.is_zero() => Some(Expr::one()),
                Func::Log if c.is_one() => Some(Expr::zero()),
                _ => None,
            };
            if let Some(v) = folded {
                return v;
            }
        }
        Expr::from_node(Node::Apply(func, arg))
    }

    pub fn sin(&self) -> Expr {
        Expr::apply(Func::Sin, self.clone())
    }

    pub fn cos(&self) -> Expr {
        Expr::apply(Func::Cos, self.clone())
    }

    pub fn arctan(&self) -> Expr {
        Expr::apply(Func::Arctan, self.clone())
    }

    /// Splits `c * rest` into its rational coefficient and the remainder.
    pub(crate) fn split_coefficient(&self) -> (Rational, Expr) {
        match self.node() {
            Node::Const(c) => (c.clone(), Expr::one()),
            Node::Product(factors) => match factors[0].node() {
                Node::Const(c) => {
                    let rest = if factors.len() == 2 {
                        factors[1].clone()
                    } else {
                        Expr::from_node(Node::Product(factors[1..].to_vec()))
                    };
                    (c.clone(), rest)
                }
                _ => (Rational::one(), self.clone()),
            },
            _ => (Rational::one(), self.clone()),
        }
    }

    /// Rebuilds the tree bottom-up, replacing variables via `f`.
    pub fn map_vars(&self, f: &mut impl FnMut(&Symbol) -> Option<Expr>) -> Expr {
        match self.node() {
            Node::Const(_) => self.clone(),
            Node::Var(s) => f(s).unwrap_or_else(|| self.clone()),
            Node::Sum(ops) => Expr::sum(ops.iter().map(|o| o.map_vars(f))),
            Node::Product(ops) => Expr::product(ops.iter().map(|o| o.map_vars(f))),
            Node::Power(b, e) => Expr::pow(b.map_vars(f), e.clone()),
            Node::Apply(func, a) => Expr::apply(*func, a.map_vars(f)),
        }
    }

    /// Simultaneous substitution of symbols, followed by canonicalization.
    pub fn substitute(&self, map: &BTreeMap<Symbol, Expr>) -> Expr {
        if map.is_empty() {
            return self.clone();
        }
        self.map_vars(&mut |s| map.get(s).cloned())
    }

    pub fn free_symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        match self.node() {
            Node::Const(_) => {}
            Node::Var(s) => {
                out.insert(s.clone());
            }
            Node::Sum(ops) | Node::Product(ops) => ops.iter().for_each(|o| o.collect_symbols(out)),
            Node::Power(b, _) => b.collect_symbols(out),
            Node::Apply(_, a) => a.collect_symbols(out),
        }
    }

    pub fn contains(&self, symbol: &Symbol) -> bool {
        match self.node() {
            Node::Const(_) => false,
            Node::Var(s) => s == symbol,
            Node::Sum(ops) | Node::Product(ops) => ops.iter().any(|o| o.contains(symbol)),
            Node::Power(b, _) => b.contains(symbol),
            Node::Apply(_, a) => a.contains(symbol),
        }
    }

    /// Highest jet order among the free symbols.
    pub fn jet_order(&self) -> u8 {
        self.free_symbols().iter().map(Symbol::jet_order).max().unwrap_or(0)
    }

    /// Largest index of any `q`/`p` symbol (and their derivatives).
    pub fn max_index(&self) -> usize {
        self.free_symbols().iter().filter_map(Symbol::index).max().unwrap_or(0)
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self.node() {
            Node::Const(_) | Node::Var(_) => 1,
            Node::Sum(ops) | Node::Product(ops) => 1 + ops.iter().map(Expr::size).sum::<usize>(),
            Node::Power(b, _) => 1 + b.size(),
            Node::Apply(_, a) => 1 + a.size(),
        }
    }
}

trait OddInt {
    fn is_odd_int(&self) -> bool;
}

impl OddInt for BigInt {
    fn is_odd_int(&self) -> bool {
        num::Integer::is_odd(self)
    }
}

/// Folds `c ^ e` when the result is an exact rational of reasonable size.
fn fold_const_pow(c: &Rational, e: &Rational) -> Option<Rational> {
    if c.is_one() {
        return Some(Rational::one());
    }
    if c.is_zero() {
        return if e.is_positive() { Some(Rational::zero()) } else { None };
    }
    let num = e.numer().to_i64()?;
    let den = e.denom().to_u32()?;
    if num.abs() > MAX_FOLD_EXPONENT {
        return None;
    }
    let bits = c.numer().bits().max(c.denom().bits());
    if bits.saturating_mul(num.unsigned_abs()) / u64::from(den) > MAX_FOLD_BITS {
        return None;
    }
    let root = if den == 1 {
        c.clone()
    } else {
        if c.is_negative() && den % 2 == 0 {
            return None;
        }
        let rn = exact_root(c.numer(), den)?;
        let rd = exact_root(c.denom(), den)?;
        Rational::new(rn, rd)
    };
    let powered = num::pow::pow(root, num.unsigned_abs() as usize);
    Some(if num < 0 { powered.recip() } else { powered })
}

fn exact_root(x: &BigInt, n: u32) -> Option<BigInt> {
    let r = x.nth_root(n);
    if num::pow::pow(r.clone(), n as usize) == *x {
        Some(r)
    } else {
        None
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl From<i64> for Expr {
    fn from(v: i64) -> Self {
        Expr::int(v)
    }
}

impl From<Symbol> for Expr {
    fn from(s: Symbol) -> Self {
        Expr::var(s)
    }
}

macro_rules! binary_ops {
    ($($lhs:ty, $rhs:ty);*) => {$(
        impl Add<$rhs> for $lhs {
            type Output = Expr;
            fn add(self, rhs: $rhs) -> Expr {
                Expr::sum([self.clone(), rhs.clone()])
            }
        }
        impl Sub<$rhs> for $lhs {
            type Output = Expr;
            fn sub(self, rhs: $rhs) -> Expr {
                Expr::sum([self.clone(), -rhs.clone()])
            }
        }
        impl Mul<$rhs> for $lhs {
            type Output = Expr;
            fn mul(self, rhs: $rhs) -> Expr {
                Expr::product([self.clone(), rhs.clone()])
            }
        }
        impl Div<$rhs> for $lhs {
            type Output = Expr;
            fn div(self, rhs: $rhs) -> Expr {
                Expr::product([self.clone(), rhs.clone().powi(-1)])
            }
        }
    )*};
}

binary_ops!(Expr, Expr; Expr, &Expr; &Expr, Expr; &Expr, &Expr);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::product([Expr::int(-1), self])
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -self.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> Expr {
        Expr::q(1)
    }

    #[test]
    fn like_terms_collect() {
        let p = Expr::p(1);
        let e = p.powi(2) - p.powi(2) / Expr::int(2) - p.powi(2) / Expr::int(2);
        assert!(e.is_zero());
    }

    #[test]
    fn powers_merge() {
        assert_eq!(q() / q().powi(3), q().powi(-2));
        assert_eq!(q().sqrt() * q().sqrt(), q());
    }

    #[test]
    fn constant_powers_fold() {
        let e = Expr::pow(Expr::int(2), Expr::int(3).powi(2).as_const().unwrap().clone());
        assert_eq!(e, Expr::int(512));
        assert_eq!(Expr::int(4).sqrt(), Expr::int(2));
        assert_eq!(Expr::pow(Expr::int(-8), Rational::new(1.into(), 3.into())), Expr::int(-2));
        assert!(matches!(Expr::int(2).sqrt().node(), Node::Power(..)));
        assert!(matches!(Expr::int(0).powi(-1).node(), Node::Power(..)));
    }

    #[test]
    fn even_power_roots_keep_absolute_value() {
        let e = q().powi(2).sqrt();
        assert!(matches!(e.node(), Node::Power(b, _) if matches!(b.node(), Node::Power(..))));
    }

    #[test]
    fn operand_order_is_irrelevant() {
        let a = Expr::t() * Expr::p(2) + Expr::q(1).powi(2) - Expr::int(3);
        let b = Expr::int(-3) + Expr::q(1).powi(2) + Expr::p(2) * Expr::t();
        assert_eq!(a, b);
    }

    #[test]
    fn substitution_cancels() {
        let e = Expr::dq(1) - Expr::p(1);
        let map = BTreeMap::from([(Symbol::CoordDeriv(1, 1), Expr::p(1))]);
        assert!(e.substitute(&map).is_zero());
        let e = Expr::p(1) * Expr::dq(1);
        assert_eq!(e.substitute(&map), Expr::p(1).powi(2));
        let e = Expr::t().powi(2) / q().powi(2);
        let map = BTreeMap::from([(Symbol::Coord(1), Expr::int(2)), (Symbol::Time, Expr::int(2))]);
        assert_eq!(e.substitute(&map), Expr::one());
    }

    #[test]
    fn division_by_zero_has_one_form() {
        let inf = Expr::pow(Expr::zero(), -Rational::one());
        assert_eq!(Expr::pow(Expr::zero(), Rational::new((-1).into(), 2.into())), inf);
        assert_eq!(Expr::pow(Expr::zero(), Rational::from_integer((-3).into())), inf);
        assert_eq!(Expr::int(7) * Expr::t() * inf.clone(), inf);
        assert_eq!(Expr::zero() * inf.clone(), Expr::zero());
    }
}
