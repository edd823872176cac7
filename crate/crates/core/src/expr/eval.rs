use std::collections::BTreeMap;

use num::{Signed, ToPrimitive};
use thiserror::Error;

use super::{Expr, Func, Node, Rational, Symbol};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("symbol `{0}` is not bound")]
    Unbound(Symbol),
    #[error("singular evaluation ({reason}) in `{expr}`")]
    Singular { expr: Expr, reason: &'static str },
}

/// Values for the free symbols of an expression.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvaluationPoint {
    bindings: BTreeMap<Symbol, f64>,
}

impl EvaluationPoint {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, symbol: Symbol, value: f64) -> Self {
        self.bindings.insert(symbol, value);
        self
    }

    pub fn set(&mut self, symbol: Symbol, value: f64) {
        self.bindings.insert(symbol, value);
    }

    pub fn get(&self, symbol: &Symbol) -> Option<f64> {
        self.bindings.get(symbol).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, &f64)> {
        self.bindings.iter()
    }
}

impl FromIterator<(Symbol, f64)> for EvaluationPoint {
    fn from_iter<I: IntoIterator<Item = (Symbol, f64)>>(iter: I) -> Self {
        EvaluationPoint { bindings: iter.into_iter().collect() }
    }
}

/// A rational exponent prepared for floating-point evaluation. Shared by
/// the tree evaluator and the compiled evaluator so both round identically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RealExponent {
    Int(i32),
    Half,
    Frac { odd_den: bool, odd_num: bool, value: f64 },
}

impl RealExponent {
    pub fn new(e: &Rational) -> Self {
        if e.is_integer() {
            if let Some(k) = e.to_integer().to_i32() {
                return RealExponent::Int(k);
            }
        }
        if *e.numer() == 1.into() && *e.denom() == 2.into() {
            return RealExponent::Half;
        }
        RealExponent::Frac {
            odd_den: num::Integer::is_odd(e.denom()),
            odd_num: num::Integer::is_odd(&e.numer().abs()),
            value: e.to_f64().unwrap_or(f64::NAN),
        }
    }

    pub fn apply(self, base: f64) -> Result<f64, &'static str> {
        match self {
            RealExponent::Int(k) => {
                if base == 0.0 && k < 0 {
                    Err("division by zero")
                } else {
                    Ok(base.powi(k))
                }
            }
            RealExponent::Half => {
                if base < 0.0 {
                    Err("square root of a negative number")
                } else {
                    Ok(base.sqrt())
                }
            }
            RealExponent::Frac { odd_den, odd_num, value } => {
                if base == 0.0 && value < 0.0 {
                    Err("division by zero")
                } else if base < 0.0 {
                    if !odd_den {
                        return Err("even root of a negative number");
                    }
                    let m = (-base).powf(value);
                    Ok(if odd_num { -m } else { m })
                } else {
                    Ok(base.powf(value))
                }
            }
        }
    }
}

pub(crate) fn apply_func(func: Func, x: f64) -> Result<f64, &'static str> {
    Ok(match func {
        Func::Sin => x.sin(),
        Func::Cos => x.cos(),
        Func::Tan => x.tan(),
        Func::Arctan => x.atan(),
        Func::Exp => x.exp(),
        Func::Log => {
            if x <= 0.0 {
                return Err("logarithm of a non-positive number");
            }
            x.ln()
        }
    })
}

pub(crate) fn const_to_f64(c: &Rational) -> f64 {
    c.to_f64().unwrap_or(f64::NAN)
}

/// Recursive floating-point evaluation. Non-finite intermediate values are
/// reported as singular rather than returned.
pub fn evaluate(e: &Expr, point: &EvaluationPoint) -> Result<f64, EvalError> {
    let singular = |reason| EvalError::Singular { expr: e.clone(), reason };
    let value = match e.node() {
        Node::Const(c) => const_to_f64(c),
        Node::Var(s) => point.get(s).ok_or_else(|| EvalError::Unbound(s.clone()))?,
        Node::Sum(ops) => {
            let mut acc = evaluate(&ops[0], point)?;
            for op in &ops[1..] {
                acc += evaluate(op, point)?;
            }
            acc
        }
        Node::Product(ops) => {
            let mut acc = evaluate(&ops[0], point)?;
            for op in &ops[1..] {
                acc *= evaluate(op, point)?;
            }
            acc
        }
        Node::Power(base, exponent) => {
            let b = evaluate(base, point)?;
            RealExponent::new(exponent).apply(b).map_err(singular)?
        }
        Node::Apply(func, arg) => {
            let a = evaluate(arg, point)?;
            apply_func(*func, a).map_err(singular)?
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(singular("non-finite value"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluates_examples() {
        let (q, p) = (Expr::q(1), Expr::p(1));
        let h = (p.powi(2) + q.powi(-2)) / Expr::int(2);
        let pt = EvaluationPoint::new()
            .with(Symbol::Coord(1), 1.0)
            .with(Symbol::Momentum(1), 1.0);
        assert_eq!(evaluate(&h, &pt).unwrap(), 1.0);

        let r = (Expr::q(1).powi(2) + Expr::q(2).powi(2) + Expr::q(3).powi(2)).sqrt();
        let pt = EvaluationPoint::new()
            .with(Symbol::Coord(1), 3.0)
            .with(Symbol::Coord(2), 4.0)
            .with(Symbol::Coord(3), 0.0);
        assert_eq!(evaluate(&r, &pt).unwrap(), 5.0);
    }

    #[test]
    fn pole_is_an_error() {
        let e = Expr::q(1).powi(-1);
        let pt = EvaluationPoint::new().with(Symbol::Coord(1), 0.0);
        assert!(matches!(evaluate(&e, &pt), Err(EvalError::Singular { .. })));
        let e = Expr::q(1).sqrt();
        let pt = EvaluationPoint::new().with(Symbol::Coord(1), -1.0);
        assert!(matches!(evaluate(&e, &pt), Err(EvalError::Singular { .. })));
        assert!(matches!(
            evaluate(&Expr::p(1), &EvaluationPoint::new()),
            Err(EvalError::Unbound(Symbol::Momentum(1)))
        ));
    }

    #[test]
    fn odd_roots_of_negatives() {
        let e = Expr::pow(Expr::q(1), Rational::new(1.into(), 3.into()));
        let pt = EvaluationPoint::new().with(Symbol::Coord(1), -8.0);
        assert!((evaluate(&e, &pt).unwrap() + 2.0).abs() < 1e-12);
    }
}
