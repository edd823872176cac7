use super::{Expr, ExprError, Func, Node, Rational, Symbol, MAX_JET_ORDER};

use num::One;

/// Applies the derivation that maps each variable `s` to `dvar(s)`,
/// extended to all expressions by linearity and the chain rule.
fn derivation(e: &Expr, dvar: &impl Fn(&Symbol) -> Expr) -> Expr {
    match e.node() {
        Node::Const(_) => Expr::zero(),
        Node::Var(s) => dvar(s),
        Node::Sum(ops) => Expr::sum(ops.iter().map(|o| derivation(o, dvar))),
        Node::Product(ops) => {
            let mut terms = Vec::with_capacity(ops.len());
            for (i, op) in ops.iter().enumerate() {
                let d = derivation(op, dvar);
                if d.is_zero() {
                    continue;
                }
                let others = ops
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, o)| o.clone());
                terms.push(Expr::product(others.chain(std::iter::once(d))));
            }
            Expr::sum(terms)
        }
        Node::Power(base, exponent) => {
            let d = derivation(base, dvar);
            if d.is_zero() {
                return Expr::zero();
            }
            Expr::product([
                Expr::constant(exponent.clone()),
                Expr::pow(base.clone(), exponent - Rational::one()),
                d,
            ])
        }
        Node::Apply(func, arg) => {
            let d = derivation(arg, dvar);
            if d.is_zero() {
                return Expr::zero();
            }
            let outer = match func {
                Func::Sin => arg.cos(),
                Func::Cos => -arg.sin(),
                Func::Tan => Expr::apply(Func::Cos, arg.clone()).powi(-2),
                Func::Arctan => (Expr::one() + arg.powi(2)).powi(-1),
                Func::Exp => Expr::apply(Func::Exp, arg.clone()),
                Func::Log => arg.powi(-1),
            };
            outer * d
        }
    }
}

/// Partial derivative `∂e/∂s`, all other symbols held fixed.
pub fn partial_diff(e: &Expr, s: &Symbol) -> Expr {
    if !e.contains(s) {
        return Expr::zero();
    }
    derivation(e, &|x| if x == s { Expr::one() } else { Expr::zero() })
}

/// Total time derivative
/// `D = ∂t + q̇ⁱ∂qⁱ + ṗᵢ∂pᵢ + q̈ⁱ∂q̇ⁱ + p̈ᵢ∂ṗᵢ`.
///
/// Inputs may contain first-order jet symbols only, so the result stays
/// inside the jet space truncated at order two.
pub fn total_derivative(e: &Expr) -> Result<Expr, ExprError> {
    if let Some(s) = e
        .free_symbols()
        .into_iter()
        .find(|s| s.jet_order() >= MAX_JET_ORDER)
    {
        let order = s.jet_order();
        return Err(ExprError::JetOrderExceeded(s, order, MAX_JET_ORDER - 1));
    }
    Ok(derivation(e, &|s| match s {
        Symbol::Time => Expr::one(),
        other => other.time_successor().map_or_else(Expr::zero, Expr::var),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::simplify;

    #[test]
    fn polynomial_rule() {
        let (q, p) = (Expr::q(1), Expr::p(1));
        let e = p.powi(2) + q.powi(-2);
        assert_eq!(partial_diff(&e, &Symbol::Momentum(1)), Expr::int(2) * &p);
        let e = q.powi(2) / Expr::int(2);
        assert_eq!(partial_diff(&e, &Symbol::Coord(1)), q);
    }

    #[test]
    fn total_derivative_rules() {
        let (q, p) = (Expr::q(1), Expr::p(1));
        let d = total_derivative(&(q.powi(2) / Expr::int(2))).unwrap();
        assert_eq!(d, &q * Expr::dq(1));
        assert!(total_derivative(&Expr::int(7)).unwrap().is_zero());
        let d = total_derivative(&(&p * &q)).unwrap();
        assert_eq!(d, Expr::dp(1) * &q + &p * Expr::dq(1));
        let d = total_derivative(&Expr::t().sin()).unwrap();
        assert_eq!(d, Expr::t().cos());
    }

    #[test]
    fn total_derivative_rejects_second_order() {
        let e = Expr::var(Symbol::CoordDeriv(1, 2));
        assert!(matches!(total_derivative(&e), Err(ExprError::JetOrderExceeded(..))));
        let d = total_derivative(&Expr::dq(1).powi(2)).unwrap();
        assert_eq!(d, Expr::int(2) * Expr::dq(1) * Expr::var(Symbol::CoordDeriv(1, 2)));
    }

    #[test]
    fn arctan_derivative() {
        let (q, p) = (Expr::q(1), Expr::p(1));
        let e = (&p / &q).arctan();
        let d = simplify(&partial_diff(&e, &Symbol::Momentum(1)));
        let expected = simplify(&(&q / (p.powi(2) + q.powi(2))));
        assert_eq!(d, expected);
    }
}
