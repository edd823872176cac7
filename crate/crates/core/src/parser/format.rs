use std::fmt::{self, Write};

use num::{One, Signed};

use crate::expr::{Expr, Node, Rational};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Sum,
    Factor,
    Base,
}

/// Renders `e` in the input syntax. Parsing the result yields `e` again.
pub fn format_expression(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(e, Prec::Sum, &mut out);
    out
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_expression(self))
    }
}

fn write_rational(c: &Rational, out: &mut String) {
    if c.is_integer() {
        let _ = write!(out, "{}", c.numer());
    } else {
        let _ = write!(out, "{}/{}", c.numer(), c.denom());
    }
}

fn write_expr(e: &Expr, prec: Prec, out: &mut String) {
    match e.node() {
        Node::Const(c) => {
            let bare = c.is_integer() && !c.is_negative();
            let wrap = !bare && prec > Prec::Sum;
            if wrap {
                out.push('(');
            }
            write_rational(c, out);
            if wrap {
                out.push(')');
            }
        }
        Node::Var(s) => {
            let _ = write!(out, "{s}");
        }
        Node::Apply(func, arg) => {
            out.push_str(func.name());
            out.push('(');
            write_expr(arg, Prec::Sum, out);
            out.push(')');
        }
        Node::Sum(ops) => {
            if prec > Prec::Sum {
                out.push('(');
            }
            write_sum(ops, out);
            if prec > Prec::Sum {
                out.push(')');
            }
        }
        Node::Power(base, exponent) if exponent.is_positive() => {
            write_power(base, exponent, prec, out);
        }
        Node::Power(..) | Node::Product(_) => {
            let (c, rest) = e.split_coefficient();
            let factors = match rest.node() {
                Node::Product(fs) => fs.clone(),
                _ => vec![rest],
            };
            let wrap = prec > Prec::Sum;
            if wrap {
                out.push('(');
            }
            write_product(&c, &factors, out);
            if wrap {
                out.push(')');
            }
        }
    }
}

fn write_power(base: &Expr, exponent: &Rational, prec: Prec, out: &mut String) {
    if *exponent == Rational::new(1.into(), 2.into()) {
        out.push_str("sqrt(");
        write_expr(base, Prec::Sum, out);
        out.push(')');
        return;
    }
    let wrap = prec == Prec::Base;
    if wrap {
        out.push('(');
    }
    write_expr(base, Prec::Base, out);
    out.push('^');
    if exponent.is_integer() {
        write_rational(exponent, out);
    } else {
        out.push('(');
        write_rational(exponent, out);
        out.push(')');
    }
    if wrap {
        out.push(')');
    }
}

fn write_sum(ops: &[Expr], out: &mut String) {
    // constants go last so `q1^2 + 1` reads naturally
    let ordered = ops
        .iter()
        .filter(|o| o.as_const().is_none())
        .chain(ops.iter().filter(|o| o.as_const().is_some()));
    for (i, term) in ordered.enumerate() {
        let (c, rest) = term.split_coefficient();
        let negative = c.is_negative();
        if i == 0 {
            if negative {
                out.push('-');
            }
        } else {
            out.push_str(if negative { " - " } else { " + " });
        }
        let c = c.abs();
        if rest.is_one() {
            write_rational(&c, out);
            continue;
        }
        let factors = match rest.node() {
            Node::Product(fs) => fs.clone(),
            _ => vec![rest],
        };
        write_product(&c, &factors, out);
    }
}

/// Writes `c * factors` as `num/den`, moving negative powers below the line.
fn write_product(c: &Rational, factors: &[Expr], out: &mut String) {
    let mut numer = Vec::new();
    let mut denom = Vec::new();
    for f in factors {
        match f.node() {
            Node::Power(b, e) if e.is_negative() => denom.push(Expr::pow(b.clone(), -e)),
            _ => numer.push(f.clone()),
        }
    }
    if c.is_negative() {
        out.push('-');
    }
    let a = Rational::from_integer(c.numer().abs());
    let b = Rational::from_integer(c.denom().clone());

    let mut items = 0;
    if !a.is_one() || numer.is_empty() {
        write_rational(&a, out);
        items += 1;
    }
    for f in &numer {
        if items > 0 {
            out.push('*');
        }
        write_expr(f, Prec::Factor, out);
        items += 1;
    }

    let den_items = usize::from(!b.is_one()) + denom.len();
    if den_items == 0 {
        return;
    }
    out.push('/');
    let wrap = den_items > 1;
    if wrap {
        out.push('(');
    }
    let mut first = true;
    if !b.is_one() {
        write_rational(&b, out);
        first = false;
    }
    for f in &denom {
        if !first {
            out.push('*');
        }
        write_expr(f, Prec::Factor, out);
        first = false;
    }
    if wrap {
        out.push(')');
    }
}
