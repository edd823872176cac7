//! Rational-function normal form.
//!
//! An expression is brought to `N / (f₁^k₁ ⋯ f_m^k_m)` where `N` is a
//! Laurent polynomial over *atoms* and each `fᵢ` is a normalized
//! polynomial (monic in lex order, no monomial content). Atoms are jet
//! symbols and parameters (any rational exponent), radicals `b^r` with a
//! non-variable base and `0 < r < 1`, and opaque kernels such as `sin(x)`.
//! Integer parts of radical exponents are moved back into polynomial
//! arithmetic, so `√S · √S` becomes `S`.
//!
//! The numerator vanishes as a formal polynomial only if the expression is
//! identically zero, which makes the normal form a sound zero test.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num::{One, Signed, ToPrimitive, Zero};

use super::{Expr, Node, Rational, Symbol};

/// Multi-term integer powers above this are kept unexpanded.
const MAX_EXPANSION_EXPONENT: i64 = 64;
/// Step budget for trial division of a numerator by a denominator factor.
const MAX_DIVISION_STEPS: usize = 20_000;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Atom {
    Sym(Symbol),
    Radical(Expr),
    Opaque(Expr),
}

impl Atom {
    fn to_expr(&self, exponent: &Rational) -> Expr {
        match self {
            Atom::Sym(s) => Expr::pow(Expr::var(s.clone()), exponent.clone()),
            Atom::Radical(base) | Atom::Opaque(base) => Expr::pow(base.clone(), exponent.clone()),
        }
    }

    fn contains(&self, s: &Symbol) -> bool {
        match self {
            Atom::Sym(x) => x == s,
            Atom::Radical(e) | Atom::Opaque(e) => e.contains(s),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
struct Monomial(BTreeMap<Atom, Rational>);

impl Monomial {
    fn single(atom: Atom, exponent: Rational) -> Self {
        let mut m = BTreeMap::new();
        if !exponent.is_zero() {
            m.insert(atom, exponent);
        }
        Monomial(m)
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = self.0.clone();
        for (a, e) in &other.0 {
            let entry = out.entry(a.clone()).or_insert_with(Rational::zero);
            *entry += e;
            if entry.is_zero() {
                out.remove(a);
            }
        }
        Monomial(out)
    }

    fn inv(&self) -> Monomial {
        Monomial(self.0.iter().map(|(a, e)| (a.clone(), -e)).collect())
    }

    fn exponent(&self, a: &Atom) -> Rational {
        self.0.get(a).cloned().unwrap_or_else(Rational::zero)
    }

    /// Pure lexicographic monomial order; earlier atoms dominate.
    fn lex_cmp(&self, other: &Monomial) -> Ordering {
        let mut a = self.0.iter().peekable();
        let mut b = other.0.iter().peekable();
        loop {
            match (a.peek(), b.peek()) {
                (None, None) => return Ordering::Equal,
                (Some((_, ea)), None) => return ea.cmp(&&Rational::zero()),
                (None, Some((_, eb))) => return Rational::zero().cmp(eb),
                (Some((xa, ea)), Some((xb, eb))) => match xa.cmp(xb) {
                    Ordering::Less => return ea.cmp(&&Rational::zero()),
                    Ordering::Greater => return Rational::zero().cmp(eb),
                    Ordering::Equal => {
                        let c = ea.cmp(eb);
                        if c != Ordering::Equal {
                            return c;
                        }
                        a.next();
                        b.next();
                    }
                },
            }
        }
    }

    fn is_nonnegative(&self) -> bool {
        self.0.values().all(|e| !e.is_negative())
    }

    fn to_expr(&self, coefficient: &Rational) -> Expr {
        Expr::product(
            std::iter::once(Expr::constant(coefficient.clone()))
                .chain(self.0.iter().map(|(a, e)| a.to_expr(e))),
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
struct Poly(BTreeMap<Monomial, Rational>);

impl Poly {
    fn constant(c: Rational) -> Poly {
        let mut p = Poly::default();
        p.add_term(Monomial::default(), c);
        p
    }

    fn monomial(m: Monomial, c: Rational) -> Poly {
        let mut p = Poly::default();
        p.add_term(m, c);
        p
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.0.entry(m.clone()).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.0.remove(&m);
        }
    }

    fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.0 {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    /// Formal product: exponents add, no radical normalization.
    fn mul_raw(&self, other: &Poly) -> Poly {
        let mut out = Poly::default();
        for (ma, ca) in &self.0 {
            for (mb, cb) in &other.0 {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    fn mul_term(&self, m: &Monomial, c: &Rational) -> Poly {
        Poly(self.0.iter().map(|(mm, cc)| (mm.mul(m), cc * c)).collect())
    }

    fn leading(&self) -> Option<(&Monomial, &Rational)> {
        self.0.iter().max_by(|a, b| a.0.lex_cmp(b.0))
    }

    fn single_term(&self) -> Option<(&Monomial, &Rational)> {
        if self.0.len() == 1 {
            self.0.iter().next()
        } else {
            None
        }
    }

    /// Monomial whose exponent for each atom is the minimum over all terms
    /// (an absent atom counts as exponent zero).
    fn monomial_content(&self) -> Monomial {
        let mut atoms: BTreeMap<Atom, Rational> = BTreeMap::new();
        for m in self.0.keys() {
            for a in m.0.keys() {
                if !atoms.contains_key(a) {
                    let min = self.0.keys().map(|t| t.exponent(a)).min().unwrap();
                    atoms.insert(a.clone(), min);
                }
            }
        }
        Monomial(atoms.into_iter().filter(|(_, e)| !e.is_zero()).collect())
    }

    fn to_expr(&self) -> Expr {
        Expr::sum(self.0.iter().map(|(m, c)| m.to_expr(c)))
    }

    /// Exact quotient `self / divisor`, if the division leaves no remainder.
    fn exact_div(&self, divisor: &Poly) -> Option<Poly> {
        let (lm_d, lc_d) = divisor.leading()?;
        let content = self.monomial_content();
        let shift = Monomial(
            content
                .0
                .iter()
                .filter(|(_, e)| e.is_negative())
                .map(|(a, e)| (a.clone(), -e))
                .collect(),
        );
        let mut rem = self.mul_term(&shift, &Rational::one());
        let mut quotient = Poly::default();
        for _ in 0..MAX_DIVISION_STEPS {
            let Some((lm, lc)) = rem.leading() else {
                return Some(quotient.mul_term(&shift.inv(), &Rational::one()));
            };
            let factor = lm.mul(&lm_d.inv());
            if !factor.is_nonnegative() {
                return None;
            }
            let coeff = lc / lc_d;
            rem = rem.add(&divisor.mul_term(&factor, &-&coeff));
            quotient.add_term(factor, coeff);
        }
        None
    }
}

/// Splits a multi-term polynomial as `c · m · f` with `f` normalized.
fn normalize_factor(p: &Poly) -> (Rational, Monomial, Poly) {
    let m = p.monomial_content();
    let reduced = p.mul_term(&m.inv(), &Rational::one());
    let c = reduced.leading().map(|(_, c)| c.clone()).unwrap_or_else(Rational::one);
    let f = reduced.mul_term(&Monomial::default(), &c.recip());
    (c, m, f)
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct RatFunc {
    num: Poly,
    den: BTreeMap<Poly, u32>,
}

fn merge_den(a: &BTreeMap<Poly, u32>, b: &BTreeMap<Poly, u32>) -> BTreeMap<Poly, u32> {
    let mut out = a.clone();
    for (f, k) in b {
        *out.entry(f.clone()).or_insert(0) += k;
    }
    out
}

impl RatFunc {
    fn poly(num: Poly) -> RatFunc {
        RatFunc { num, den: BTreeMap::new() }
    }

    fn constant(c: Rational) -> RatFunc {
        RatFunc::poly(Poly::constant(c))
    }

    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Reduces radical exponents into `[0, 1)`, multiplying in integer
    /// powers of their bases.
    fn from_poly(p: Poly) -> RatFunc {
        let mut clean = Poly::default();
        let mut extras: Vec<RatFunc> = Vec::new();
        for (m, c) in p.0 {
            let mut kept = BTreeMap::new();
            let mut pulled: Vec<(Expr, i64)> = Vec::new();
            for (a, e) in m.0 {
                if let Atom::Radical(base) = &a {
                    let k = e.floor();
                    if !k.is_zero() {
                        pulled.push((base.clone(), k.to_integer().to_i64().unwrap_or(0)));
                        let frac = &e - &k;
                        if !frac.is_zero() {
                            kept.insert(a, frac);
                        }
                        continue;
                    }
                }
                kept.insert(a, e);
            }
            if pulled.is_empty() {
                clean.add_term(Monomial(kept), c);
            } else {
                let mut acc = RatFunc::poly(Poly::monomial(Monomial(kept), c));
                for (base, k) in pulled {
                    acc = acc.mul(&to_ratfunc(&base).pow_int(k));
                }
                extras.push(acc);
            }
        }
        extras
            .into_iter()
            .fold(RatFunc::poly(clean), |acc, x| acc.add(&x))
    }

    fn with_den(mut self, den: &BTreeMap<Poly, u32>) -> RatFunc {
        self.den = merge_den(&self.den, den);
        self.cancel()
    }

    fn cancel(mut self) -> RatFunc {
        if self.num.is_zero() {
            self.den.clear();
            return self;
        }
        let factors: Vec<Poly> = self.den.keys().cloned().collect();
        for f in factors {
            let mut k = self.den[&f];
            while k > 0 {
                match self.num.exact_div(&f) {
                    Some(q) => {
                        self.num = q;
                        k -= 1;
                    }
                    None => break,
                }
            }
            if k == 0 {
                self.den.remove(&f);
            } else {
                self.den.insert(f, k);
            }
        }
        self
    }

    fn add(&self, other: &RatFunc) -> RatFunc {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if self.den == other.den {
            return RatFunc::from_poly(self.num.add(&other.num)).with_den(&self.den);
        }
        let mut lcm = self.den.clone();
        for (f, k) in &other.den {
            let e = lcm.entry(f.clone()).or_insert(0);
            *e = (*e).max(*k);
        }
        let lift = |r: &RatFunc| -> Poly {
            let mut acc = r.num.clone();
            for (f, k) in &lcm {
                let missing = k - r.den.get(f).copied().unwrap_or(0);
                for _ in 0..missing {
                    acc = acc.mul_raw(f);
                }
            }
            acc
        };
        let num = lift(self).add(&lift(other));
        RatFunc::from_poly(num).with_den(&lcm)
    }

    fn mul(&self, other: &RatFunc) -> RatFunc {
        if self.is_zero() || other.is_zero() {
            return RatFunc::constant(Rational::zero());
        }
        let den = merge_den(&self.den, &other.den);
        RatFunc::from_poly(self.num.mul_raw(&other.num)).with_den(&den)
    }

    /// Reciprocal; `None` for the zero function.
    fn inv(&self) -> Option<RatFunc> {
        if self.is_zero() {
            return None;
        }
        let mut num = Poly::constant(Rational::one());
        for (f, k) in &self.den {
            for _ in 0..*k {
                num = num.mul_raw(f);
            }
        }
        let result = if let Some((m, c)) = self.num.single_term() {
            RatFunc::from_poly(num.mul_term(&m.inv(), &c.recip()))
        } else {
            let (c, m, f) = normalize_factor(&self.num);
            let den = BTreeMap::from([(f, 1)]);
            RatFunc::from_poly(num.mul_term(&m.inv(), &c.recip())).with_den(&den)
        };
        Some(result)
    }

    fn pow_int(&self, k: i64) -> RatFunc {
        if k < 0 {
            return match self.inv() {
                Some(r) => r.pow_int(-k),
                None => RatFunc::constant(Rational::zero()),
            };
        }
        let mut result = RatFunc::constant(Rational::one());
        let mut base = self.clone();
        let mut k = k as u64;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    fn to_expr(&self) -> Expr {
        let num = self.num.to_expr();
        if self.den.is_empty() {
            return num;
        }
        Expr::product(
            std::iter::once(num).chain(
                self.den
                    .iter()
                    .map(|(f, k)| Expr::pow(f.to_expr(), Rational::from_integer((-(*k as i64)).into()))),
            ),
        )
    }
}

fn atom(a: Atom, exponent: Rational) -> RatFunc {
    RatFunc::from_poly(Poly::monomial(Monomial::single(a, exponent), Rational::one()))
}

fn to_ratfunc(e: &Expr) -> RatFunc {
    match e.node() {
        Node::Const(c) => RatFunc::constant(c.clone()),
        Node::Var(s) => atom(Atom::Sym(s.clone()), Rational::one()),
        Node::Sum(ops) => ops
            .iter()
            .fold(RatFunc::constant(Rational::zero()), |acc, o| acc.add(&to_ratfunc(o))),
        Node::Product(ops) => ops
            .iter()
            .fold(RatFunc::constant(Rational::one()), |acc, o| acc.mul(&to_ratfunc(o))),
        Node::Power(base, r) if r.is_integer() => {
            let k = r.to_integer().to_i64().unwrap_or(i64::MAX);
            let rb = to_ratfunc(base);
            let single = rb.den.is_empty() && rb.num.0.len() <= 1;
            if rb.is_zero() && k < 0 {
                atom(Atom::Opaque(Expr::pow(Expr::zero(), r.clone())), Rational::one())
            } else if !single && k.abs() > MAX_EXPANSION_EXPONENT {
                atom(Atom::Opaque(Expr::pow(rb.to_expr(), r.clone())), Rational::one())
            } else {
                rb.pow_int(k)
            }
        }
        Node::Power(base, r) => {
            if let Node::Var(s) = base.node() {
                return atom(Atom::Sym(s.clone()), r.clone());
            }
            let canonical = to_ratfunc(base).to_expr();
            let powered = Expr::pow(canonical, r.clone());
            match powered.node() {
                Node::Const(c) => RatFunc::constant(c.clone()),
                Node::Power(b, e) if e.is_integer() => {
                    // a fractional power collapsed onto an integer one
                    to_ratfunc(&Expr::pow(b.clone(), e.clone()))
                }
                Node::Power(b, e) => match b.node() {
                    Node::Var(s) => atom(Atom::Sym(s.clone()), e.clone()),
                    Node::Const(c) if c.is_zero() => {
                        atom(Atom::Opaque(powered.clone()), Rational::one())
                    }
                    _ => atom(Atom::Radical(b.clone()), e.clone()),
                },
                _ => to_ratfunc(&powered),
            }
        }
        Node::Apply(func, arg) => {
            let inner = simplify(arg);
            let applied = Expr::apply(*func, inner);
            match applied.node() {
                Node::Apply(..) => atom(Atom::Opaque(applied), Rational::one()),
                _ => to_ratfunc(&applied),
            }
        }
    }
}

/// Full normalization: expansion, like-term collection over a common
/// monomial basis, and rational-function normalization over a common
/// denominator. Idempotent.
pub fn simplify(e: &Expr) -> Expr {
    to_ratfunc(e).to_expr()
}

/// Antiderivative of `e` with respect to `x` when `e` is a (Laurent)
/// polynomial in `x` whose other factors do not depend on `x`.
pub(crate) fn antiderivative(e: &Expr, x: &Symbol) -> Option<Expr> {
    let rf = to_ratfunc(e);
    if rf.den.keys().any(|f| f.0.keys().any(|m| m.0.keys().any(|a| a.contains(x)))) {
        return None;
    }
    let var = Atom::Sym(x.clone());
    let mut out = Poly::default();
    for (m, c) in &rf.num.0 {
        if m.0.keys().any(|a| *a != var && a.contains(x)) {
            return None;
        }
        let k = m.exponent(&var);
        let k1 = &k + Rational::one();
        if k1.is_zero() {
            return None;
        }
        let lifted = m.mul(&Monomial::single(var.clone(), Rational::one()));
        out.add_term(lifted, c / &k1);
    }
    let den: BTreeMap<Poly, u32> = rf.den.clone();
    Some(RatFunc { num: out, den }.to_expr())
}
