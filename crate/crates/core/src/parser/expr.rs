use std::collections::BTreeSet;

use thiserror::Error;

use super::lexer::{tokenize, Token};
use crate::expr::{Expr, Func, Rational, Symbol, MAX_JET_ORDER};

/// Nesting limit for parentheses, unary minus and exponent chains.
const MAX_DEPTH: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character `{0}`")]
    UnexpectedChar(char),
    #[error("expected {expected}, found {found}")]
    UnexpectedToken { expected: String, found: String },
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("unknown function `{0}`")]
    UnknownFunction(String),
    #[error("`{name}` is out of range for a system of dimension {n}")]
    IndexOutOfRange { name: String, n: usize },
    #[error("jet symbol `{0}` is not allowed here")]
    JetNotAllowed(String),
    #[error("exponent must be a rational constant")]
    NonConstantExponent,
    #[error("expression nested too deeply")]
    TooDeep,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at byte {offset}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContextError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("`{0}` is not a valid parameter name")]
    InvalidName(String),
    #[error("parameter name `{0}` collides with a reserved token")]
    Reserved(String),
}

/// What identifiers mean while parsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseContext {
    n: usize,
    parameters: BTreeSet<String>,
    allow_jet: bool,
}

/// A reserved token: `t`, a function name, or `q`/`p` with optional `d`
/// or `dd` prefix followed by digits.
pub fn is_reserved(name: &str) -> bool {
    if name == "t" || name == "sqrt" || Func::from_name(name).is_some() {
        return true;
    }
    parse_indexed(name).is_some()
}

/// `(jet order, is_coord, index)` for names like `q2`, `dp1`, `ddq3`.
fn parse_indexed(name: &str) -> Option<(u8, bool, usize)> {
    let order = name.bytes().take_while(|b| *b == b'd').count();
    let rest = &name[order..];
    let mut chars = rest.chars();
    let is_coord = match chars.next()? {
        'q' => true,
        'p' => false,
        _ => return None,
    };
    let digits = chars.as_str();
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let index = digits.parse::<usize>().unwrap_or(usize::MAX);
    Some((u8::try_from(order).unwrap_or(u8::MAX), is_coord, index))
}

fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic()) && chars.all(|c| c.is_ascii_alphanumeric())
}

impl ParseContext {
    pub fn new<I, S>(n: usize, parameters: I, allow_jet: bool) -> Result<Self, ContextError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        if n == 0 {
            return Err(ContextError::ZeroDimension);
        }
        let mut set = BTreeSet::new();
        for p in parameters {
            let p = p.into();
            if !is_identifier(&p) {
                return Err(ContextError::InvalidName(p));
            }
            if is_reserved(&p) {
                return Err(ContextError::Reserved(p));
            }
            set.insert(p);
        }
        Ok(ParseContext { n, parameters: set, allow_jet })
    }

    /// Context for dimension `n` without parameters or jet symbols.
    pub fn phase_space(n: usize) -> Self {
        ParseContext { n: n.max(1), parameters: BTreeSet::new(), allow_jet: false }
    }

    pub fn with_jet(mut self, allow: bool) -> Self {
        self.allow_jet = allow;
        self
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn parameters(&self) -> &BTreeSet<String> {
        &self.parameters
    }

    fn resolve(&self, name: &str) -> Result<Symbol, ParseErrorKind> {
        if name == "t" {
            return Ok(Symbol::Time);
        }
        if let Some((order, is_coord, index)) = parse_indexed(name) {
            if order > MAX_JET_ORDER {
                return Err(ParseErrorKind::UnknownIdentifier(name.to_string()));
            }
            if index == 0 || index > self.n {
                return Err(ParseErrorKind::IndexOutOfRange { name: name.to_string(), n: self.n });
            }
            if order > 0 && !self.allow_jet {
                return Err(ParseErrorKind::JetNotAllowed(name.to_string()));
            }
            return Ok(match (order, is_coord) {
                (0, true) => Symbol::Coord(index),
                (0, false) => Symbol::Momentum(index),
                (k, true) => Symbol::CoordDeriv(index, k),
                (k, false) => Symbol::MomentumDeriv(index, k),
            });
        }
        if self.parameters.contains(name) {
            return Ok(Symbol::param(name));
        }
        Err(ParseErrorKind::UnknownIdentifier(name.to_string()))
    }
}

struct Parser<'a> {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    depth: usize,
    ctx: &'a ParseContext,
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].0
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].1
    }

    fn advance(&mut self) -> (Token, usize) {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError { offset: self.offset(), kind }
    }

    fn expect(&mut self, token: Token) -> Result<(), ParseError> {
        if *self.peek() == token {
            self.advance();
            Ok(())
        } else {
            Err(self.error(ParseErrorKind::UnexpectedToken {
                expected: token.describe(),
                found: self.peek().describe(),
            }))
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            Err(self.error(ParseErrorKind::TooDeep))
        } else {
            Ok(())
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Token::Plus => {
                    self.advance();
                    acc = acc + self.term()?;
                }
                Token::Minus => {
                    self.advance();
                    acc = acc - self.term()?;
                }
                _ => break,
            }
        }
        self.depth -= 1;
        Ok(acc)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Token::Star => {
                    self.advance();
                    acc = acc * self.unary()?;
                }
                Token::Slash => {
                    self.advance();
                    acc = acc / self.unary()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Token::Minus {
            self.advance();
            self.enter()?;
            let inner = self.unary()?;
            self.depth -= 1;
            return Ok(-inner);
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() != Token::Caret {
            return Ok(base);
        }
        self.advance();
        let at = self.offset();
        self.enter()?;
        let exponent = self.unary()?;
        self.depth -= 1;
        match exponent.as_const() {
            Some(e) => Ok(Expr::pow(base, e.clone())),
            None => Err(ParseError { offset: at, kind: ParseErrorKind::NonConstantExponent }),
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let (token, at) = self.advance();
        match token {
            Token::Number(n) => Ok(Expr::constant(n)),
            Token::LParen => {
                let inner = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(inner)
            }
            Token::Ident(name) => {
                if *self.peek() == Token::LParen {
                    let func = if name == "sqrt" {
                        None
                    } else {
                        Some(Func::from_name(&name).ok_or(ParseError {
                            offset: at,
                            kind: ParseErrorKind::UnknownFunction(name.clone()),
                        })?)
                    };
                    self.advance();
                    let arg = self.expr()?;
                    self.expect(Token::RParen)?;
                    return Ok(match func {
                        Some(f) => Expr::apply(f, arg),
                        None => Expr::pow(arg, Rational::new(1.into(), 2.into())),
                    });
                }
                self.ctx
                    .resolve(&name)
                    .map(Expr::var)
                    .map_err(|kind| ParseError { offset: at, kind })
            }
            other => Err(ParseError {
                offset: at,
                kind: ParseErrorKind::UnexpectedToken {
                    expected: "a number, identifier or `(`".into(),
                    found: other.describe(),
                },
            }),
        }
    }
}

/// Parses an expression of the DSL into canonical form.
///
/// Precedence, from tightest: `^` (right-associative), unary `-`, `* /`,
/// `+ -`. Functions use call syntax; `sqrt(x)` is `x^(1/2)`.
pub fn parse_expression(text: &str, ctx: &ParseContext) -> Result<Expr, ParseError> {
    let tokens = tokenize(text).map_err(|(offset, c)| ParseError {
        offset,
        kind: ParseErrorKind::UnexpectedChar(c),
    })?;
    let mut parser = Parser { tokens, pos: 0, depth: 0, ctx };
    let e = parser.expr()?;
    if *parser.peek() != Token::End {
        return Err(parser.error(ParseErrorKind::UnexpectedToken {
            expected: "an operator or end of input".into(),
            found: parser.peek().describe(),
        }));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{Node, Symbol};

    fn ctx(n: usize) -> ParseContext {
        ParseContext::phase_space(n)
    }

    #[test]
    fn example_hamiltonian() {
        let h = parse_expression("(p1^2 + 1/q1^2)/2", &ctx(1)).unwrap();
        let expected = (Expr::p(1).powi(2) + Expr::q(1).powi(-2)) / Expr::int(2);
        assert_eq!(h, expected);
        assert_eq!(parse_expression("t", &ctx(1)).unwrap(), Expr::t());
    }

    #[test]
    fn kepler_potential_with_parameter() {
        let c = ParseContext::new(3, ["K"], false).unwrap();
        let e = parse_expression("K^2/sqrt(q1^2+q2^2+q3^2)", &c).unwrap();
        assert!(e.free_symbols().contains(&Symbol::param("K")));
        assert!(e.free_symbols().contains(&Symbol::Coord(3)));
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(parse_expression("1-2-3", &ctx(1)).unwrap(), Expr::int(-4));
        assert_eq!(parse_expression("2^3^2", &ctx(1)).unwrap(), Expr::int(512));
        assert_eq!(parse_expression("-2^2", &ctx(1)).unwrap(), Expr::int(-4));
        assert_eq!(parse_expression("2^-1", &ctx(1)).unwrap(), Expr::rational(1, 2));
        assert_eq!(parse_expression("1/2*q1", &ctx(1)).unwrap(), Expr::q(1) / Expr::int(2));
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_expression("q1 + q3", &ctx(2)).unwrap_err();
        assert_eq!(err.offset, 5);
        assert!(matches!(err.kind, ParseErrorKind::IndexOutOfRange { .. }));

        let err = parse_expression("x + 1", &ctx(1)).unwrap_err();
        assert_eq!(err, ParseError { offset: 0, kind: ParseErrorKind::UnknownIdentifier("x".into()) });

        let err = parse_expression("p1*dq1", &ctx(1)).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::JetNotAllowed(_)));
        assert!(parse_expression("p1*dq1 - ddp1", &ctx(1).with_jet(true)).is_ok());

        let err = parse_expression("q1^q1", &ctx(1)).unwrap_err();
        assert_eq!(err.offset, 3);
        assert!(parse_expression("(q1", &ctx(1)).is_err());
        assert!(parse_expression("q1 q1", &ctx(1)).is_err());
        assert!(parse_expression("foo(q1)", &ctx(1)).is_err());
        assert!(parse_expression("", &ctx(1)).is_err());
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let text = "(".repeat(100_000) + "1" + &")".repeat(100_000);
        let err = parse_expression(&text, &ctx(1)).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::TooDeep);
        let text = "-".repeat(100_000) + "1";
        assert!(parse_expression(&text, &ctx(1)).is_err());
    }

    #[test]
    fn reserved_parameter_names_rejected() {
        assert!(ParseContext::new(1, ["q1"], false).is_err());
        assert!(ParseContext::new(1, ["dp7"], false).is_err());
        assert!(ParseContext::new(1, ["sin"], false).is_err());
        assert!(ParseContext::new(1, ["K", "omega"], false).is_ok());
        assert!(ParseContext::new(0, Vec::<String>::new(), false).is_err());
    }

    #[test]
    fn sqrt_is_a_half_power() {
        let e = parse_expression("sqrt(q1)", &ctx(1)).unwrap();
        assert!(matches!(e.node(), Node::Power(_, r) if *r == Rational::new(1.into(), 2.into())));
    }
}
