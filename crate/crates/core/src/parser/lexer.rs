use num::bigint::BigInt;
use num::One;

use crate::expr::Rational;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Token {
    Number(Rational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Token {
    pub(crate) fn describe(&self) -> String {
        match self {
            Token::Number(n) => format!("number `{n}`"),
            Token::Ident(s) => format!("identifier `{s}`"),
            Token::Plus => "`+`".into(),
            Token::Minus => "`-`".into(),
            Token::Star => "`*`".into(),
            Token::Slash => "`/`".into(),
            Token::Caret => "`^`".into(),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
            Token::End => "end of input".into(),
        }
    }
}

/// Splits `text` into tokens paired with their byte offsets.
///
/// Numbers are decimal integers with an optional fractional part, read as
/// exact rationals (`0.25` is `1/4`).
pub(crate) fn tokenize(text: &str) -> Result<Vec<(Token, usize)>, (usize, char)> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => out.push((Token::Plus, start)),
            b'-' => out.push((Token::Minus, start)),
            b'*' => out.push((Token::Star, start)),
            b'/' => out.push((Token::Slash, start)),
            b'^' => out.push((Token::Caret, start)),
            b'(' => out.push((Token::LParen, start)),
            b')' => out.push((Token::RParen, start)),
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let int_part = &text[start..i];
                let mut value = Rational::from_integer(int_part.parse::<BigInt>().unwrap());
                if i + 1 < bytes.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
                    i += 1;
                    let frac_start = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    let digits = &text[frac_start..i];
                    let numer = digits.parse::<BigInt>().unwrap();
                    let mut denom = BigInt::one();
                    for _ in 0..digits.len() {
                        denom *= 10;
                    }
                    value += Rational::new(numer, denom);
                }
                out.push((Token::Number(value), start));
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                out.push((Token::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('\u{FFFD}');
                return Err((start, ch));
            }
        }
        i += 1;
    }
    out.push((Token::End, text.len()));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::Zero;

    #[test]
    fn numbers_are_exact() {
        let toks = tokenize("0.25 + 12").unwrap();
        assert_eq!(toks[0].0, Token::Number(Rational::new(1.into(), 4.into())));
        assert_eq!(toks[2], (Token::Number(Rational::from_integer(12.into())), 7));
        assert!(!matches!(toks[0].0, Token::Number(ref r) if r.is_zero()));
    }

    #[test]
    fn reports_offset_of_bad_char() {
        assert_eq!(tokenize("q1 # 2"), Err((3, '#')));
        assert_eq!(tokenize("é").unwrap_err().0, 0);
    }
}
