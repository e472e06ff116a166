//! Expression grammar shared by the command line and the data files.
//!
//! ```text
//! expr     := ['+' | '-'] term (('+' | '-') term)*
//! term     := factor (['/'] factor)*
//! factor   := atom ('^' exponent | '~')*
//! exponent := ['+' | '-'] int | '(' ['+' | '-'] int ['/' int] ')'
//! atom     := int | ident | '(' expr ')' | '[' expr ',' expr ']'
//! ```
//!
//! Juxtaposition is the product, `[a, b]` is `ab − ba`, postfix `~` applies the star
//! structure, `i` is the imaginary unit and `q` the deformation parameter; half-integer
//! powers `q^(k/2)` are allowed. Division is only by nonzero invertible coefficients.

use thiserror::Error;

use crate::coeff::{Coefficient, Scalar};
use crate::freealg::{Element, Presentation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("syntax error at byte {offset}: found {found}, expected one of {}", expected.join(", "))]
    Unexpected { offset: usize, found: String, expected: Vec<String> },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("`{text}` at byte {offset} is not invertible")]
    NotInvertible { offset: usize, text: String },
    #[error("fractional exponent at byte {offset} is only allowed on q")]
    FractionalExponent { offset: usize },
    #[error("integer literal at byte {offset} is too large")]
    IntegerTooLarge { offset: usize },
    #[error("star at byte {offset} needs a presentation with a star structure")]
    NoStar { offset: usize },
    #[error("`{text}` at byte {offset} is not a coefficient")]
    NotCoefficient { offset: usize, text: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(String),
    Ident(String),
    Plus,
    Minus,
    Caret,
    Slash,
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Tilde,
    Equals,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(s) => format!("integer `{s}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Caret => "`^`".into(),
            Tok::Slash => "`/`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrack => "`[`".into(),
            Tok::RBrack => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Tilde => "`~`".into(),
            Tok::Equals => "`=`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, SyntaxError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut k = 0;
    while k < bytes.len() {
        let c = bytes[k] as char;
        if c.is_ascii_whitespace() {
            k += 1;
            continue;
        }
        let start = k;
        let tok = if c.is_ascii_digit() {
            while k < bytes.len() && bytes[k].is_ascii_digit() {
                k += 1;
            }
            Tok::Int(text[start..k].to_string())
        } else if c.is_ascii_alphabetic() {
            while k < bytes.len() && (bytes[k].is_ascii_alphanumeric() || bytes[k] == b'_') {
                k += 1;
            }
            Tok::Ident(text[start..k].to_string())
        } else {
            k += 1;
            match c {
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '^' => Tok::Caret,
                '/' => Tok::Slash,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBrack,
                ']' => Tok::RBrack,
                ',' => Tok::Comma,
                '~' => Tok::Tilde,
                '=' => Tok::Equals,
                _ => {
                    let ch = text[start..].chars().next().unwrap_or(c);
                    return Err(SyntaxError::Unexpected {
                        offset: start,
                        found: format!("character `{ch}`"),
                        expected: vec!["an expression token".into()],
                    });
                }
            }
        };
        out.push((start, tok));
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

const ATOM_START: [&str; 4] = ["integer", "identifier", "`(`", "`[`"];

struct Parser<'a, C> {
    pres: Option<&'a Presentation<C>>,
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl<'a, C: Coefficient> Parser<'a, C> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&str]) -> SyntaxError {
        SyntaxError::Unexpected {
            offset: self.offset(),
            found: self.peek().describe(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn expect(&mut self, t: Tok) -> Result<(), SyntaxError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&[&t.describe()]))
        }
    }

    fn starts_atom(&self) -> bool {
        matches!(self.peek(), Tok::Int(_) | Tok::Ident(_) | Tok::LParen | Tok::LBrack)
    }

    fn expr(&mut self) -> Result<Element<C>, SyntaxError> {
        let mut negate = false;
        match self.peek() {
            Tok::Plus => {
                self.bump();
            }
            Tok::Minus => {
                self.bump();
                negate = true;
            }
            _ => {}
        }
        let first = self.term()?;
        let mut acc = if negate { first.neg() } else { first };
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Element<C>, SyntaxError> {
        if !self.starts_atom() {
            return Err(self.unexpected(&ATOM_START));
        }
        let mut acc = self.factor()?;
        loop {
            if *self.peek() == Tok::Slash {
                self.bump();
                let at = self.offset();
                let d = self.factor()?;
                let inv = self
                    .coefficient_of(&d, at)?
                    .try_inv()
                    .ok_or_else(|| SyntaxError::NotInvertible { offset: at, text: self.render(&d) })?;
                acc = acc.scale(&inv);
            } else if self.starts_atom() {
                acc = acc.mul(&self.factor()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<Element<C>, SyntaxError> {
        let at = self.offset();
        let is_q = matches!(self.peek(), Tok::Ident(s) if s == "q" && self.generator("q").is_none());
        let mut base = self.atom()?;
        loop {
            match self.peek() {
                Tok::Caret => {
                    self.bump();
                    let exp_at = self.offset();
                    let (num, den) = self.exponent()?;
                    base = if is_q && base == Element::scalar(C::from_scalar(&Scalar::q())) {
                        let e = if den == 2 { num } else { 2 * num };
                        Element::scalar(C::from_scalar(&Scalar::s_pow(e)))
                    } else if den != 1 {
                        return Err(SyntaxError::FractionalExponent { offset: exp_at });
                    } else {
                        self.power(&base, num, at)?
                    };
                }
                Tok::Tilde => {
                    let off = self.offset();
                    self.bump();
                    let pres = self.pres.filter(|p| p.has_star()).ok_or(SyntaxError::NoStar { offset: off })?;
                    base = pres.apply_star(&base).map_err(|_| SyntaxError::NoStar { offset: off })?;
                }
                _ => return Ok(base),
            }
        }
    }

    /// Exponent as `num/den` with `den ∈ {1, 2}` after reduction.
    fn exponent(&mut self) -> Result<(i32, i32), SyntaxError> {
        if *self.peek() == Tok::LParen {
            self.bump();
            let sign = self.sign();
            let num = sign * self.int()?;
            let mut den = 1;
            if *self.peek() == Tok::Slash {
                self.bump();
                let at = self.offset();
                den = self.int()?;
                if den == 0 {
                    return Err(SyntaxError::FractionalExponent { offset: at });
                }
            }
            self.expect(Tok::RParen)?;
            let g = gcd(num.abs(), den);
            let (num, den) = (num / g, den / g);
            if den > 2 {
                return Err(SyntaxError::FractionalExponent { offset: self.offset() });
            }
            Ok((num, den))
        } else {
            let sign = self.sign();
            Ok((sign * self.int()?, 1))
        }
    }

    fn sign(&mut self) -> i32 {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                -1
            }
            Tok::Plus => {
                self.bump();
                1
            }
            _ => 1,
        }
    }

    fn int(&mut self) -> Result<i32, SyntaxError> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Int(s) => {
                self.bump();
                s.parse().map_err(|_| SyntaxError::IntegerTooLarge { offset: at })
            }
            _ => Err(self.unexpected(&["integer"])),
        }
    }

    fn atom(&mut self) -> Result<Element<C>, SyntaxError> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Int(s) => {
                self.bump();
                let n: i64 = s.parse().map_err(|_| SyntaxError::IntegerTooLarge { offset: at })?;
                Ok(Element::scalar(C::from_scalar(&Scalar::from_int(n))))
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some(g) = self.generator(&name) {
                    return Ok(g);
                }
                match name.as_str() {
                    "i" => Ok(Element::scalar(C::from_scalar(&Scalar::i()))),
                    "q" => Ok(Element::scalar(C::from_scalar(&Scalar::q()))),
                    _ => Err(SyntaxError::UnknownIdentifier { offset: at, name }),
                }
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::LBrack => {
                self.bump();
                let a = self.expr()?;
                self.expect(Tok::Comma)?;
                let b = self.expr()?;
                self.expect(Tok::RBrack)?;
                Ok(a.commutator(&b))
            }
            _ => Err(self.unexpected(&ATOM_START)),
        }
    }

    fn generator(&self, name: &str) -> Option<Element<C>> {
        let pres = self.pres?;
        pres.generator_id(name).map(|_| pres.gen(name))
    }

    fn power(&self, base: &Element<C>, n: i32, at: usize) -> Result<Element<C>, SyntaxError> {
        let unit = if n >= 0 {
            base.clone()
        } else if let Some(c) = constant(base) {
            let inv = c.try_inv().ok_or_else(|| SyntaxError::NotInvertible { offset: at, text: self.render(base) })?;
            Element::scalar(inv)
        } else {
            self.inverse_generator(base)
                .ok_or_else(|| SyntaxError::NotInvertible { offset: at, text: self.render(base) })?
        };
        let mut acc = Element::one();
        for _ in 0..n.unsigned_abs() {
            acc = acc.mul(&unit);
        }
        Ok(acc)
    }

    fn inverse_generator(&self, base: &Element<C>) -> Option<Element<C>> {
        let pres = self.pres?;
        let (w, c) = base.leading()?;
        if base.len() != 1 || !c.is_one() || w.len() != 1 {
            return None;
        }
        let inv = pres.inverse_of(w.letters()[0])?;
        Some(Element::word(pres.word(&[inv])))
    }

    fn coefficient_of(&self, e: &Element<C>, at: usize) -> Result<C, SyntaxError> {
        constant(e).ok_or_else(|| SyntaxError::NotCoefficient { offset: at, text: self.render(e) })
    }

    fn render(&self, e: &Element<C>) -> String {
        match self.pres {
            Some(p) => p.render(e),
            None => constant(e).map(|c| c.to_string()).unwrap_or_default(),
        }
    }
}

fn constant<C: Coefficient>(e: &Element<C>) -> Option<C> {
    if e.max_len() == 0 {
        Some(e.constant_term())
    } else {
        None
    }
}

fn gcd(a: i32, b: i32) -> i32 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

fn run<C: Coefficient, T>(
    pres: Option<&Presentation<C>>,
    text: &str,
    body: impl FnOnce(&mut Parser<'_, C>) -> Result<T, SyntaxError>,
) -> Result<T, SyntaxError> {
    let mut p = Parser { pres, toks: lex(text)?, pos: 0 };
    let out = body(&mut p)?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected(&["`+`", "`-`", "end of input"]));
    }
    Ok(out)
}

/// Parse an element of the free algebra on the generators of `pres` (unreduced).
pub fn parse_element<C: Coefficient>(pres: &Presentation<C>, text: &str) -> Result<Element<C>, SyntaxError> {
    run(Some(pres), text, |p| p.expr())
}

/// Parse `lhs = rhs`.
pub fn parse_relation<C: Coefficient>(
    pres: &Presentation<C>,
    text: &str,
) -> Result<(Element<C>, Element<C>), SyntaxError> {
    run(Some(pres), text, |p| {
        let lhs = p.expr()?;
        p.expect(Tok::Equals)?;
        let rhs = p.expr()?;
        Ok((lhs, rhs))
    })
}

/// Parse a coefficient such as `q^(-1/2) - 2i q`.
pub fn parse_coefficient<C: Coefficient>(text: &str) -> Result<C, SyntaxError> {
    run::<C, C>(None, text, |p| {
        let at = p.offset();
        let e = p.expr()?;
        p.coefficient_of(&e, at)
    })
}

/// Canonical text of an element; [`parse_element`] inverts it.
pub fn print_element<C: Coefficient>(pres: &Presentation<C>, e: &Element<C>) -> String {
    pres.render(e)
}
