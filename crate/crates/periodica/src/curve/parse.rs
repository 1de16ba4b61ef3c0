//! Recursive-descent parser for polynomial expressions and curve documents.

use rug::{Integer, Rational};

use super::field::{BaseField, NumberField};
use super::poly::BiPoly;
use super::CurveError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Ident(String),
    Op(char),
}

fn lex(src: &str) -> Result<Vec<Tok>, CurveError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            out.push(Tok::Num(parse_decimal(&text)?));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else if c == '−' {
            out.push(Tok::Op('-'));
            i += 1;
        } else {
            return Err(CurveError::Parse(format!("unexpected character '{}'", c)));
        }
    }
    Ok(out)
}

fn parse_decimal(text: &str) -> Result<Rational, CurveError> {
    let bad = || CurveError::Parse(format!("malformed number '{}'", text));
    match text.split_once('.') {
        None => Ok(Rational::from(Integer::from(Integer::parse(text).map_err(|_| bad())?))),
        Some((a, b)) => {
            if b.contains('.') {
                return Err(bad());
            }
            let digits = format!("{}{}", a, b);
            let num = Integer::from(Integer::parse(&digits).map_err(|_| bad())?);
            let den = Integer::from(10).pow(b.len() as u32);
            Ok(Rational::from((num, den)))
        }
    }
}

use rug::ops::Pow;

/// Names bound to the two polynomial variables and the field generator.
pub struct Vars<'a> {
    pub x: &'a str,
    pub y: Option<&'a str>,
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    field: &'a BaseField,
    vars: Vars<'a>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<BiPoly, CurveError> {
        let k = self.field;
        let mut acc = self.term()?;
        while let Some(Tok::Op(c)) = self.peek() {
            let c = *c;
            if c == '+' || c == '-' {
                self.pos += 1;
                let rhs = self.term()?;
                acc = if c == '+' { acc.add(&rhs, k) } else { acc.sub(&rhs, k) };
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn starts_atom(&self) -> bool {
        matches!(self.peek(), Some(Tok::Num(_)) | Some(Tok::Ident(_)) | Some(Tok::Op('(')))
    }

    fn term(&mut self) -> Result<BiPoly, CurveError> {
        let k = self.field;
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Op('*')) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    acc = acc.mul(&rhs, k);
                }
                Some(Tok::Op('/')) => {
                    self.pos += 1;
                    let rhs = self.unary()?;
                    let c = match (rhs.terms.len(), rhs.terms.get(&(0, 0))) {
                        (1, Some(c)) => c.clone(),
                        _ => return Err(CurveError::Parse("division only by nonzero constants".into())),
                    };
                    let inv = k.inv(&c).ok_or_else(|| CurveError::Parse("division by zero".into()))?;
                    acc = acc.scale(&inv, k);
                }
                _ if self.starts_atom() => {
                    let rhs = self.power()?;
                    acc = acc.mul(&rhs, k);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<BiPoly, CurveError> {
        match self.peek() {
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(self.unary()?.neg(self.field))
            }
            Some(Tok::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<BiPoly, CurveError> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            match self.next() {
                Some(Tok::Num(q)) if q.denom() == &1 && *q.numer() >= 0 && *q.numer() <= 10_000 => {
                    let e = q.numer().to_u32().unwrap();
                    return Ok(base.pow(e, self.field));
                }
                Some(Tok::Op('(')) => {
                    let e = match self.next() {
                        Some(Tok::Num(q)) if q.denom() == &1 && *q.numer() >= 0 && *q.numer() <= 10_000 => {
                            q.numer().to_u32().unwrap()
                        }
                        _ => return Err(CurveError::Parse("exponent must be a nonnegative integer".into())),
                    };
                    if self.next() != Some(Tok::Op(')')) {
                        return Err(CurveError::Parse("missing ')' after exponent".into()));
                    }
                    return Ok(base.pow(e, self.field));
                }
                _ => return Err(CurveError::Parse("exponent must be a nonnegative integer".into())),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<BiPoly, CurveError> {
        let k = self.field;
        match self.next() {
            Some(Tok::Num(q)) => Ok(BiPoly::constant(k.from_rational(q), k)),
            Some(Tok::Ident(name)) => {
                if name == self.vars.x {
                    Ok(BiPoly::monomial(1, 0, k))
                } else if Some(name.as_str()) == self.vars.y {
                    Ok(BiPoly::monomial(0, 1, k))
                } else if Some(name.as_str()) == k.generator() {
                    Ok(BiPoly::constant(k.gen(), k))
                } else {
                    Err(CurveError::Parse(format!("unknown identifier '{}'", name)))
                }
            }
            Some(Tok::Op('(')) => {
                let e = self.expr()?;
                if self.next() != Some(Tok::Op(')')) {
                    return Err(CurveError::Parse("missing ')'".into()));
                }
                Ok(e)
            }
            Some(t) => Err(CurveError::Parse(format!("unexpected token {:?}", t))),
            None => Err(CurveError::Parse("unexpected end of input".into())),
        }
    }
}

/// Parse a polynomial in the named variables over the given field.
pub fn parse_poly(src: &str, field: &BaseField, vars: Vars<'_>) -> Result<BiPoly, CurveError> {
    let toks = lex(src)?;
    if toks.is_empty() {
        return Err(CurveError::Parse("empty polynomial".into()));
    }
    let mut p = Parser { toks, pos: 0, field, vars };
    let out = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(CurveError::Parse(format!("trailing input at token {}", p.pos)));
    }
    Ok(out)
}

fn strip_comments(src: &str) -> String {
    src.lines().map(|l| l.split('#').next().unwrap_or("")).collect::<Vec<_>>().join("\n")
}

/// Parse "a+bi", "a-bi", "bi" or "a" with decimal parts.
pub fn parse_complex_literal(src: &str) -> Result<(f64, f64), CurveError> {
    let s: String = src.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || CurveError::Parse(format!("malformed complex number '{}'", src));
    if let Some(body) = s.strip_suffix('i') {
        let split = body
            .char_indices()
            .skip(1)
            .filter(|(i, c)| (*c == '+' || *c == '-') && !body[..*i].ends_with(['e', 'E']))
            .map(|(i, _)| i)
            .last();
        match split {
            Some(i) => {
                let re: f64 = body[..i].parse().map_err(|_| bad())?;
                let im_text = &body[i..];
                let im: f64 = match im_text {
                    "+" => 1.0,
                    "-" => -1.0,
                    t => t.parse().map_err(|_| bad())?,
                };
                Ok((re, im))
            }
            None => {
                let im: f64 = match body {
                    "" | "+" => 1.0,
                    "-" => -1.0,
                    t => t.parse().map_err(|_| bad())?,
                };
                Ok((0.0, im))
            }
        }
    } else {
        Ok((s.parse().map_err(|_| bad())?, 0.0))
    }
}

/// Split a curve document into its base field and polynomial text.
pub fn parse_document(src: &str) -> Result<(BaseField, String), CurveError> {
    let text = strip_comments(src);
    let trimmed = text.trim_start();
    if !trimmed.starts_with("field") {
        return Ok((BaseField::Rationals, text));
    }
    let rest = &trimmed["field".len()..];
    let (decl, rest) = rest.split_once(';').ok_or_else(|| CurveError::Parse("field declaration must end with ';'".into()))?;
    let (name, minpoly) = decl.split_once(':').ok_or_else(|| CurveError::Parse("expected 'field <name>: <polynomial>;'".into()))?;
    let name = name.trim();
    if name.is_empty() || name == "x" || name == "y" || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
        return Err(CurveError::Parse(format!("invalid generator name '{}'", name)));
    }
    let rest = rest.trim_start();
    let rest = rest.strip_prefix("embedding").ok_or_else(|| CurveError::Parse("expected 'embedding <complex>;'".into()))?;
    let (emb, body) = rest.split_once(';').ok_or_else(|| CurveError::Parse("embedding must end with ';'".into()))?;
    let hint = parse_complex_literal(emb)?;
    let m = parse_poly(minpoly, &BaseField::Rationals, Vars { x: name, y: None })?;
    let deg = m.x_degree().unwrap_or(0) as usize;
    if deg == 0 {
        return Err(CurveError::Parse("minimal polynomial must have positive degree".into()));
    }
    let mut coeffs = vec![Rational::new(); deg + 1];
    for (&(i, _), c) in &m.terms {
        coeffs[i as usize] = c.0[0].clone();
    }
    let lead = coeffs[deg].clone();
    let coeffs: Vec<Rational> = coeffs.into_iter().map(|c| c / lead.clone()).collect();
    let field = NumberField { generator: name.to_string(), min_poly: coeffs, embedding_hint: hint };
    super::check_min_poly(&field)?;
    Ok((BaseField::Number(field), body.to_string()))
}
