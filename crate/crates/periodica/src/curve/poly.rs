//! Univariate and bivariate polynomials over the base field.

use std::collections::BTreeMap;

use rug::Rational;

use super::field::{BaseField, Elt};
use crate::numerics::{Complex, ComplexPoly};

/// Dense univariate polynomial over the base field, index = degree.
#[derive(Clone, Debug, PartialEq)]
pub struct KPoly {
    pub coeffs: Vec<Elt>,
}

impl KPoly {
    pub fn zero() -> Self {
        KPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Elt) -> Self {
        KPoly { coeffs: vec![c] }.trimmed_plain()
    }

    fn trimmed_plain(mut self) -> Self {
        while let Some(c) = self.coeffs.last() {
            if c.0.iter().all(|q| *q == 0) {
                self.coeffs.pop();
            } else {
                break;
            }
        }
        self
    }

    pub fn trim(self, _k: &BaseField) -> Self {
        self.trimmed_plain()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports None.
    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn lead(&self) -> Option<&Elt> {
        self.coeffs.last()
    }

    pub fn add(&self, other: &KPoly, k: &BaseField) -> KPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| match (self.coeffs.get(i), other.coeffs.get(i)) {
                (Some(a), Some(b)) => k.add(a, b),
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => k.zero(),
            })
            .collect();
        KPoly { coeffs }.trim(k)
    }

    pub fn neg(&self, k: &BaseField) -> KPoly {
        KPoly { coeffs: self.coeffs.iter().map(|c| k.neg(c)).collect() }
    }

    pub fn sub(&self, other: &KPoly, k: &BaseField) -> KPoly {
        self.add(&other.neg(k), k)
    }

    pub fn mul(&self, other: &KPoly, k: &BaseField) -> KPoly {
        if self.is_zero() || other.is_zero() {
            return KPoly::zero();
        }
        let mut coeffs = vec![k.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if k.is_zero(a) {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = k.add(&coeffs[i + j], &k.mul(a, b));
            }
        }
        KPoly { coeffs }.trim(k)
    }

    pub fn scale(&self, c: &Elt, k: &BaseField) -> KPoly {
        KPoly { coeffs: self.coeffs.iter().map(|a| k.mul(a, c)).collect() }.trim(k)
    }

    pub fn divrem(&self, other: &KPoly, k: &BaseField) -> (KPoly, KPoly) {
        let db = other.degree().expect("division by zero polynomial");
        let inv = k.inv(other.lead().unwrap()).unwrap();
        let mut r = self.coeffs.clone();
        if r.len() <= db {
            return (KPoly::zero(), self.clone());
        }
        let mut q = vec![k.zero(); r.len() - db];
        for i in (0..q.len()).rev() {
            let c = k.mul(&r[i + db], &inv);
            if !k.is_zero(&c) {
                for (j, b) in other.coeffs.iter().enumerate() {
                    r[i + j] = k.sub(&r[i + j], &k.mul(&c, b));
                }
            }
            q[i] = c;
        }
        r.truncate(db);
        (KPoly { coeffs: q }.trim(k), KPoly { coeffs: r }.trim(k))
    }

    pub fn monic(&self, k: &BaseField) -> KPoly {
        match self.lead() {
            None => KPoly::zero(),
            Some(l) => self.scale(&k.inv(l).unwrap(), k),
        }
    }

    pub fn gcd(&self, other: &KPoly, k: &BaseField) -> KPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.divrem(&b, k);
            a = b;
            b = r.monic(k);
        }
        a.monic(k)
    }

    pub fn derivative(&self, k: &BaseField) -> KPoly {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| k.scale(c, &Rational::from(i as u64)))
            .collect();
        KPoly { coeffs }.trim(k)
    }

    /// Squarefree part p / gcd(p, p').
    pub fn squarefree_part(&self, k: &BaseField) -> KPoly {
        if self.degree().unwrap_or(0) == 0 {
            return self.clone();
        }
        let g = self.gcd(&self.derivative(k), k);
        self.divrem(&g, k).0
    }

    pub fn eval(&self, x: &Elt, k: &BaseField) -> Elt {
        let mut acc = k.zero();
        for c in self.coeffs.iter().rev() {
            acc = k.add(&k.mul(&acc, x), c);
        }
        acc
    }

    pub fn embed(&self, k: &BaseField, theta: &Complex) -> ComplexPoly {
        ComplexPoly::new(self.coeffs.iter().map(|c| k.embed(c, theta)).collect())
    }
}

/// Sparse bivariate polynomial; keys are (x-exponent, y-exponent).
#[derive(Clone, Debug, PartialEq)]
pub struct BiPoly {
    pub terms: BTreeMap<(u32, u32), Elt>,
}

impl BiPoly {
    pub fn zero() -> Self {
        BiPoly { terms: BTreeMap::new() }
    }

    pub fn constant(c: Elt, k: &BaseField) -> Self {
        let mut p = BiPoly::zero();
        if !k.is_zero(&c) {
            p.terms.insert((0, 0), c);
        }
        p
    }

    pub fn monomial(i: u32, j: u32, k: &BaseField) -> Self {
        let mut p = BiPoly::zero();
        p.terms.insert((i, j), k.one());
        p
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &BiPoly, k: &BaseField) -> BiPoly {
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            let v = match terms.get(e) {
                Some(a) => k.add(a, c),
                None => c.clone(),
            };
            if k.is_zero(&v) {
                terms.remove(e);
            } else {
                terms.insert(*e, v);
            }
        }
        BiPoly { terms }
    }

    pub fn neg(&self, k: &BaseField) -> BiPoly {
        BiPoly { terms: self.terms.iter().map(|(e, c)| (*e, k.neg(c))).collect() }
    }

    pub fn sub(&self, other: &BiPoly, k: &BaseField) -> BiPoly {
        self.add(&other.neg(k), k)
    }

    pub fn mul(&self, other: &BiPoly, k: &BaseField) -> BiPoly {
        let mut out = BiPoly::zero();
        for ((i1, j1), a) in &self.terms {
            for ((i2, j2), b) in &other.terms {
                let e = (i1 + i2, j1 + j2);
                let prod = k.mul(a, b);
                let v = match out.terms.get(&e) {
                    Some(c) => k.add(c, &prod),
                    None => prod,
                };
                if k.is_zero(&v) {
                    out.terms.remove(&e);
                } else {
                    out.terms.insert(e, v);
                }
            }
        }
        out
    }

    pub fn scale(&self, c: &Elt, k: &BaseField) -> BiPoly {
        let mut out = BiPoly::zero();
        for (e, a) in &self.terms {
            let v = k.mul(a, c);
            if !k.is_zero(&v) {
                out.terms.insert(*e, v);
            }
        }
        out
    }

    pub fn pow(&self, e: u32, k: &BaseField) -> BiPoly {
        let mut acc = BiPoly::constant(k.one(), k);
        for _ in 0..e {
            acc = acc.mul(self, k);
        }
        acc
    }

    pub fn y_degree(&self) -> Option<u32> {
        self.terms.keys().map(|&(_, j)| j).max()
    }

    pub fn x_degree(&self) -> Option<u32> {
        self.terms.keys().map(|&(i, _)| i).max()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|&(i, j)| i + j).max()
    }

    pub fn derivative_y(&self, k: &BaseField) -> BiPoly {
        let mut out = BiPoly::zero();
        for (&(i, j), c) in &self.terms {
            if j > 0 {
                out.terms.insert((i, j - 1), k.scale(c, &Rational::from(j)));
            }
        }
        out
    }

    pub fn derivative_x(&self, k: &BaseField) -> BiPoly {
        let mut out = BiPoly::zero();
        for (&(i, j), c) in &self.terms {
            if i > 0 {
                out.terms.insert((i - 1, j), k.scale(c, &Rational::from(i)));
            }
        }
        out
    }

    /// Coefficients f₀(x), …, f_n(x) of the powers of y.
    pub fn y_coeffs(&self, k: &BaseField) -> Vec<KPoly> {
        let n = self.y_degree().unwrap_or(0) as usize;
        let mut out = vec![KPoly::zero(); n + 1];
        for (&(i, j), c) in &self.terms {
            let p = &mut out[j as usize];
            if p.coeffs.len() <= i as usize {
                p.coeffs.resize(i as usize + 1, k.zero());
            }
            p.coeffs[i as usize] = c.clone();
        }
        out.into_iter().map(|p| p.trim(k)).collect()
    }

    /// Specialize x to a field element, giving a polynomial in y.
    pub fn eval_x(&self, x: &Elt, k: &BaseField) -> KPoly {
        let coeffs: Vec<Elt> = self.y_coeffs(k).iter().map(|p| p.eval(x, k)).collect();
        KPoly { coeffs }.trim(k)
    }

    pub fn embed(&self, k: &BaseField, theta: &Complex) -> EmbeddedBiPoly {
        EmbeddedBiPoly {
            terms: self.terms.iter().map(|(&(i, j), c)| (i, j, k.embed(c, theta))).collect(),
        }
    }

    pub fn format(&self, k: &BaseField) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut keys: Vec<&(u32, u32)> = self.terms.keys().collect();
        keys.sort_by(|a, b| (b.0 + b.1, b.0).cmp(&(a.0 + a.1, a.0)));
        let mut out = String::new();
        for (idx, e) in keys.iter().enumerate() {
            let c = &self.terms[e];
            let mut coef = k.format(c);
            let mono = monomial_string(e.0, e.1);
            let negative = coef.starts_with('-');
            if negative {
                coef.remove(0);
            }
            if idx == 0 {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            if mono.is_empty() {
                out.push_str(&coef);
            } else if coef == "1" {
                out.push_str(&mono);
            } else {
                out.push_str(&format!("{}*{}", coef, mono));
            }
        }
        out
    }
}

fn monomial_string(i: u32, j: u32) -> String {
    let mut parts = Vec::new();
    match i {
        0 => {}
        1 => parts.push("x".to_string()),
        _ => parts.push(format!("x^{}", i)),
    }
    match j {
        0 => {}
        1 => parts.push("y".to_string()),
        _ => parts.push(format!("y^{}", j)),
    }
    parts.join("*")
}

/// Bivariate polynomial with embedded complex coefficients.
#[derive(Clone, Debug)]
pub struct EmbeddedBiPoly {
    pub terms: Vec<(u32, u32, Complex)>,
}

impl EmbeddedBiPoly {
    pub fn eval(&self, xp: &[Complex], yp: &[Complex]) -> Complex {
        let prec = xp[0].prec();
        let mut acc = Complex::zero(prec);
        for (i, j, c) in &self.terms {
            let t = &(c * &xp[*i as usize]) * &yp[*j as usize];
            acc = &acc + &t;
        }
        acc
    }

    pub fn max_x(&self) -> usize {
        self.terms.iter().map(|t| t.0 as usize).max().unwrap_or(0)
    }

    pub fn max_y(&self) -> usize {
        self.terms.iter().map(|t| t.1 as usize).max().unwrap_or(0)
    }
}

/// 1, z, z², …, z^d.
pub fn powers(z: &Complex, d: usize) -> Vec<Complex> {
    let mut out = Vec::with_capacity(d + 1);
    out.push(Complex::one(z.prec()));
    for i in 1..=d {
        let next = &out[i - 1] * z;
        out.push(next);
    }
    out
}
