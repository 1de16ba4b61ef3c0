//! Exact arithmetic in ℚ or ℚ[t]/(m(t)).

use std::fmt;

use rug::{Integer, Rational};

use crate::numerics::{newton_refine, Complex, ComplexPoly, NumericsError, PrecisionContext};

/// Element of the base field as a coefficient vector in the power basis of t.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Elt(pub Vec<Rational>);

#[derive(Clone, Debug, PartialEq)]
pub struct NumberField {
    pub generator: String,
    /// Minimal polynomial, monic, coefficients by increasing degree.
    pub min_poly: Vec<Rational>,
    /// User-supplied approximation of the chosen complex root.
    pub embedding_hint: (f64, f64),
}

#[derive(Clone, Debug, PartialEq)]
pub enum BaseField {
    Rationals,
    Number(NumberField),
}

impl BaseField {
    pub fn degree(&self) -> usize {
        match self {
            BaseField::Rationals => 1,
            BaseField::Number(k) => k.min_poly.len() - 1,
        }
    }

    pub fn generator(&self) -> Option<&str> {
        match self {
            BaseField::Rationals => None,
            BaseField::Number(k) => Some(&k.generator),
        }
    }

    pub fn zero(&self) -> Elt {
        Elt(vec![Rational::new(); self.degree()])
    }

    pub fn one(&self) -> Elt {
        self.from_rational(Rational::from(1))
    }

    pub fn from_rational(&self, q: Rational) -> Elt {
        let mut v = vec![Rational::new(); self.degree()];
        v[0] = q;
        Elt(v)
    }

    pub fn from_int(&self, z: i64) -> Elt {
        self.from_rational(Rational::from(z))
    }

    /// The generator t itself.
    pub fn gen(&self) -> Elt {
        let d = self.degree();
        if d == 1 {
            // t satisfies m(t) = t + c0, so t = −c0.
            if let BaseField::Number(k) = self {
                return self.from_rational(-k.min_poly[0].clone());
            }
            return self.zero();
        }
        let mut v = vec![Rational::new(); d];
        v[1] = Rational::from(1);
        Elt(v)
    }

    pub fn is_zero(&self, a: &Elt) -> bool {
        a.0.iter().all(|c| *c == 0)
    }

    pub fn add(&self, a: &Elt, b: &Elt) -> Elt {
        Elt(a.0.iter().zip(&b.0).map(|(x, y)| Rational::from(x + y)).collect())
    }

    pub fn sub(&self, a: &Elt, b: &Elt) -> Elt {
        Elt(a.0.iter().zip(&b.0).map(|(x, y)| Rational::from(x - y)).collect())
    }

    pub fn neg(&self, a: &Elt) -> Elt {
        Elt(a.0.iter().map(|x| Rational::from(-x)).collect())
    }

    pub fn scale(&self, a: &Elt, q: &Rational) -> Elt {
        Elt(a.0.iter().map(|x| Rational::from(x * q)).collect())
    }

    pub fn mul(&self, a: &Elt, b: &Elt) -> Elt {
        match self {
            BaseField::Rationals => Elt(vec![Rational::from(&a.0[0] * &b.0[0])]),
            BaseField::Number(k) => {
                let d = k.min_poly.len() - 1;
                let mut prod = vec![Rational::new(); 2 * d - 1];
                for (i, x) in a.0.iter().enumerate() {
                    if *x == 0 {
                        continue;
                    }
                    for (j, y) in b.0.iter().enumerate() {
                        prod[i + j] += Rational::from(x * y);
                    }
                }
                Elt(reduce_mod(prod, &k.min_poly))
            }
        }
    }

    pub fn inv(&self, a: &Elt) -> Option<Elt> {
        if self.is_zero(a) {
            return None;
        }
        match self {
            BaseField::Rationals => Some(Elt(vec![Rational::from(1) / a.0[0].clone()])),
            BaseField::Number(k) => {
                // Extended Euclid in ℚ[t]: s·a + u·m = 1.
                let (g, s) = qpoly_ext_gcd(&trim(a.0.clone()), &k.min_poly);
                if g.len() != 1 {
                    return None;
                }
                let c = g[0].clone();
                let s: Vec<Rational> = s.into_iter().map(|x| x / c.clone()).collect();
                let mut v = reduce_mod(s, &k.min_poly);
                v.resize(k.min_poly.len() - 1, Rational::new());
                Some(Elt(v))
            }
        }
    }

    pub fn div(&self, a: &Elt, b: &Elt) -> Option<Elt> {
        Some(self.mul(a, &self.inv(b)?))
    }

    pub fn pow(&self, a: &Elt, e: u32) -> Elt {
        let mut acc = self.one();
        for _ in 0..e {
            acc = self.mul(&acc, a);
        }
        acc
    }

    pub fn as_rational(&self, a: &Elt) -> Option<Rational> {
        if a.0.iter().skip(1).all(|c| *c == 0) {
            Some(a.0[0].clone())
        } else {
            None
        }
    }

    /// The embedded generator, refined to the working precision.
    pub fn embedding(&self, ctx: &PrecisionContext) -> Result<Complex, NumericsError> {
        let prec = ctx.prec();
        match self {
            BaseField::Rationals => Ok(Complex::zero(prec)),
            BaseField::Number(k) => {
                let poly = ComplexPoly::new(k.min_poly.iter().map(|q| Complex::from_rational(prec, q)).collect());
                let start = Complex::from_f64(prec, k.embedding_hint.0, k.embedding_hint.1);
                // The hint only needs to be closer to the chosen root than to the others.
                let roots = crate::numerics::roots(&poly, ctx)?;
                let nearest = roots
                    .iter()
                    .min_by(|a, b| a.dist(&start).partial_cmp(&b.dist(&start)).unwrap())
                    .cloned()
                    .ok_or(NumericsError::NonConvergence("empty minimal polynomial".into()))?;
                let radius = rug::Float::with_val(prec, 1e-3);
                newton_refine(&poly, &nearest, &radius, ctx).or(Ok(nearest))
            }
        }
    }

    /// Numeric value of an element given the embedded generator.
    pub fn embed(&self, a: &Elt, theta: &Complex) -> Complex {
        let prec = theta.prec();
        let mut acc = Complex::zero(prec);
        for c in a.0.iter().rev() {
            acc = &(&acc * theta) + &Complex::from_rational(prec, c);
        }
        acc
    }

    pub fn format(&self, a: &Elt) -> String {
        let name = self.generator().unwrap_or("t");
        let mut parts = Vec::new();
        for (i, c) in a.0.iter().enumerate() {
            if *c == 0 {
                continue;
            }
            parts.push(match i {
                0 => format!("{}", c),
                1 => format!("{}*{}", c, name),
                _ => format!("{}*{}^{}", c, name, i),
            });
        }
        if parts.is_empty() {
            "0".into()
        } else if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            format!("({})", parts.join(" + "))
        }
    }
}

impl fmt::Display for NumberField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .min_poly
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0)
            .map(|(i, c)| format!("{}*{}^{}", c, self.generator, i))
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

fn trim(mut v: Vec<Rational>) -> Vec<Rational> {
    while v.len() > 1 && *v.last().unwrap() == 0 {
        v.pop();
    }
    v
}

/// Remainder of `a` modulo the monic polynomial `m`.
fn reduce_mod(mut a: Vec<Rational>, m: &[Rational]) -> Vec<Rational> {
    let d = m.len() - 1;
    while a.len() > d {
        let top = a.pop().unwrap();
        if top != 0 {
            let shift = a.len() - d;
            for (i, c) in m.iter().take(d).enumerate() {
                a[shift + i] -= Rational::from(&top * c);
            }
        }
    }
    a.resize(d, Rational::new());
    a
}

/// Returns (g, s) with s·a ≡ g (mod m), g = gcd(a, m).
fn qpoly_ext_gcd(a: &[Rational], m: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let mut r0 = trim(m.to_vec());
    let mut r1 = trim(a.to_vec());
    let mut s0 = vec![Rational::new()];
    let mut s1 = vec![Rational::from(1)];
    while !(r1.len() == 1 && r1[0] == 0) {
        let (q, r) = qpoly_divrem(&r0, &r1);
        let qs = qpoly_mul(&q, &s1);
        let s2 = qpoly_sub(&s0, &qs);
        r0 = r1;
        r1 = r;
        s0 = s1;
        s1 = s2;
    }
    (r0, s0)
}

pub(crate) fn qpoly_mul(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::new(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += Rational::from(x * y);
        }
    }
    trim(out)
}

pub(crate) fn qpoly_sub(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let n = a.len().max(b.len());
    let mut out = vec![Rational::new(); n];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] -= y;
    }
    trim(out)
}

pub(crate) fn qpoly_divrem(a: &[Rational], b: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let b = trim(b.to_vec());
    let mut r = trim(a.to_vec());
    let db = b.len() - 1;
    if r.len() < b.len() {
        return (vec![Rational::new()], r);
    }
    let mut q = vec![Rational::new(); r.len() - db];
    let lead = b[db].clone();
    for k in (0..q.len()).rev() {
        let c = Rational::from(&r[k + db] / &lead);
        if c != 0 {
            for (i, bc) in b.iter().enumerate() {
                r[k + i] -= Rational::from(&c * bc);
            }
        }
        q[k] = c;
    }
    r.truncate(db.max(1));
    if db == 0 {
        r = vec![Rational::new()];
    }
    (trim(q), trim(r))
}

/// Make an integer polynomial monic over ℚ.
pub fn monic_from_integers(coeffs: &[Integer]) -> Vec<Rational> {
    let lead = coeffs.last().cloned().unwrap_or_else(|| Integer::from(1));
    coeffs.iter().map(|c| Rational::from((c.clone(), lead.clone()))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian() -> BaseField {
        BaseField::Number(NumberField {
            generator: "t".into(),
            min_poly: vec![Rational::from(1), Rational::new(), Rational::from(1)],
            embedding_hint: (0.0, 1.0),
        })
    }

    #[test]
    fn gaussian_arithmetic() {
        let k = gaussian();
        let t = k.gen();
        let t2 = k.mul(&t, &t);
        assert_eq!(t2, k.from_int(-1));
        let a = k.add(&k.one(), &t);
        let inv = k.inv(&a).unwrap();
        assert_eq!(k.mul(&a, &inv), k.one());
    }

    #[test]
    fn embedding_is_refined() {
        let k = gaussian();
        let ctx = PrecisionContext::new(100);
        let th = k.embedding(&ctx).unwrap();
        assert!(th.re.to_f64().abs() < 1e-30);
        assert!((th.im.to_f64() - 1.0).abs() < 1e-30);
    }
}
