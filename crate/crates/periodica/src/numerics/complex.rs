use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::float::Round;
use rug::ops::Pow;
use rug::{Float, Integer, Rational};

/// Complex number with arbitrary-precision real and imaginary parts.
#[derive(Clone, PartialEq)]
pub struct Complex {
    pub re: Float,
    pub im: Float,
}

impl fmt::Debug for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {:+}i)", self.re.to_f64(), self.im.to_f64())
    }
}

impl Complex {
    pub fn zero(prec: u32) -> Self {
        Complex { re: Float::new(prec), im: Float::new(prec) }
    }

    pub fn one(prec: u32) -> Self {
        Complex::from_f64(prec, 1.0, 0.0)
    }

    pub fn i(prec: u32) -> Self {
        Complex::from_f64(prec, 0.0, 1.0)
    }

    pub fn from_f64(prec: u32, re: f64, im: f64) -> Self {
        Complex { re: Float::with_val(prec, re), im: Float::with_val(prec, im) }
    }

    pub fn from_real(re: Float) -> Self {
        let prec = re.prec();
        Complex { re, im: Float::new(prec) }
    }

    pub fn from_rational(prec: u32, q: &Rational) -> Self {
        Complex { re: Float::with_val(prec, q), im: Float::new(prec) }
    }

    pub fn from_integer(prec: u32, z: &Integer) -> Self {
        Complex { re: Float::with_val(prec, z), im: Float::new(prec) }
    }

    pub fn from_parts(prec: u32, re: &Float, im: &Float) -> Self {
        Complex { re: Float::with_val(prec, re), im: Float::with_val(prec, im) }
    }

    /// e^{iθ} for a real angle.
    pub fn cis(theta: &Float) -> Self {
        let prec = theta.prec();
        let (s, c) = theta.clone().sin_cos(Float::new(prec));
        Complex { re: c, im: s }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        Complex { re: Float::with_val(prec, &self.re), im: Float::with_val(prec, &self.im) }
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Complex { re: self.re.clone(), im: Float::with_val(self.im.prec(), -&self.im) }
    }

    pub fn norm_sqr(&self) -> Float {
        let p = self.prec();
        let mut r = Float::with_val(p, self.re.square_ref());
        r += Float::with_val(p, self.im.square_ref());
        r
    }

    pub fn abs(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.re.hypot_ref(&self.im))
    }

    pub fn abs_f64(&self) -> f64 {
        self.re.to_f64().hypot(self.im.to_f64())
    }

    pub fn arg(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.im.atan2_ref(&self.re))
    }

    pub fn scale(&self, s: &Float) -> Self {
        let p = self.prec();
        Complex { re: Float::with_val(p, &self.re * s), im: Float::with_val(p, &self.im * s) }
    }

    pub fn scale_f64(&self, s: f64) -> Self {
        let p = self.prec();
        Complex { re: Float::with_val(p, &self.re * s), im: Float::with_val(p, &self.im * s) }
    }

    pub fn mul_i(&self) -> Self {
        let p = self.prec();
        Complex { re: Float::with_val(p, -&self.im), im: self.re.clone() }
    }

    pub fn recip(&self) -> Self {
        let p = self.prec();
        let n = self.norm_sqr();
        Complex {
            re: Float::with_val(p, &self.re / &n),
            im: Float::with_val(p, -Float::with_val(p, &self.im / &n)),
        }
    }

    pub fn sqr(&self) -> Self {
        self * self
    }

    pub fn pow_u(&self, k: u32) -> Self {
        let mut acc = Complex::one(self.prec());
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = base.sqr();
            }
        }
        acc
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Self {
        let p = self.prec();
        let r = self.abs();
        if r.is_zero() {
            return Complex::zero(p);
        }
        let mut a = Float::with_val(p, &r + &self.re);
        a /= 2;
        let a = a.sqrt();
        let mut b = Float::with_val(p, &r - &self.re);
        b /= 2;
        let mut b = b.sqrt();
        if self.im.is_sign_negative() {
            b = -b;
        }
        Complex { re: a, im: b }
    }

    pub fn dist(&self, other: &Complex) -> Float {
        (self - other).abs()
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    /// Round both parts to the nearest Gaussian integer, if they fit.
    pub fn round_gaussian(&self) -> (Integer, Integer) {
        let r = self.re.to_integer_round(Round::Nearest).map(|x| x.0).unwrap_or_default();
        let i = self.im.to_integer_round(Round::Nearest).map(|x| x.0).unwrap_or_default();
        (r, i)
    }

    /// Decimal rendering with the given number of significant digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        let re = self.re.to_string_radix(10, Some(digits));
        let im = self.im.to_string_radix(10, Some(digits));
        if self.im.is_sign_negative() {
            format!("{}{}i", re, im)
        } else {
            format!("{}+{}i", re, im)
        }
    }

    /// Exact hexadecimal rendering ("re|im").
    pub fn to_hex(&self) -> String {
        format!("{}|{}", float_to_hex(&self.re), float_to_hex(&self.im))
    }

    pub fn from_hex(prec: u32, s: &str) -> Option<Complex> {
        let (a, b) = s.split_once('|')?;
        Some(Complex { re: float_from_hex(prec, a)?, im: float_from_hex(prec, b)? })
    }

    /// Lexicographic order on (re, im) where real parts closer than `tol` count as equal.
    pub fn lex_cmp(&self, other: &Complex, tol: &Float) -> Ordering {
        let d = Float::with_val(self.prec(), &self.re - &other.re);
        if d.clone().abs() > *tol {
            return self.re.partial_cmp(&other.re).unwrap_or(Ordering::Equal);
        }
        self.im.partial_cmp(&other.im).unwrap_or(Ordering::Equal)
    }
}

pub fn float_to_hex(x: &Float) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    x.to_string_radix(16, None)
}

pub fn float_from_hex(prec: u32, s: &str) -> Option<Float> {
    let parsed = Float::parse_radix(s, 16).ok()?;
    Some(Float::with_val(prec, parsed))
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl<'a, 'b> $tr<&'b Complex> for &'a Complex {
            type Output = Complex;
            fn $m(self, rhs: &'b Complex) -> Complex {
                let f: fn(&Complex, &Complex) -> Complex = $body;
                f(self, rhs)
            }
        }
        impl $tr<Complex> for Complex {
            type Output = Complex;
            fn $m(self, rhs: Complex) -> Complex {
                (&self).$m(&rhs)
            }
        }
        impl<'b> $tr<&'b Complex> for Complex {
            type Output = Complex;
            fn $m(self, rhs: &'b Complex) -> Complex {
                (&self).$m(rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| {
    let p = a.prec().max(b.prec());
    Complex { re: Float::with_val(p, &a.re + &b.re), im: Float::with_val(p, &a.im + &b.im) }
});
binop!(Sub, sub, |a, b| {
    let p = a.prec().max(b.prec());
    Complex { re: Float::with_val(p, &a.re - &b.re), im: Float::with_val(p, &a.im - &b.im) }
});
binop!(Mul, mul, |a, b| {
    let p = a.prec().max(b.prec());
    let mut re = Float::with_val(p, &a.re * &b.re);
    re -= Float::with_val(p, &a.im * &b.im);
    let mut im = Float::with_val(p, &a.re * &b.im);
    im += Float::with_val(p, &a.im * &b.re);
    Complex { re, im }
});
binop!(Div, div, |a, b| {
    let p = a.prec().max(b.prec());
    let n = b.norm_sqr();
    let mut re = Float::with_val(p, &a.re * &b.re);
    re += Float::with_val(p, &a.im * &b.im);
    re /= &n;
    let mut im = Float::with_val(p, &a.im * &b.re);
    im -= Float::with_val(p, &a.re * &b.im);
    im /= &n;
    Complex { re, im }
});

impl Neg for &Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        Complex { re: Float::with_val(self.re.prec(), -&self.re), im: Float::with_val(self.im.prec(), -&self.im) }
    }
}

impl Neg for Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        -&self
    }
}

/// 2^e as a Float.
pub fn pow2(prec: u32, e: i64) -> Float {
    let two = Float::with_val(prec, 2);
    two.pow(e as i32)
}

/// π at the given precision.
pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, rug::float::Constant::Pi)
}
