//! Arbitrary-precision complex arithmetic, polynomial roots, Newton refinement
//! and Gauss–Legendre rules.

mod complex;
mod legendre;
pub mod linalg;

pub use complex::{float_from_hex, float_to_hex, pi, pow2, Complex};
pub use legendre::{legendre_rule, LegendreCache, LegendreRule};

use rug::Float;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("root finder did not converge ({0})")]
    NonConvergence(String),
    #[error("newton iterate left the disk of radius {radius:e}")]
    DiskEscape { radius: f64 },
    #[error("newton iteration converged too slowly")]
    SlowConvergence,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("singular matrix")]
    Singular,
}

/// Working precision B together with the guard bits used internally.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PrecisionContext {
    pub working_bits: u32,
    pub guard_bits: u32,
}

impl Default for PrecisionContext {
    fn default() -> Self {
        PrecisionContext { working_bits: 100, guard_bits: 20 }
    }
}

impl PrecisionContext {
    pub fn new(working_bits: u32) -> Self {
        assert!(working_bits >= 53, "working precision must be at least 53 bits");
        PrecisionContext { working_bits, guard_bits: 20 }
    }

    /// Precision of all internal Floats.
    pub fn prec(&self) -> u32 {
        self.working_bits + self.guard_bits
    }

    /// 2^(-B + guard).
    pub fn tolerance(&self) -> Float {
        pow2(self.prec(), -(self.working_bits as i64) + self.guard_bits as i64)
    }

    /// 2^(-B·num/den), used for the various fractional-precision thresholds.
    pub fn frac_tolerance(&self, num: u32, den: u32) -> Float {
        pow2(self.prec(), -((self.working_bits * num / den) as i64))
    }

    pub fn doubled(&self) -> Self {
        PrecisionContext { working_bits: self.working_bits * 2, guard_bits: self.guard_bits }
    }
}

/// Dense univariate polynomial with complex coefficients, index = degree.
#[derive(Clone, Debug)]
pub struct ComplexPoly {
    pub coeffs: Vec<Complex>,
}

impl ComplexPoly {
    pub fn new(coeffs: Vec<Complex>) -> Self {
        ComplexPoly { coeffs }
    }

    pub fn from_f64(prec: u32, c: &[f64]) -> Self {
        ComplexPoly { coeffs: c.iter().map(|&x| Complex::from_f64(prec, x, 0.0)).collect() }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn prec(&self) -> u32 {
        self.coeffs.iter().map(|c| c.prec()).max().unwrap_or(53)
    }

    /// Horner evaluation.
    pub fn eval(&self, z: &Complex) -> Complex {
        let p = self.prec().max(z.prec());
        let mut acc = Complex::zero(p);
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * z) + c;
        }
        acc
    }

    /// Value and first derivative.
    pub fn eval_with_derivative(&self, z: &Complex) -> (Complex, Complex) {
        let p = self.prec().max(z.prec());
        let mut v = Complex::zero(p);
        let mut d = Complex::zero(p);
        for c in self.coeffs.iter().rev() {
            d = &(&d * z) + &v;
            v = &(&v * z) + c;
        }
        (v, d)
    }

    /// Σ |c_i| max(1, |z|)^i, the scale against which residuals are measured.
    pub fn magnitude_at(&self, z: &Complex) -> Float {
        let p = self.prec();
        let mut r = z.abs();
        if r < 1 {
            r = Float::with_val(p, 1);
        }
        let mut acc = Float::new(p);
        for c in self.coeffs.iter().rev() {
            acc *= &r;
            acc += c.abs();
        }
        acc
    }

    pub fn derivative(&self) -> ComplexPoly {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c.scale_f64(i as f64))
            .collect();
        ComplexPoly { coeffs }
    }
}

/// Relative residual |p(z)| / Σ|c_i| max(1, |z|)^i.
fn relative_residual(p: &ComplexPoly, z: &Complex) -> Float {
    let v = p.eval(z).abs();
    let m = p.magnitude_at(z);
    if m.is_zero() {
        return v;
    }
    v / m
}

const ABERTH_CAP: usize = 200;
const NEWTON_CAP: usize = 100;

/// All roots of `p` with multiplicity, sorted lexicographically by (re, im).
pub fn roots(p: &ComplexPoly, ctx: &PrecisionContext) -> Result<Vec<Complex>, NumericsError> {
    let prec = ctx.prec();
    let tol = ctx.tolerance();
    let mut coeffs: Vec<Complex> = p.coeffs.iter().map(|c| c.with_prec(prec)).collect();
    if coeffs.len() > 1 && coeffs.last().map(|c| c.abs() <= tol).unwrap_or(false) {
        return Err(NumericsError::InvalidInput("leading coefficient below tolerance".into()));
    }
    if coeffs.len() < 2 {
        return Err(NumericsError::InvalidInput("polynomial of degree < 1".into()));
    }
    let d = coeffs.len() - 1;
    let lead = coeffs[d].clone();
    for c in coeffs.iter_mut() {
        *c = &*c / &lead;
    }
    let monic = ComplexPoly::new(coeffs);
    if d == 1 {
        return Ok(vec![-&monic.coeffs[0]]);
    }

    // Initial guesses on a circle whose radius bounds the root moduli.
    let mut radius = 0.0f64;
    for (i, c) in monic.coeffs.iter().take(d).enumerate() {
        let a = c.abs().to_f64();
        if a > 0.0 {
            radius = radius.max(a.powf(1.0 / (d - i) as f64));
        }
    }
    let radius = if radius.is_finite() && radius > 0.0 { radius } else { 1.0 };
    let mut z: Vec<Complex> = (0..d)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / d as f64 + 0.4;
            Complex::from_f64(prec, radius * theta.cos(), radius * theta.sin())
        })
        .collect();

    let stop = pow2(prec, -(prec as i64) + 8);
    let mut converged = false;
    for _ in 0..ABERTH_CAP {
        let mut max_step = 0.0f64;
        let mut all_small = true;
        for i in 0..d {
            let (v, dv) = monic.eval_with_derivative(&z[i]);
            if v.is_zero() {
                continue;
            }
            let ratio = &v / &dv;
            let mut sum = Complex::zero(prec);
            for j in 0..d {
                if j != i {
                    let diff = &z[i] - &z[j];
                    if !diff.is_zero() {
                        sum = &sum + &diff.recip();
                    }
                }
            }
            let denom = &Complex::one(prec) - &(&ratio * &sum);
            let w = if denom.is_zero() || !dv.is_finite() || dv.is_zero() { ratio.clone() } else { &ratio / &denom };
            if !w.is_finite() {
                continue;
            }
            let scale = z[i].abs_f64().max(1.0);
            let step = w.abs_f64() / scale;
            max_step = max_step.max(step);
            if w.abs() > Float::with_val(prec, &stop * scale) {
                all_small = false;
            }
            z[i] = &z[i] - &w;
        }
        if all_small || max_step == 0.0 {
            converged = true;
            break;
        }
    }

    // Newton polishing: handles the final quadratic phase and simple roots not
    // fully settled by Aberth.
    for zi in z.iter_mut() {
        for _ in 0..NEWTON_CAP {
            let (v, dv) = monic.eval_with_derivative(zi);
            if v.is_zero() || dv.is_zero() {
                break;
            }
            let step = &v / &dv;
            let small = step.abs() <= Float::with_val(prec, &stop * zi.abs_f64().max(1.0));
            let candidate = &*zi - &step;
            if relative_residual(&monic, &candidate) > relative_residual(&monic, zi) {
                break;
            }
            *zi = candidate;
            if small {
                break;
            }
        }
    }

    for zi in &z {
        if !zi.is_finite() || relative_residual(&monic, zi) > tol {
            return Err(NumericsError::NonConvergence(format!(
                "degree {} polynomial, aberth {}",
                d,
                if converged { "converged" } else { "hit iteration cap" }
            )));
        }
    }
    let order_tol = ctx.frac_tolerance(1, 1);
    z.sort_by(|a, b| a.lex_cmp(b, &order_tol));
    Ok(z)
}

/// Newton iteration from `y0` that must stay inside the disk of radius `radius`.
pub fn newton_refine(
    p: &ComplexPoly,
    y0: &Complex,
    radius: &Float,
    ctx: &PrecisionContext,
) -> Result<Complex, NumericsError> {
    if *radius <= 0 {
        return Err(NumericsError::InvalidInput("radius must be positive".into()));
    }
    let prec = ctx.prec();
    let tol = ctx.tolerance();
    let stop = pow2(prec, -(prec as i64) + 6);
    let mut y = y0.with_prec(prec);
    let mut prev_step: Option<Float> = None;
    for iter in 0..NEWTON_CAP {
        let (v, dv) = p.eval_with_derivative(&y);
        let res = {
            let m = p.magnitude_at(&y);
            if m.is_zero() { v.abs() } else { v.abs() / m }
        };
        if v.is_zero() {
            return Ok(y);
        }
        if dv.is_zero() {
            return Err(NumericsError::SlowConvergence);
        }
        let step = &v / &dv;
        let step_abs = step.abs();
        y = &y - &step;
        if (&y - y0).abs() >= *radius {
            return Err(NumericsError::DiskEscape { radius: radius.to_f64() });
        }
        let scale = y.abs_f64().max(1.0);
        if step_abs <= Float::with_val(prec, &stop * scale) || (res < tol && iter > 0 && step_abs <= Float::with_val(prec, &tol * scale)) {
            let fin = relative_residual(p, &y);
            if fin < tol {
                return Ok(y);
            }
        }
        if let Some(prev) = &prev_step {
            if iter >= 3 && step_abs > Float::with_val(prec, prev / 2) {
                let fin = relative_residual(p, &y);
                if fin < tol {
                    return Ok(y);
                }
                return Err(NumericsError::SlowConvergence);
            }
        }
        prev_step = Some(step_abs);
    }
    Err(NumericsError::SlowConvergence)
}

/// Integer polynomial (constant term first) as text, highest degree first.
pub fn format_int_poly(c: &[rug::Integer], var: &str) -> String {
    let mut s = String::new();
    for (k, a) in c.iter().enumerate().rev() {
        if *a == 0 {
            continue;
        }
        let neg = *a < 0;
        let mag = a.clone().abs();
        if s.is_empty() {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { " - " } else { " + " });
        }
        let mono = match k {
            0 => String::new(),
            1 => var.to_string(),
            _ => format!("{}^{}", var, k),
        };
        if mono.is_empty() {
            s.push_str(&mag.to_string());
        } else if mag == 1 {
            s.push_str(&mono);
        } else {
            s.push_str(&format!("{}*{}", mag, mono));
        }
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(100)
    }

    #[test]
    fn roots_of_unity() {
        let c = ctx();
        let p = ComplexPoly::from_f64(c.prec(), &[-1.0, 0.0, 0.0, 1.0]);
        let r = roots(&p, &c).unwrap();
        assert_eq!(r.len(), 3);
        for z in &r {
            let z3 = z.pow_u(3);
            assert!((&z3 - &Complex::one(c.prec())).abs_f64() < 1e-28);
        }
        assert!((r[0].re.to_f64() + 0.5).abs() < 1e-20);
        assert!(r[0].im.to_f64() < 0.0);
        assert!((r[2].re.to_f64() - 1.0).abs() < 1e-25);
    }

    #[test]
    fn quadratic_sorted() {
        let c = ctx();
        let p = ComplexPoly::from_f64(c.prec(), &[-1.0, 0.0, 1.0]);
        let r = roots(&p, &c).unwrap();
        assert!((r[0].re.to_f64() + 1.0).abs() < 1e-28);
        assert!((r[1].re.to_f64() - 1.0).abs() < 1e-28);
    }

    #[test]
    fn cubic_against_bisection() {
        let c = ctx();
        let p = ComplexPoly::from_f64(c.prec(), &[-1.0, -1.0, 0.0, 1.0]);
        let r = roots(&p, &c).unwrap();
        // Independent real root by bisection in f64.
        let (mut lo, mut hi) = (1.0f64, 2.0f64);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if mid * mid * mid - mid - 1.0 > 0.0 { hi = mid } else { lo = mid }
        }
        let real = r.iter().find(|z| z.im.to_f64().abs() < 1e-20).unwrap();
        assert!((real.re.to_f64() - lo).abs() < 1e-14);
        // Deflated quadratic y² + r y + (r² − 1) gives the conjugate pair.
        let disc = lo * lo - 4.0 * (lo * lo - 1.0);
        let im = (-disc).sqrt() / 2.0;
        let pair: Vec<_> = r.iter().filter(|z| z.im.to_f64().abs() > 1e-20).collect();
        assert_eq!(pair.len(), 2);
        for z in pair {
            assert!((z.re.to_f64() + lo / 2.0).abs() < 1e-14);
            assert!((z.im.to_f64().abs() - im).abs() < 1e-14);
        }
    }

    #[test]
    fn newton_sqrt2() {
        let c = ctx();
        let p = ComplexPoly::from_f64(c.prec(), &[-2.0, 0.0, 1.0]);
        let rad = Float::with_val(c.prec(), 0.1);
        let r = newton_refine(&p, &Complex::from_f64(c.prec(), 1.4, 0.0), &rad, &c).unwrap();
        let s2 = Float::with_val(c.prec(), 2).sqrt();
        assert!(Float::with_val(c.prec(), &r.re - &s2).abs() < 1e-33);
        let r = newton_refine(&p, &Complex::from_f64(c.prec(), -1.4, 0.0), &rad, &c).unwrap();
        assert!(Float::with_val(c.prec(), &r.re + &s2).abs() < 1e-33);
    }

    #[test]
    fn newton_escape() {
        let c = ctx();
        let p = ComplexPoly::from_f64(c.prec(), &[-2.0, 0.0, 1.0]);
        let rad = Float::with_val(c.prec(), 0.05);
        let e = newton_refine(&p, &Complex::from_f64(c.prec(), 0.1, 0.0), &rad, &c).unwrap_err();
        assert!(matches!(e, NumericsError::DiskEscape { .. }));
        // The nearest root is farther than the radius.
        assert!((2f64.sqrt() - 0.1) > 0.05);
    }
}
