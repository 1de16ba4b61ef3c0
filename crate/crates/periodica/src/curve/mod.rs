//! Exact plane curves over ℚ or a number field: discriminant, critical locus,
//! Newton polygon and Baker numerators.

pub mod field;
mod parse;
pub mod poly;

use rug::{Float, Rational};
use thiserror::Error;

pub use field::{BaseField, Elt, NumberField};
pub use parse::{parse_complex_literal, parse_poly, Vars};
pub use poly::{powers, BiPoly, EmbeddedBiPoly, KPoly};

use crate::numerics::{roots, Complex, ComplexPoly, NumericsError, PrecisionContext};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("polynomial is not squarefree in y")]
    NotSquarefree,
    #[error("polynomial does not involve y")]
    ZeroLeadingForm,
    #[error("invalid number field: {0}")]
    InvalidField(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Exact plane curve f(x, y) = 0.
#[derive(Clone, Debug)]
pub struct PlaneCurve {
    pub field: BaseField,
    pub f: BiPoly,
    pub n: usize,
    pub y_coeffs: Vec<KPoly>,
}

pub(crate) fn check_min_poly(k: &NumberField) -> Result<(), CurveError> {
    let field = BaseField::Rationals;
    let p = KPoly { coeffs: k.min_poly.iter().map(|c| field.from_rational(c.clone())).collect() };
    let g = p.gcd(&p.derivative(&field), &field);
    if g.degree().unwrap_or(0) > 0 {
        return Err(CurveError::InvalidField("minimal polynomial is not squarefree".into()));
    }
    Ok(())
}

impl PlaneCurve {
    pub fn new(field: BaseField, f: BiPoly) -> Result<Self, CurveError> {
        if f.is_zero() {
            return Err(CurveError::Parse("zero polynomial".into()));
        }
        let n = f.y_degree().unwrap_or(0) as usize;
        if n == 0 {
            return Err(CurveError::ZeroLeadingForm);
        }
        let y_coeffs = f.y_coeffs(&field);
        let curve = PlaneCurve { field, f, n, y_coeffs };
        if curve.y_discriminant().is_zero() {
            return Err(CurveError::NotSquarefree);
        }
        Ok(curve)
    }

    /// Parse a curve document: optional field header, then the polynomial.
    pub fn parse(src: &str) -> Result<Self, CurveError> {
        let (field, body) = parse::parse_document(src)?;
        let f = parse_poly(&body, &field, Vars { x: "x", y: Some("y") })?;
        PlaneCurve::new(field, f)
    }

    pub fn fy(&self) -> BiPoly {
        self.f.derivative_y(&self.field)
    }

    pub fn leading_coeff(&self) -> &KPoly {
        &self.y_coeffs[self.n]
    }

    pub fn to_string(&self) -> String {
        self.f.format(&self.field)
    }

    /// Stable fingerprint of the exact data, used for cache keys.
    pub fn fingerprint(&self) -> String {
        let mut s = self.to_string();
        if let BaseField::Number(k) = &self.field {
            s.push_str(&format!(" | {} | {:?}", k, k.embedding_hint));
        }
        let mut h: u64 = 0xcbf29ce484222325;
        for b in s.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        format!("{:016x}", h)
    }

    /// disc_y(f) = (−1)^{n(n−1)/2} Res_y(f, ∂f/∂y) / f_n, computed exactly.
    pub fn y_discriminant(&self) -> KPoly {
        let k = &self.field;
        let n = self.n;
        if n == 1 {
            return KPoly::constant(k.one());
        }
        let dx = self.f.x_degree().unwrap_or(0) as usize;
        let bound = (2 * n - 1) * dx;
        let fy = self.fy();
        let mut xs = Vec::with_capacity(bound + 1);
        let mut vals = Vec::with_capacity(bound + 1);
        for idx in 0..=bound {
            let x0 = if idx % 2 == 0 { (idx / 2) as i64 } else { -(idx.div_ceil(2) as i64) };
            let xe = k.from_int(x0);
            let a: Vec<Elt> = (0..=n).map(|j| self.y_coeffs[j].eval(&xe, k)).collect();
            let b: Vec<Elt> = (0..n).map(|j| fy_coeff(&fy, j, &xe, k)).collect();
            xs.push(xe);
            vals.push(sylvester_resultant(&a, &b, k));
        }
        let res = newton_interpolate(&xs, &vals, k);
        let (q, r) = res.divrem(self.leading_coeff(), k);
        debug_assert!(r.is_zero(), "resultant not divisible by leading coefficient");
        if (n * (n - 1) / 2) % 2 == 1 {
            q.neg(k)
        } else {
            q
        }
    }

    /// Numeric critical locus: roots of the squarefree part of f_n · disc_y(f).
    pub fn critical_locus(&self, ctx: &PrecisionContext) -> Result<CriticalLocus, CurveError> {
        let k = &self.field;
        let p = self.leading_coeff().mul(&self.y_discriminant(), k);
        let sq = p.squarefree_part(k);
        let theta = k.embedding(ctx)?;
        let mut points = Vec::new();
        if sq.degree().unwrap_or(0) >= 1 {
            let cp = sq.embed(k, &theta);
            let rts = roots(&cp, ctx)?;
            points = dedupe(rts, &ctx.frac_tolerance(1, 4));
        }
        let auxiliary = points.is_empty();
        if auxiliary {
            points.push(Complex::zero(ctx.prec()));
        }
        Ok(CriticalLocus {
            finite_points: points,
            includes_infinity: true,
            auxiliary,
            squarefree_degree: sq.degree().unwrap_or(0),
        })
    }

    pub fn newton_polygon(&self) -> NewtonPolygonData {
        let support: Vec<(i64, i64)> = self.f.terms.keys().map(|&(i, j)| (i as i64, j as i64)).collect();
        newton_polygon_of(&support)
    }

    /// Monomials x^(i−1) y^(j−1) for interior points (i, j), graded-lex order.
    pub fn baker_numerators(&self) -> Vec<(u32, u32)> {
        let poly = self.newton_polygon();
        let mut out: Vec<(u32, u32)> = poly.interior_points.iter().map(|&(i, j)| ((i - 1) as u32, (j - 1) as u32)).collect();
        out.sort_by(|a, b| (a.0 + a.1, b.0).cmp(&(b.0 + b.1, a.0)));
        out
    }

    /// Complex polynomials f_j(x) and the coefficients of ∂f/∂y.
    pub fn embed(&self, ctx: &PrecisionContext) -> Result<EmbeddedCurve, CurveError> {
        let theta = self.field.embedding(ctx)?;
        let coeffs = self.y_coeffs.iter().map(|p| p.embed(&self.field, &theta)).collect();
        Ok(EmbeddedCurve { n: self.n, coeffs, theta })
    }
}

fn fy_coeff(fy: &BiPoly, j: usize, x: &Elt, k: &BaseField) -> Elt {
    let mut acc = k.zero();
    for (&(i, jj), c) in &fy.terms {
        if jj as usize == j {
            acc = k.add(&acc, &k.mul(c, &k.pow(x, i)));
        }
    }
    acc
}

/// Resultant of a (formal degree len−1) and b via the Sylvester determinant.
fn sylvester_resultant(a: &[Elt], b: &[Elt], k: &BaseField) -> Elt {
    let m = a.len() - 1;
    let l = b.len() - 1;
    let size = m + l;
    let mut mat = vec![vec![k.zero(); size]; size];
    for r in 0..l {
        for (j, c) in a.iter().rev().enumerate() {
            mat[r][r + j] = c.clone();
        }
    }
    for r in 0..m {
        for (j, c) in b.iter().rev().enumerate() {
            mat[l + r][r + j] = c.clone();
        }
    }
    determinant(mat, k)
}

pub fn determinant(mut mat: Vec<Vec<Elt>>, k: &BaseField) -> Elt {
    let n = mat.len();
    let mut det = k.one();
    for col in 0..n {
        let piv = (col..n).find(|&r| !k.is_zero(&mat[r][col]));
        let piv = match piv {
            Some(p) => p,
            None => return k.zero(),
        };
        if piv != col {
            mat.swap(piv, col);
            det = k.neg(&det);
        }
        let inv = k.inv(&mat[col][col]).unwrap();
        det = k.mul(&det, &mat[col][col]);
        for r in col + 1..n {
            if k.is_zero(&mat[r][col]) {
                continue;
            }
            let f = k.mul(&mat[r][col], &inv);
            for j in col..n {
                let t = k.mul(&f, &mat[col][j]);
                mat[r][j] = k.sub(&mat[r][j], &t);
            }
        }
    }
    det
}

fn newton_interpolate(xs: &[Elt], ys: &[Elt], k: &BaseField) -> KPoly {
    let n = xs.len();
    let mut coef: Vec<Elt> = ys.to_vec();
    for j in 1..n {
        for i in (j..n).rev() {
            let num = k.sub(&coef[i], &coef[i - 1]);
            let den = k.sub(&xs[i], &xs[i - j]);
            coef[i] = k.div(&num, &den).unwrap();
        }
    }
    let mut p = KPoly::constant(coef[n - 1].clone());
    for i in (0..n - 1).rev() {
        let lin = KPoly { coeffs: vec![k.neg(&xs[i]), k.one()] };
        p = p.mul(&lin, k).add(&KPoly::constant(coef[i].clone()), k);
    }
    p
}

fn dedupe(points: Vec<Complex>, tol: &Float) -> Vec<Complex> {
    let mut clusters: Vec<Vec<Complex>> = Vec::new();
    for p in points {
        match clusters.iter_mut().find(|c| c.iter().any(|q| q.dist(&p) < *tol)) {
            Some(c) => c.push(p),
            None => clusters.push(vec![p]),
        }
    }
    clusters
        .into_iter()
        .map(|c| {
            let prec = c[0].prec();
            let mut acc = Complex::zero(prec);
            for q in &c {
                acc = &acc + q;
            }
            acc.scale(&Float::with_val(prec, 1.0 / c.len() as f64))
        })
        .collect()
}

/// Numeric critical set S, with ∞ always adjoined.
#[derive(Clone, Debug)]
pub struct CriticalLocus {
    pub finite_points: Vec<Complex>,
    pub includes_infinity: bool,
    /// True when S was empty and a harmless puncture at 0 was added.
    pub auxiliary: bool,
    pub squarefree_degree: usize,
}

/// The curve with coefficients embedded in ℂ.
#[derive(Clone, Debug)]
pub struct EmbeddedCurve {
    pub n: usize,
    pub coeffs: Vec<ComplexPoly>,
    pub theta: Complex,
}

impl EmbeddedCurve {
    /// f(x0, y) as a polynomial in y.
    pub fn fiber_poly(&self, x0: &Complex) -> ComplexPoly {
        ComplexPoly::new(self.coeffs.iter().map(|p| p.eval(x0)).collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonPolygonData {
    pub support: Vec<(i64, i64)>,
    pub hull: Vec<(i64, i64)>,
    pub interior_points: Vec<(i64, i64)>,
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Counterclockwise convex hull without collinear points (monotone chain).
pub fn convex_hull(points: &[(i64, i64)]) -> Vec<(i64, i64)> {
    let mut pts = points.to_vec();
    pts.sort();
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<(i64, i64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(i64, i64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

pub fn newton_polygon_of(support: &[(i64, i64)]) -> NewtonPolygonData {
    let hull = convex_hull(support);
    let mut interior = Vec::new();
    if hull.len() >= 3 {
        let (xmin, xmax) = (hull.iter().map(|p| p.0).min().unwrap(), hull.iter().map(|p| p.0).max().unwrap());
        let (ymin, ymax) = (hull.iter().map(|p| p.1).min().unwrap(), hull.iter().map(|p| p.1).max().unwrap());
        for i in xmin..=xmax {
            for j in ymin..=ymax {
                let inside = (0..hull.len()).all(|e| cross(hull[e], hull[(e + 1) % hull.len()], (i, j)) > 0);
                if inside {
                    interior.push((i, j));
                }
            }
        }
    }
    let mut support = support.to_vec();
    support.sort();
    NewtonPolygonData { support, hull, interior_points: interior }
}

/// Parse a whitespace/semicolon separated list of numerator polynomials.
pub fn parse_numerators(src: &str, field: &BaseField) -> Result<Vec<BiPoly>, CurveError> {
    let text: String = src.lines().map(|l| l.split('#').next().unwrap_or("")).collect::<Vec<_>>().join("\n");
    text.split(['\n', ';', ','])
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| parse_poly(s, field, Vars { x: "x", y: Some("y") }))
        .collect()
}

/// Exact rational number from a field element, if it lies in ℚ.
pub fn rational_of(k: &BaseField, e: &Elt) -> Option<Rational> {
    k.as_rational(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Elt {
        BaseField::Rationals.from_int(n)
    }

    #[test]
    fn parse_and_degree() {
        let c = PlaneCurve::parse("y^2 - x^3 + x + 1").unwrap();
        assert_eq!(c.n, 2);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(PlaneCurve::parse("y^2 - y^2"), Err(CurveError::Parse(_))));
        assert!(matches!(PlaneCurve::parse("(y - x)^2"), Err(CurveError::NotSquarefree)));
        assert!(matches!(PlaneCurve::parse("x^2 + 1"), Err(CurveError::ZeroLeadingForm)));
    }

    #[test]
    fn quadratic_discriminant_oracle() {
        // disc(y² + b y + c) = b² − 4c with b = 0, c = −(x³ − x − 1).
        let c = PlaneCurve::parse("y^2 - x^3 + x + 1").unwrap();
        let d = c.y_discriminant();
        assert_eq!(d.coeffs, vec![q(-4), q(-4), q(0), q(4)]);
        let c = PlaneCurve::parse("y^2 - x").unwrap();
        assert_eq!(c.y_discriminant().coeffs, vec![q(0), q(4)]);
    }

    #[test]
    fn cubic_discriminant_oracle() {
        // y³ + p y + r: disc = −4p³ − 27r² with p = x, r = 1.
        let c = PlaneCurve::parse("y^3 + x*y + 1").unwrap();
        let d = c.y_discriminant();
        assert_eq!(d.coeffs, vec![q(-27), q(0), q(0), q(-4)]);
    }

    #[test]
    fn critical_locus_of_elliptic_curve() {
        let c = PlaneCurve::parse("y^2 - x^3 + x + 1").unwrap();
        let ctx = PrecisionContext::new(100);
        let s = c.critical_locus(&ctx).unwrap();
        assert_eq!(s.finite_points.len(), 3);
        let s = PlaneCurve::parse("y^2 - x").unwrap().critical_locus(&ctx).unwrap();
        assert_eq!(s.finite_points.len(), 1);
        assert!(s.finite_points[0].abs_f64() < 1e-30);
    }

    #[test]
    fn repeated_discriminant_roots_are_merged() {
        // Squarefree in y, but the discriminant has double roots at ±1.
        let c = PlaneCurve::parse("y^2 - (x^2 - 1)^2*(x - 2)").unwrap();
        let s = c.critical_locus(&PrecisionContext::new(100)).unwrap();
        assert_eq!(s.finite_points.len(), 3);
    }

    #[test]
    fn newton_polygons() {
        let c = PlaneCurve::parse("y^2 - x^3 + x + 1").unwrap();
        assert_eq!(c.newton_polygon().interior_points, vec![(1, 1)]);
        assert_eq!(c.baker_numerators(), vec![(0, 0)]);
        let c = PlaneCurve::parse("y^2 - x^5 + 1").unwrap();
        assert_eq!(c.newton_polygon().interior_points, vec![(1, 1), (2, 1)]);
        assert_eq!(c.baker_numerators(), vec![(0, 0), (1, 0)]);
        let c = PlaneCurve::parse("x*y - 1").unwrap();
        assert!(c.newton_polygon().interior_points.is_empty());
    }

    #[test]
    fn number_field_curve() {
        let c = PlaneCurve::parse("field t: t^2+1; embedding 0+1i;\ny^2 - x^3 - t*x").unwrap();
        assert_eq!(c.n, 2);
        let ctx = PrecisionContext::new(100);
        let s = c.critical_locus(&ctx).unwrap();
        assert_eq!(s.finite_points.len(), 3);
        let e = c.embed(&ctx).unwrap();
        for x in &s.finite_points {
            // x³ + i x vanishes on the critical locus.
            let v = &x.pow_u(3) + &(&Complex::i(ctx.prec()) * x);
            assert!(v.abs_f64() < 1e-25);
            assert_eq!(e.fiber_poly(x).degree(), 2);
        }
    }
}
