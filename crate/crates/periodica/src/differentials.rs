//! Regular differentials h(x, y) dx / ∂f/∂y.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::curve::{parse_numerators, powers, BaseField, BiPoly, CurveError, EmbeddedBiPoly, Elt, PlaneCurve};
use crate::numerics::{Complex, PrecisionContext};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DifferentialsError {
    #[error("numerators are linearly dependent")]
    DependentNumerators,
    #[error("denominator ∂f/∂y is numerically zero on the path")]
    SmallDenominator,
    #[error(transparent)]
    Curve(#[from] CurveError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisSource {
    Baker,
    User,
}

#[derive(Clone, Debug)]
pub struct DifferentialBasis {
    pub numerators: Vec<BiPoly>,
    pub source: BasisSource,
}

/// Rank of a matrix over the base field by Gaussian elimination.
pub fn rank_over(k: &BaseField, mut rows: Vec<Vec<Elt>>) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&r| !k.is_zero(&rows[r][c])) else { continue };
        rows.swap(rank, p);
        let inv = k.inv(&rows[rank][c]).unwrap();
        for r in 0..rows.len() {
            if r != rank && !k.is_zero(&rows[r][c]) {
                let f = k.mul(&rows[r][c], &inv);
                for t in c..cols {
                    let d = k.mul(&f, &rows[rank][t]);
                    rows[r][t] = k.sub(&rows[r][t], &d);
                }
            }
        }
        rank += 1;
    }
    rank
}

impl DifferentialBasis {
    pub fn baker(curve: &PlaneCurve) -> Self {
        let numerators = curve.baker_numerators().into_iter().map(|(i, j)| BiPoly::monomial(i, j, &curve.field)).collect();
        DifferentialBasis { numerators, source: BasisSource::Baker }
    }

    pub fn user(curve: &PlaneCurve, numerators: Vec<BiPoly>) -> Result<Self, DifferentialsError> {
        let k = &curve.field;
        let monos: BTreeSet<(u32, u32)> = numerators.iter().flat_map(|h| h.terms.keys().cloned()).collect();
        let rows: Vec<Vec<Elt>> =
            numerators.iter().map(|h| monos.iter().map(|m| h.terms.get(m).cloned().unwrap_or_else(|| k.zero())).collect()).collect();
        if rank_over(k, rows) < numerators.len() {
            return Err(DifferentialsError::DependentNumerators);
        }
        Ok(DifferentialBasis { numerators, source: BasisSource::User })
    }

    pub fn parse_user(curve: &PlaneCurve, src: &str) -> Result<Self, DifferentialsError> {
        let hs = parse_numerators(src, &curve.field)?;
        Self::user(curve, hs)
    }

    /// Baker's basis unless numerators are supplied.
    pub fn for_curve(curve: &PlaneCurve, user: Option<&str>) -> Result<Self, DifferentialsError> {
        match user {
            Some(src) => Self::parse_user(curve, src),
            None => Ok(Self::baker(curve)),
        }
    }

    pub fn len(&self) -> usize {
        self.numerators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.numerators.is_empty()
    }

    pub fn embed(&self, curve: &PlaneCurve, theta: &Complex) -> EmbeddedDifferentials {
        let k = &curve.field;
        let numerators: Vec<EmbeddedBiPoly> = self.numerators.iter().map(|h| h.embed(k, theta)).collect();
        let fy = curve.fy().embed(k, theta);
        let dx = numerators.iter().map(|h| h.max_x()).chain([fy.max_x()]).max().unwrap_or(0);
        let dy = numerators.iter().map(|h| h.max_y()).chain([fy.max_y()]).max().unwrap_or(0);
        EmbeddedDifferentials { numerators, fy, dx, dy }
    }
}

/// Numeric form of the basis, ready for evaluation on the curve.
#[derive(Clone, Debug)]
pub struct EmbeddedDifferentials {
    pub numerators: Vec<EmbeddedBiPoly>,
    pub fy: EmbeddedBiPoly,
    dx: usize,
    dy: usize,
}

impl EmbeddedDifferentials {
    pub fn genus(&self) -> usize {
        self.numerators.len()
    }

    /// h_i(x, y) / ∂f/∂y(x, y) for every i, for each of the given y values.
    pub fn integrand(&self, x: &Complex, ys: &[Complex], ctx: &PrecisionContext) -> Result<Vec<Vec<Complex>>, DifferentialsError> {
        let xp = powers(x, self.dx);
        let floor = ctx.frac_tolerance(1, 2);
        ys.iter()
            .map(|y| {
                let yp = powers(y, self.dy);
                let d = self.fy.eval(&xp, &yp);
                if d.abs() < floor {
                    return Err(DifferentialsError::SmallDenominator);
                }
                let inv = d.recip();
                Ok(self.numerators.iter().map(|h| &h.eval(&xp, &yp) * &inv).collect())
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baker_bases() {
        let c = PlaneCurve::parse("y^2 - x^3 + x + 1").unwrap();
        let b = DifferentialBasis::baker(&c);
        assert_eq!(b.numerators, vec![BiPoly::monomial(0, 0, &c.field)]);
        // Hyperelliptic y² = p(x) of genus g: 1, x, …, x^(g−1).
        for (deg, g) in [(5u32, 2u32), (6, 2), (7, 3), (8, 3), (9, 4)] {
            let c = PlaneCurve::parse(&format!("y^2 - x^{} - 3*x + 1", deg)).unwrap();
            let b = DifferentialBasis::baker(&c);
            let expect: Vec<BiPoly> = (0..g).map(|i| BiPoly::monomial(i, 0, &c.field)).collect();
            assert_eq!(b.numerators, expect);
        }
    }

    #[test]
    fn user_basis_independence() {
        let c = PlaneCurve::parse("x^3 + y^3 + 1").unwrap();
        assert!(DifferentialBasis::parse_user(&c, "1").is_ok());
        assert_eq!(
            DifferentialBasis::parse_user(&c, "x + y; 2*x + 2*y").unwrap_err(),
            DifferentialsError::DependentNumerators
        );
        let b = DifferentialBasis::parse_user(&c, "x^2 - 1\n y + 1, x*y").unwrap();
        assert_eq!(b.len(), 3);
        assert_eq!(b.source, BasisSource::User);
    }

    #[test]
    fn integrand_values() {
        let ctx = PrecisionContext::new(100);
        let c = PlaneCurve::parse("y^2 - x").unwrap();
        let e = DifferentialBasis::parse_user(&c, "1").unwrap().embed(&c, &Complex::zero(ctx.prec()));
        let one = Complex::one(ctx.prec());
        let v = e.integrand(&one, &[one.clone(), -&one], &ctx).unwrap();
        assert!((v[0][0].re.to_f64() - 0.5).abs() < 1e-30);
        assert!((v[1][0].re.to_f64() + 0.5).abs() < 1e-30);
        let z = Complex::zero(ctx.prec());
        assert_eq!(e.integrand(&z, std::slice::from_ref(&z), &ctx).unwrap_err(), DifferentialsError::SmallDenominator);
    }
}
