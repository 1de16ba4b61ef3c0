//! Period integrals along lifted edges, the period matrix and its Riemann matrix.

use rayon::prelude::*;
use rug::Float;
use thiserror::Error;

use crate::continuation::EdgeLift;
use crate::curve::EmbeddedCurve;
use crate::differentials::{DifferentialsError, EmbeddedDifferentials};
use crate::homology::{Chain, SymplecticBasis};
use crate::numerics::linalg::{min_symmetric_eigenvalue, CMatrix};
use crate::numerics::{pow2, Complex, LegendreCache, NumericsError, PrecisionContext};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PeriodsError {
    #[error("quadrature did not converge below order {0}")]
    OrderCapExceeded(usize),
    #[error("Riemann matrix check failed: {0}")]
    RiemannCheckFailed(String),
    #[error("α-block of the period matrix is singular")]
    SingularAlphaBlock,
    #[error(transparent)]
    Differentials(#[from] DifferentialsError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

const BASE_ORDER: usize = 32;
const ORDER_CAP: usize = 1 << 14;

/// Integrals of every differential along every sheet of one edge: [sheet][differential].
pub type EdgePeriods = Vec<Vec<Complex>>;

fn zeros(prec: u32, n: usize, g: usize) -> EdgePeriods {
    vec![vec![Complex::zero(prec); g]; n]
}

fn accumulate(acc: &mut EdgePeriods, add: &EdgePeriods) {
    for (a, b) in acc.iter_mut().zip(add) {
        for (x, y) in a.iter_mut().zip(b) {
            *x = &*x + y;
        }
    }
}

fn max_diff(a: &EdgePeriods, b: &EdgePeriods) -> Float {
    let prec = a[0].first().map_or(64, |z| z.prec());
    let mut m = Float::new(prec);
    for (x, y) in a.iter().flatten().zip(b.iter().flatten()) {
        let d = x.dist(y);
        if d > m {
            m = d;
        }
    }
    m
}

/// Parameter breakpoints on [0, 1] so each piece is no longer than its distance to the critical locus.
fn pieces(lift: &EdgeLift, critical: &[Complex], prec: u32) -> Vec<Float> {
    let a = lift.start.to_f64_pair();
    let b = lift.end.to_f64_pair();
    let len = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
    let crit: Vec<(f64, f64)> = critical.iter().map(|c| c.to_f64_pair()).collect();
    let mut out = vec![Float::new(prec)];
    let mut t = 0.0f64;
    while t < 1.0 {
        let x = (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1));
        let d = crit.iter().map(|c| ((c.0 - x.0).powi(2) + (c.1 - x.1).powi(2)).sqrt()).fold(f64::INFINITY, f64::min);
        let step = if len > 0.0 { (d / 2.0 / len).max(1e-6) } else { 1.0 };
        t = if t + step > 0.999_999 { 1.0 } else { t + step };
        out.push(Float::with_val(prec, t));
    }
    out
}

/// Gauss–Legendre estimate over [t0, t1] at the given order (without the (b − a) factor).
fn quadrature(
    curve: &EmbeddedCurve,
    diffs: &EmbeddedDifferentials,
    lift: &EdgeLift,
    t0: &Float,
    t1: &Float,
    order: usize,
    rules: &LegendreCache,
    ctx: &PrecisionContext,
) -> Result<EdgePeriods, PeriodsError> {
    let prec = ctx.prec();
    let rule = rules.get(order, ctx)?;
    let mid = Float::with_val(prec, t0 + t1) / 2u32;
    let half = Float::with_val(prec, t1 - t0) / 2u32;
    let mut acc = zeros(prec, lift.sheets(), diffs.genus());
    for (xi, w) in rule.nodes.iter().zip(&rule.weights) {
        let t = Float::with_val(prec, &half * xi) + &mid;
        let x = lift.point(&t);
        let ys = lift.evaluate(curve, &t, ctx)?;
        let vals = diffs.integrand(&x, &ys, ctx)?;
        let w = Float::with_val(prec, w * &half);
        for (a, v) in acc.iter_mut().zip(vals) {
            for (s, z) in a.iter_mut().zip(v) {
                *s = &*s + &z.scale(&w);
            }
        }
    }
    Ok(acc)
}

/// Integrals along one lifted edge for every starting sheet.
pub fn edge_periods(
    curve: &EmbeddedCurve,
    diffs: &EmbeddedDifferentials,
    lift: &EdgeLift,
    critical: &[Complex],
    rules: &LegendreCache,
    ctx: &PrecisionContext,
) -> Result<EdgePeriods, PeriodsError> {
    let prec = ctx.prec();
    let target = pow2(prec, -(ctx.working_bits as i64) - 10);
    let mut total = zeros(prec, lift.sheets(), diffs.genus());
    let bps = pieces(lift, critical, prec);
    for w in bps.windows(2) {
        let mut order = BASE_ORDER;
        let mut prev = quadrature(curve, diffs, lift, &w[0], &w[1], order, rules, ctx)?;
        let mut prev_err: Option<Float> = None;
        loop {
            order *= 2;
            if order > ORDER_CAP {
                return Err(PeriodsError::OrderCapExceeded(ORDER_CAP));
            }
            let next = quadrature(curve, diffs, lift, &w[0], &w[1], order, rules, ctx)?;
            let err = max_diff(&next, &prev);
            let scale = next.iter().flatten().map(|z| z.abs_f64()).fold(1.0, f64::max);
            if err < Float::with_val(prec, &target * scale) {
                accumulate(&mut total, &next);
                break;
            }
            if let Some(pe) = &prev_err {
                // Error estimates must shrink as the order doubles.
                if err >= *pe && order >= 8 * BASE_ORDER {
                    return Err(PeriodsError::OrderCapExceeded(order));
                }
            }
            prev_err = Some(err);
            prev = next;
        }
    }
    let dx = &lift.end - &lift.start;
    for row in total.iter_mut() {
        for z in row.iter_mut() {
            *z = &*z * &dx;
        }
    }
    Ok(total)
}

/// Edge periods for all lifts in parallel.
pub fn all_edge_periods(
    curve: &EmbeddedCurve,
    diffs: &EmbeddedDifferentials,
    lifts: &[EdgeLift],
    critical: &[Complex],
    ctx: &PrecisionContext,
) -> Result<Vec<EdgePeriods>, PeriodsError> {
    let rules = LegendreCache::new();
    lifts.par_iter().map(|l| edge_periods(curve, diffs, l, critical, &rules, ctx)).collect()
}

/// ∫ over a chain: Σ multiplicity · edge integral, in increasing lifted-edge order.
pub fn chain_integral(chain: &Chain, periods: &[EdgePeriods], sheets: usize, g: usize, prec: u32) -> Vec<Complex> {
    let mut out = vec![Complex::zero(prec); g];
    for (&le, &m) in &chain.0 {
        let (e, k) = (le / sheets, le % sheets);
        for (o, v) in out.iter_mut().zip(&periods[e][k]) {
            *o = &*o + &v.scale_f64(m as f64);
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct PeriodMatrix {
    /// g × 2g matrix (Ω_α | Ω_β).
    pub omega: CMatrix,
    pub genus: usize,
    pub precision_bits: u32,
    /// Set when β had to be negated to make Im τ positive definite.
    pub beta_negated: bool,
}

#[derive(Clone, Debug)]
pub struct RiemannMatrix {
    pub tau: CMatrix,
    pub symmetry_defect: f64,
    pub min_imag_eigenvalue: f64,
}

impl PeriodMatrix {
    pub fn alpha(&self) -> CMatrix {
        self.omega.columns(0, self.genus)
    }

    pub fn beta(&self) -> CMatrix {
        self.omega.columns(self.genus, 2 * self.genus)
    }

    /// Assemble Ω over the symplectic basis, fixing orientation so that Im τ ≻ 0.
    pub fn assemble(
        basis: &mut SymplecticBasis,
        periods: &[EdgePeriods],
        sheets: usize,
        ctx: &PrecisionContext,
    ) -> Result<(PeriodMatrix, RiemannMatrix), PeriodsError> {
        let g = basis.genus;
        let prec = ctx.prec();
        let mut omega = CMatrix::zeros(prec, g, 2 * g);
        for (j, c) in basis.cycles().enumerate() {
            let col = chain_integral(c, periods, sheets, g, prec);
            for (i, z) in col.into_iter().enumerate() {
                omega[(i, j)] = z;
            }
        }
        let mut pm = PeriodMatrix { omega, genus: g, precision_bits: ctx.working_bits, beta_negated: false };
        if g == 0 {
            return Ok((pm, RiemannMatrix { tau: CMatrix::zeros(prec, 0, 0), symmetry_defect: 0.0, min_imag_eigenvalue: f64::INFINITY }));
        }
        let mut rm = pm.riemann_matrix()?;
        let neg_im: Vec<Vec<f64>> = rm.tau.imag_part().iter().map(|r| r.iter().map(|x| -x).collect()).collect();
        if rm.min_imag_eigenvalue <= 0.0 && min_symmetric_eigenvalue(&symmetrize(&neg_im)) > 0.0 {
            basis.negate_beta();
            for i in 0..g {
                for j in g..2 * g {
                    pm.omega[(i, j)] = -&pm.omega[(i, j)];
                }
            }
            pm.beta_negated = true;
            rm = pm.riemann_matrix()?;
        }
        rm.check(ctx)?;
        Ok((pm, rm))
    }

    pub fn riemann_matrix(&self) -> Result<RiemannMatrix, PeriodsError> {
        let tau = self.alpha().solve(&self.beta()).map_err(|_| PeriodsError::SingularAlphaBlock)?;
        Ok(RiemannMatrix::from_tau(tau))
    }
}

fn symmetrize(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = m.len();
    (0..n).map(|i| (0..n).map(|j| 0.5 * (m[i][j] + m[j][i])).collect()).collect()
}

impl RiemannMatrix {
    pub fn from_tau(tau: CMatrix) -> Self {
        let defect = tau.sub(&tau.transpose()).max_abs().to_f64();
        let lam = min_symmetric_eigenvalue(&symmetrize(&tau.imag_part()));
        RiemannMatrix { tau, symmetry_defect: defect, min_imag_eigenvalue: lam }
    }

    pub fn check(&self, ctx: &PrecisionContext) -> Result<(), PeriodsError> {
        let bound = ctx.frac_tolerance(1, 2).to_f64();
        if !(self.symmetry_defect < bound) {
            return Err(PeriodsError::RiemannCheckFailed(format!("τ not symmetric (defect {:e})", self.symmetry_defect)));
        }
        if !(self.min_imag_eigenvalue > 0.0) {
            return Err(PeriodsError::RiemannCheckFailed(format!(
                "Im τ not positive definite (λ_min = {:e})",
                self.min_imag_eigenvalue
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuation::{fiber, lift_segment};
    use crate::curve::PlaneCurve;
    use crate::differentials::DifferentialBasis;

    #[test]
    fn square_root_edge() {
        let ctx = PrecisionContext::new(100);
        let p = ctx.prec();
        let curve = PlaneCurve::parse("y^2 - x").unwrap();
        let emb = curve.embed(&ctx).unwrap();
        let diffs = DifferentialBasis::parse_user(&curve, "1").unwrap().embed(&curve, &emb.theta);
        let a = Complex::from_f64(p, 1.0, 0.0);
        let b = Complex::from_f64(p, 4.0, 0.0);
        let fa = fiber(&emb, &a, &ctx).unwrap();
        let fb = fiber(&emb, &b, &ctx).unwrap();
        let lift = lift_segment(&emb, (0, 1), &a, &b, &fa, &fb, 1.0, &ctx).unwrap();
        let per = edge_periods(&emb, &diffs, &lift, &[Complex::zero(p)], &LegendreCache::new(), &ctx).unwrap();
        // Sheet 0 is y = −√x, sheet 1 is y = +√x: ∫₁⁴ dx/(2y) = ∓1.
        let one = Complex::one(p);
        assert!(per[1][0].dist(&one) < pow2(p, -100));
        assert!(per[0][0].dist(&-&one) < pow2(p, -100));
    }

    #[test]
    fn square_root_loop_oracle() {
        // Around the square with corners ±1 ± i, ∫ dx/(2√x) changes √x by its monodromy:
        // after one loop from 1 − i the integral is −2√(1 − i) on the principal sheet.
        let ctx = PrecisionContext::new(100);
        let p = ctx.prec();
        let curve = PlaneCurve::parse("y^2 - x").unwrap();
        let emb = curve.embed(&ctx).unwrap();
        let diffs = DifferentialBasis::parse_user(&curve, "1").unwrap().embed(&curve, &emb.theta);
        let corners: Vec<Complex> = [(1.0, -1.0), (1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0)].iter().map(|&(x, y)| Complex::from_f64(p, x, y)).collect();
        let fibers: Vec<_> = corners.iter().map(|z| fiber(&emb, z, &ctx).unwrap()).collect();
        let start = corners[0].sqrt();
        let mut sheet = fibers[0].iter().position(|y| y.dist(&start).to_f64() < 1e-20).unwrap();
        let mut total = Complex::zero(p);
        let rules = LegendreCache::new();
        for i in 0..4 {
            let j = (i + 1) % 4;
            let l = lift_segment(&emb, (i, j), &corners[i], &corners[j], &fibers[i], &fibers[j], 1.0, &ctx).unwrap();
            let per = edge_periods(&emb, &diffs, &l, &[Complex::zero(p)], &rules, &ctx).unwrap();
            total = &total + &per[sheet][0];
            sheet = l.permutation[sheet];
        }
        let expect = start.scale_f64(-2.0);
        assert!(total.dist(&expect) < pow2(p, -95));
        // Independent oracle: composite Simpson on ∫ dx/(2y) with y tracked by nearest-branch selection.
        let mut simpson = Complex::zero(53);
        let mut y = Complex::from_f64(53, start.re.to_f64(), start.im.to_f64());
        for i in 0..4 {
            let a = corners[i].with_prec(53);
            let b = corners[(i + 1) % 4].with_prec(53);
            let m = 2000;
            let h = (&b - &a).scale_f64(1.0 / m as f64);
            let mut s = Complex::zero(53);
            for k in 0..=m {
                let x = &a + &h.scale_f64(k as f64);
                let r = x.sqrt();
                y = if r.dist(&y) < (-&r).dist(&y) { r } else { -&r };
                let w = if k == 0 || k == m { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
                s = &s + &(&Complex::one(53) / &y.scale_f64(2.0)).scale_f64(w);
            }
            simpson = &simpson + &(&s * &h).scale_f64(1.0 / 3.0);
        }
        assert!(simpson.dist(&total.with_prec(53)).to_f64() < 1e-9);
    }

    #[test]
    fn tau_from_trivial_omega() {
        let ctx = PrecisionContext::new(100);
        let p = ctx.prec();
        let omega = CMatrix::from_rows(vec![vec![Complex::one(p), Complex::i(p)]]);
        let pm = PeriodMatrix { omega, genus: 1, precision_bits: 100, beta_negated: false };
        let rm = pm.riemann_matrix().unwrap();
        assert!(rm.tau[(0, 0)].dist(&Complex::i(p)).to_f64() < 1e-30);
        assert!(rm.check(&ctx).is_ok());
        let omega = CMatrix::from_rows(vec![vec![Complex::one(p), -&Complex::i(p)]]);
        let pm = PeriodMatrix { omega, genus: 1, precision_bits: 100, beta_negated: false };
        assert!(pm.riemann_matrix().unwrap().check(&ctx).is_err());
    }
}
