//! Homomorphisms of Jacobians from period matrices: Hom bases, the Rosati involution,
//! endomorphism algebras, symmetric idempotents and symplectic automorphism groups.

use std::collections::{BTreeMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::{Float, Integer, Rational};
use serde_json::{json, Value};
use thiserror::Error;

use crate::lattice::{algebraize, approximate_kernel, fincke_pohst_capped, hnf, AlgebraicCandidate, LatticeError};
use crate::numerics::linalg::CMatrix;
use crate::numerics::{pow2, roots, Complex, ComplexPoly, PrecisionContext};
use crate::periods::{PeriodMatrix, RiemannMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AbelianError {
    #[error("homomorphism residual {0:e} is in the ambiguous zone; raise the precision")]
    PrecisionTooLow(f64),
    #[error("structure constants are not rational")]
    StructureConstantsNotRational,
    #[error("no splitting element found after {0} draws")]
    IdempotentSearchFailed(usize),
    #[error("symplectic set is not closed under composition")]
    ClosureFailure,
    #[error("genus mismatch: {0} vs {1}")]
    GenusMismatch(usize, usize),
    #[error("singular period block")]
    Singular,
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

pub type IMat = Vec<Vec<i64>>;
pub type QMat = Vec<Vec<Rational>>;

/// E = [[0, I], [−I, 0]] of size 2g.
pub fn std_symplectic(g: usize) -> IMat {
    let mut e = vec![vec![0; 2 * g]; 2 * g];
    for i in 0..g {
        e[i][g + i] = 1;
        e[g + i][i] = -1;
    }
    e
}

pub fn imul(a: &IMat, b: &IMat) -> IMat {
    let (n, m, p) = (a.len(), b.len(), b.first().map_or(0, |r| r.len()));
    let mut c = vec![vec![0i64; p]; n];
    for i in 0..n {
        for k in 0..m {
            let x = a[i][k];
            if x != 0 {
                for j in 0..p {
                    c[i][j] += x * b[k][j];
                }
            }
        }
    }
    c
}

pub fn itranspose(a: &IMat) -> IMat {
    let (n, m) = (a.len(), a.first().map_or(0, |r| r.len()));
    (0..m).map(|j| (0..n).map(|i| a[i][j]).collect()).collect()
}

fn ineg(a: &IMat) -> IMat {
    a.iter().map(|r| r.iter().map(|x| -x).collect()).collect()
}

fn iadd(a: &IMat, b: &IMat) -> IMat {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| p + q).collect()).collect()
}

pub fn iidentity(n: usize) -> IMat {
    (0..n).map(|i| (0..n).map(|j| (i == j) as i64).collect()).collect()
}

fn iscale(a: &IMat, s: i64) -> IMat {
    a.iter().map(|r| r.iter().map(|x| x * s).collect()).collect()
}

fn to_q(a: &IMat) -> QMat {
    a.iter().map(|r| r.iter().map(|&x| Rational::from(x)).collect()).collect()
}

fn qmul(a: &QMat, b: &QMat) -> QMat {
    let (n, m, p) = (a.len(), b.len(), b.first().map_or(0, |r| r.len()));
    let mut c = vec![vec![Rational::new(); p]; n];
    for i in 0..n {
        for k in 0..m {
            if a[i][k] != 0 {
                for j in 0..p {
                    c[i][j] += Rational::from(&a[i][k] * &b[k][j]);
                }
            }
        }
    }
    c
}

fn qadd(a: &QMat, b: &QMat) -> QMat {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(p, q)| Rational::from(p + q)).collect()).collect()
}

fn qscale(a: &QMat, s: &Rational) -> QMat {
    a.iter().map(|r| r.iter().map(|x| Rational::from(x * s)).collect()).collect()
}

fn qidentity(n: usize) -> QMat {
    (0..n).map(|i| (0..n).map(|j| Rational::from((i == j) as i32)).collect()).collect()
}

fn qtrace(a: &QMat) -> Rational {
    (0..a.len()).fold(Rational::new(), |s, i| s + &a[i][i])
}

fn qis_zero(a: &QMat) -> bool {
    a.iter().flatten().all(|x| *x == 0)
}

/// Row echelon form over ℚ; returns (rank, pivot columns, reduced rows).
fn qechelon(mut rows: QMat) -> (usize, Vec<usize>, QMat) {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    let mut pivots = Vec::new();
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][c] != 0) else { continue };
        rows.swap(rank, p);
        let inv = Rational::from(rows[rank][c].recip_ref());
        for t in rows[rank].iter_mut() {
            *t *= &inv;
        }
        for r in 0..rows.len() {
            if r != rank && rows[r][c] != 0 {
                let f = rows[r][c].clone();
                let pr = rows[rank].clone();
                for (t, s) in rows[r].iter_mut().zip(&pr) {
                    *t -= Rational::from(&f * s);
                }
            }
        }
        pivots.push(c);
        rank += 1;
    }
    rows.truncate(rank);
    (rank, pivots, rows)
}

pub fn qrank(a: &QMat) -> usize {
    qechelon(a.clone()).0
}

/// Basis of the right nullspace {x : A x = 0}.
fn qnullspace(a: &QMat, cols: usize) -> QMat {
    let (_, pivots, red) = qechelon(a.clone());
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::new(); cols];
            v[f] = Rational::from(1);
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = Rational::from(-&red[r][f]);
            }
            v
        })
        .collect()
}

// Dense polynomials over ℚ, constant term first.
type QPoly = Vec<Rational>;

fn ptrim(mut p: QPoly) -> QPoly {
    while p.last().is_some_and(|c| *c == 0) {
        p.pop();
    }
    p
}

fn pmul(a: &QPoly, b: &QPoly) -> QPoly {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut c = vec![Rational::new(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            c[i + j] += Rational::from(x * y);
        }
    }
    ptrim(c)
}

fn psub(a: &QPoly, b: &QPoly) -> QPoly {
    let n = a.len().max(b.len());
    ptrim((0..n).map(|i| a.get(i).cloned().unwrap_or_default() - b.get(i).cloned().unwrap_or_default()).collect())
}

fn pdivrem(a: &QPoly, b: &QPoly) -> (QPoly, QPoly) {
    let mut r = ptrim(a.clone());
    let b = ptrim(b.clone());
    let db = b.len() - 1;
    if r.len() < b.len() {
        return (vec![], r);
    }
    let mut q = vec![Rational::new(); r.len() - db];
    let lead = b[db].clone();
    while r.len() > db && !r.is_empty() {
        let k = r.len() - 1 - db;
        let c = Rational::from(r.last().unwrap() / &lead);
        for (i, bc) in b.iter().enumerate() {
            r[k + i] -= Rational::from(&c * bc);
        }
        q[k] = c;
        r = ptrim(r);
    }
    (ptrim(q), r)
}

fn pmonic(p: &QPoly) -> QPoly {
    let l = p.last().unwrap().clone();
    p.iter().map(|c| Rational::from(c / &l)).collect()
}

fn pgcd(a: &QPoly, b: &QPoly) -> QPoly {
    let (mut a, mut b) = (ptrim(a.clone()), ptrim(b.clone()));
    while !b.is_empty() {
        let r = pdivrem(&a, &b).1;
        a = b;
        b = r;
    }
    if a.is_empty() { a } else { pmonic(&a) }
}

/// (g, s, t) with s·a + t·b = g = gcd(a, b).
fn pxgcd(a: &QPoly, b: &QPoly) -> (QPoly, QPoly, QPoly) {
    let (mut r0, mut r1) = (ptrim(a.clone()), ptrim(b.clone()));
    let (mut s0, mut s1) = (vec![Rational::from(1)], vec![]);
    let (mut t0, mut t1) = (vec![], vec![Rational::from(1)]);
    while !r1.is_empty() {
        let (q, r) = pdivrem(&r0, &r1);
        r0 = std::mem::replace(&mut r1, r);
        let s = psub(&s0, &pmul(&q, &s1));
        s0 = std::mem::replace(&mut s1, s);
        let t = psub(&t0, &pmul(&q, &t1));
        t0 = std::mem::replace(&mut t1, t);
    }
    let l = r0.last().unwrap().clone();
    let inv = |p: &QPoly| p.iter().map(|c| Rational::from(c / &l)).collect::<QPoly>();
    (inv(&r0), inv(&s0), inv(&t0))
}

fn pderiv(p: &QPoly) -> QPoly {
    ptrim(p.iter().enumerate().skip(1).map(|(i, c)| Rational::from(c * i as u32)).collect())
}

/// Characteristic polynomial by Faddeev–LeVerrier.
fn charpoly(a: &QMat) -> QPoly {
    let n = a.len();
    let mut c = vec![Rational::new(); n + 1];
    c[n] = Rational::from(1);
    let mut m = vec![vec![Rational::new(); n]; n];
    for k in 1..=n {
        // M_k = A·M_{k−1} + c_{n−k+1} I
        let mut mk = qmul(a, &m);
        for i in 0..n {
            mk[i][i] += &c[n - k + 1];
        }
        let am = qmul(a, &mk);
        c[n - k] = -qtrace(&am) / k as u32;
        m = mk;
    }
    c
}

/// p / gcd(p, p'): the minimal polynomial of a semisimple matrix.
fn squarefree(p: &QPoly) -> QPoly {
    let g = pgcd(p, &pderiv(p));
    pmonic(&pdivrem(p, &g).0)
}

fn is_square(q: &Rational) -> Option<Rational> {
    if *q < 0 {
        return None;
    }
    let (n, d) = (q.numer(), q.denom());
    let (sn, rn) = n.clone().sqrt_rem(Integer::new());
    let (sd, rd) = d.clone().sqrt_rem(Integer::new());
    (rn == 0 && rd == 0).then(|| Rational::from((sn, sd)))
}

/// Monic irreducible factors over ℚ of a squarefree monic polynomial.
fn factor_q(p: &QPoly) -> Vec<QPoly> {
    let p = pmonic(&ptrim(p.clone()));
    let deg = p.len() - 1;
    if deg <= 1 {
        return vec![p];
    }
    if deg == 2 {
        let disc = Rational::from(p[1].square_ref()) - Rational::from(&p[0] * 4u32);
        return match is_square(&disc) {
            Some(s) => {
                let r1 = Rational::from(&s - &p[1]) / 2u32;
                let r2 = -(Rational::from(&s + &p[1]) / 2u32);
                vec![vec![-r1, Rational::from(1)], vec![-r2, Rational::from(1)]]
            }
            None => vec![p],
        };
    }
    // Recombine numerical roots: a factor's coefficients are rationals with denominators dividing the content of p.
    let ctx = PrecisionContext::new(200 + 20 * deg as u32);
    let prec = ctx.prec();
    let mut den = Integer::from(1);
    for c in &p {
        den.lcm_mut(c.denom());
    }
    let ip: Vec<Complex> = p.iter().map(|c| Complex::from_rational(prec, &Rational::from(c * &den))).collect();
    let Ok(rs) = roots(&ComplexPoly::new(ip), &ctx) else { return vec![p] };
    let mut remaining: Vec<usize> = (0..rs.len()).collect();
    let mut rest = p.clone();
    let mut out = Vec::new();
    for size in 1..=deg / 2 {
        let mut found = true;
        while found && remaining.len() >= 2 * size {
            found = false;
            for combo in combinations(&remaining, size) {
                let mut prod = vec![Complex::one(prec)];
                for &i in &combo {
                    let mut next = vec![Complex::zero(prec); prod.len() + 1];
                    for (k, c) in prod.iter().enumerate() {
                        next[k + 1] = &next[k + 1] + c;
                        next[k] = &next[k] - &(c * &rs[i]);
                    }
                    prod = next;
                }
                // Coefficients of a monic factor of a monic polynomial with coefficients in (1/den)ℤ lie in (1/den^k)ℤ; try den^size.
                let scale = { use rug::ops::Pow; Integer::from((&den).pow(size as u32)) };
                let sf = Float::with_val(prec, &scale);
                let cand: Option<QPoly> = prod
                    .iter()
                    .map(|c| {
                        let x = Float::with_val(prec, &c.re * &sf);
                        let r = x.clone().round();
                        let err = Float::with_val(prec, &x - &r).abs();
                        (err < 1e-20 && c.im.clone().abs() < 1e-20).then(|| Rational::from((r.to_integer().unwrap(), scale.clone())))
                    })
                    .collect();
                if let Some(f) = cand {
                    let (q, r) = pdivrem(&rest, &f);
                    if r.is_empty() {
                        rest = q;
                        out.push(f);
                        remaining.retain(|i| !combo.contains(i));
                        found = true;
                        break;
                    }
                }
            }
        }
    }
    if rest.len() > 1 {
        out.push(pmonic(&rest));
    }
    out
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(items: &[usize], k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i]);
            rec(items, k, i + 1, cur, out);
            cur.pop();
        }
    }
    rec(items, k, 0, &mut cur, &mut out);
    out
}

/// p(X) with `unit` standing in for the identity.
fn peval_mat(p: &QPoly, x: &QMat, unit: &QMat) -> QMat {
    let n = x.len();
    let mut acc = vec![vec![Rational::new(); n]; n];
    for c in p.iter().rev() {
        acc = qadd(&qmul(&acc, x), &qscale(unit, c));
    }
    acc
}

/// A Jacobian given numerically by Ω = (Ω_α | Ω_β) and τ = Ω_α⁻¹Ω_β.
#[derive(Clone, Debug)]
pub struct Jacobian {
    pub genus: usize,
    pub omega: CMatrix,
    pub tau: CMatrix,
    pub ctx: PrecisionContext,
}

impl Jacobian {
    pub fn new(periods: &PeriodMatrix, riemann: &RiemannMatrix, ctx: &PrecisionContext) -> Self {
        Jacobian { genus: periods.genus, omega: periods.omega.clone(), tau: riemann.tau.clone(), ctx: *ctx }
    }

    pub fn from_omega(omega: CMatrix, ctx: &PrecisionContext) -> Result<Self, AbelianError> {
        let g = omega.rows;
        let tau = omega.columns(0, g).solve(&omega.columns(g, 2 * g)).map_err(|_| AbelianError::Singular)?;
        Ok(Jacobian { genus: g, omega, tau, ctx: *ctx })
    }

    fn alpha(&self) -> CMatrix {
        self.omega.columns(0, self.genus)
    }
}

/// A homomorphism J₁ → J₂ through its homology representation R (2g₂ × 2g₁) and tangent representation T (g₂ × g₁).
#[derive(Clone, Debug)]
pub struct HomEntry {
    pub r: IMat,
    pub t: CMatrix,
    pub residual: f64,
}

impl HomEntry {
    /// The g-sized blocks (D, B, C, A) of R = [[D, B], [C, A]].
    pub fn blocks(&self) -> [IMat; 4] {
        let g2 = self.r.len() / 2;
        let g1 = self.r.first().map_or(0, |r| r.len()) / 2;
        let blk = |r0: usize, c0: usize| (r0..r0 + g2).map(|i| self.r[i][c0..c0 + g1].to_vec()).collect();
        [blk(0, 0), blk(0, g1), blk(g2, 0), blk(g2, g1)]
    }

    pub fn to_json(&self, digits: usize) -> Value {
        json!({ "R": self.r, "T": crate::pipeline::matrix_json(&self.t, digits), "residual": self.residual })
    }
}

/// T = (Ω₂R)(first g₁ columns) · Ω₁α⁻¹ and the relative residual ‖TΩ₁ − Ω₂R‖.
pub fn tangent(j1: &Jacobian, j2: &Jacobian, r: &IMat) -> Result<(CMatrix, f64), AbelianError> {
    let prec = j1.ctx.prec().max(j2.ctx.prec());
    let rm = CMatrix::from_i64(prec, r.len(), r[0].len(), &r.iter().flatten().cloned().collect::<Vec<_>>());
    let o2r = j2.omega.mul(&rm);
    let lhs = o2r.columns(0, j1.genus);
    // T Ω₁α = lhs  ⇔  Ω₁αᵀ Tᵀ = lhsᵀ.
    let t = j1.alpha().transpose().solve(&lhs.transpose()).map_err(|_| AbelianError::Singular)?.transpose();
    let diff = t.mul(&j1.omega).sub(&o2r).max_abs().to_f64();
    let scale = o2r.max_abs().to_f64().max(1.0);
    Ok((t, diff / scale))
}

/// A ℤ-basis of Hom(J₁, J₂).
#[derive(Clone, Debug)]
pub struct HomBasis {
    pub g1: usize,
    pub g2: usize,
    pub entries: Vec<HomEntry>,
}

impl HomBasis {
    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    pub fn r_matrices(&self) -> Vec<IMat> {
        self.entries.iter().map(|e| e.r.clone()).collect()
    }

    /// Rank of the sublattice of H₁(J₂) spanned by the images of all basis maps.
    pub fn image_rank(&self) -> usize {
        let cols: QMat = self.entries.iter().flat_map(|e| itranspose(&e.r)).map(|c| c.iter().map(|&x| Rational::from(x)).collect()).collect();
        if cols.is_empty() { 0 } else { qrank(&cols) }
    }

    /// Gram matrix of λ ↦ tr(R*R) with R = Σ λᵢ Bᵢ and R* = E₁⁻¹RᵀE₂.
    pub fn trace_form(&self) -> QMat {
        trace_form(&self.r_matrices(), self.g1, self.g2)
    }

    pub fn to_json(&self, digits: usize) -> Value {
        json!({ "rank": self.rank(), "entries": self.entries.iter().map(|e| e.to_json(digits)).collect::<Vec<_>>() })
    }
}

/// R* = E₁⁻¹ Rᵀ E₂ for R : H₁(J₁) → H₁(J₂).
pub fn dual(r: &IMat, g1: usize, g2: usize) -> IMat {
    ineg(&imul(&imul(&std_symplectic(g1), &itranspose(r)), &std_symplectic(g2)))
}

/// Rosati involution R† = −E Rᵀ E on endomorphisms.
pub fn rosati(r: &IMat) -> IMat {
    let g = r.len() / 2;
    dual(r, g, g)
}

/// Rosati image of an endomorphism with its tangent matrix rebuilt from R†.
pub fn rosati_entry(j: &Jacobian, h: &HomEntry) -> Result<HomEntry, AbelianError> {
    let r = rosati(&h.r);
    let (t, residual) = tangent(j, j, &r)?;
    Ok(HomEntry { r, t, residual })
}

pub fn trace_form(basis: &[IMat], g1: usize, g2: usize) -> QMat {
    let duals: Vec<IMat> = basis.iter().map(|b| dual(b, g1, g2)).collect();
    let n = basis.len();
    let tr = |a: &IMat, b: &IMat| -> i64 { (0..a.len()).map(|i| (0..b.len()).map(|k| a[i][k] * b[k][i]).sum::<i64>()).sum() };
    (0..n).map(|i| (0..n).map(|j| Rational::from((tr(&duals[i], &basis[j]) + tr(&duals[j], &basis[i]), 2))).collect()).collect()
}

/// Rows of the real system B + τ₂A − (D + τ₂C)τ₁ = 0 in the entries of R (row-major, 2g₂ × 2g₁).
fn hom_system(tau1: &CMatrix, tau2: &CMatrix, prec: u32) -> Vec<Vec<Float>> {
    let (g1, g2) = (tau1.rows, tau2.rows);
    let n = 4 * g1 * g2;
    let idx = |r: usize, c: usize| r * 2 * g1 + c;
    let mut rows = Vec::with_capacity(2 * g1 * g2);
    for i in 0..g2 {
        for j in 0..g1 {
            let mut coeff = vec![Complex::zero(prec); n];
            coeff[idx(i, g1 + j)] = Complex::one(prec);
            for k in 0..g2 {
                coeff[idx(g2 + k, g1 + j)] = &coeff[idx(g2 + k, g1 + j)] + &tau2[(i, k)];
            }
            for k in 0..g1 {
                coeff[idx(i, k)] = &coeff[idx(i, k)] - &tau1[(k, j)];
            }
            for k in 0..g2 {
                for l in 0..g1 {
                    let p = &tau2[(i, k)] * &tau1[(l, j)];
                    coeff[idx(g2 + k, l)] = &coeff[idx(g2 + k, l)] - &p;
                }
            }
            rows.push(coeff.iter().map(|z| z.re.clone()).collect());
            rows.push(coeff.iter().map(|z| z.im.clone()).collect());
        }
    }
    rows
}

/// Numerically determined ℤ-basis of Hom(J₁, J₂).
pub fn homomorphisms(j1: &Jacobian, j2: &Jacobian) -> Result<HomBasis, AbelianError> {
    let (g1, g2) = (j1.genus, j2.genus);
    let bits = j1.ctx.working_bits.min(j2.ctx.working_bits);
    let prec = j1.ctx.prec().min(j2.ctx.prec());
    let m = hom_system(&j1.tau, &j2.tau, prec);
    let kernel = approximate_kernel(&m, bits, bits / 4);
    let accept = pow2(64, -(bits as i64) / 2).to_f64();
    let reject = pow2(64, -(bits as i64) / 4).to_f64();
    let mut entries = Vec::new();
    for v in &kernel.columns {
        let r: IMat = (0..2 * g2).map(|i| (0..2 * g1).map(|c| v[i * 2 * g1 + c].to_i64().unwrap()).collect()).collect();
        let (t, residual) = tangent(j1, j2, &r)?;
        if residual >= accept && residual < reject {
            return Err(AbelianError::PrecisionTooLow(residual));
        }
        if residual < accept {
            entries.push(HomEntry { r, t, residual });
        }
    }
    Ok(HomBasis { g1, g2, entries })
}

/// Exact coordinates of matrices in the ℚ-span of a fixed integer basis.
struct Coordinates {
    pivots: Vec<usize>,
    inverse: QMat,
}

fn flatten(m: &QMat) -> Vec<Rational> {
    m.iter().flatten().cloned().collect()
}

impl Coordinates {
    fn new(basis: &[IMat]) -> Result<Self, AbelianError> {
        let n = basis.len();
        let vecs: QMat = basis.iter().map(|b| flatten(&to_q(b))).collect();
        // Pick n coordinates where the basis is independent.
        let cols: QMat = (0..vecs[0].len()).map(|c| vecs.iter().map(|v| v[c].clone()).collect()).collect();
        let (_, piv_rows, _) = qechelon(itranspose_q(&cols));
        if piv_rows.len() < n {
            return Err(AbelianError::StructureConstantsNotRational);
        }
        let pivots = piv_rows;
        let sq: QMat = pivots.iter().map(|&p| vecs.iter().map(|v| v[p].clone()).collect()).collect();
        let inverse = qinverse(&sq).ok_or(AbelianError::StructureConstantsNotRational)?;
        Ok(Coordinates { pivots, inverse })
    }

    fn coords(&self, m: &QMat, basis: &[IMat]) -> Result<Vec<Rational>, AbelianError> {
        let flat = flatten(m);
        let rhs: Vec<Rational> = self.pivots.iter().map(|&p| flat[p].clone()).collect();
        let x: Vec<Rational> = self.inverse.iter().map(|row| row.iter().zip(&rhs).fold(Rational::new(), |s, (a, b)| s + Rational::from(a * b))).collect();
        // Verify the reconstruction exactly.
        let mut recon = vec![Rational::new(); flat.len()];
        for (c, b) in x.iter().zip(basis) {
            for (t, v) in recon.iter_mut().zip(b.iter().flatten()) {
                *t += Rational::from(c * *v);
            }
        }
        if recon != flat {
            return Err(AbelianError::StructureConstantsNotRational);
        }
        Ok(x)
    }
}

fn itranspose_q(a: &QMat) -> QMat {
    let (n, m) = (a.len(), a.first().map_or(0, |r| r.len()));
    (0..m).map(|j| (0..n).map(|i| a[i][j].clone()).collect()).collect()
}

fn qinverse(a: &QMat) -> Option<QMat> {
    let n = a.len();
    let aug: QMat = a.iter().enumerate().map(|(i, r)| r.iter().cloned().chain((0..n).map(|j| Rational::from((i == j) as i32))).collect()).collect();
    let (rank, pivots, red) = qechelon(aug);
    if rank < n || pivots.iter().any(|&p| p >= n) {
        return None;
    }
    Some(red.iter().map(|r| r[n..].to_vec()).collect())
}

/// A simple factor of End ⊗ ℚ.
#[derive(Clone, Debug)]
pub struct Component {
    pub central_idempotent: QMat,
    /// Dimension over ℚ of the component.
    pub dimension: usize,
    pub center_dimension: usize,
    /// k with component ≅ M_k(ℚ), when the center is ℚ and a splitting was exhibited.
    pub matrix_degree: Option<usize>,
    pub idempotents: Vec<QMat>,
}

#[derive(Clone, Debug)]
pub struct EndStructure {
    pub hom: HomBasis,
    /// c[i][j][k]: B_i B_j = Σ_k c[i][j][k] B_k.
    pub mult_table: Vec<Vec<Vec<Rational>>>,
    /// Coordinates of B_i† in the basis.
    pub rosati_matrix: QMat,
    pub rosati_fixed_dim: usize,
    pub center_dim: usize,
    pub components: Vec<Component>,
    pub idempotents: Vec<QMat>,
    pub order_index: Option<Integer>,
}

/// Basis of the self-adjoint elements of eAe.
fn self_adjoint_part(basis: &[IMat], e: &QMat) -> Vec<QMat> {
    let n = e.len();
    let flat: QMat = basis.iter().map(|b| flatten(&qmul(&qmul(e, &to_q(&iadd(b, &rosati(b)))), e))).collect();
    let (_, _, red) = qechelon(flat);
    red.into_iter().map(|v| v.chunks(n).map(|c| c.to_vec()).collect()).collect()
}

/// Split a symmetric idempotent by a self-adjoint element of eAe with reducible minimal polynomial.
fn split_idempotent(x: &QMat, e: &QMat) -> Option<Vec<QMat>> {
    let n = e.len();
    let id = qidentity(n);
    let comp = qadd(&id, &qscale(e, &Rational::from(-1)));
    // Shift the complement to an eigenvalue outside the spectrum of x on eV.
    let bound = x.iter().map(|r| r.iter().fold(Rational::new(), |s, v| s + Rational::from(v.abs_ref()))).max().unwrap_or_default() + 1u32;
    let xs = qadd(x, &qscale(&comp, &bound));
    let m = squarefree(&charpoly(&xs));
    let factors = factor_q(&m);
    let shift: QPoly = vec![Rational::from(-&bound), Rational::from(1)];
    let inner: Vec<QPoly> = factors.into_iter().filter(|f| *f != shift).collect();
    if inner.len() < 2 {
        return None;
    }
    let total = m;
    let mut out = Vec::new();
    for f in &inner {
        let cof = pdivrem(&total, f).0;
        let (_, s, _) = pxgcd(&cof, f);
        let g = pmul(&s, &cof);
        let idem = qmul(&peval_mat(&g, &xs, &id), e);
        out.push(idem);
    }
    Some(out)
}

fn random_combination(rng: &mut ChaCha8Rng, elems: &[QMat], height: i64) -> QMat {
    let n = elems[0].len();
    let mut acc = vec![vec![Rational::new(); n]; n];
    for m in elems {
        let c = rng.gen_range(-height..=height);
        if c != 0 {
            acc = qadd(&acc, &qscale(m, &Rational::from(c)));
        }
    }
    acc
}

fn small_vectors(dim: usize, h: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut v = vec![-h; dim];
    loop {
        if v.iter().any(|&x| x != 0) {
            out.push(v.clone());
        }
        let mut i = 0;
        while i < dim {
            v[i] += 1;
            if v[i] <= h {
                break;
            }
            v[i] = -h;
            i += 1;
        }
        if i == dim {
            return out;
        }
    }
}

const DRAWS: usize = 20;

/// Recursively split e into primitive symmetric idempotents.
fn primitive_idempotents(basis: &[IMat], e: QMat, rng: &mut ChaCha8Rng) -> Vec<QMat> {
    let sa = self_adjoint_part(basis, &e);
    let n = e.len();
    if sa.len() <= 1 {
        return vec![e];
    }
    let mut candidates: Vec<QMat> = (0..DRAWS).map(|_| random_combination(rng, &sa, 10)).collect();
    if sa.len() <= 4 {
        for v in small_vectors(sa.len(), 3) {
            let mut acc = vec![vec![Rational::new(); n]; n];
            for (c, m) in v.iter().zip(&sa) {
                acc = qadd(&acc, &qscale(m, &Rational::from(*c)));
            }
            candidates.push(acc);
        }
    }
    for x in candidates {
        if let Some(parts) = split_idempotent(&x, &e) {
            return parts.into_iter().flat_map(|p| primitive_idempotents(basis, p, rng)).collect();
        }
    }
    vec![e]
}

pub fn endomorphism_structure(hom: HomBasis, seed: u64) -> Result<EndStructure, AbelianError> {
    if hom.g1 != hom.g2 {
        return Err(AbelianError::GenusMismatch(hom.g1, hom.g2));
    }
    let basis = hom.r_matrices();
    let r = basis.len();
    let n = 2 * hom.g1;
    let coords = Coordinates::new(&basis)?;
    let qb: Vec<QMat> = basis.iter().map(to_q).collect();
    let mut mult_table = vec![vec![Vec::new(); r]; r];
    for i in 0..r {
        for j in 0..r {
            mult_table[i][j] = coords.coords(&qmul(&qb[i], &qb[j]), &basis)?;
        }
    }
    let rosati_matrix: QMat = basis.iter().map(|b| coords.coords(&to_q(&rosati(b)), &basis)).collect::<Result<_, _>>()?;
    // Fixed space of †: rank of († − 1).
    let mut dagger_minus: QMat = (0..r).map(|k| (0..r).map(|i| rosati_matrix[i][k].clone()).collect()).collect();
    for (i, row) in dagger_minus.iter_mut().enumerate() {
        row[i] -= 1u32;
    }
    let rosati_fixed_dim = r - qrank(&dagger_minus);
    // Center: x with x B_i = B_i x.
    let mut eqs: QMat = Vec::new();
    for i in 0..r {
        for k in 0..r {
            eqs.push((0..r).map(|j| Rational::from(&mult_table[j][i][k] - &mult_table[i][j][k])).collect());
        }
    }
    let center = qnullspace(&eqs, r);
    let center_dim = center.len();
    let center_mats: Vec<QMat> = center
        .iter()
        .map(|c| c.iter().zip(&qb).fold(vec![vec![Rational::new(); n]; n], |acc, (x, b)| qadd(&acc, &qscale(b, x))))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let id = qidentity(n);
    // Central idempotents from a generic central element.
    let mut centrals: Option<Vec<(QMat, usize)>> = None;
    for _ in 0..DRAWS {
        let z = if center_mats.iter().all(qis_zero) { id.clone() } else { random_combination(&mut rng, &center_mats, 10) };
        let m = squarefree(&charpoly(&z));
        let factors = factor_q(&m);
        let mut parts = Vec::new();
        for f in &factors {
            let cof = pdivrem(&m, f).0;
            let (_, s, _) = pxgcd(&cof, f);
            parts.push((peval_mat(&pmul(&s, &cof), &z, &id), f.len() - 1));
        }
        // Each component's center must be generated by z.
        let ok = parts.iter().map(|(c, _)| {
            let dim = qrank(&basis.iter().map(|b| flatten(&qmul(c, &to_q(b)))).collect());
            let zc = center.iter().map(|v| flatten(&qmul(c, &v.iter().zip(&qb).fold(vec![vec![Rational::new(); n]; n], |acc, (x, b)| qadd(&acc, &qscale(b, x)))))).collect::<QMat>();
            (dim, qrank(&zc))
        });
        let dims: Vec<(usize, usize)> = ok.collect();
        if parts.iter().zip(&dims).all(|((_, d), (_, zc))| d == zc) {
            centrals = Some(parts.into_iter().collect());
            break;
        }
        if center_mats.iter().all(qis_zero) {
            break;
        }
    }
    let centrals = centrals.ok_or(AbelianError::IdempotentSearchFailed(DRAWS))?;
    let mut components = Vec::new();
    let mut idempotents = Vec::new();
    for (c, zdim) in centrals {
        let dimension = qrank(&basis.iter().map(|b| flatten(&qmul(&c, &to_q(b)))).collect());
        let prims = primitive_idempotents(&basis, c.clone(), &mut rng);
        let k = (dimension as f64).sqrt().round() as usize;
        let matrix_degree = (zdim == 1 && k * k == dimension && prims.len() == k).then_some(k);
        idempotents.extend(prims.iter().cloned());
        components.push(Component { central_idempotent: c, dimension, center_dimension: zdim, matrix_degree, idempotents: prims });
    }
    let order_index = order_index(&qb, &components);
    Ok(EndStructure { hom, mult_table, rosati_matrix, rosati_fixed_dim, center_dim, components, idempotents, order_index })
}

/// Index of the order in a maximal order of ∏ M_k(ℚ): √|det trd(b_i b_j)|.
fn order_index(basis: &[QMat], components: &[Component]) -> Option<Integer> {
    if components.iter().any(|c| c.matrix_degree.is_none()) {
        return None;
    }
    let trd = |x: &QMat| -> Rational {
        components.iter().fold(Rational::new(), |s, c| {
            let k = c.matrix_degree.unwrap() as u32;
            let dim_v = qrank(&c.central_idempotent) as u32;
            s + qtrace(&qmul(&c.central_idempotent, x)) * Rational::from((k, dim_v))
        })
    };
    let r = basis.len();
    let gram: QMat = (0..r).map(|i| (0..r).map(|j| trd(&qmul(&basis[i], &basis[j]))).collect()).collect();
    let det = qdet(&gram).abs();
    let s = is_square(&det)?;
    (*s.denom() == 1).then(|| s.numer().clone())
}

fn qdet(a: &QMat) -> Rational {
    let n = a.len();
    let mut m = a.clone();
    let mut det = Rational::from(1);
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| m[r][c] != 0) else { return Rational::new() };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det *= &m[c][c];
        for r in c + 1..n {
            let f = Rational::from(&m[r][c] / &m[c][c]);
            let pr = m[c].clone();
            for (t, s) in m[r].iter_mut().zip(&pr) {
                *t -= Rational::from(&f * s);
            }
        }
    }
    det
}

impl EndStructure {
    pub fn rank(&self) -> usize {
        self.hom.rank()
    }

    pub fn idempotent_ranks(&self) -> Vec<usize> {
        self.idempotents.iter().map(qrank).collect()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "rank": self.rank(),
            "rosati_fixed_dim": self.rosati_fixed_dim,
            "center_dim": self.center_dim,
            "components": self.components.iter().map(|c| json!({
                "dimension": c.dimension,
                "center_dimension": c.center_dimension,
                "matrix_degree": c.matrix_degree,
                "idempotent_ranks": c.idempotents.iter().map(qrank).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "idempotents": self.idempotents.iter().map(|e| e.iter().map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "order_index": self.order_index.as_ref().map(|i| i.to_string()),
        })
    }
}

/// Q(sqrt(d)) with d squarefree for quadratic numbers, the minimal polynomial otherwise.
fn field_name(c: &AlgebraicCandidate) -> String {
    if c.degree() != 2 {
        return c.format();
    }
    let p = &c.min_poly;
    let disc = Integer::from(p[1].square_ref()) - Integer::from(&p[0] * &p[2]) * 4u32;
    let sign: i64 = if disc < 0 { -1 } else { 1 };
    let mut d = disc.abs();
    let mut core = Integer::from(1);
    let mut f = Integer::from(2);
    while Integer::from(f.square_ref()) <= d {
        let mut e = 0;
        while d.is_divisible(&f) {
            d /= &f;
            e += 1;
        }
        if e % 2 == 1 {
            core *= &f;
        }
        f += 1;
    }
    core *= d;
    format!("Q(sqrt({}))", core * sign)
}

/// Isogeny factor cut out by a primitive symmetric idempotent.
#[derive(Clone, Debug)]
pub struct Factor {
    pub dimension: usize,
    pub idempotent: QMat,
    /// Saturated sublattice of H₁ (as column vectors) on which e acts as the identity.
    pub lattice: Vec<Vec<i64>>,
    pub periods: CMatrix,
    /// Factors with equal class index are isogenous.
    pub isogeny_class: usize,
    pub field: Vec<String>,
}

/// Integer kernel {v : N v = 0} of an integer matrix.
fn integer_kernel(nm: &[Vec<Integer>]) -> Vec<Vec<Integer>> {
    let rows = nm.len();
    let cols = nm.first().map_or(0, |r| r.len());
    let aug: Vec<Vec<Integer>> = (0..cols)
        .map(|i| (0..rows).map(|r| nm[r][i].clone()).chain((0..cols).map(|j| Integer::from((i == j) as i32))).collect())
        .collect();
    hnf(&aug).into_iter().filter(|r| r[..rows].iter().all(|x| *x == 0)).map(|r| r[rows..].to_vec()).collect()
}

pub fn decompose(j: &Jacobian, end: &EndStructure) -> Vec<Factor> {
    let n = 2 * j.genus;
    let basis = end.hom.r_matrices();
    let mut classes: Vec<usize> = Vec::new();
    let mut out = Vec::new();
    for (i, e) in end.idempotents.iter().enumerate() {
        let class = (0..i)
            .find(|&k| basis.iter().any(|b| !qis_zero(&qmul(&qmul(&end.idempotents[k], &to_q(b)), e))))
            .map(|k| classes[k])
            .unwrap_or(i);
        classes.push(class);
        let mut den = Integer::from(1);
        for x in e.iter().flatten() {
            den.lcm_mut(x.denom());
        }
        let comp: Vec<Vec<Integer>> = (0..n)
            .map(|r| (0..n).map(|c| (((r == c) as i32 - e[r][c].clone()) * &den).numer().clone()).collect())
            .collect();
        let lattice: Vec<Vec<i64>> = integer_kernel(&comp).iter().map(|v| v.iter().map(|x| x.to_i64().unwrap_or(0)).collect()).collect();
        let prec = j.ctx.prec();
        let lm = CMatrix::from_i64(prec, n, lattice.len(), &(0..n).flat_map(|r| lattice.iter().map(move |v| v[r])).collect::<Vec<_>>());
        let periods = j.omega.mul(&lm);
        // Tangent action of the idempotent: algebraize its entries for the field of definition.
        let de = den.to_i64().unwrap_or(1);
        let r_int: IMat = e.iter().map(|row| row.iter().map(|x| Rational::from(x * &den).numer().to_i64().unwrap_or(0)).collect()).collect();
        let mut field = Vec::new();
        if let Ok((t, _)) = tangent(j, j, &r_int) {
            let inv = Float::with_val(prec, 1) / de as u32;
            for z in &t.data {
                let w = z.scale(&inv);
                if let Ok(c) = algebraize(&w, 4, &j.ctx) {
                    if c.degree() > 1 {
                        let s = field_name(&c);
                        if !field.contains(&s) {
                            field.push(s);
                        }
                    }
                }
            }
        }
        out.push(Factor { dimension: qrank(e) / 2, idempotent: e.clone(), lattice, periods, isogeny_class: class, field });
    }
    out
}

/// Maps with RᵀE₂R = d·E₁ together with a group report when J₁ = J₂ and d = 1.
#[derive(Clone, Debug)]
pub struct SymplecticMapSet {
    pub degree: i64,
    pub maps: Vec<HomEntry>,
    pub group: Option<GroupReport>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupReport {
    pub order: usize,
    pub quotient_order: usize,
    pub histogram: BTreeMap<usize, usize>,
    pub center_size: usize,
}

/// Upper bound (2g₁ − 2)/(2g₂ − 2) for the degree of a curve map C₁ → C₂, when g₂ > 1.
pub fn degree_bound(g1: usize, g2: usize) -> Option<Rational> {
    (g2 > 1).then(|| Rational::from((2 * g1 as i64 - 2, 2 * g2 as i64 - 2)))
}

const ENUMERATION_CAP: usize = 2_000_000;

pub fn fixed_degree_maps(j1: &Jacobian, j2: &Jacobian, hom: &HomBasis, d: i64) -> Result<SymplecticMapSet, AbelianError> {
    let (g1, g2) = (hom.g1, hom.g2);
    let basis = hom.r_matrices();
    let mut maps = Vec::new();
    if !basis.is_empty() {
        let gram = hom.trace_form();
        let target = Rational::from(2 * d * g1 as i64);
        let found = fincke_pohst_capped(&gram, &target, ENUMERATION_CAP)?;
        let e1 = iscale(&std_symplectic(g1), d);
        let e2 = std_symplectic(g2);
        for (lambda, val) in found {
            if val != target {
                continue;
            }
            let mut r = vec![vec![0i64; 2 * g1]; 2 * g2];
            for (l, b) in lambda.iter().zip(&basis) {
                let l = l.to_i64().unwrap();
                if l != 0 {
                    r = iadd(&r, &iscale(b, l));
                }
            }
            if imul(&imul(&itranspose(&r), &e2), &r) == e1 {
                let (t, residual) = tangent(j1, j2, &r)?;
                maps.push(HomEntry { r, t, residual });
            }
        }
    }
    maps.sort_by(|a, b| a.r.cmp(&b.r));
    Ok(SymplecticMapSet { degree: d, maps, group: None })
}

pub fn symplectic_isomorphisms(j1: &Jacobian, j2: &Jacobian, hom: &HomBasis) -> Result<SymplecticMapSet, AbelianError> {
    if hom.g1 != hom.g2 {
        return Err(AbelianError::GenusMismatch(hom.g1, hom.g2));
    }
    fixed_degree_maps(j1, j2, hom, 1)
}

/// Multiplicative order of an invertible integer matrix of finite order.
pub fn element_order(r: &IMat) -> usize {
    let id = iidentity(r.len());
    let mut p = r.clone();
    for k in 1..=10_000 {
        if p == id {
            return k;
        }
        p = imul(&p, r);
    }
    0
}

/// Check that the set is a group by generating it from a few of its elements.
fn verify_group(elems: &[IMat]) -> Result<(), AbelianError> {
    let set: HashSet<&IMat> = elems.iter().collect();
    let n = elems.first().map_or(0, |e| e.len());
    let mut group: HashSet<IMat> = HashSet::from([iidentity(n)]);
    if !set.contains(&iidentity(n)) {
        return Err(AbelianError::ClosureFailure);
    }
    let mut gens: Vec<IMat> = Vec::new();
    for x in elems {
        if group.contains(x) {
            continue;
        }
        gens.push(x.clone());
        let mut frontier: Vec<IMat> = group.iter().cloned().collect();
        while let Some(a) = frontier.pop() {
            for g in &gens {
                let p = imul(&a, g);
                if !group.contains(&p) {
                    if !set.contains(&p) {
                        return Err(AbelianError::ClosureFailure);
                    }
                    group.insert(p.clone());
                    frontier.push(p);
                }
            }
        }
    }
    if group.len() != elems.len() {
        return Err(AbelianError::ClosureFailure);
    }
    Ok(())
}

pub fn group_report(elems: &[IMat]) -> Result<GroupReport, AbelianError> {
    verify_group(elems)?;
    let mut histogram = BTreeMap::new();
    for r in elems {
        *histogram.entry(element_order(r)).or_insert(0) += 1;
    }
    let center_size = elems.iter().filter(|a| elems.iter().all(|b| imul(a, b) == imul(b, a))).count();
    Ok(GroupReport { order: elems.len(), quotient_order: elems.len() / 2, histogram, center_size })
}

pub fn automorphism_group(j: &Jacobian, hom: &HomBasis) -> Result<SymplecticMapSet, AbelianError> {
    let mut set = symplectic_isomorphisms(j, j, hom)?;
    let rs: Vec<IMat> = set.maps.iter().map(|m| m.r.clone()).collect();
    set.group = Some(group_report(&rs)?);
    Ok(set)
}

impl SymplecticMapSet {
    pub fn to_json(&self, digits: usize, with_maps: bool) -> Value {
        let mut v = json!({ "degree": self.degree, "count": self.maps.len() });
        if let Some(g) = &self.group {
            v["group"] = json!({
                "order": g.order,
                "quotient_order": g.quotient_order,
                "element_orders": g.histogram.iter().map(|(k, c)| (k.to_string(), json!(c))).collect::<serde_json::Map<_, _>>(),
                "center_size": g.center_size,
            });
        }
        if with_maps {
            v["maps"] = Value::Array(self.maps.iter().map(|m| m.to_json(digits)).collect());
        }
        v
    }
}

/// Algebraize every entry of a tangent matrix.
pub fn algebraize_matrix(t: &CMatrix, max_degree: usize, ctx: &PrecisionContext) -> Vec<Option<AlgebraicCandidate>> {
    t.data.iter().map(|z| algebraize(z, max_degree, ctx).ok()).collect()
}

/// Reduced binary or higher quadratic form invariants used to compare Hom lattices across bases:
/// the determinant and the sorted list of values on the vectors of the lattice up to the given bound.
pub fn form_invariants(gram: &QMat, bound: i64) -> Result<(Rational, Vec<Rational>), AbelianError> {
    let det = qdet(gram);
    let mut vals: Vec<Rational> = fincke_pohst_capped(gram, &Rational::from(bound), ENUMERATION_CAP)?.into_iter().map(|(_, v)| v).collect();
    vals.sort();
    Ok((det, vals))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(100)
    }

    #[test]
    fn symplectic_form() {
        let e = std_symplectic(3);
        let e2 = imul(&e, &e);
        assert_eq!(e2, ineg(&iidentity(6)));
        assert_eq!(itranspose(&e), ineg(&e));
    }

    #[test]
    fn rosati_is_involution() {
        let r: IMat = vec![vec![1, 2, 0, -1], vec![0, 1, 3, 0], vec![2, 0, 1, 1], vec![-1, 1, 0, 2]];
        assert_eq!(rosati(&rosati(&r)), r);
        assert_eq!(rosati(&iidentity(4)), iidentity(4));
        // (fg)† = g†f†
        let s: IMat = vec![vec![0, 1, 1, 0], vec![1, 0, 0, 2], vec![0, 0, 1, 0], vec![3, 1, 0, 1]];
        assert_eq!(rosati(&imul(&r, &s)), imul(&rosati(&s), &rosati(&r)));
    }

    #[test]
    fn polynomial_helpers() {
        let q = |v: &[i64]| v.iter().map(|&x| Rational::from(x)).collect::<QPoly>();
        // (x − 1)(x + 2)(x² + 1)
        let p = pmul(&pmul(&q(&[-1, 1]), &q(&[2, 1])), &q(&[1, 0, 1]));
        let mut f = factor_q(&p);
        f.sort_by_key(|x| x.len());
        assert_eq!(f.len(), 3);
        assert_eq!(f[2], q(&[1, 0, 1]));
        let a = qidentity(3);
        assert_eq!(charpoly(&a), q(&[-1, 3, -3, 1]));
        assert_eq!(squarefree(&charpoly(&a)), q(&[-1, 1]));
        let (g, s, t) = pxgcd(&q(&[-1, 1]), &q(&[1, 1]));
        assert_eq!(g, q(&[1]));
        assert_eq!(psub(&pmul(&s, &q(&[-1, 1])), &pmul(&t, &q(&[-1, -1]))), q(&[1]));
    }

    #[test]
    fn integer_kernel_basis() {
        let n: Vec<Vec<Integer>> = vec![vec![Integer::from(1), Integer::from(-1), Integer::from(0)]];
        let k = integer_kernel(&n);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert_eq!(Integer::from(&v[0] - &v[1]), 0);
        }
    }

    fn product_curve_jacobian() -> Jacobian {
        // τ = diag(i, i√2): E × E' with End = ℤ[i] × ℤ[√−2].
        let c = ctx();
        let p = c.prec();
        let two = Float::with_val(p, 2).sqrt();
        let tau = CMatrix::from_rows(vec![
            vec![Complex::i(p), Complex::zero(p)],
            vec![Complex::zero(p), Complex::from_parts(p, &Float::new(p), &two)],
        ]);
        let omega = CMatrix::identity(p, 2).hcat(&tau);
        Jacobian::from_omega(omega, &c).unwrap()
    }

    #[test]
    fn product_of_cm_curves() {
        let j = product_curve_jacobian();
        let hom = homomorphisms(&j, &j).unwrap();
        assert_eq!(hom.rank(), 4);
        assert!(hom.entries.iter().all(|e| e.residual < 1e-25));
        assert!(hom.r_matrices().contains(&iidentity(4)) || hnf_contains_identity(&hom));
        let end = endomorphism_structure(hom.clone(), 7).unwrap();
        // ℚ(i) × ℚ(√−2): two components, each a field of degree 2 with trivial self-adjoint splitting.
        assert_eq!(end.components.len(), 2);
        assert_eq!(end.idempotent_ranks(), vec![2, 2]);
        assert_eq!(end.center_dim, 4);
        assert_eq!(end.rosati_fixed_dim, 2);
        let aut = automorphism_group(&j, &hom).unwrap();
        // Units ⟨i⟩ × ⟨−1⟩.
        assert_eq!(aut.group.as_ref().unwrap().order, 8);
        let dec = decompose(&j, &end);
        assert_eq!(dec.iter().map(|f| f.dimension).collect::<Vec<_>>(), vec![1, 1]);
        assert_ne!(dec[0].isogeny_class, dec[1].isogeny_class);
    }

    fn hnf_contains_identity(hom: &HomBasis) -> bool {
        let flat: Vec<Vec<Integer>> = hom.r_matrices().iter().map(|r| r.iter().flatten().map(|&x| Integer::from(x)).collect()).collect();
        let mut with_id = flat.clone();
        with_id.push(iidentity(4).iter().flatten().map(|&x| Integer::from(x)).collect());
        hnf(&flat) == hnf(&with_id)
    }

    #[test]
    fn isogenous_square_has_matrix_algebra() {
        // τ = diag(τ₀, τ₀) with τ₀ generic: End = M₂(ℤ), order index 1.
        let c = ctx();
        let p = c.prec();
        let t0 = Complex::from_parts(p, &Float::with_val(p, 3).sqrt().recip(), &(Float::with_val(p, 5).sqrt() / 2u32));
        let tau = CMatrix::from_rows(vec![vec![t0.clone(), Complex::zero(p)], vec![Complex::zero(p), t0]]);
        let j = Jacobian::from_omega(CMatrix::identity(p, 2).hcat(&tau), &c).unwrap();
        let hom = homomorphisms(&j, &j).unwrap();
        assert_eq!(hom.rank(), 4);
        let end = endomorphism_structure(hom.clone(), 1).unwrap();
        assert_eq!(end.components.len(), 1);
        assert_eq!(end.components[0].matrix_degree, Some(2));
        assert_eq!(end.order_index, Some(Integer::from(1)));
        assert_eq!(end.idempotent_ranks(), vec![2, 2]);
        let aut = automorphism_group(&j, &hom).unwrap();
        // Signed permutation matrices: dihedral of order 8.
        let g = aut.group.unwrap();
        assert_eq!(g.order, 8);
        assert_eq!(g.histogram, BTreeMap::from([(1, 1), (2, 5), (4, 2)]));
    }

    #[test]
    fn unrelated_curves_have_no_homs() {
        let c = ctx();
        let p = c.prec();
        let a = Complex::from_parts(p, &Float::with_val(p, 2).sqrt().recip(), &Float::with_val(p, 3).sqrt());
        let b = Complex::from_parts(p, &Float::with_val(p, 7).cbrt(), &(Float::with_val(p, 11).sqrt() / 3u32));
        let j1 = Jacobian::from_omega(CMatrix::from_rows(vec![vec![Complex::one(p), a]]), &c).unwrap();
        let j2 = Jacobian::from_omega(CMatrix::from_rows(vec![vec![Complex::one(p), b]]), &c).unwrap();
        assert_eq!(homomorphisms(&j1, &j2).unwrap().rank(), 0);
        assert_eq!(symplectic_isomorphisms(&j1, &j2, &homomorphisms(&j1, &j2).unwrap()).unwrap().maps.len(), 0);
    }

    #[test]
    fn degree_bound_values() {
        assert_eq!(degree_bound(6, 2), Some(Rational::from(5)));
        assert_eq!(degree_bound(3, 1), None);
    }
}
