//! Integer lattices: LLL, approximate kernels, Hermite normal form, Fincke–Pohst
//! enumeration and recognition of algebraic numbers.

use rug::{Float, Integer, Rational};
use thiserror::Error;

use crate::numerics::{pow2, roots, Complex, ComplexPoly, PrecisionContext};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("quadratic form is not positive definite")]
    NotPositiveDefinite,
    #[error("no algebraic relation found")]
    NotFound,
    #[error("enumeration exceeded {0} vectors")]
    TooManyVectors(usize),
}

/// Lattice given by a list of integer vectors (the columns of a basis matrix).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerLatticeBasis {
    pub columns: Vec<Vec<Integer>>,
}

impl IntegerLatticeBasis {
    pub fn new(columns: Vec<Vec<Integer>>) -> Self {
        IntegerLatticeBasis { columns }
    }

    pub fn from_i64(columns: &[Vec<i64>]) -> Self {
        IntegerLatticeBasis { columns: columns.iter().map(|c| c.iter().map(|&x| Integer::from(x)).collect()).collect() }
    }

    pub fn rank(&self) -> usize {
        self.columns.len()
    }

    pub fn to_i64(&self) -> Option<Vec<Vec<i64>>> {
        self.columns.iter().map(|c| c.iter().map(|x| x.to_i64()).collect()).collect()
    }
}

pub const DEFAULT_DELTA: f64 = 0.99;
const ETA: f64 = 0.51;

fn dot(a: &[Integer], b: &[Integer]) -> Integer {
    let mut s = Integer::new();
    for (x, y) in a.iter().zip(b) {
        s += x * y;
    }
    s
}

/// Exact ring used by the LLL core; the fixed-width variant reports overflow instead of wrapping.
trait LllScalar: Clone + Default + PartialEq {
    fn to_f64(&self) -> f64;
    fn from_f64(x: f64) -> Option<Self>;
    /// self += a·b; false on overflow.
    fn add_mul(&mut self, a: &Self, b: &Self) -> bool;
    /// self −= a·b; false on overflow.
    fn sub_mul(&mut self, a: &Self, b: &Self) -> bool;
    fn two() -> Self;
}

impl LllScalar for Integer {
    fn to_f64(&self) -> f64 {
        Integer::to_f64(self)
    }
    fn from_f64(x: f64) -> Option<Self> {
        Integer::from_f64(x)
    }
    fn add_mul(&mut self, a: &Self, b: &Self) -> bool {
        *self += a * b;
        true
    }
    fn sub_mul(&mut self, a: &Self, b: &Self) -> bool {
        *self -= a * b;
        true
    }
    fn two() -> Self {
        Integer::from(2)
    }
}

impl LllScalar for i128 {
    fn to_f64(&self) -> f64 {
        *self as f64
    }
    fn from_f64(x: f64) -> Option<Self> {
        (x.abs() < 1e36).then_some(x as i128)
    }
    fn add_mul(&mut self, a: &Self, b: &Self) -> bool {
        match a.checked_mul(*b).and_then(|p| self.checked_add(p)) {
            Some(v) => {
                *self = v;
                true
            }
            None => false,
        }
    }
    fn sub_mul(&mut self, a: &Self, b: &Self) -> bool {
        match a.checked_mul(*b).and_then(|p| self.checked_sub(p)) {
            Some(v) => {
                *self = v;
                true
            }
            None => false,
        }
    }
    fn two() -> Self {
        2
    }
}

/// L²-style LLL over an exact integer Gram matrix with floating-point Gram–Schmidt data.
/// `vecs` are updated alongside the Gram matrix; they may be the lattice vectors themselves or a transform.
struct Lll<T: LllScalar> {
    gram: Vec<Vec<T>>,
    vecs: Vec<Vec<T>>,
    r: Vec<Vec<f64>>,
    mu: Vec<Vec<f64>>,
    delta: f64,
    overflow: bool,
}

impl<T: LllScalar> Lll<T> {
    fn new(gram: Vec<Vec<T>>, vecs: Vec<Vec<T>>, delta: f64) -> Self {
        let n = gram.len();
        Lll { gram, vecs, r: vec![vec![0.0; n]; n], mu: vec![vec![0.0; n]; n], delta, overflow: false }
    }

    fn g(&self, i: usize, j: usize) -> f64 {
        if i >= j { self.gram[i][j].to_f64() } else { self.gram[j][i].to_f64() }
    }

    fn row(&mut self, k: usize) {
        for j in 0..=k {
            let mut s = self.g(k, j);
            for l in 0..j {
                s -= self.mu[j][l] * self.r[k][l];
            }
            self.r[k][j] = s;
            if j < k {
                self.mu[k][j] = s / self.r[j][j];
            }
        }
    }

    /// b_k ← b_k − x·b_j, keeping the Gram matrix exact (lower triangle).
    fn sub_mul(&mut self, k: usize, j: usize, x: &T) {
        let n = self.gram.len();
        let at = |i: usize, j: usize| if i >= j { (i, j) } else { (j, i) };
        let mut ok = true;
        // G_kk ← G_kk + x·(x·G_jj − 2·G_kj), using the old G_kj.
        let (kr, kc) = at(k, j);
        let mut t = T::default();
        ok &= t.add_mul(x, &self.gram[j][j]);
        ok &= t.sub_mul(&T::two(), &self.gram[kr][kc]);
        let mut gkk = std::mem::take(&mut self.gram[k][k]);
        ok &= gkk.add_mul(x, &t);
        self.gram[k][k] = gkk;
        for l in 0..n {
            if l == k {
                continue;
            }
            let (ar, ac) = at(k, l);
            let (br, bc) = at(j, l);
            let mut cell = std::mem::take(&mut self.gram[ar][ac]);
            ok &= cell.sub_mul(x, &self.gram[br][bc]);
            self.gram[ar][ac] = cell;
        }
        let (bj, bk) = if j < k {
            let (a, b) = self.vecs.split_at_mut(k);
            (&a[j], &mut b[0])
        } else {
            let (a, b) = self.vecs.split_at_mut(j);
            (&b[0], &mut a[k])
        };
        for (t, s) in bk.iter_mut().zip(bj) {
            ok &= t.sub_mul(x, s);
        }
        self.overflow |= !ok;
    }

    fn size_reduce(&mut self, k: usize) {
        for _ in 0..200 {
            self.row(k);
            if (0..k).all(|j| self.mu[k][j].abs() <= ETA) {
                return;
            }
            for j in (0..k).rev() {
                let m = self.mu[k][j];
                if m.abs() <= 0.5 {
                    continue;
                }
                let xr = m.round();
                let Some(x) = T::from_f64(xr) else {
                    self.overflow = true;
                    return;
                };
                self.sub_mul(k, j, &x);
                if self.overflow {
                    return;
                }
                for l in 0..j {
                    self.mu[k][l] -= xr * self.mu[j][l];
                }
                self.mu[k][j] -= xr;
            }
        }
        self.row(k);
    }

    fn swap(&mut self, k: usize) {
        self.vecs.swap(k - 1, k);
        let n = self.gram.len();
        // Symmetric swap of rows/columns k−1 and k in the lower-triangular Gram.
        self.gram.swap(k - 1, k);
        // Row k−1 now holds old row k (valid up to column k, but its own diagonal sits at column k).
        let (a, b) = self.gram.split_at_mut(k);
        let (lo, hi) = (&mut a[k - 1], &mut b[0]);
        // lo = old row k, hi = old row k−1.
        let old_kk = std::mem::take(&mut lo[k]);
        let old_k_km1 = std::mem::take(&mut lo[k - 1]);
        let old_km1_km1 = std::mem::take(&mut hi[k - 1]);
        lo[k - 1] = old_kk;
        hi[k - 1] = old_k_km1;
        hi[k] = old_km1_km1;
        for i in k + 1..n {
            self.gram[i].swap(k - 1, k);
        }
    }

    fn run_from(&mut self, start: usize) {
        let n = self.gram.len();
        if n == 0 {
            return;
        }
        for k in 0..start.min(n) {
            self.row(k);
        }
        self.row(0);
        let mut k = start.max(1);
        while k < n {
            self.size_reduce(k);
            if self.overflow {
                return;
            }
            let lhs = self.delta * self.r[k - 1][k - 1];
            let rhs = self.r[k][k] + self.mu[k][k - 1] * self.mu[k][k - 1] * self.r[k - 1][k - 1];
            if lhs > rhs {
                self.swap(k);
                if k == 1 {
                    self.row(0);
                } else {
                    k -= 1;
                }
            } else {
                k += 1;
            }
        }
    }

    fn gs_norms_sq(&self) -> Vec<f64> {
        (0..self.gram.len()).map(|i| self.r[i][i]).collect()
    }
}

fn to_i128(v: &[Vec<Integer>]) -> Option<Vec<Vec<i128>>> {
    v.iter().map(|r| r.iter().map(|x| x.to_i128()).collect()).collect()
}

fn from_i128(v: &[Vec<i128>]) -> Vec<Vec<Integer>> {
    v.iter().map(|r| r.iter().map(|&x| Integer::from(x)).collect()).collect()
}

/// Run LLL on vectors (with exact lower Gram), in i128 when everything fits and in GMP integers otherwise.
/// Returns reduced vectors, the lower Gram and the squared Gram–Schmidt norms.
fn lll_run(gram: Vec<Vec<Integer>>, vecs: Vec<Vec<Integer>>, delta: f64) -> (Vec<Vec<Integer>>, Vec<Vec<Integer>>, Vec<f64>) {
    // Headroom: Gram entries must stay well inside i128 while vectors are combined.
    let fits = gram.iter().flatten().all(|x| x.significant_bits() < 100);
    if fits {
        if let (Some(g), Some(v)) = (to_i128(&gram), to_i128(&vecs)) {
            let mut l = Lll::new(g, v, delta);
            l.run_from(0);
            if !l.overflow {
                let norms = l.gs_norms_sq();
                return (from_i128(&l.vecs), from_i128(&l.gram), norms);
            }
        }
    }
    let mut l = Lll::new(gram, vecs, delta);
    l.run_from(0);
    let norms = l.gs_norms_sq();
    (l.vecs, l.gram, norms)
}

/// Result of LLL: the reduced basis and the unimodular transform with reduced = transform · original.
#[derive(Clone, Debug)]
pub struct LllOutput {
    pub basis: IntegerLatticeBasis,
    pub transform: Vec<Vec<Integer>>,
}

fn gram_of(v: &[Vec<Integer>]) -> Vec<Vec<Integer>> {
    (0..v.len()).map(|i| (0..=i).map(|j| dot(&v[i], &v[j])).collect::<Vec<_>>()).map(|mut r| {
        r.resize(v.len(), Integer::new());
        r
    }).collect()
}

fn identity(n: usize) -> Vec<Vec<Integer>> {
    (0..n).map(|i| (0..n).map(|j| Integer::from((i == j) as i32)).collect()).collect()
}

/// LLL reduction (δ = 0.99) of the columns of a basis.
pub fn lll_reduce(basis: &IntegerLatticeBasis) -> LllOutput {
    lll_reduce_delta(basis, DEFAULT_DELTA)
}

pub fn lll_reduce_delta(basis: &IntegerLatticeBasis, delta: f64) -> LllOutput {
    let n = basis.columns.len();
    let d = basis.columns.first().map_or(0, |c| c.len());
    // Carry the transform in extra coordinates so one exact update handles both.
    let vecs: Vec<Vec<Integer>> = basis
        .columns
        .iter()
        .enumerate()
        .map(|(i, c)| c.iter().cloned().chain((0..n).map(|j| Integer::from((i == j) as i32))).collect())
        .collect();
    let (vecs, _, _) = lll_run(gram_of(&basis.columns), vecs, delta);
    let basis = IntegerLatticeBasis::new(vecs.iter().map(|v| v[..d].to_vec()).collect());
    let transform = vecs.iter().map(|v| v[d..].to_vec()).collect();
    LllOutput { basis, transform }
}

/// LLL on a positive-definite integer Gram matrix; returns the transform U (rows) and the reduced Gram U G Uᵀ.
pub fn lll_gram(gram: &[Vec<Integer>], delta: f64) -> (Vec<Vec<Integer>>, Vec<Vec<Integer>>) {
    let n = gram.len();
    let lower: Vec<Vec<Integer>> = (0..n).map(|i| (0..n).map(|j| if j <= i { gram[i][j].clone() } else { Integer::new() }).collect()).collect();
    let (vecs, g, _) = lll_run(lower, identity(n), delta);
    let full = (0..n).map(|i| (0..n).map(|j| if i >= j { g[i][j].clone() } else { g[j][i].clone() }).collect()).collect();
    (vecs, full)
}

/// Lovász and size conditions, checked in exact rational arithmetic.
pub fn is_lll_reduced(basis: &IntegerLatticeBasis, delta: &Rational) -> bool {
    let b = &basis.columns;
    let n = b.len();
    let g = gram_of(b);
    let gij = |i: usize, j: usize| if i >= j { g[i][j].clone() } else { g[j][i].clone() };
    let mut mu = vec![vec![Rational::new(); n]; n];
    let mut r = vec![Rational::new(); n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = Rational::from(gij(i, j));
            for l in 0..j {
                s -= Rational::from(&mu[j][l] * &mu[i][l]) * &r[l];
            }
            if j < i {
                mu[i][j] = s / &r[j];
                if Rational::from(mu[i][j].abs_ref()) > Rational::from((51, 100)) {
                    return false;
                }
            } else {
                r[i] = s;
            }
        }
        if i > 0 {
            let lhs = Rational::from(delta * &r[i - 1]);
            let rhs = r[i].clone() + Rational::from(mu[i][i - 1].square_ref()) * &r[i - 1];
            if lhs > rhs {
                return false;
            }
        }
    }
    true
}

/// Row-style Hermite normal form of the lattice spanned by the given vectors (zero rows removed).
pub fn hnf(vectors: &[Vec<Integer>]) -> Vec<Vec<Integer>> {
    let mut rows: Vec<Vec<Integer>> = vectors.to_vec();
    let cols = rows.first().map_or(0, |r| r.len());
    let mut out: Vec<Vec<Integer>> = Vec::new();
    let mut pivots = Vec::new();
    let mut r0 = 0;
    for c in 0..cols {
        // Euclid on column c among rows r0.. until a single nonzero remains.
        loop {
            let nz: Vec<usize> = (r0..rows.len()).filter(|&r| rows[r][c] != 0).collect();
            if nz.len() <= 1 {
                break;
            }
            let p = *nz.iter().min_by(|&&a, &&b| rows[a][c].clone().abs().cmp(&rows[b][c].clone().abs())).unwrap();
            for &r in &nz {
                if r != p {
                    let q = <(Integer, Integer)>::from(rows[r][c].div_rem_floor_ref(&rows[p][c])).0;
                    let pr = rows[p].clone();
                    for (t, s) in rows[r].iter_mut().zip(&pr) {
                        *t -= Integer::from(&q * s);
                    }
                }
            }
        }
        if let Some(p) = (r0..rows.len()).find(|&r| rows[r][c] != 0) {
            rows.swap(r0, p);
            if rows[r0][c] < 0 {
                for t in rows[r0].iter_mut() {
                    *t = Integer::from(-&*t);
                }
            }
            pivots.push(c);
            r0 += 1;
        }
    }
    rows.truncate(r0);
    for (i, &c) in pivots.iter().enumerate() {
        let piv = rows[i][c].clone();
        for k in 0..i {
            let q = <(Integer, Integer)>::from(rows[k][c].div_rem_floor_ref(&piv)).0;
            if q != 0 {
                let pr = rows[i].clone();
                for (t, s) in rows[k].iter_mut().zip(&pr) {
                    *t -= Integer::from(&q * s);
                }
            }
        }
    }
    out.extend(rows);
    out
}

/// Smallest integer vectors v with M·v ≈ 0, from short vectors of the lattice spanned by (e_j ; ε⁻¹ M_j).
///
/// `accuracy_bits` is the number of correct bits in the entries of M relative to its largest entry.
pub fn approximate_kernel(m: &[Vec<Float>], accuracy_bits: u32, keep_bits: u32) -> IntegerLatticeBasis {
    let rows = m.len();
    let n = m.first().map_or(0, |r| r.len());
    if n == 0 {
        return IntegerLatticeBasis::new(vec![]);
    }
    let prec = m[0][0].prec().max(64);
    let max_exp = m.iter().flatten().filter(|x| !x.is_zero()).map(|x| x.get_exp().unwrap_or(0)).max().unwrap_or(0) as i64;
    // ε = 2^(max_exp − accuracy + 1): rounding ε⁻¹M is then within 0.5 of the exact scaled value.
    let s_final = accuracy_bits as i64 - 1 - max_exp;
    let bound = ((n as f64).sqrt() * 2f64.powi(keep_bits as i32) + (rows as f64).sqrt() * n as f64) * 4.0;
    let mut u: Vec<Vec<Integer>> = identity(n);
    let step = 20i64;
    let mut s = (step - max_exp).min(s_final);
    loop {
        let scale = pow2(prec, s);
        let vecs: Vec<Vec<Integer>> = u
            .iter()
            .map(|v| {
                let mut out = v.clone();
                for row in m {
                    let mut acc = Float::new(prec);
                    for (c, x) in row.iter().zip(v) {
                        if *x != 0 {
                            acc += Float::with_val(prec, c * x);
                        }
                    }
                    acc *= &scale;
                    out.push(acc.round().to_integer().unwrap_or_default());
                }
                out
            })
            .collect();
        let (reduced, _, norms) = lll_run(gram_of(&vecs), vecs, DEFAULT_DELTA);
        let mut keep = norms.len();
        while keep > 0 && norms[keep - 1].sqrt() > bound {
            keep -= 1;
        }
        u = reduced[..keep].iter().map(|v| v[..n].to_vec()).collect();
        if s >= s_final || u.is_empty() {
            break;
        }
        s = (s + step).min(s_final);
    }
    // Keep short vectors whose residual is within the quantization budget.
    let eps = pow2(prec, -s_final);
    let tol = Float::with_val(prec, &eps * (n as u32));
    let limit = Integer::from(1) << keep_bits;
    let kept: Vec<Vec<Integer>> = u
        .into_iter()
        .filter(|v| v.iter().all(|x| x.clone().abs() <= limit))
        .filter(|v| {
            m.iter().all(|row| {
                let mut acc = Float::new(prec);
                for (c, x) in row.iter().zip(v) {
                    acc += Float::with_val(prec, c * x);
                }
                acc.abs() <= tol
            })
        })
        .collect();
    IntegerLatticeBasis::new(hnf(&kept))
}

/// Exact LDLᵀ test of positive definiteness.
pub fn is_positive_definite(g: &[Vec<Rational>]) -> bool {
    let n = g.len();
    let mut a: Vec<Vec<Rational>> = g.to_vec();
    for k in 0..n {
        if a[k][k] <= 0 {
            return false;
        }
        for i in k + 1..n {
            let f = Rational::from(&a[i][k] / &a[k][k]);
            for j in k..n {
                let t = Rational::from(&f * &a[k][j]);
                a[i][j] -= t;
            }
        }
    }
    true
}

/// All integer vectors v (including 0) with vᵀGv ≤ bound, with their exact values.
pub fn fincke_pohst(g: &[Vec<Rational>], bound: &Rational) -> Result<Vec<(Vec<Integer>, Rational)>, LatticeError> {
    fincke_pohst_capped(g, bound, usize::MAX)
}

pub fn fincke_pohst_capped(g: &[Vec<Rational>], bound: &Rational, cap: usize) -> Result<Vec<(Vec<Integer>, Rational)>, LatticeError> {
    let n = g.len();
    if !is_positive_definite(g) {
        return Err(LatticeError::NotPositiveDefinite);
    }
    if n == 0 {
        return Ok(vec![(vec![], Rational::new())]);
    }
    // Integer Gram: clear denominators.
    let mut den = Integer::from(1);
    for x in g.iter().flatten() {
        den.lcm_mut(x.denom());
    }
    let gi: Vec<Vec<Integer>> = g.iter().map(|r| r.iter().map(|x| Rational::from(x * &den).numer().clone()).collect()).collect();
    let b_int = Rational::from(bound * &den).floor().numer().clone();
    let (u, red) = lll_gram(&gi, DEFAULT_DELTA);
    // Cholesky (q-form) of the reduced Gram in floating point.
    let mut q = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in i..n {
            q[i][j] = red[i][j].to_f64();
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let t = q[i][j];
            q[j][i] = t;
            q[i][j] = t / q[i][i];
        }
        for k in i + 1..n {
            for l in k..n {
                q[k][l] -= q[k][i] * q[i][l];
            }
        }
    }
    let c = b_int.to_f64() * (1.0 + 1e-9) + 1e-6;
    let mut found: Vec<Vec<i64>> = Vec::new();
    let mut x = vec![0i64; n];
    let mut partial = vec![0.0f64; n + 1];
    enumerate(&q, n - 1, c, &mut x, &mut partial, &mut found, cap)?;
    let mut out = Vec::with_capacity(found.len());
    for y in found {
        // v = Uᵀ y expressed in the original coordinates.
        let v: Vec<Integer> = (0..n).map(|j| (0..n).fold(Integer::new(), |acc, i| acc + Integer::from(&u[i][j] * y[i]))).collect();
        let mut val = Integer::new();
        for i in 0..n {
            for j in 0..n {
                val += Integer::from(&gi[i][j] * &v[i]) * &v[j];
            }
        }
        if val <= b_int {
            out.push((v, Rational::from((val, den.clone()))));
        }
    }
    out.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    Ok(out)
}

fn enumerate(
    q: &[Vec<f64>],
    i: usize,
    c: f64,
    x: &mut Vec<i64>,
    partial: &mut Vec<f64>,
    found: &mut Vec<Vec<i64>>,
    cap: usize,
) -> Result<(), LatticeError> {
    let n = q.len();
    let center: f64 = -(i + 1..n).map(|j| q[i][j] * x[j] as f64).sum::<f64>();
    let rem = c - partial[i + 1];
    if rem < 0.0 {
        return Ok(());
    }
    let r = (rem / q[i][i]).sqrt();
    let lo = (center - r).ceil() as i64;
    let hi = (center + r).floor() as i64;
    for xi in lo..=hi {
        x[i] = xi;
        let d = xi as f64 - center;
        partial[i] = partial[i + 1] + q[i][i] * d * d;
        if partial[i] > c {
            continue;
        }
        if i == 0 {
            found.push(x.clone());
            if found.len() > cap {
                return Err(LatticeError::TooManyVectors(cap));
            }
        } else {
            enumerate(q, i - 1, c, x, partial, found, cap)?;
        }
    }
    x[i] = 0;
    Ok(())
}

/// Thresholds for algebraic recognition, as fractions of the working precision.
#[derive(Clone, Copy, Debug)]
pub struct AlgebraizeConfig {
    pub residual_frac: f64,
    pub height_frac: f64,
}

impl Default for AlgebraizeConfig {
    fn default() -> Self {
        AlgebraizeConfig { residual_frac: 0.6, height_frac: 0.2 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraicCandidate {
    /// Integer coefficients, constant term first, positive leading coefficient.
    pub min_poly: Vec<Integer>,
    /// Index of the matching root when the roots are sorted lexicographically.
    pub root_index: usize,
    pub residual: f64,
}

impl AlgebraicCandidate {
    pub fn degree(&self) -> usize {
        self.min_poly.len() - 1
    }

    /// Rational value when the polynomial is linear.
    pub fn as_rational(&self) -> Option<Rational> {
        (self.degree() == 1).then(|| Rational::from((-self.min_poly[0].clone(), self.min_poly[1].clone())))
    }

    pub fn format(&self) -> String {
        crate::numerics::format_int_poly(&self.min_poly, "x")
    }
}

pub fn algebraize(z: &Complex, max_degree: usize, ctx: &PrecisionContext) -> Result<AlgebraicCandidate, LatticeError> {
    algebraize_with(z, max_degree, ctx, AlgebraizeConfig::default())
}

pub fn algebraize_with(z: &Complex, max_degree: usize, ctx: &PrecisionContext, cfg: AlgebraizeConfig) -> Result<AlgebraicCandidate, LatticeError> {
    let b = ctx.working_bits as f64;
    let prec = ctx.prec();
    let height = Integer::from(1) << (cfg.height_frac * b) as u32;
    let res_bound = pow2(prec, -(cfg.residual_frac * b) as i64);
    let zmax = z.abs_f64().max(1.0);
    for d in 1..=max_degree {
        let pw = crate::curve::powers(z, d);
        let scale = pow2(prec, (0.8 * b) as i64 - (d as f64 * zmax.log2()).ceil() as i64);
        let cols: Vec<Vec<Integer>> = (0..=d)
            .map(|k| {
                let mut v: Vec<Integer> = (0..=d).map(|j| Integer::from((j == k) as i32)).collect();
                v.push(Float::with_val(prec, &pw[k].re * &scale).round().to_integer().unwrap());
                v.push(Float::with_val(prec, &pw[k].im * &scale).round().to_integer().unwrap());
                v
            })
            .collect();
        let red = lll_reduce(&IntegerLatticeBasis::new(cols));
        for v in red.basis.columns.iter().take(1) {
            let mut c: Vec<Integer> = v[..=d].to_vec();
            if c[d] == 0 || c.iter().any(|x| x.clone().abs() > height) {
                continue;
            }
            let g = c.iter().fold(Integer::new(), |acc, x| acc.gcd(x));
            for x in c.iter_mut() {
                *x /= &g;
            }
            if c[d] < 0 {
                for x in c.iter_mut() {
                    *x = Integer::from(-&*x);
                }
            }
            let mut val = Complex::zero(prec);
            for (k, ck) in c.iter().enumerate() {
                val = &val + &pw[k].scale(&Float::with_val(prec, ck));
            }
            let mag = c.iter().enumerate().map(|(k, ck)| ck.to_f64().abs() * zmax.powi(k as i32)).sum::<f64>();
            let residual = val.abs();
            if residual > Float::with_val(prec, &res_bound * mag) {
                continue;
            }
            let poly = ComplexPoly::new(c.iter().map(|x| Complex::from_integer(prec, x)).collect());
            let root_index = match roots(&poly, ctx) {
                Ok(mut rs) => {
                    let tol = ctx.frac_tolerance(1, 2);
                    rs.sort_by(|a, b| a.lex_cmp(b, &tol));
                    rs.iter()
                        .enumerate()
                        .min_by(|a, b| a.1.dist(z).partial_cmp(&b.1.dist(z)).unwrap())
                        .map_or(0, |(i, _)| i)
                }
                Err(_) => 0,
            };
            return Ok(AlgebraicCandidate { min_poly: c, root_index, residual: residual.to_f64() / mag });
        }
    }
    Err(LatticeError::NotFound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ints(v: &[i64]) -> Vec<Integer> {
        v.iter().map(|&x| Integer::from(x)).collect()
    }

    #[test]
    fn lll_small_examples() {
        let id = IntegerLatticeBasis::from_i64(&[vec![1, 0], vec![0, 1]]);
        assert_eq!(lll_reduce(&id).basis, id);
        let b = IntegerLatticeBasis::from_i64(&[vec![1, 0], vec![1_000_000, 1]]);
        let r = lll_reduce(&b).basis.to_i64().unwrap();
        assert!(r.iter().any(|v| v == &vec![0, 1] || v == &vec![0, -1]));
    }

    #[test]
    fn hnf_canonical() {
        let a = hnf(&[ints(&[2, 4]), ints(&[1, 3])]);
        assert_eq!(a, vec![ints(&[1, 1]), ints(&[0, 2])]);
        assert_eq!(hnf(&[ints(&[0, 0])]), Vec::<Vec<Integer>>::new());
    }

    #[test]
    fn kernel_of_difference() {
        let p = 128;
        let m = vec![vec![Float::with_val(p, 1), Float::with_val(p, -1)]];
        let k = approximate_kernel(&m, 100, 25);
        assert_eq!(k.to_i64().unwrap(), vec![vec![1, 1]]);
    }

    #[test]
    fn kernel_of_generic_reals_is_empty() {
        let p = 140;
        let two = Float::with_val(p, 2);
        let m = vec![vec![Float::with_val(p, 1), two.clone().sqrt(), Float::with_val(p, 3).sqrt(), Float::with_val(p, 5).sqrt()]];
        assert_eq!(approximate_kernel(&m, 100, 25).rank(), 0);
        // √8 = 2√2 gives a relation.
        let m = vec![vec![Float::with_val(p, 1), two.clone().sqrt(), Float::with_val(p, 8).sqrt()]];
        assert_eq!(approximate_kernel(&m, 100, 25).to_i64().unwrap(), vec![vec![0, 2, -1]]);
    }

    #[test]
    fn fincke_pohst_examples() {
        let q = |v: &[i64]| v.iter().map(|&x| Rational::from(x)).collect::<Vec<_>>();
        let id = vec![q(&[1, 0]), q(&[0, 1])];
        let r = fincke_pohst(&id, &Rational::from(1)).unwrap();
        assert_eq!(r.len(), 5);
        let d = vec![q(&[1, 0]), q(&[0, 3])];
        assert_eq!(fincke_pohst(&d, &Rational::from(2)).unwrap().len(), 3);
        let hex = vec![q(&[2, 1]), q(&[1, 2])];
        let r = fincke_pohst(&hex, &Rational::from(2)).unwrap();
        assert_eq!(r.iter().filter(|(_, v)| *v == 2).count(), 6);
        let bad = vec![q(&[1, 2]), q(&[2, 1])];
        assert_eq!(fincke_pohst(&bad, &Rational::from(2)).unwrap_err(), LatticeError::NotPositiveDefinite);
    }

    #[test]
    fn algebraize_examples() {
        let ctx = PrecisionContext::new(100);
        let p = ctx.prec();
        let half = Complex::from_f64(p, 0.5, 0.0);
        assert_eq!(algebraize(&half, 4, &ctx).unwrap().min_poly, ints(&[-1, 2]));
        assert_eq!(algebraize(&Complex::i(p), 4, &ctx).unwrap().min_poly, ints(&[1, 0, 1]));
        let angle = Float::with_val(p, crate::numerics::pi(p) * 2u32) / 7u32;
        let z7 = Complex::cis(&angle);
        let c = algebraize(&z7, 8, &ctx).unwrap();
        assert_eq!(c.min_poly, ints(&[1, 1, 1, 1, 1, 1, 1]));
        // Oracle: Φ₇ evaluated at the input vanishes.
        let mut s = Complex::zero(p);
        for k in 0..7 {
            s = &s + &z7.pow_u(k);
        }
        assert!(s.abs_f64() < 1e-28);
        // A real input gives one equation: the default thresholds only separate noise up to degree 2.
        assert!(algebraize(&Complex::from_real(crate::numerics::pi(p)), 2, &ctx).is_err());
    }

    fn brute_force(g: &[Vec<i64>], bound: i64) -> usize {
        let n = g.len();
        let r = 10i64;
        let mut count = 0;
        let mut v = vec![-r; n];
        loop {
            let val: i64 = (0..n).map(|i| (0..n).map(|j| g[i][j] * v[i] * v[j]).sum::<i64>()).sum();
            if val <= bound {
                count += 1;
            }
            let mut i = 0;
            while i < n {
                v[i] += 1;
                if v[i] <= r {
                    break;
                }
                v[i] = -r;
                i += 1;
            }
            if i == n {
                return count;
            }
        }
    }

    fn random_pd(seed: &[i64]) -> Option<Vec<Vec<i64>>> {
        // G = AᵀA + I for a small integer 3×3 A.
        let a: Vec<Vec<i64>> = (0..3).map(|i| (0..3).map(|j| seed[3 * i + j]).collect()).collect();
        let g: Vec<Vec<i64>> = (0..3).map(|i| (0..3).map(|j| (0..3).map(|k| a[k][i] * a[k][j]).sum::<i64>() + (i == j) as i64).collect()).collect();
        Some(g)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn fincke_pohst_matches_brute_force(seed in proptest::collection::vec(-2i64..=2, 9), bound in 0i64..=10) {
            let g = random_pd(&seed).unwrap();
            let gq: Vec<Vec<Rational>> = g.iter().map(|r| r.iter().map(|&x| Rational::from(x)).collect()).collect();
            // Every vector with value ≤ 10 has entries ≤ 10 in absolute value since G ⪰ I.
            let fp = fincke_pohst(&gq, &Rational::from(bound)).unwrap();
            prop_assert_eq!(fp.len(), brute_force(&g, bound));
        }

        #[test]
        fn lll_preserves_lattice(entries in proptest::collection::vec(-50i64..=50, 9), mix in proptest::collection::vec(-3i64..=3, 6)) {
            let cols: Vec<Vec<i64>> = (0..3).map(|i| entries[3 * i..3 * i + 3].to_vec()).collect();
            let b = IntegerLatticeBasis::from_i64(&cols);
            let det = {
                let m = &cols;
                m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                    + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
            };
            prop_assume!(det != 0);
            // Scramble by a unimodular upper-triangular transform before reducing.
            let mut s = b.columns.clone();
            let ops = [(0usize, 1usize), (0, 2), (1, 2), (1, 0), (2, 0), (2, 1)];
            for (&(i, j), &k) in ops.iter().zip(&mix) {
                let t = s[j].clone();
                for (x, y) in s[i].iter_mut().zip(&t) {
                    *x += Integer::from(y * k);
                }
            }
            let red = lll_reduce(&IntegerLatticeBasis::new(s));
            prop_assert_eq!(hnf(&red.basis.columns), hnf(&b.columns));
            prop_assert!(is_lll_reduced(&red.basis, &Rational::from((99, 100))));
        }
    }
}
