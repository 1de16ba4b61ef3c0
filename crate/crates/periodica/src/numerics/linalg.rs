//! Dense complex matrices at arbitrary precision.

use rug::Float;

use super::{Complex, NumericsError};

#[derive(Clone, Debug)]
pub struct CMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex>,
}

impl CMatrix {
    pub fn zeros(prec: u32, rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![Complex::zero(prec); rows * cols] }
    }

    pub fn identity(prec: u32, n: usize) -> Self {
        let mut m = CMatrix::zeros(prec, n, n);
        for i in 0..n {
            m[(i, i)] = Complex::one(prec);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Complex>>) -> Self {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        CMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    /// Integer matrix given row-wise, embedded at the given precision.
    pub fn from_i64(prec: u32, rows: usize, cols: usize, entries: &[i64]) -> Self {
        CMatrix {
            rows,
            cols,
            data: entries.iter().map(|&v| Complex::from_f64(prec, v as f64, 0.0)).collect(),
        }
    }

    pub fn prec(&self) -> u32 {
        self.data.iter().map(|c| c.prec()).max().unwrap_or(53)
    }

    pub fn transpose(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.prec(), self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].clone();
            }
        }
        out
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows);
        let prec = self.prec().max(other.prec());
        let mut out = CMatrix::zeros(prec, self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Complex::zero(prec);
                for k in 0..self.cols {
                    let a = &self[(i, k)];
                    if a.is_zero() {
                        continue;
                    }
                    acc = &acc + &(a * &other[(k, j)]);
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        CMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        CMatrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn neg(&self) -> CMatrix {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| -a).collect() }
    }

    pub fn columns(&self, start: usize, end: usize) -> CMatrix {
        let mut out = CMatrix::zeros(self.prec(), self.rows, end - start);
        for i in 0..self.rows {
            for j in start..end {
                out[(i, j - start)] = self[(i, j)].clone();
            }
        }
        out
    }

    pub fn hcat(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.rows, other.rows);
        let mut out = CMatrix::zeros(self.prec(), self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)].clone();
            }
            for j in 0..other.cols {
                out[(i, self.cols + j)] = other[(i, j)].clone();
            }
        }
        out
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> Float {
        let mut m = Float::new(self.prec());
        for c in &self.data {
            let a = c.abs();
            if a > m {
                m = a;
            }
        }
        m
    }

    pub fn real_part(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self[(i, j)].re.to_f64()).collect()).collect()
    }

    pub fn imag_part(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self[(i, j)].im.to_f64()).collect()).collect()
    }

    /// Solve self · X = rhs by Gaussian elimination with partial pivoting.
    pub fn solve(&self, rhs: &CMatrix) -> Result<CMatrix, NumericsError> {
        assert_eq!(self.rows, self.cols);
        assert_eq!(rhs.rows, self.rows);
        let n = self.rows;
        let m = rhs.cols;
        let prec = self.prec().max(rhs.prec());
        let mut a = self.clone();
        let mut b = rhs.clone();
        let scale = a.max_abs();
        if scale.is_zero() {
            return Err(NumericsError::Singular);
        }
        let tiny = Float::with_val(prec, &scale * Float::with_val(prec, Float::i_exp(1, -(prec as i32) + 8)));
        for col in 0..n {
            let mut piv = col;
            let mut best = a[(col, col)].abs();
            for r in col + 1..n {
                let v = a[(r, col)].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best <= tiny {
                return Err(NumericsError::Singular);
            }
            if piv != col {
                for j in 0..n {
                    let (x, y) = (a[(col, j)].clone(), a[(piv, j)].clone());
                    a[(col, j)] = y;
                    a[(piv, j)] = x;
                }
                for j in 0..m {
                    let (x, y) = (b[(col, j)].clone(), b[(piv, j)].clone());
                    b[(col, j)] = y;
                    b[(piv, j)] = x;
                }
            }
            let inv = a[(col, col)].recip();
            for r in col + 1..n {
                if a[(r, col)].is_zero() {
                    continue;
                }
                let f = &a[(r, col)] * &inv;
                for j in col..n {
                    let t = &f * &a[(col, j)];
                    a[(r, j)] = &a[(r, j)] - &t;
                }
                for j in 0..m {
                    let t = &f * &b[(col, j)];
                    b[(r, j)] = &b[(r, j)] - &t;
                }
            }
        }
        let mut x = CMatrix::zeros(prec, n, m);
        for j in 0..m {
            for i in (0..n).rev() {
                let mut acc = b[(i, j)].clone();
                for k in i + 1..n {
                    acc = &acc - &(&a[(i, k)] * &x[(k, j)]);
                }
                x[(i, j)] = &acc / &a[(i, i)];
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> Result<CMatrix, NumericsError> {
        self.solve(&CMatrix::identity(self.prec(), self.rows))
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex;
    fn index(&self, (i, j): (usize, usize)) -> &Complex {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex {
        &mut self.data[i * self.cols + j]
    }
}

/// Smallest eigenvalue of a real symmetric matrix, in f64.
pub fn min_symmetric_eigenvalue(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    if n == 0 {
        return 0.0;
    }
    let mat = nalgebra::DMatrix::from_fn(n, n, |i, j| 0.5 * (m[i][j] + m[j][i]));
    let eig = nalgebra::SymmetricEigen::new(mat);
    eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_roundtrip() {
        let p = 120;
        let m = CMatrix::from_rows(vec![
            vec![Complex::from_f64(p, 2.0, 1.0), Complex::from_f64(p, 0.5, 0.0)],
            vec![Complex::from_f64(p, -1.0, 0.0), Complex::from_f64(p, 0.0, 3.0)],
        ]);
        let inv = m.inverse().unwrap();
        let id = m.mul(&inv);
        for i in 0..2 {
            for j in 0..2 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((id[(i, j)].re.to_f64() - e).abs() < 1e-30);
                assert!(id[(i, j)].im.to_f64().abs() < 1e-30);
            }
        }
    }

    #[test]
    fn min_eigenvalue() {
        let m = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
        assert!((min_symmetric_eigenvalue(&m) - 1.0).abs() < 1e-12);
    }
}
