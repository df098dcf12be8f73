//! Dense matrix helpers sized for this crate's needs.
//!
//! Every matrix here is a connecting matrix or one of its leading blocks, so
//! dimensions stay in the dozens. Plain row-major storage with textbook
//! factorizations is both fast enough and easy to audit.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "rows of a square matrix must have length n");
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    /// Row-major entries.
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Copy of the leading `k × k` block.
    pub fn leading(&self, k: usize) -> SquareMatrix {
        assert!(k <= self.n);
        let mut m = SquareMatrix::zeros(k);
        for i in 0..k {
            for j in 0..k {
                m.set(i, j, self.get(i, j));
            }
        }
        m
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// `AᵀA`.
    pub fn gram(&self) -> SquareMatrix {
        let n = self.n;
        let mut g = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += self.get(k, i) * self.get(k, j);
                }
                g.set(i, j, s);
                g.set(j, i, s);
            }
        }
        g
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Determinant by partially pivoted elimination.
    pub fn det(&self) -> f64 {
        let n = self.n;
        if n == 0 {
            return 1.0;
        }
        let mut a = self.data.clone();
        let mut det = 1.0;
        for col in 0..n {
            let mut piv = col;
            for r in col + 1..n {
                if a[r * n + col].abs() > a[piv * n + col].abs() {
                    piv = r;
                }
            }
            if a[piv * n + col] == 0.0 {
                return 0.0;
            }
            if piv != col {
                for j in 0..n {
                    a.swap(col * n + j, piv * n + j);
                }
                det = -det;
            }
            let p = a[col * n + col];
            det *= p;
            for r in col + 1..n {
                let factor = a[r * n + col] / p;
                if factor != 0.0 {
                    for j in col..n {
                        a[r * n + j] -= factor * a[col * n + j];
                    }
                }
            }
        }
        det
    }
}

/// `L D Lᵀ` factorization of a symmetric positive definite matrix.
///
/// The pivots `d_k` are the ratios of consecutive leading principal minors,
/// so they double as a positive definiteness certificate: the factorization
/// aborts at the first pivot at or below `floor`, reporting the leading
/// dimension where definiteness fails.
#[derive(Debug, Clone)]
pub struct Ldlt {
    n: usize,
    l: Vec<f64>,
    d: Vec<f64>,
}

impl Ldlt {
    /// Factors with the crate's standard pivot floor
    /// `1e-10 · trace(A) / n`.
    pub fn factor(a: &SquareMatrix) -> Result<Ldlt> {
        let floor = 1e-10 * a.trace() / a.n().max(1) as f64;
        Self::factor_with_floor(a, floor)
    }

    pub fn factor_with_floor(a: &SquareMatrix, floor: f64) -> Result<Ldlt> {
        let n = a.n();
        let mut l = vec![0.0; n * n];
        let mut d = vec![0.0; n];
        for j in 0..n {
            let mut dj = a.get(j, j);
            for k in 0..j {
                dj -= l[j * n + k] * l[j * n + k] * d[k];
            }
            if !(dj > floor) {
                return Err(Error::NotPositiveDefinite { k: j + 1, pivot: dj });
            }
            d[j] = dj;
            l[j * n + j] = 1.0;
            for i in j + 1..n {
                let mut v = a.get(i, j);
                for k in 0..j {
                    v -= l[i * n + k] * l[j * n + k] * d[k];
                }
                l[i * n + j] = v / dj;
            }
        }
        Ok(Ldlt { n, l, d })
    }

    pub fn pivots(&self) -> &[f64] {
        &self.d
    }

    /// Leading principal minors `det A_k = d_1 ⋯ d_k` for `k = 1 ..= n`.
    pub fn leading_determinants(&self) -> Vec<f64> {
        let mut dets = Vec::with_capacity(self.n);
        let mut p = 1.0;
        for &dk in &self.d {
            p *= dk;
            dets.push(p);
        }
        dets
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.n);
        let n = self.n;
        let mut x = rhs.to_vec();
        for i in 0..n {
            for k in 0..i {
                x[i] -= self.l[i * n + k] * x[k];
            }
        }
        for i in 0..n {
            x[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                x[i] -= self.l[k * n + i] * x[k];
            }
        }
        x
    }

    /// Solves with a few rounds of residual correction, which pushes the
    /// residual down to the rounding floor even when the matrix is badly
    /// scaled.
    pub fn solve_refined(&self, a: &SquareMatrix, rhs: &[f64]) -> Vec<f64> {
        let mut x = self.solve(rhs);
        for _ in 0..3 {
            let ax = a.mul_vec(&x);
            let res: Vec<f64> = rhs.iter().zip(&ax).map(|(r, v)| r - v).collect();
            if res.iter().all(|v| *v == 0.0) {
                break;
            }
            let dx = self.solve(&res);
            for (xi, di) in x.iter_mut().zip(&dx) {
                *xi += di;
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_of_known_matrices() {
        let m = SquareMatrix::from_rows(&[vec![4.0, 12.0], vec![12.0, 40.0]]);
        assert!((m.det() - 16.0).abs() < 1e-12);
        let m = SquareMatrix::from_rows(&[
            vec![4.0, 12.0, 36.0],
            vec![12.0, 40.0, 120.0],
            vec![36.0, 120.0, 396.0],
        ]);
        assert!((m.det() - 576.0).abs() < 1e-9);
        let singular = SquareMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert_eq!(singular.det(), 0.0);
        assert_eq!(SquareMatrix::zeros(0).det(), 1.0);
    }

    #[test]
    fn ldlt_solves_and_certifies() {
        let c = SquareMatrix::from_rows(&[
            vec![396.0, 120.0, 36.0],
            vec![120.0, 40.0, 12.0],
            vec![36.0, 12.0, 4.0],
        ]);
        let f = Ldlt::factor(&c).unwrap();
        let dets = f.leading_determinants();
        assert!((dets[0] - 396.0).abs() < 1e-9);
        assert!((dets[2] - 576.0).abs() < 1e-6);
        let rhs = vec![-2.0, 0.0, 2.0];
        let x = f.solve_refined(&c, &rhs);
        let expect = [-1.0 / 18.0, -4.0 / 3.0, 5.0];
        for (xi, ei) in x.iter().zip(expect) {
            assert!((xi - ei).abs() < 1e-12, "{x:?}");
        }
    }

    #[test]
    fn indefinite_matrix_reports_failing_dimension() {
        let m = SquareMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        let err = Ldlt::factor(&m).unwrap_err();
        match err {
            Error::NotPositiveDefinite { k, pivot } => {
                assert_eq!(k, 2);
                assert!((pivot + 3.0).abs() < 1e-12);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }
}
