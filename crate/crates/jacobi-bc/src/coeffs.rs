//! Coefficient windows and boundary controls.
//!
//! A semi-infinite Jacobi matrix is described by off-diagonal entries
//! `a_0, a_1, a_2, …` (all positive) and diagonal entries `b_1, b_2, b_3, …`.
//! Only a finite window of both sequences is ever needed: waves travel one
//! site per time step, so a simulation up to time `T` never looks past
//! `a_{T-1}` and `b_T`.
//!
//! Storage is zero-based while the natural indices above are not, so the
//! mapping is fixed once and used everywhere:
//!
//! | natural symbol | slot            |
//! |----------------|-----------------|
//! | `a_k`          | `a[k]`          |
//! | `b_n`          | `b[n - 1]`      |
//!
//! A window of length `M` therefore holds `a_0 … a_{M-1}` and `b_1 … b_M`.

use crate::error::{Error, Result};

/// Finite window of Jacobi coefficients: `a[k]` holds `a_k`, `b[n-1]` holds `b_n`.
///
/// Invariants enforced at construction: both arrays have the same nonzero
/// length, every entry is finite, every `a_k` is strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiCoefficients {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl JacobiCoefficients {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() || a.is_empty() {
            return Err(Error::LengthMismatch {
                a_len: a.len(),
                b_len: b.len(),
            });
        }
        for (k, &v) in a.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { index: k });
            }
            if v <= 0.0 {
                return Err(Error::NonPositiveOffDiagonal { index: k, value: v });
            }
        }
        for (k, &v) in b.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { index: k });
            }
        }
        Ok(Self { a, b })
    }

    /// Discrete Schrödinger window: `a ≡ 1` with the given diagonal.
    pub fn schrodinger(b: Vec<f64>) -> Result<Self> {
        let a = vec![1.0; b.len()];
        Self::new(a, b)
    }

    /// Free window of length `m`: `a ≡ 1`, `b ≡ 0`.
    pub fn free(m: usize) -> Self {
        Self {
            a: vec![1.0; m],
            b: vec![0.0; m],
        }
    }

    /// Window length `M`: the window holds `a_0 … a_{M-1}` and `b_1 … b_M`.
    pub fn window(&self) -> usize {
        self.a.len()
    }

    /// `a_k`.
    pub fn a(&self, k: usize) -> f64 {
        self.a[k]
    }

    /// `b_n` for `n ≥ 1`.
    pub fn b(&self, n: usize) -> f64 {
        self.b[n - 1]
    }

    pub fn a_slice(&self) -> &[f64] {
        &self.a
    }

    pub fn b_slice(&self) -> &[f64] {
        &self.b
    }

    /// Product `a_0 a_1 ⋯ a_{n-1}`; equals 1 for `n = 0`.
    pub fn a_product(&self, n: usize) -> f64 {
        self.a[..n].iter().product()
    }

    /// Copy of the window extended to length `m` with inert filler
    /// (`a = 1`, `b = 0`). Callers must only do this when the filled entries
    /// provably cannot reach the quantities they compute; see the finite
    /// speed discussion in [`crate::forward`].
    pub fn padded(&self, m: usize) -> JacobiCoefficients {
        let mut a = self.a.clone();
        let mut b = self.b.clone();
        while a.len() < m {
            a.push(1.0);
            b.push(0.0);
        }
        JacobiCoefficients { a, b }
    }
}

/// Boundary control: a finitely supported sequence `f_0, f_1, …, f_{T-1}`.
/// Outside the stored range the control is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlVector {
    values: Vec<f64>,
}

impl ControlVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (k, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { index: k });
            }
        }
        Ok(Self { values })
    }

    /// Kronecker delta at `t = 0`, stored with length `len`.
    pub fn delta(len: usize) -> Self {
        let mut values = vec![0.0; len.max(1)];
        values[0] = 1.0;
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `f_t`, zero outside the stored range.
    pub fn value(&self, t: usize) -> f64 {
        self.values.get(t).copied().unwrap_or(0.0)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }
}

impl From<ControlVector> for Vec<f64> {
    fn from(f: ControlVector) -> Vec<f64> {
        f.values
    }
}
