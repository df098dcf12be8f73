//! Response, control and connecting operators on a finite time horizon.
//!
//! Everything observable at the boundary is contained in the response
//! vector `r`: `r_0 = a_0` and `r_t = u[1][t+1]` for the delta control,
//! equivalently `r_t = w[1][t]` in kernel terms. The operators built here
//! are all convolutions or Gram matrices of that single sequence:
//!
//! * [`apply_response`] maps a control to the boundary trace of its wave.
//! * [`control_matrix`] maps a control to the interior state it produces at
//!   time `T`; it factors as (diagonal + strictly triangular) × flip.
//! * The connecting matrix `C` is the Gram matrix of the control-to-state
//!   map. [`connecting_from_gram`] computes it from the factorization,
//!   [`connecting_from_response`] from `r` alone; the two agree, which is
//!   the cornerstone identity behind both inverse solvers.
//! * [`blagoveshchenskii_form`] evaluates `(C f, g)` using nothing but `r`,
//!   through a lattice recursion instead of assembling `C`.
//!
//! Entry `r_t` depends exactly on `a_j` for `j ≤ t/2` and `b_j` for
//! `j ≤ (t+1)/2`, so a response of length `K` needs a window of length
//! `⌈K/2⌉` and nothing more; [`response_vector`] enforces that tight bound
//! and fills the simulation window beyond it with values that provably
//! cannot reach the requested entries.

use crate::coeffs::{ControlVector, JacobiCoefficients};
use crate::error::{Error, Result};
use crate::forward::step_forward;
use crate::matrix::SquareMatrix;

/// Boundary data `r_0, r_1, …`: the wave seen at site 1 under a delta
/// control, offset by one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseVector {
    entries: Vec<f64>,
}

impl ResponseVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        for (k, &v) in entries.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { index: k });
            }
        }
        Ok(Self { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `r_t`.
    pub fn entry(&self, t: usize) -> f64 {
        self.entries[t]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    fn require(&self, needed: usize) -> Result<()> {
        if self.len() < needed {
            return Err(Error::ResponseTooShort {
                len: self.len(),
                needed,
            });
        }
        Ok(())
    }
}

/// First `k` response entries of a coefficient window.
///
/// Requires a window of length `⌈k/2⌉`; a longer window never changes the
/// result (finite propagation speed, and the tests pin this bit for bit).
pub fn response_vector(coeffs: &JacobiCoefficients, k: usize) -> Result<ResponseVector> {
    assert!(k >= 1, "requested an empty response");
    let needed = k.div_ceil(2);
    if coeffs.window() < needed {
        return Err(Error::WindowTooSmall {
            window: coeffs.window(),
            needed,
        });
    }
    // Entries r_0 … r_{k-1} live at times ≤ k, reached by simulating with
    // any window of length k; the filler is inert for those entries.
    let padded = coeffs.padded(k);
    let u = step_forward(&padded, &ControlVector::delta(1), k)?;
    let entries = (0..k).map(|t| u.value(1, t + 1)).collect();
    Ok(ResponseVector { entries })
}

/// Boundary trace of the wave driven by `f`: entry `i` is
/// `Σ_{s≤i} r_s f_{i-s}`, the state at site 1 and time `i + 1`.
pub fn apply_response(r: &ResponseVector, f: &[f64]) -> Result<Vec<f64>> {
    r.require(f.len())?;
    let t = f.len();
    let mut out = vec![0.0; t];
    for i in 0..t {
        let mut s = 0.0;
        for j in 0..=i {
            s += r.entry(j) * f[i - j];
        }
        out[i] = s;
    }
    Ok(out)
}

/// Transpose of [`apply_response`]: entry `s` is `Σ_{j≥s} r_{j-s} g_j`.
pub fn adjoint_response(r: &ResponseVector, g: &[f64]) -> Result<Vec<f64>> {
    r.require(g.len())?;
    let t = g.len();
    let mut out = vec![0.0; t];
    for s in 0..t {
        let mut acc = 0.0;
        for j in s..t {
            acc += r.entry(j - s) * g[j];
        }
        out[s] = acc;
    }
    Ok(out)
}

/// Control-to-state map at time `T`: row `n` (1-based) of the dense matrix
/// sends `f = (f_0 … f_{T-1})` to `u[n][T]`.
#[derive(Debug, Clone)]
pub struct ControlMatrix {
    t: usize,
    dense: SquareMatrix,
    /// `products[n-1] = a_0 ⋯ a_{n-1}`, the leading-front amplitudes.
    products: Vec<f64>,
}

impl ControlMatrix {
    pub fn horizon(&self) -> usize {
        self.t
    }

    pub fn as_matrix(&self) -> &SquareMatrix {
        &self.dense
    }

    /// `u[·][T]` for the given control.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        self.dense.mul_vec(f)
    }

    /// Control steering to the prescribed state `y = (y_1 … y_T)`.
    ///
    /// After reversing the unknowns, the matrix is upper triangular with the
    /// positive products on the diagonal, so one back-substitution suffices.
    pub fn solve(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.t);
        let t = self.t;
        // g_p = f_{T-1-p}; U[i][p] = dense[i][T-1-p] is upper triangular.
        let mut g = vec![0.0; t];
        for i in (0..t).rev() {
            let mut v = y[i];
            for p in i + 1..t {
                v -= self.dense.get(i, t - 1 - p) * g[p];
            }
            g[i] = v / self.products[i];
        }
        let mut f = g;
        f.reverse();
        f
    }

    /// `± a_0^T a_1^{T-1} ⋯ a_{T-1}`, the sign coming from the flip.
    pub fn determinant(&self) -> f64 {
        let t = self.t;
        let flips = t * (t - 1) / 2;
        let sign = if flips.is_multiple_of(2) { 1.0 } else { -1.0 };
        sign * self.products.iter().product::<f64>()
    }
}

/// Builds the control-to-state map for horizon `T`. Requires a window of
/// length `T`.
pub fn control_matrix(coeffs: &JacobiCoefficients, t: usize) -> Result<ControlMatrix> {
    assert!(t >= 1, "empty horizon");
    if coeffs.window() < t {
        return Err(Error::WindowTooSmall {
            window: coeffs.window(),
            needed: t,
        });
    }
    let kernel = crate::forward::goursat_kernel(coeffs, t - 1)?;
    let mut dense = SquareMatrix::zeros(t);
    let mut products = Vec::with_capacity(t);
    let mut p = 1.0;
    for n in 1..=t {
        p *= coeffs.a(n - 1);
        products.push(p);
        for j in 0..t {
            let mut v = if j == t - n { p } else { 0.0 };
            let s = t - 1 - j;
            if s >= n {
                v += kernel.value(n, s);
            }
            dense.set(n - 1, j, v);
        }
    }
    Ok(ControlMatrix { t, dense, products })
}

/// Symmetric positive definite Gram matrix of the control-to-state map,
/// `(C f, g) = (W f, W g)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectingMatrix {
    matrix: SquareMatrix,
}

impl ConnectingMatrix {
    pub(crate) fn from_matrix(matrix: SquareMatrix) -> Self {
        Self { matrix }
    }

    pub fn horizon(&self) -> usize {
        self.matrix.n()
    }

    pub fn as_matrix(&self) -> &SquareMatrix {
        &self.matrix
    }
}

/// `C = WᵀW`.
pub fn connecting_from_gram(w: &ControlMatrix) -> ConnectingMatrix {
    ConnectingMatrix {
        matrix: w.as_matrix().gram(),
    }
}

/// Assembles `C` directly from the response:
/// `C_{ij} = r_0 Σ_{k=0}^{T-max(i,j)} r_{|i-j|+2k}` (1-based indices).
/// Needs `2T - 1` response entries.
pub fn connecting_from_response(r: &ResponseVector, t: usize) -> Result<ConnectingMatrix> {
    assert!(t >= 1, "empty horizon");
    r.require(2 * t - 1)?;
    let r0 = r.entry(0);
    let mut m = SquareMatrix::zeros(t);
    for i in 1..=t {
        for j in i..=t {
            let mut s = 0.0;
            for k in 0..=(t - j) {
                s += r.entry(j - i + 2 * k);
            }
            s *= r0;
            m.set(i - 1, j - 1, s);
            m.set(j - 1, i - 1, s);
        }
    }
    Ok(ConnectingMatrix { matrix: m })
}

/// Index reversal `C̄_{ij} = C_{T+1-j, T+1-i}`; applying it twice gives the
/// original matrix back.
pub fn rotate_connecting(c: &ConnectingMatrix) -> ConnectingMatrix {
    let t = c.horizon();
    let mut m = SquareMatrix::zeros(t);
    for i in 0..t {
        for j in 0..t {
            m.set(i, j, c.as_matrix().get(t - 1 - j, t - 1 - i));
        }
    }
    ConnectingMatrix { matrix: m }
}

/// Rotated connecting matrix straight from the response:
/// `C̄_{ij} = r_0 Σ_{k=0}^{min(i,j)-1} r_{|i-j|+2k}`. Its leading blocks are
/// the rotated matrices of every smaller horizon, which is what the
/// determinant-based inversion exploits.
pub fn rotated_connecting_from_response(
    r: &ResponseVector,
    t: usize,
) -> Result<ConnectingMatrix> {
    assert!(t >= 1, "empty horizon");
    r.require(2 * t - 1)?;
    let r0 = r.entry(0);
    let mut m = SquareMatrix::zeros(t);
    for i in 1..=t {
        for j in i..=t {
            let mut s = 0.0;
            for k in 0..i {
                s += r.entry(j - i + 2 * k);
            }
            s *= r0;
            m.set(i - 1, j - 1, s);
            m.set(j - 1, i - 1, s);
        }
    }
    Ok(ConnectingMatrix { matrix: m })
}

/// Evaluates `(C^T f, g)` from the response alone.
///
/// The quadratic form is the inner product of two wave states; it satisfies
/// a driven discrete wave equation on the `(site used for f, time of g)`
/// lattice whose source involves only boundary traces. Integrating that
/// recursion with `f` extended oddly around time `T` lands exactly on
/// `(C^T f, g)` at the corner `(T, T)`.
pub fn blagoveshchenskii_form(
    r: &ResponseVector,
    f: &ControlVector,
    g: &ControlVector,
    t: usize,
) -> Result<f64> {
    assert!(t >= 1, "empty horizon");
    r.require(2 * t - 1)?;
    let a0 = r.entry(0);
    // Odd extension of f around T over 0 ..= 2T-1.
    let mut fx = vec![0.0; 2 * t];
    for (j, slot) in fx.iter_mut().enumerate() {
        *slot = if j < t {
            f.value(j)
        } else if j == t {
            0.0
        } else {
            -f.value(2 * t - j)
        };
    }
    // Boundary traces: rf[n] = u^f(1, n) for the extended f, rg[τ] = u^g(1, τ).
    let trace = |h: &[f64], len: usize| -> Vec<f64> {
        let mut out = vec![0.0; len];
        for (n, slot) in out.iter_mut().enumerate().skip(1) {
            let mut acc = 0.0;
            for s in 0..n.min(r.len()) {
                if n - 1 - s < h.len() {
                    acc += r.entry(s) * h[n - 1 - s];
                }
            }
            *slot = acc;
        }
        out
    };
    let g_vals: Vec<f64> = (0..t).map(|j| g.value(j)).collect();
    let rf = trace(&fx, 2 * t);
    let rg = trace(&g_vals, t);

    let mut psi = vec![vec![0.0; t + 1]; 2 * t + 1];
    for tau in 0..t {
        for n in 1..=(2 * t - tau - 1) {
            let source = a0 * (g_vals[tau] * rf[n] - fx[n] * rg[tau]);
            let past = if tau >= 1 { psi[n][tau - 1] } else { 0.0 };
            psi[n][tau + 1] = psi[n + 1][tau] + psi[n - 1][tau] - past + source;
        }
    }
    Ok(psi[t][t])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::goursat_kernel;

    fn coeffs(a: &[f64], b: &[f64]) -> JacobiCoefficients {
        JacobiCoefficients::new(a.to_vec(), b.to_vec()).unwrap()
    }

    /// Window with r = (2, 6, 18, 54, 178); all five entries verified by
    /// unrolling the recurrences by hand.
    fn sample() -> JacobiCoefficients {
        coeffs(&[2.0, 1.0, 3.0], &[3.0, 0.0, -1.0])
    }

    #[test]
    fn response_hand_values() {
        let r = response_vector(&sample(), 5).unwrap();
        assert_eq!(r.as_slice(), &[2.0, 6.0, 18.0, 54.0, 178.0]);
    }

    #[test]
    fn free_response_is_a_delta() {
        let r = response_vector(&JacobiCoefficients::free(4), 7).unwrap();
        assert_eq!(r.as_slice(), &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn single_site_potential_has_geometric_response() {
        let beta = -0.7;
        let c = JacobiCoefficients::schrodinger(vec![beta, 0.0, 0.0, 0.0]).unwrap();
        let r = response_vector(&c, 6).unwrap();
        for t in 0..6 {
            assert!(
                (r.entry(t) - beta.powi(t as i32)).abs() < 1e-12,
                "r_{t} = {}",
                r.entry(t)
            );
        }
    }

    #[test]
    fn response_equals_kernel_row_one() {
        let c = coeffs(
            &[0.9, 1.4, 0.6, 1.1, 1.3, 0.8],
            &[0.2, -1.5, 0.7, 1.0, -0.3, 0.0],
        );
        let r = response_vector(&c, 6).unwrap();
        let w = goursat_kernel(&c, 5).unwrap();
        assert_eq!(r.entry(0), c.a(0));
        for s in 1..6 {
            assert!((r.entry(s) - w.value(1, s)).abs() < 1e-12);
        }
    }

    #[test]
    fn response_window_bound_is_tight() {
        let c = coeffs(&[2.0, 1.0, 3.0], &[3.0, 0.0, -1.0]);
        assert!(response_vector(&c, 6).is_ok()); // ⌈6/2⌉ = 3
        assert!(matches!(
            response_vector(&c, 7),
            Err(Error::WindowTooSmall { needed: 4, .. })
        ));
    }

    #[test]
    fn longer_windows_do_not_move_the_response() {
        let base = sample();
        let r5 = response_vector(&base, 5).unwrap();
        let mut a = base.a_slice().to_vec();
        let mut b = base.b_slice().to_vec();
        a.extend([9.0, 0.25, 4.0]);
        b.extend([-8.0, 5.0, 11.0]);
        let wide = coeffs(&a, &b);
        let rw = response_vector(&wide, 5).unwrap();
        assert_eq!(r5.as_slice(), rw.as_slice());
    }

    #[test]
    fn apply_response_on_delta_returns_the_response() {
        let r = response_vector(&sample(), 5).unwrap();
        let out = apply_response(&r, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(out, vec![2.0, 6.0, 18.0, 54.0]);
    }

    #[test]
    fn adjoint_identity() {
        let r = response_vector(&sample(), 5).unwrap();
        let f = [0.3, -1.2, 0.8, 0.5, -0.1];
        let g = [1.1, 0.4, -0.9, 0.2, 0.6];
        let rf = apply_response(&r, &f).unwrap();
        let rg = adjoint_response(&r, &g).unwrap();
        let lhs: f64 = rf.iter().zip(&g).map(|(x, y)| x * y).sum();
        let rhs: f64 = f.iter().zip(&rg).map(|(x, y)| x * y).sum();
        assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn response_too_short_is_reported() {
        let r = ResponseVector::new(vec![1.0, 0.0]).unwrap();
        assert!(apply_response(&r, &[1.0, 0.0, 0.0]).is_err());
        assert!(connecting_from_response(&r, 2).is_err());
    }

    #[test]
    fn control_matrix_hand_values() {
        let w = control_matrix(&coeffs(&[2.0, 1.0], &[3.0, 0.0]), 2).unwrap();
        // Rows over (f_0, f_1): u[1][2] = 6 f_0 + 2 f_1, u[2][2] = 2 f_0.
        assert_eq!(w.as_matrix().get(0, 0), 6.0);
        assert_eq!(w.as_matrix().get(0, 1), 2.0);
        assert_eq!(w.as_matrix().get(1, 0), 2.0);
        assert_eq!(w.as_matrix().get(1, 1), 0.0);
    }

    #[test]
    fn free_control_matrix_is_the_flip() {
        let w = control_matrix(&JacobiCoefficients::free(3), 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i + j == 2 { 1.0 } else { 0.0 };
                assert_eq!(w.as_matrix().get(i, j), expect);
            }
        }
        assert_eq!(w.determinant().abs(), 1.0);
    }

    #[test]
    fn control_matrix_agrees_with_stepping() {
        let c = coeffs(&[0.8, 1.7, 0.6, 1.2], &[0.3, -1.2, 1.9, 0.0]);
        let t = 4;
        let w = control_matrix(&c, t).unwrap();
        let f = [0.9, -0.4, 1.6, 0.2];
        let u = step_forward(&c, &ControlVector::new(f.to_vec()).unwrap(), t).unwrap();
        let state = w.apply(&f);
        for n in 1..=t {
            assert!(
                (state[n - 1] - u.value(n, t)).abs() < 1e-12 * (1.0 + state[n - 1].abs()),
                "site {n}"
            );
        }
    }

    #[test]
    fn control_solve_inverts_apply() {
        let c = sample();
        let w = control_matrix(&c, 3).unwrap();
        let y = [1.0, -3.0, -1.0 / 3.0];
        let f = w.solve(&y);
        let expect = [-1.0 / 18.0, -4.0 / 3.0, 5.0];
        for (fi, ei) in f.iter().zip(expect) {
            assert!((fi - ei).abs() < 1e-12);
        }
        let back = w.apply(&f);
        for (bi, yi) in back.iter().zip(y) {
            assert!((bi - yi).abs() < 1e-12);
        }
        assert!((w.determinant().abs() - 2.0 * 2.0 * 6.0).abs() < 1e-12);
    }

    #[test]
    fn connecting_routes_agree_on_hand_case() {
        let c = coeffs(&[2.0, 1.0], &[3.0, 0.0]);
        let gram = connecting_from_gram(&control_matrix(&c, 2).unwrap());
        assert_eq!(gram.as_matrix().data(), &[40.0, 12.0, 12.0, 4.0]);
        let r = response_vector(&c, 3).unwrap();
        let from_r = connecting_from_response(&r, 2).unwrap();
        assert_eq!(from_r.as_matrix().data(), &[40.0, 12.0, 12.0, 4.0]);
    }

    #[test]
    fn connecting_routes_agree_on_three_by_three() {
        let c = sample();
        let gram = connecting_from_gram(&control_matrix(&c, 3).unwrap());
        let expect = [
            396.0, 120.0, 36.0, //
            120.0, 40.0, 12.0, //
            36.0, 12.0, 4.0,
        ];
        for (v, e) in gram.as_matrix().data().iter().zip(expect) {
            assert!((v - e).abs() < 1e-9);
        }
        let r = response_vector(&c, 5).unwrap();
        let from_r = connecting_from_response(&r, 3).unwrap();
        for (v, e) in from_r.as_matrix().data().iter().zip(expect) {
            assert!((v - e).abs() < 1e-12);
        }
    }

    #[test]
    fn rotation_reverses_indices_and_is_an_involution() {
        let c = coeffs(&[2.0, 1.0], &[3.0, 0.0]);
        let r = response_vector(&c, 3).unwrap();
        let conn = connecting_from_response(&r, 2).unwrap();
        let rot = rotate_connecting(&conn);
        assert_eq!(rot.as_matrix().data(), &[4.0, 12.0, 12.0, 40.0]);
        assert_eq!(rotate_connecting(&rot), conn);
        let direct = rotated_connecting_from_response(&r, 2).unwrap();
        assert_eq!(direct, rot);
    }

    #[test]
    fn rotated_leading_blocks_nest() {
        let r = response_vector(&sample(), 5).unwrap();
        let big = rotated_connecting_from_response(&r, 3).unwrap();
        let small = rotated_connecting_from_response(&r, 2).unwrap();
        assert_eq!(big.as_matrix().leading(2), *small.as_matrix());
    }

    #[test]
    fn blagoveshchenskii_free_delta() {
        let r = ResponseVector::new(vec![1.0, 0.0, 0.0]).unwrap();
        let d = ControlVector::delta(2);
        let v = blagoveshchenskii_form(&r, &d, &d, 2).unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn blagoveshchenskii_matches_assembled_form() {
        let c = sample();
        let r = response_vector(&c, 5).unwrap();
        let conn = connecting_from_response(&r, 3).unwrap();
        let f = ControlVector::new(vec![0.7, -1.1, 0.4]).unwrap();
        let g = ControlVector::new(vec![-0.2, 0.9, 1.3]).unwrap();
        let cf = conn.as_matrix().mul_vec(f.as_slice());
        let direct: f64 = cf.iter().zip(g.as_slice()).map(|(x, y)| x * y).sum();
        let via_form = blagoveshchenskii_form(&r, &f, &g, 3).unwrap();
        assert!(
            (via_form - direct).abs() < 1e-12 * (1.0 + direct.abs()),
            "{via_form} vs {direct}"
        );
        let swapped = blagoveshchenskii_form(&r, &g, &f, 3).unwrap();
        assert!((via_form - swapped).abs() < 1e-12 * (1.0 + direct.abs()));
    }
}
