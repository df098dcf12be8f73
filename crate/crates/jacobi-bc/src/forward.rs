//! Discrete wave propagation on the half line and its kernel representation.
//!
//! The dynamical system reads
//!
//! ```text
//! u[n][t+1] + u[n][t-1] - a_n u[n+1][t] - a_{n-1} u[n-1][t] - b_n u[n][t] = 0,
//! u[n][-1] = u[n][0] = 0,          n ≥ 1,
//! u[0][t] = f_t,
//! ```
//!
//! driven by a boundary control `f`. Waves move at most one site per step,
//! so `u[n][t] = 0` whenever `n > t` and the solution at time `T` only sees
//! the coefficients `a_0 … a_{T-1}`, `b_1 … b_T`. [`step_forward`] insists on
//! a window of at least that size instead of padding silently: padding would
//! hide bugs that violate the finite propagation speed.
//!
//! The same solution can be written in closed form through a triangular
//! kernel `w` (computed by [`goursat_kernel`]):
//!
//! ```text
//! u[n][t] = (a_0 ⋯ a_{n-1}) f_{t-n} + Σ_{s=n}^{t-1} w[n][s] f_{t-s-1},
//! ```
//!
//! which [`dalembert_solution`] evaluates. Both routes agree to rounding
//! error; the test suite pins that equivalence down.

use crate::coeffs::{ControlVector, JacobiCoefficients};
use crate::error::{Error, Result};

/// Solution grid `u[n][t]` for `0 ≤ n, t ≤ t_max`.
///
/// Row 0 repeats the control; interior rows satisfy the recurrence above.
#[derive(Debug, Clone)]
pub struct Wavefield {
    values: Vec<Vec<f64>>,
    t_max: usize,
}

impl Wavefield {
    pub(crate) fn from_values(values: Vec<Vec<f64>>, t_max: usize) -> Self {
        Self { values, t_max }
    }

    /// `u[n][t]`. Panics outside the stored grid.
    pub fn value(&self, n: usize, t: usize) -> f64 {
        self.values[n][t]
    }

    pub fn n_max(&self) -> usize {
        self.values.len() - 1
    }

    pub fn t_max(&self) -> usize {
        self.t_max
    }

    /// Rows in site order; each row holds times `0 ..= t_max`.
    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }
}

/// Time-steps the system with control `f` up to time `t_max` on sites
/// `0 ..= t_max`. Requires a coefficient window of length at least `t_max`.
pub fn step_forward(
    coeffs: &JacobiCoefficients,
    f: &ControlVector,
    t_max: usize,
) -> Result<Wavefield> {
    if coeffs.window() < t_max {
        return Err(Error::WindowTooSmall {
            window: coeffs.window(),
            needed: t_max,
        });
    }
    let n_max = t_max;
    let mut u = vec![vec![0.0; t_max + 1]; n_max + 1];
    for t in 0..=t_max {
        u[0][t] = f.value(t);
    }
    for t in 0..t_max {
        // u[n][t+1] can be nonzero only for n ≤ t+1.
        for n in 1..=(t + 1).min(n_max) {
            // The a_n u[n+1][t] term vanishes unless n+1 ≤ t; skipping it
            // keeps every coefficient access inside the promised window.
            let up = if n < t {
                coeffs.a(n) * u[n + 1][t]
            } else {
                0.0
            };
            let down = coeffs.a(n - 1) * u[n - 1][t];
            let stay = coeffs.b(n) * u[n][t];
            let past = if t >= 1 { u[n][t - 1] } else { 0.0 };
            u[n][t + 1] = up + down + stay - past;
        }
    }
    Ok(Wavefield {
        values: u,
        t_max,
    })
}

/// Triangular kernel `w[n][s]`, nonzero only for `1 ≤ n ≤ s ≤ depth`.
#[derive(Debug, Clone)]
pub struct GoursatKernel {
    w: Vec<Vec<f64>>,
    depth: usize,
}

impl GoursatKernel {
    /// `w[n][s]`; zero outside the triangle.
    pub fn value(&self, n: usize, s: usize) -> f64 {
        if n == 0 || n > s || s > self.depth {
             0.0
        } else {
            self.w[n][s]
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }
}

/// Fills the kernel triangle `1 ≤ n ≤ s ≤ depth`.
///
/// Diagonal entries follow `w[n][n] = b_n·(a_0⋯a_{n-1}) + a_{n-1} w[n-1][n-1]`,
/// which unrolls to `(a_0⋯a_{n-1})·(b_1 + … + b_n)`. Off-diagonal entries are
/// filled column by column from
///
/// ```text
/// w[n][s+1] = a_n w[n+1][s] + a_{n-1} w[n-1][s] + b_n w[n][s] - w[n][s-1]
///             - δ_{s,n} (1 - a_n²)(a_0 ⋯ a_{n-1}),
/// ```
///
/// the correction on the diagonal accounting for the jump the leading front
/// leaves behind.
pub fn goursat_kernel(coeffs: &JacobiCoefficients, depth: usize) -> Result<GoursatKernel> {
    if coeffs.window() < depth + 1 {
        return Err(Error::WindowTooSmall {
            window: coeffs.window(),
            needed: depth + 1,
        });
    }
    let mut w = vec![vec![0.0; depth + 1]; depth + 1];
    let mut product = 1.0; // a_0 ⋯ a_{n-1}
    for n in 1..=depth {
        product *= coeffs.a(n - 1);
        w[n][n] = coeffs.b(n) * product + coeffs.a(n - 1) * w[n - 1][n - 1];
    }
    for s in 1..depth {
        for n in 1..=s {
            let up = if n < s {
                coeffs.a(n) * w[n + 1][s]
            } else {
                0.0
            };
            let down = if n >= 2 { coeffs.a(n - 1) * w[n - 1][s] } else { 0.0 };
            let past = if n < s { w[n][s - 1] } else { 0.0 };
            let mut next = up + down + coeffs.b(n) * w[n][s] - past;
            if s == n {
                let lead: f64 = coeffs.a_product(n);
                next -= (1.0 - coeffs.a(n) * coeffs.a(n)) * lead;
            }
            w[n][s + 1] = next;
        }
    }
    Ok(GoursatKernel { w, depth })
}

/// Evaluates the kernel representation of `u[n][t]` for `n ≥ 1`.
///
/// Needs the kernel filled to depth `t - 1` and a coefficient window of
/// length at least `n` (for the leading product).
pub fn dalembert_solution(
    coeffs: &JacobiCoefficients,
    kernel: &GoursatKernel,
    f: &ControlVector,
    n: usize,
    t: usize,
) -> Result<f64> {
    assert!(n >= 1, "the representation holds for interior sites only");
    if t == 0 || n > t {
        return Ok(0.0);
    }
    if kernel.depth() + 1 < t {
        return Err(Error::KernelDepthTooSmall {
            depth: kernel.depth(),
            needed: t - 1,
        });
    }
    if coeffs.window() < n {
        return Err(Error::WindowTooSmall {
            window: coeffs.window(),
            needed: n,
        });
    }
    let mut value = coeffs.a_product(n) * f.value(t - n);
    for s in n..t {
        value += kernel.value(n, s) * f.value(t - s - 1);
    }
    Ok(value)
}

/// Full convolution `c_t = Σ_{s=0}^{t} x_s y_{t-s}`; empty if either input is.
pub fn convolve(x: &[f64], y: &[f64]) -> Vec<f64> {
    if x.is_empty() || y.is_empty() {
        return Vec::new();
    }
    let mut c = vec![0.0; x.len() + y.len() - 1];
    for (i, &xi) in x.iter().enumerate() {
        for (j, &yj) in y.iter().enumerate() {
            c[i + j] += xi * yj;
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coeffs(a: &[f64], b: &[f64]) -> JacobiCoefficients {
        JacobiCoefficients::new(a.to_vec(), b.to_vec()).unwrap()
    }

    #[test]
    fn delta_wavefield_hand_values() {
        // a = (2, 1, ·), b = (3, 0, ·); filler beyond index 1 cannot reach
        // the probed entries before t = 4.
        let c = coeffs(&[2.0, 1.0, 1.0], &[3.0, 0.0, 0.0]);
        let u = step_forward(&c, &ControlVector::delta(1), 3).unwrap();
        assert_eq!(u.value(1, 1), 2.0); // a_0
        assert_eq!(u.value(1, 2), 6.0); // a_0 b_1
        assert_eq!(u.value(2, 2), 2.0); // a_0 a_1
        assert_eq!(u.value(1, 3), 18.0);
    }

    #[test]
    fn window_must_cover_the_horizon() {
        let c = coeffs(&[2.0, 1.0], &[3.0, 0.0]);
        let err = step_forward(&c, &ControlVector::delta(1), 3).unwrap_err();
        assert_eq!(
            err,
            Error::WindowTooSmall {
                window: 2,
                needed: 3
            }
        );
    }

    #[test]
    fn support_stays_inside_the_light_cone() {
        let c = coeffs(&[0.7, 1.3, 0.9, 1.1, 1.0], &[0.4, -1.0, 2.0, 0.0, 1.0]);
        let f = ControlVector::new(vec![1.0, -2.0, 0.5]).unwrap();
        let u = step_forward(&c, &f, 5).unwrap();
        for n in 1..=5 {
            for t in 0..n {
                assert_eq!(u.value(n, t), 0.0, "u[{n}][{t}] outside the cone");
            }
        }
    }

    #[test]
    fn kernel_hand_values() {
        let c = coeffs(&[2.0, 1.0, 1.0], &[3.0, 0.0, 0.0]);
        let w = goursat_kernel(&c, 2).unwrap();
        assert_eq!(w.value(1, 1), 6.0); // a_0 b_1
        assert_eq!(w.value(1, 2), 18.0);
        assert_eq!(w.value(2, 2), 6.0); // a_0 a_1 (b_1 + b_2)
        assert_eq!(w.value(0, 1), 0.0);
        assert_eq!(w.value(2, 1), 0.0);
    }

    #[test]
    fn kernel_diagonal_jump_tracks_a1() {
        // w[1][2] = a_0 b_1² - (1 - a_1²) a_0 = 16 + 2 a_1² here.
        for a1 in [0.5, 1.0, 2.5] {
            let c = coeffs(&[2.0, a1, 1.0], &[3.0, 0.0, 0.0]);
            let w = goursat_kernel(&c, 2).unwrap();
            assert!((w.value(1, 2) - (16.0 + 2.0 * a1 * a1)).abs() < 1e-12);
        }
    }

    #[test]
    fn kernel_window_precondition() {
        let c = coeffs(&[2.0, 1.0], &[3.0, 0.0]);
        assert!(goursat_kernel(&c, 2).is_err());
        assert!(goursat_kernel(&c, 1).is_ok());
    }

    #[test]
    fn representation_matches_stepping() {
        let c = coeffs(
            &[0.8, 1.7, 0.6, 1.2, 0.9, 1.4, 1.0, 1.1, 0.7, 1.3, 0.95, 1.05],
            &[0.3, -1.2, 1.9, 0.0, -0.4, 0.8, -1.7, 1.1, 0.2, -0.9, 1.5, -0.1],
        );
        let f = ControlVector::new(vec![1.0, -0.3, 0.8, 0.1, -1.1, 0.6]).unwrap();
        let t_max = 12;
        let u = step_forward(&c, &f, t_max).unwrap();
        let w = goursat_kernel(&c, t_max - 1).unwrap();
        let mut max_abs: f64 = 0.0;
        for n in 1..=t_max {
            for t in n..=t_max {
                max_abs = max_abs.max(u.value(n, t).abs());
            }
        }
        for n in 1..=t_max {
            for t in n..=t_max {
                let v = dalembert_solution(&c, &w, &f, n, t).unwrap();
                assert!(
                    (v - u.value(n, t)).abs() <= 1e-12 * (1.0 + max_abs),
                    "mismatch at n={n}, t={t}: {v} vs {}",
                    u.value(n, t)
                );
            }
        }
    }

    #[test]
    fn representation_depth_precondition() {
        let c = coeffs(&[1.0, 1.0, 1.0, 1.0], &[0.0; 4]);
        let w = goursat_kernel(&c, 2).unwrap();
        let f = ControlVector::delta(1);
        assert!(dalembert_solution(&c, &w, &f, 1, 4).is_err());
        assert!(dalembert_solution(&c, &w, &f, 1, 3).is_ok());
    }

    #[test]
    fn stepping_is_linear_in_the_control() {
        let c = coeffs(&[1.1, 0.9, 1.3, 0.8, 1.0], &[0.5, -0.7, 0.0, 1.2, -0.3]);
        let f = ControlVector::new(vec![0.4, -1.0, 0.7, 0.2]).unwrap();
        let g = ControlVector::new(vec![-0.6, 0.3, 1.5, -0.8]).unwrap();
        let (alpha, beta) = (1.7, -0.45);
        let combo: Vec<f64> = (0..4)
            .map(|t| alpha * f.value(t) + beta * g.value(t))
            .collect();
        let uc = step_forward(&c, &ControlVector::new(combo).unwrap(), 5).unwrap();
        let uf = step_forward(&c, &f, 5).unwrap();
        let ug = step_forward(&c, &g, 5).unwrap();
        for n in 0..=5 {
            for t in 0..=5 {
                let lhs = uc.value(n, t);
                let rhs = alpha * uf.value(n, t) + beta * ug.value(n, t);
                assert!((lhs - rhs).abs() < 1e-12 * (1.0 + rhs.abs()));
            }
        }
    }

    #[test]
    fn far_coefficients_cannot_reach_early_times() {
        // Changing a_k for k ≥ T or b_k for k > T leaves u[1][t] untouched
        // for t ≤ 2T, bit for bit.
        let t_cap = 3usize; // T
        let base_a = vec![1.3, 0.7, 1.9, 0.6, 1.2, 0.8];
        let base_b = vec![-0.9, 1.4, 0.3, -2.0, 1.0, 0.5];
        let mut far_a = base_a.clone();
        let mut far_b = base_b.clone();
        for k in t_cap..base_a.len() {
            far_a[k] = 17.0 + k as f64;
        }
        for n in (t_cap + 1)..=base_b.len() {
            far_b[n - 1] = -31.0 - n as f64;
        }
        let f = ControlVector::new(vec![1.0, -0.5, 0.25]).unwrap();
        let u1 = step_forward(&coeffs(&base_a, &base_b), &f, 2 * t_cap).unwrap();
        let u2 = step_forward(&coeffs(&far_a, &far_b), &f, 2 * t_cap).unwrap();
        for t in 0..=2 * t_cap {
            assert_eq!(u1.value(1, t), u2.value(1, t), "t = {t}");
        }
    }

    #[test]
    fn convolve_against_double_loop() {
        let x = [1.0, -2.0, 3.0];
        let y = [0.5, 4.0];
        assert_eq!(convolve(&x, &y), vec![0.5, 3.0, -6.5, 12.0]);
        assert_eq!(convolve(&x, &[]), Vec::<f64>::new());
        // Delta is the identity.
        assert_eq!(convolve(&[1.0], &y), y.to_vec());
    }
}
