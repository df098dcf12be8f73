//! Eigenvalues of symmetric tridiagonal matrices by Sturm-sequence
//! bisection.
//!
//! The matrices handled here are small (interval problems at desk scale),
//! so robustness beats asymptotics: bisection on the inertia count is
//! monotone, cannot diverge, and isolates each eigenvalue to the last
//! floating-point bit without ever forming the characteristic polynomial.

use crate::error::{Error, Result};

/// Number of eigenvalues strictly below `x`, by the classic pivot
/// recurrence of shifted elimination. `pivmin` guards divisions near a
/// breakdown pivot.
fn count_below(diag: &[f64], off: &[f64], x: f64, pivmin: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for (i, &d) in diag.iter().enumerate() {
        let e2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        q = d - x - e2 / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Ascending eigenvalues of the symmetric tridiagonal matrix with the given
/// diagonal and off-diagonal. Entries must be finite; the off-diagonal may
/// carry any sign (only squares enter).
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    assert_eq!(
        off.len(),
        n.saturating_sub(1),
        "off-diagonal length must be one less than the diagonal"
    );
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![diag[0]]);
    }
    // Gershgorin interval, inflated a hair so strict counts see everything.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut max_e2 = 0.0_f64;
    for i in 0..n {
        let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
        let right = if i < n - 1 { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - left - right);
        hi = hi.max(diag[i] + left + right);
        if i < n - 1 {
            max_e2 = max_e2.max(off[i] * off[i]);
        }
    }
    let span = (hi - lo).max(1.0);
    lo -= 1e-3 * span + f64::EPSILON;
    hi += 1e-3 * span + f64::EPSILON;
    let pivmin = f64::MIN_POSITIVE.max(f64::EPSILON * f64::EPSILON * max_e2);

    let mut values = Vec::with_capacity(n);
    for k in 0..n {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if count_below(diag, off, mid, pivmin) > k {
                b = mid;
            } else {
                a = mid;
            }
        }
        let width_cap = 1e-9 * (1.0 + a.abs().max(b.abs()));
        if b - a > width_cap {
            return Err(Error::EigenNonConvergence { index: k });
        }
        values.push(0.5 * (a + b));
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_by_one() {
        assert_eq!(tridiagonal_eigenvalues(&[-2.5], &[]).unwrap(), vec![-2.5]);
        assert!(tridiagonal_eigenvalues(&[], &[]).unwrap().is_empty());
    }

    #[test]
    fn two_by_two_hand_roots() {
        // [[3, 1], [1, 0]] has eigenvalues (3 ± √13)/2.
        let got = tridiagonal_eigenvalues(&[3.0, 0.0], &[1.0]).unwrap();
        let root = 13.0_f64.sqrt();
        let expect = [(3.0 - root) / 2.0, (3.0 + root) / 2.0];
        for (g, e) in got.iter().zip(expect) {
            assert!((g - e).abs() < 1e-13, "{g} vs {e}");
        }
    }

    #[test]
    fn free_chain_eigenvalues_are_cosines() {
        // diag 0, off 1, size N: eigenvalues 2 cos(kπ/(N+1)).
        for n in [3usize, 5, 8] {
            let got = tridiagonal_eigenvalues(&vec![0.0; n], &vec![1.0; n - 1]).unwrap();
            for (idx, g) in got.iter().enumerate() {
                let k = n - idx; // ascending order reverses the cosine index
                let e = 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos();
                assert!((g - e).abs() < 1e-12, "n={n} idx={idx}: {g} vs {e}");
            }
        }
    }

    #[test]
    fn near_degenerate_cluster_stays_sorted() {
        let got = tridiagonal_eigenvalues(&[1.0, 1.0, 1.0], &[1e-8, 1e-8]).unwrap();
        assert!(got.windows(2).all(|w| w[0] <= w[1]));
        for g in &got {
            assert!((g - 1.0).abs() < 1e-7);
        }
    }

    #[test]
    fn counts_match_inertia_on_shifted_matrices() {
        let diag = [0.4, -1.2, 2.5, 0.3, -0.8];
        let off = [1.1, 0.6, 1.7, 0.9];
        let vals = tridiagonal_eigenvalues(&diag, &off).unwrap();
        for (i, shift) in [-3.0, -0.5, 0.0, 0.7, 2.0, 4.5].into_iter().enumerate() {
            let below = vals.iter().filter(|&&v| v < shift).count();
            let counted = count_below(&diag, &off, shift, f64::MIN_POSITIVE);
            assert_eq!(below, counted, "case {i}");
        }
    }
}
