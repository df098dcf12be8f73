//! Rational-arithmetic twins of the response and determinant machinery.
//!
//! The determinants driving the factorization route are Hankel-like and
//! lose digits fast in floating point. Promoting the inputs to arbitrary
//! precision rationals makes every determinant, and hence every recovered
//! coefficient whose square root happens to be rational, exact. Floats
//! convert losslessly (every finite `f64` is a dyadic rational), so
//! "promote, compute, compare" is a genuine equality test, not an
//! approximation with a smaller epsilon.
//!
//! Integer determinants are computed by fraction-free elimination after
//! clearing denominators; the pivots it produces along the way are exactly
//! the leading principal minors, which is all the positive-definiteness
//! and determinant checks ever need.

use num::{BigInt, BigRational, Integer, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact promotion of a finite float.
pub fn rational_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or(Error::NotRational { value: x })
}

pub fn rationals_from_f64(xs: &[f64]) -> Result<Vec<BigRational>> {
    xs.iter().copied().map(rational_from_f64).collect()
}

/// Nearest float; exact rationals produced from floats convert back
/// losslessly.
pub fn rational_to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

fn validate_window(a: &[BigRational], b: &[BigRational], needed: usize) -> Result<()> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::LengthMismatch {
            a_len: a.len(),
            b_len: b.len(),
        });
    }
    for (k, v) in a.iter().enumerate() {
        if !v.is_positive() {
            return Err(Error::NonPositiveOffDiagonal {
                index: k,
                value: rational_to_f64(v),
            });
        }
    }
    if a.len() < needed {
        return Err(Error::WindowTooSmall {
            window: a.len(),
            needed,
        });
    }
    Ok(())
}

/// Exact response entries `r_0 … r_{k-1}` by stepping the recursion in
/// rational arithmetic. Same window requirement and padding behavior as the
/// float version.
pub fn response_rational(a: &[BigRational], b: &[BigRational], k: usize) -> Result<Vec<BigRational>> {
    assert!(k >= 1, "requested an empty response");
    validate_window(a, b, k.div_ceil(2))?;
    let one = BigRational::one;
    let zero = BigRational::zero;
    let pa: Vec<BigRational> = (0..k)
        .map(|i| if i < a.len() { a[i].clone() } else { one() })
        .collect();
    let pb: Vec<BigRational> = (0..k)
        .map(|i| if i < b.len() { b[i].clone() } else { zero() })
        .collect();
    // u[n][t] on the triangle n ≤ t ≤ k; boundary row is the delta control.
    let mut u = vec![vec![zero(); k + 1]; k + 2];
    u[0][0] = one();
    for t in 1..=k {
        for n in 1..=k.min(t + 1) {
            let up = if n + 1 < t {
                &pa[n] * &u[n + 1][t - 1]
            } else {
                zero()
            };
            let down = &pa[n - 1] * &u[n - 1][t - 1];
            let stay = &pb[n - 1] * &u[n][t - 1];
            let past = if t >= 2 { u[n][t - 2].clone() } else { zero() };
            u[n][t] = up + down + stay - past;
        }
    }
    Ok((0..k).map(|t| u[1][t + 1].clone()).collect())
}

/// Row-major square matrix over the rationals.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalMatrix {
    n: usize,
    data: Vec<BigRational>,
}

impl RationalMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![BigRational::zero(); n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigRational) {
        self.data[i * self.n + j] = v;
    }

    /// Common denominator and the integer matrix `D · self`.
    fn cleared(&self) -> (BigInt, Vec<BigInt>) {
        let mut d = BigInt::one();
        for v in &self.data {
            d = d.lcm(v.denom());
        }
        let ints = self
            .data
            .iter()
            .map(|v| v.numer() * (&d / v.denom()))
            .collect();
        (d, ints)
    }

    /// Leading principal minors of sizes `1..=n`, exactly.
    ///
    /// Fraction-free elimination stops at a zero pivot (the remaining
    /// minors are not produced); the returned list always contains the
    /// first zero so callers see where definiteness broke down.
    pub fn leading_minors(&self) -> Vec<BigRational> {
        let (d, ints) = self.cleared();
        let int_minors = bareiss_leading_minors(ints, self.n);
        let mut scale = BigInt::one();
        int_minors
            .into_iter()
            .map(|m| {
                scale *= &d;
                BigRational::new(m, scale.clone())
            })
            .collect()
    }

    /// Exact determinant (row swaps allowed, so zero pivots are handled).
    pub fn determinant(&self) -> BigRational {
        let (d, ints) = self.cleared();
        let num = bareiss_determinant(ints, self.n);
        let mut scale = BigInt::one();
        for _ in 0..self.n {
            scale *= &d;
        }
        BigRational::new(num, scale)
    }
}

/// Pivots of fraction-free elimination; pivot `k` equals the leading
/// principal minor of order `k + 1`. All divisions are exact.
fn bareiss_leading_minors(mut m: Vec<BigInt>, n: usize) -> Vec<BigInt> {
    let mut minors = Vec::with_capacity(n);
    let mut prev = BigInt::one();
    for k in 0..n {
        let pivot = m[k * n + k].clone();
        minors.push(pivot.clone());
        if pivot.is_zero() || k == n - 1 {
            break;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i * n + j] * &pivot - &m[i * n + k] * &m[k * n + j]) / &prev;
                m[i * n + j] = v;
            }
        }
        prev = pivot;
    }
    minors
}

fn bareiss_determinant(mut m: Vec<BigInt>, n: usize) -> BigInt {
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = 1;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k * n + k].is_zero() {
            match (k + 1..n).find(|&i| !m[i * n + k].is_zero()) {
                Some(swap) => {
                    for j in 0..n {
                        m.swap(k * n + j, swap * n + j);
                    }
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        let pivot = m[k * n + k].clone();
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i * n + j] * &pivot - &m[i * n + k] * &m[k * n + j]) / &prev;
                m[i * n + j] = v;
            }
        }
        prev = pivot;
    }
    let last = m[(n - 1) * n + (n - 1)].clone();
    if sign < 0 {
        -last
    } else {
        last
    }
}

/// Index-reversed connecting matrix with exact entries,
/// `c̄_{ij} = r_0 Σ_{k<min(i,j)} r_{|i-j|+2k}`.
pub fn rotated_connecting_rational(r: &[BigRational], t: usize) -> Result<RationalMatrix> {
    assert!(t >= 1, "empty horizon");
    if r.len() < 2 * t - 1 {
        return Err(Error::ResponseTooShort {
            len: r.len(),
            needed: 2 * t - 1,
        });
    }
    let mut m = RationalMatrix::zeros(t);
    for i in 1..=t {
        for j in i..=t {
            let mut s = BigRational::zero();
            for k in 0..i {
                s += &r[j - i + 2 * k];
            }
            s *= &r[0];
            m.set(i - 1, j - 1, s.clone());
            m.set(j - 1, i - 1, s);
        }
    }
    Ok(m)
}

/// `√x` when the reduced numerator and denominator are both perfect
/// squares.
pub fn exact_sqrt(x: &BigRational) -> Option<BigRational> {
    if x.is_negative() {
        return None;
    }
    let sn = x.numer().sqrt();
    let sd = x.denom().sqrt();
    if &(&sn * &sn) == x.numer() && &(&sd * &sd) == x.denom() {
        Some(BigRational::new(sn, sd))
    } else {
        None
    }
}

/// Outcome of the exact factorization route.
#[derive(Debug, Clone)]
pub struct ExactRecovery {
    /// `a_0 … a_{T-1}`; entry `k` is exact iff `sqrt_exact[k]`.
    pub a: Vec<BigRational>,
    /// `b_1 … b_{T-1}`, always exact (no square roots involved).
    pub b: Vec<BigRational>,
    /// Whether the `k`-th square root came out rational; `false` means the
    /// float fallback value was stored instead.
    pub sqrt_exact: Vec<bool>,
    /// `det C̄^k` for `k = 1..T`.
    pub dets: Vec<BigRational>,
    /// `det C̄^k_{k+1}` for `k = 1..T-1` (last column of the order-`k`
    /// block replaced by the adjacent column of the order-`k+1` block).
    pub sub_dets: Vec<BigRational>,
}

impl ExactRecovery {
    pub fn a_f64(&self) -> Vec<f64> {
        self.a.iter().map(rational_to_f64).collect()
    }

    pub fn b_f64(&self) -> Vec<f64> {
        self.b.iter().map(rational_to_f64).collect()
    }
}

/// Determinant-ratio recovery in exact arithmetic. Positive definiteness is
/// certified on the way (all leading minors must be positive); a square
/// root that is not rational falls back to the float value and is flagged.
pub fn recover_factorization_exact(r: &[BigRational], t: usize) -> Result<ExactRecovery> {
    assert!(t >= 1, "empty horizon");
    if !r[0].is_positive() {
        return Err(Error::NonPositiveLeadingEntry {
            value: rational_to_f64(&r[0]),
        });
    }
    let cbar = rotated_connecting_rational(r, t)?;
    let minors = cbar.leading_minors();
    for (idx, m) in minors.iter().enumerate() {
        if !m.is_positive() {
            return Err(Error::NotPositiveDefinite {
                k: idx + 1,
                pivot: rational_to_f64(m),
            });
        }
    }
    let det = |k: isize| -> BigRational {
        if k <= 0 {
            BigRational::one()
        } else {
            minors[(k - 1) as usize].clone()
        }
    };
    let mut a = Vec::with_capacity(t);
    let mut sqrt_exact = Vec::with_capacity(t);
    for k in 0..t as isize {
        let square = det(k + 1) * det(k - 1) / (det(k) * det(k));
        match exact_sqrt(&square) {
            Some(root) => {
                a.push(root);
                sqrt_exact.push(true);
            }
            None => {
                let approx = rational_to_f64(&square).sqrt();
                a.push(rational_from_f64(approx)?);
                sqrt_exact.push(false);
            }
        }
    }
    // Substituted-column determinants: full Bareiss per block, exactly.
    let mut sub_dets = Vec::with_capacity(t.saturating_sub(1));
    let mut b = Vec::with_capacity(t.saturating_sub(1));
    let mut prev_ratio = BigRational::zero();
    for k in 1..t {
        let mut block = RationalMatrix::zeros(k);
        for i in 0..k {
            for j in 0..k - 1 {
                block.set(i, j, cbar.get(i, j).clone());
            }
            block.set(i, k - 1, cbar.get(i, k).clone());
        }
        let sub = block.determinant();
        let ratio = &sub / &det(k as isize);
        b.push(&ratio - &prev_ratio);
        prev_ratio = ratio;
        sub_dets.push(sub);
    }
    Ok(ExactRecovery {
        a,
        b,
        sqrt_exact,
        dets: minors,
        sub_dets,
    })
}

/// `det C^l` for `l = 1..T`, exactly. Index reversal preserves
/// determinants, so these are read off one elimination of the reversed
/// matrix, whose leading blocks sweep every horizon. The list is cut short
/// at the first zero minor.
pub fn schrodinger_determinants_exact(r: &[BigRational], t: usize) -> Result<Vec<BigRational>> {
    Ok(rotated_connecting_rational(r, t)?.leading_minors())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(x: f64) -> BigRational {
        rational_from_f64(x).unwrap()
    }

    fn qs(xs: &[f64]) -> Vec<BigRational> {
        rationals_from_f64(xs).unwrap()
    }

    #[test]
    fn float_promotion_is_lossless() {
        for x in [0.5, 0.1, -3.7251, 1e-12, 178.0] {
            assert_eq!(rational_to_f64(&q(x)), x);
        }
        assert_eq!(q(0.5), BigRational::new(BigInt::from(1), BigInt::from(2)));
        assert!(rational_from_f64(f64::NAN).is_err());
    }

    #[test]
    fn exact_response_matches_hand_values() {
        let r = response_rational(&qs(&[2.0, 1.0, 3.0]), &qs(&[3.0, 0.0, -1.0]), 5).unwrap();
        let expect = [2.0, 6.0, 18.0, 54.0, 178.0];
        for (v, e) in r.iter().zip(expect) {
            assert_eq!(v, &q(e));
        }
    }

    #[test]
    fn exact_response_window_precondition() {
        let a = qs(&[2.0, 1.0, 3.0]);
        let b = qs(&[3.0, 0.0, -1.0]);
        assert!(response_rational(&a, &b, 6).is_ok());
        assert!(matches!(
            response_rational(&a, &b, 7),
            Err(Error::WindowTooSmall { needed: 4, .. })
        ));
    }

    #[test]
    fn minors_of_the_hand_matrix() {
        let r = qs(&[2.0, 6.0, 18.0, 54.0, 178.0]);
        let cbar = rotated_connecting_rational(&r, 3).unwrap();
        let minors = cbar.leading_minors();
        assert_eq!(minors, qs(&[4.0, 16.0, 576.0]));
    }

    #[test]
    fn determinant_handles_zero_pivot_blocks() {
        let mut m = RationalMatrix::zeros(2);
        m.set(0, 1, q(1.0));
        m.set(1, 0, q(1.0));
        assert_eq!(m.determinant(), q(-1.0));
        let singular = RationalMatrix::zeros(2);
        assert_eq!(singular.determinant(), BigRational::zero());
    }

    #[test]
    fn exact_recovery_of_integer_window() {
        let r = qs(&[2.0, 6.0, 18.0, 54.0, 178.0]);
        let rec = recover_factorization_exact(&r, 3).unwrap();
        assert_eq!(rec.a, qs(&[2.0, 1.0, 3.0]));
        assert_eq!(rec.b, qs(&[3.0, 0.0]));
        assert!(rec.sqrt_exact.iter().all(|&x| x));
        assert_eq!(rec.dets, qs(&[4.0, 16.0, 576.0]));
        assert_eq!(rec.sub_dets, qs(&[12.0, 48.0]));
    }

    #[test]
    fn exact_recovery_of_dyadic_window() {
        let a = qs(&[0.75, 1.5]);
        let b = qs(&[0.5, -0.25]);
        let r = response_rational(&a, &b, 3).unwrap();
        let rec = recover_factorization_exact(&r, 2).unwrap();
        assert_eq!(rec.a, a);
        assert_eq!(rec.b, vec![q(0.5)]);
        assert!(rec.sqrt_exact.iter().all(|&x| x));
    }

    #[test]
    fn irrational_square_root_falls_back_to_float() {
        // r = (1, 0, 2): det C̄¹ = 1, det C̄² = 3, so a_1 = √3.
        let r = qs(&[1.0, 0.0, 2.0]);
        let rec = recover_factorization_exact(&r, 2).unwrap();
        assert_eq!(rec.sqrt_exact, vec![true, false]);
        assert!((rec.a_f64()[1] - 3.0_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn schrodinger_determinants_are_one_exactly() {
        let a = qs(&[1.0, 1.0, 1.0]);
        let b = qs(&[1.0, -1.0, 0.5]);
        let r = response_rational(&a, &b, 5).unwrap();
        let dets = schrodinger_determinants_exact(&r, 3).unwrap();
        assert_eq!(dets, vec![BigRational::one(); 3]);
    }

    #[test]
    fn indefinite_exact_matrix_is_rejected() {
        let r = qs(&[1.0, 2.0, 0.0]);
        match recover_factorization_exact(&r, 2) {
            Err(Error::NotPositiveDefinite { k, pivot }) => {
                assert_eq!(k, 2);
                assert_eq!(pivot, -3.0);
            }
            other => panic!("unexpected: {other:?}"),
        }
    }
}
