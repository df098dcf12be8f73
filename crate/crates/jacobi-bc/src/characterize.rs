//! Decides whether a candidate vector of boundary data is the response of
//! some admissible coefficient window.
//!
//! The criteria are sharp, not heuristic:
//!
//! * a vector of odd length `2T - 1` with positive leading entry is a
//!   response vector exactly when the connecting matrix it generates is
//!   positive definite ([`characterize_jacobi`]);
//! * it is the response of a window with all off-diagonal coefficients
//!   equal to one exactly when, additionally, `r_0 = 1` and every leading
//!   horizon satisfies `det C^l = 1` ([`characterize_schrodinger`]).
//!
//! Both checks are constructive. On acceptance the window is actually
//! rebuilt and re-simulated, and the certificate compares the reproduced
//! response against the candidate; this mirrors the sufficiency argument
//! behind the criteria and catches borderline numerics that a bare
//! pivot sign test would let through. The `_exact` variants replace every
//! tolerance with equality in rational arithmetic.

use num::{BigRational, One, Signed};

use crate::error::{Error, Result};
use crate::exact::{
    rational_to_f64, recover_factorization_exact, response_rational, rotated_connecting_rational,
};
use crate::inverse::{recover_factorization, RecoveryResult};
use crate::matrix::Ldlt;
use crate::operators::{response_vector, rotated_connecting_from_response, ResponseVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Accepted,
    Rejected,
}

/// First condition that failed, with a numeric witness.
#[derive(Debug, Clone, PartialEq)]
pub enum FailingCondition {
    /// `r_0` must be positive (it plays the leading off-diagonal
    /// coefficient); for the Schrödinger class it must equal one.
    InvalidLeadingEntry { value: f64 },
    /// Leading `k × k` block of the connecting matrix is not positive
    /// definite; `pivot` is the offending elimination pivot.
    NotPositiveDefinite { k: usize, pivot: f64 },
    /// `det C^l` strayed from one by more than the scaled tolerance.
    DetNotOne { l: usize, det: f64, tolerance: f64 },
    /// Rebuilding a window and re-simulating failed to reproduce entry `t`.
    RoundtripMismatch { t: usize, deviation: f64 },
}

/// Verdict plus the witnesses that justify it.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacterizationReport {
    pub verdict: Verdict,
    pub failing_condition: Option<FailingCondition>,
    /// Smallest elimination pivot encountered (definiteness margin).
    pub smallest_pivot: Option<f64>,
    /// Largest `|det C^l - 1|` over the checked horizons (Schrödinger).
    pub max_det_deviation: Option<f64>,
    /// Largest relative response mismatch in the round-trip certificate.
    pub max_roundtrip_deviation: Option<f64>,
    /// Recovered window when the certificate ran.
    pub recovered: Option<RecoveryResult>,
}

impl CharacterizationReport {
    pub fn accepted(&self) -> bool {
        self.verdict == Verdict::Accepted
    }

    fn rejected(condition: FailingCondition) -> Self {
        Self {
            verdict: Verdict::Rejected,
            failing_condition: Some(condition),
            smallest_pivot: None,
            max_det_deviation: None,
            max_roundtrip_deviation: None,
            recovered: None,
        }
    }
}

/// Scale factor for the `det C^l = 1` tolerance: the allowance grows with
/// the horizon and the matrix magnitude, tracking determinant conditioning.
pub const DET_TOL_SCALE: f64 = 1e-8;

/// Tolerance on `r_0 = 1` for the Schrödinger class.
pub const LEADING_ENTRY_TOL: f64 = 1e-12;

/// Relative tolerance of the round-trip certificate.
pub const ROUNDTRIP_TOL: f64 = 1e-6;

fn candidate(r: &[f64]) -> Result<(ResponseVector, usize)> {
    if r.is_empty() || r.len().is_multiple_of(2) {
        return Err(Error::EvenResponseLength { len: r.len() });
    }
    let rv = ResponseVector::new(r.to_vec())?;
    let t = r.len().div_ceil(2);
    Ok((rv, t))
}

/// Round-trip certificate: rebuild, re-simulate, compare.
fn certify(r: &ResponseVector, rec: &RecoveryResult) -> Result<(usize, f64)> {
    let window = rec.coefficients()?;
    let again = response_vector(&window, r.len())?;
    let mut worst = (0usize, 0.0f64);
    for t in 0..r.len() {
        let dev = (again.entry(t) - r.entry(t)).abs() / (1.0 + r.entry(t).abs());
        if dev > worst.1 {
            worst = (t, dev);
        }
    }
    Ok(worst)
}

/// Full acceptance test for the general (Jacobi) class, certificate
/// included.
pub fn characterize_jacobi(r: &[f64]) -> Result<CharacterizationReport> {
    characterize_jacobi_certified(r, true)
}

/// Acceptance test with an optional round-trip certificate; disabling the
/// certificate only skips the rebuild-and-compare step, never the
/// definiteness test.
pub fn characterize_jacobi_certified(r: &[f64], certificate: bool) -> Result<CharacterizationReport> {
    characterize_jacobi_scaled(r, ROUNDTRIP_TOL, certificate)
}

/// Acceptance test with an adjustable round-trip tolerance for the
/// certificate step.
pub fn characterize_jacobi_scaled(
    r: &[f64],
    roundtrip_tol: f64,
    certificate: bool,
) -> Result<CharacterizationReport> {
    let (rv, t) = candidate(r)?;
    if !(rv.entry(0) > 0.0) {
        return Ok(CharacterizationReport::rejected(
            FailingCondition::InvalidLeadingEntry { value: rv.entry(0) },
        ));
    }
    let cbar = rotated_connecting_from_response(&rv, t)?;
    let chol = match Ldlt::factor(cbar.as_matrix()) {
        Ok(chol) => chol,
        Err(Error::NotPositiveDefinite { k, pivot }) => {
            let mut report =
                CharacterizationReport::rejected(FailingCondition::NotPositiveDefinite { k, pivot });
            report.smallest_pivot = Some(pivot);
            return Ok(report);
        }
        Err(other) => return Err(other),
    };
    let smallest = chol.pivots().iter().cloned().fold(f64::INFINITY, f64::min);
    let mut report = CharacterizationReport {
        verdict: Verdict::Accepted,
        failing_condition: None,
        smallest_pivot: Some(smallest),
        max_det_deviation: None,
        max_roundtrip_deviation: None,
        recovered: None,
    };
    if certificate {
        let rec = recover_factorization(&rv, t)?;
        let (worst_t, worst) = certify(&rv, &rec)?;
        report.max_roundtrip_deviation = Some(worst);
        report.recovered = Some(rec);
        if worst > roundtrip_tol {
            report.verdict = Verdict::Rejected;
            report.failing_condition = Some(FailingCondition::RoundtripMismatch {
                t: worst_t,
                deviation: worst,
            });
        }
    }
    Ok(report)
}

/// Full acceptance test for the Schrödinger class (all off-diagonal
/// coefficients equal to one), certificate included.
pub fn characterize_schrodinger(r: &[f64], t: usize) -> Result<CharacterizationReport> {
    characterize_schrodinger_scaled(r, t, DET_TOL_SCALE, true)
}

/// Schrödinger acceptance with an adjustable determinant tolerance scale
/// (the per-horizon allowance is `scale · l · ‖C^l‖_max`).
pub fn characterize_schrodinger_scaled(
    r: &[f64],
    t: usize,
    det_tol_scale: f64,
    certificate: bool,
) -> Result<CharacterizationReport> {
    assert!(t >= 1, "empty horizon");
    let rv = ResponseVector::new(r.to_vec())?;
    if rv.len() < 2 * t - 1 {
        return Err(Error::ResponseTooShort {
            len: rv.len(),
            needed: 2 * t - 1,
        });
    }
    if (rv.entry(0) - 1.0).abs() > LEADING_ENTRY_TOL {
        return Ok(CharacterizationReport::rejected(
            FailingCondition::InvalidLeadingEntry { value: rv.entry(0) },
        ));
    }
    let cbar = rotated_connecting_from_response(&rv, t)?;
    let chol = match Ldlt::factor(cbar.as_matrix()) {
        Ok(chol) => chol,
        Err(Error::NotPositiveDefinite { k, pivot }) => {
            let mut report =
                CharacterizationReport::rejected(FailingCondition::NotPositiveDefinite { k, pivot });
            report.smallest_pivot = Some(pivot);
            return Ok(report);
        }
        Err(other) => return Err(other),
    };
    let smallest = chol.pivots().iter().cloned().fold(f64::INFINITY, f64::min);
    // Index reversal preserves determinants and leading-block norms swap
    // into trailing blocks of the reversed matrix, so everything needed
    // about C^l is read off the one factorization.
    let dets = chol.leading_determinants();
    let mut max_dev = 0.0f64;
    for l in 1..=t {
        let norm = cbar.as_matrix().leading(l).max_abs();
        let tolerance = det_tol_scale * l as f64 * norm.max(1.0);
        let dev = (dets[l - 1] - 1.0).abs();
        max_dev = max_dev.max(dev);
        if dev > tolerance {
            let mut report = CharacterizationReport::rejected(FailingCondition::DetNotOne {
                l,
                det: dets[l - 1],
                tolerance,
            });
            report.smallest_pivot = Some(smallest);
            report.max_det_deviation = Some(max_dev);
            return Ok(report);
        }
    }
    let mut report = CharacterizationReport {
        verdict: Verdict::Accepted,
        failing_condition: None,
        smallest_pivot: Some(smallest),
        max_det_deviation: Some(max_dev),
        max_roundtrip_deviation: None,
        recovered: None,
    };
    if certificate {
        // The class fixes a ≡ 1; the certificate re-simulates under that
        // constraint with the recovered diagonal.
        let mut rec = recover_factorization(&rv, t)?;
        rec.a = vec![1.0; t];
        let (worst_t, worst) = certify(&rv, &rec)?;
        report.max_roundtrip_deviation = Some(worst);
        report.recovered = Some(rec);
        if worst > ROUNDTRIP_TOL {
            report.verdict = Verdict::Rejected;
            report.failing_condition = Some(FailingCondition::RoundtripMismatch {
                t: worst_t,
                deviation: worst,
            });
        }
    }
    Ok(report)
}

/// Exact-arithmetic variant of [`characterize_jacobi`]: definiteness by
/// exact leading minors, certificate by exact re-simulation whenever every
/// recovered square root is rational.
pub fn characterize_jacobi_exact(r: &[BigRational]) -> Result<CharacterizationReport> {
    if r.is_empty() || r.len().is_multiple_of(2) {
        return Err(Error::EvenResponseLength { len: r.len() });
    }
    let t = r.len().div_ceil(2);
    if !r[0].is_positive() {
        return Ok(CharacterizationReport::rejected(
            FailingCondition::InvalidLeadingEntry {
                value: rational_to_f64(&r[0]),
            },
        ));
    }
    let minors = rotated_connecting_rational(r, t)?.leading_minors();
    let mut smallest = f64::INFINITY;
    for (idx, m) in minors.iter().enumerate() {
        let prev = if idx == 0 {
            BigRational::one()
        } else {
            minors[idx - 1].clone()
        };
        if !m.is_positive() {
            let pivot = rational_to_f64(&(m / &prev));
            let mut report = CharacterizationReport::rejected(
                FailingCondition::NotPositiveDefinite { k: idx + 1, pivot },
            );
            report.smallest_pivot = Some(pivot);
            return Ok(report);
        }
        smallest = smallest.min(rational_to_f64(&(m / &prev)));
    }
    let rec = recover_factorization_exact(r, t)?;
    let all_exact = rec.sqrt_exact.iter().all(|&x| x);
    let mut b = rec.b.clone();
    b.push(BigRational::from_integer(0.into()));
    let again = response_rational(&rec.a, &b, r.len())?;
    let mut worst = (0usize, 0.0f64);
    for (idx, (x, y)) in again.iter().zip(r).enumerate() {
        let dev = rational_to_f64(&(x - y).abs()) / (1.0 + rational_to_f64(y).abs());
        if dev > worst.1 {
            worst = (idx, dev);
        }
    }
    let float_rec = RecoveryResult {
        a: rec.a_f64(),
        b: rec.b_f64(),
        steps: Vec::new(),
    };
    let tolerance = if all_exact { 0.0 } else { ROUNDTRIP_TOL };
    let mut report = CharacterizationReport {
        verdict: Verdict::Accepted,
        failing_condition: None,
        smallest_pivot: Some(smallest),
        max_det_deviation: None,
        max_roundtrip_deviation: Some(worst.1),
        recovered: Some(float_rec),
    };
    if worst.1 > tolerance {
        report.verdict = Verdict::Rejected;
        report.failing_condition = Some(FailingCondition::RoundtripMismatch {
            t: worst.0,
            deviation: worst.1,
        });
    }
    Ok(report)
}

/// Exact-arithmetic variant of [`characterize_schrodinger`]: `r_0` and all
/// determinants must equal one exactly, and the rebuilt window must
/// reproduce the candidate exactly.
pub fn characterize_schrodinger_exact(
    r: &[BigRational],
    t: usize,
) -> Result<CharacterizationReport> {
    assert!(t >= 1, "empty horizon");
    if r.len() < 2 * t - 1 {
        return Err(Error::ResponseTooShort {
            len: r.len(),
            needed: 2 * t - 1,
        });
    }
    if !r[0].is_one() {
        return Ok(CharacterizationReport::rejected(
            FailingCondition::InvalidLeadingEntry {
                value: rational_to_f64(&r[0]),
            },
        ));
    }
    let minors = rotated_connecting_rational(r, t)?.leading_minors();
    for l in 1..=t {
        let det = minors.get(l - 1).cloned().unwrap_or_default();
        if !det.is_one() {
            let mut report = CharacterizationReport::rejected(FailingCondition::DetNotOne {
                l,
                det: rational_to_f64(&det),
                tolerance: 0.0,
            });
            report.max_det_deviation = Some((rational_to_f64(&det) - 1.0).abs());
            return Ok(report);
        }
    }
    // All determinant ratios are one, so the off-diagonal recovery is
    // trivially exact; only the diagonal carries information.
    let rec = recover_factorization_exact(r, t)?;
    let one = BigRational::one();
    let a: Vec<BigRational> = vec![one; t];
    let mut b = rec.b.clone();
    b.push(BigRational::from_integer(0.into()));
    let again = response_rational(&a, &b, r.len())?;
    for (idx, (x, y)) in again.iter().zip(r).enumerate() {
        if x != y {
            let dev = rational_to_f64(&(x - y).abs());
            let mut report = CharacterizationReport::rejected(
                FailingCondition::RoundtripMismatch {
                    t: idx,
                    deviation: dev,
                },
            );
            report.max_roundtrip_deviation = Some(dev);
            return Ok(report);
        }
    }
    Ok(CharacterizationReport {
        verdict: Verdict::Accepted,
        failing_condition: None,
        smallest_pivot: None,
        max_det_deviation: Some(0.0),
        max_roundtrip_deviation: Some(0.0),
        recovered: Some(RecoveryResult {
            a: vec![1.0; t],
            b: rec.b_f64(),
            steps: Vec::new(),
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::JacobiCoefficients;
    use crate::exact::rationals_from_f64;
    use crate::operators::response_vector;

    #[test]
    fn trivial_candidate_is_accepted() {
        let report = characterize_jacobi(&[1.0, 0.0, 0.0]).unwrap();
        assert!(report.accepted());
        assert_eq!(report.smallest_pivot, Some(1.0));
        assert_eq!(report.max_roundtrip_deviation, Some(0.0));
    }

    #[test]
    fn forward_data_is_accepted_and_round_trips() {
        let report = characterize_jacobi(&[2.0, 6.0, 18.0]).unwrap();
        assert!(report.accepted());
        let rec = report.recovered.unwrap();
        assert!((rec.a[0] - 2.0).abs() < 1e-10);
        assert!((rec.b[0] - 3.0).abs() < 1e-10);
        assert!(report.max_roundtrip_deviation.unwrap() < 1e-10);
    }

    #[test]
    fn hand_rejection_by_definiteness() {
        // C̄² = [[1, 2], [2, 1]] has determinant -3.
        let report = characterize_jacobi(&[1.0, 2.0, 0.0]).unwrap();
        assert!(!report.accepted());
        match report.failing_condition.unwrap() {
            FailingCondition::NotPositiveDefinite { k, pivot } => {
                assert_eq!(k, 2);
                assert!(pivot < 0.0);
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn non_positive_leading_entry_is_rejected() {
        let report = characterize_jacobi(&[-1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            report.failing_condition,
            Some(FailingCondition::InvalidLeadingEntry { value }) if value == -1.0
        ));
        let zero = characterize_jacobi(&[0.0, 0.0, 0.0]).unwrap();
        assert!(!zero.accepted());
    }

    #[test]
    fn malformed_candidates_are_errors_not_verdicts() {
        assert!(characterize_jacobi(&[1.0, 0.0]).is_err());
        assert!(characterize_jacobi(&[]).is_err());
        assert!(characterize_jacobi(&[1.0, f64::NAN, 0.0]).is_err());
    }

    #[test]
    fn schrodinger_accepts_free_data() {
        let report = characterize_schrodinger(&[1.0, 0.0, 0.0, 0.0, 0.0], 3).unwrap();
        assert!(report.accepted());
        let rec = report.recovered.unwrap();
        assert!(rec.b.iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn schrodinger_accepts_forward_data_and_recovers_the_diagonal() {
        let c = JacobiCoefficients::schrodinger(vec![1.0, -1.0, 0.0]).unwrap();
        let r = response_vector(&c, 5).unwrap();
        let report = characterize_schrodinger(r.as_slice(), 3).unwrap();
        assert!(report.accepted());
        let rec = report.recovered.unwrap();
        assert!((rec.b[0] - 1.0).abs() < 1e-8);
        assert!((rec.b[1] + 1.0).abs() < 1e-8);
    }

    #[test]
    fn schrodinger_rejects_general_jacobi_data() {
        let report = characterize_schrodinger(&[2.0, 6.0, 18.0], 2).unwrap();
        assert!(matches!(
            report.failing_condition,
            Some(FailingCondition::InvalidLeadingEntry { value }) if value == 2.0
        ));
    }

    #[test]
    fn even_entries_are_pinned_by_the_odd_ones() {
        // Perturbing any even-index entry of valid data must break some
        // det C^l = 1.
        let c = JacobiCoefficients::schrodinger(vec![0.7, -0.4, 1.1, 0.2]).unwrap();
        let r = response_vector(&c, 7).unwrap();
        assert!(characterize_schrodinger(r.as_slice(), 4).unwrap().accepted());
        for idx in [2usize, 4, 6] {
            let mut bent = r.as_slice().to_vec();
            bent[idx] += 1e-3;
            let report = characterize_schrodinger(&bent, 4).unwrap();
            assert!(!report.accepted(), "perturbation at {idx} slipped through");
            assert!(matches!(
                report.failing_condition,
                Some(FailingCondition::DetNotOne { .. })
            ));
        }
    }

    #[test]
    fn perturbing_the_zeroth_entry_fails_the_leading_check() {
        let c = JacobiCoefficients::schrodinger(vec![0.7, -0.4]).unwrap();
        let r = response_vector(&c, 3).unwrap();
        let mut bent = r.as_slice().to_vec();
        bent[0] += 1e-3;
        let report = characterize_schrodinger(&bent, 2).unwrap();
        assert!(matches!(
            report.failing_condition,
            Some(FailingCondition::InvalidLeadingEntry { .. })
        ));
    }

    #[test]
    fn exact_jacobi_certificate_is_equality() {
        let r = rationals_from_f64(&[2.0, 6.0, 18.0, 54.0, 178.0]).unwrap();
        let report = characterize_jacobi_exact(&r).unwrap();
        assert!(report.accepted());
        assert_eq!(report.max_roundtrip_deviation, Some(0.0));
        let rec = report.recovered.unwrap();
        assert_eq!(rec.a, vec![2.0, 1.0, 3.0]);
        assert_eq!(rec.b, vec![3.0, 0.0]);
    }

    #[test]
    fn exact_schrodinger_determinants_must_be_one() {
        let c = JacobiCoefficients::schrodinger(vec![0.5, -0.25, 1.5]).unwrap();
        let r = response_vector(&c, 5).unwrap();
        let exact = rationals_from_f64(r.as_slice()).unwrap();
        let report = characterize_schrodinger_exact(&exact, 3).unwrap();
        assert!(report.accepted());
        assert_eq!(report.max_det_deviation, Some(0.0));
        assert_eq!(report.recovered.unwrap().b, vec![0.5, -0.25]);

        let mut bent = exact.clone();
        bent[2] += BigRational::new(1.into(), 1000.into());
        let report = characterize_schrodinger_exact(&bent, 3).unwrap();
        assert!(matches!(
            report.failing_condition,
            Some(FailingCondition::DetNotOne { l: 2, .. })
        ));
    }
}
