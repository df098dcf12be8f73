//! The spectral side of the half-line dynamics, truncated to a finite
//! interval.
//!
//! Cutting the lattice at site `N + 1` with the mixed condition
//! `v_{N+1} + h v_N = 0` turns the coefficient window into an `N × N`
//! symmetric tridiagonal matrix; its eigenvalues `λ_k` together with the
//! normalizing weights `ρ_k` form the spectral data of the interval
//! problem. Packaged as an atomic measure (mass `a_0²/ρ_k` at `λ_k`, total
//! mass `a_0`), this data reproduces the time-domain response through
//! Chebyshev moments:
//!
//! ```text
//! r_{t-1} = ∫ T_t(λ) dμ(λ),        1 ≤ t ≤ 2N - 1,
//! ```
//!
//! independently of `h`, because the boundary cannot make itself felt at
//! site 1 before a wave has crossed the interval and come back. The edge
//! index `t = 2N` still holds for `h = 0`; for `h ≠ 0` the deformed last
//! diagonal entry `b_N - a_N h` is already visible there and the moment
//! deviates by exactly `-h a_N a_0 (a_1 ⋯ a_{N-1})²`. The same
//! moments assemble the connecting matrix, which links the spectral
//! picture to both inverse solvers and yields a clean test for whether an
//! arbitrary atomic measure is the spectral measure of a window with all
//! off-diagonal coefficients equal to one ([`validate_schrodinger_measure`]).

use crate::characterize::{
    CharacterizationReport, FailingCondition, Verdict, DET_TOL_SCALE, ROUNDTRIP_TOL,
};
use crate::coeffs::{ControlVector, JacobiCoefficients};
use crate::eigen::tridiagonal_eigenvalues;
use crate::error::{Error, Result};
use crate::forward::Wavefield;
use crate::inverse::recover_factorization;
use crate::matrix::{Ldlt, SquareMatrix};
use crate::operators::{response_vector, ConnectingMatrix, ResponseVector};

/// `T_t(λ)` from `T_0 = 0`, `T_1 = 1`, `T_{t+1} = λ T_t - T_{t-1}`.
///
/// In classical notation this is the second-kind Chebyshev polynomial
/// `U_{t-1}(λ/2)`; everything here works with the recursion directly, so
/// the argument is `λ` itself, not `λ/2`.
pub fn chebyshev_u(t: usize, lambda: f64) -> f64 {
    if t == 0 {
        return 0.0;
    }
    let (mut prev, mut cur) = (0.0, 1.0);
    for _ in 1..t {
        let next = lambda * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Solution `φ_0 … φ_{N+1}` of `a_n φ_{n+1} = (λ - b_n) φ_n - a_{n-1} φ_{n-1}`
/// with `φ_0 = 0`, `φ_1 = 1`. Requires a window of length `N + 1`.
pub fn phi_solution(coeffs: &JacobiCoefficients, lambda: f64, n: usize) -> Result<Vec<f64>> {
    if coeffs.window() < n + 1 {
        return Err(Error::WindowTooSmall {
            window: coeffs.window(),
            needed: n + 1,
        });
    }
    let mut phi = Vec::with_capacity(n + 2);
    phi.push(0.0);
    phi.push(1.0);
    for i in 1..=n {
        let next = ((lambda - coeffs.b(i)) * phi[i] - coeffs.a(i - 1) * phi[i - 1]) / coeffs.a(i);
        phi.push(next);
    }
    Ok(phi)
}

/// Interval truncation of the half-line system: sites `1 ..= N` evolve
/// freely, the ghost site `N + 1` is pinned to `-h` times its neighbor.
#[derive(Debug, Clone)]
pub struct BoundaryProblem {
    coeffs: JacobiCoefficients,
    n: usize,
    h: f64,
}

impl BoundaryProblem {
    /// Requires `N ≥ 1`, a finite `h` and a window of length `N + 1`
    /// (`a_N` couples the last interior site to the ghost).
    pub fn new(coeffs: JacobiCoefficients, n: usize, h: f64) -> Result<Self> {
        assert!(n >= 1, "empty interval");
        assert!(h.is_finite(), "boundary parameter must be finite");
        if coeffs.window() < n + 1 {
            return Err(Error::WindowTooSmall {
                window: coeffs.window(),
                needed: n + 1,
            });
        }
        Ok(Self { coeffs, n, h })
    }

    pub fn coeffs(&self) -> &JacobiCoefficients {
        &self.coeffs
    }

    pub fn interval(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// The boundary parameter only deforms the last diagonal entry of the
    /// interval matrix: diagonal `(b_1, …, b_{N-1}, b_N - a_N h)`.
    pub fn effective_diagonal(&self) -> Vec<f64> {
        let mut d: Vec<f64> = (1..=self.n).map(|i| self.coeffs.b(i)).collect();
        d[self.n - 1] -= self.coeffs.a(self.n) * self.h;
        d
    }

    /// Off-diagonal `(a_1, …, a_{N-1})` of the interval matrix.
    pub fn effective_off_diagonal(&self) -> Vec<f64> {
        (1..self.n).map(|i| self.coeffs.a(i)).collect()
    }
}

/// Eigenvalues of the interval problem with their normalizing weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    /// Strictly increasing eigenvalues `λ_1 < … < λ_N`.
    pub lambdas: Vec<f64>,
    /// `ρ_k = a_0 Σ_{i=1}^{N} φ_i(λ_k)²`, all positive.
    pub rhos: Vec<f64>,
    /// Leading off-diagonal coefficient, kept for normalizations.
    pub a0: f64,
}

/// Diagonalizes the interval problem. The eigenvalues come from bisection
/// on the effective tridiagonal matrix; the weights from the recursion
/// values, which are proportional to the eigenvector components.
pub fn spectral_data(problem: &BoundaryProblem) -> Result<SpectralData> {
    let lambdas = tridiagonal_eigenvalues(
        &problem.effective_diagonal(),
        &problem.effective_off_diagonal(),
    )?;
    let a0 = problem.coeffs().a(0);
    let mut rhos = Vec::with_capacity(lambdas.len());
    for &lam in &lambdas {
        let phi = phi_solution(problem.coeffs(), lam, problem.interval())?;
        let norm2: f64 = phi[1..=problem.interval()].iter().map(|v| v * v).sum();
        rhos.push(a0 * norm2);
    }
    Ok(SpectralData { lambdas, rhos, a0 })
}

/// Normalized eigenvector of the interval matrix for the eigenvalue
/// `lambda`: the recursion values `(φ_1, …, φ_N)` scaled to unit length.
pub fn eigenvector(problem: &BoundaryProblem, lambda: f64) -> Result<Vec<f64>> {
    let phi = phi_solution(problem.coeffs(), lambda, problem.interval())?;
    let mut v: Vec<f64> = phi[1..=problem.interval()].to_vec();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut v {
        *x /= norm;
    }
    Ok(v)
}

/// Finite atomic measure: distinct support points in ascending order, all
/// masses positive.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    atoms: Vec<(f64, f64)>,
}

impl DiscreteMeasure {
    pub fn new(mut atoms: Vec<(f64, f64)>) -> Result<Self> {
        for (idx, &(point, mass)) in atoms.iter().enumerate() {
            if !point.is_finite() || !mass.is_finite() {
                return Err(Error::NonFinite { index: idx });
            }
            if !(mass > 0.0) {
                return Err(Error::NonPositiveMass {
                    index: idx,
                    value: mass,
                });
            }
        }
        atoms.sort_by(|x, y| x.0.total_cmp(&y.0));
        for pair in atoms.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::DuplicateSupportPoint { value: pair[0].0 });
            }
        }
        Ok(Self { atoms })
    }

    /// `(support point, mass)` pairs, ascending in the support point.
    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|(_, m)| m).sum()
    }

    /// `∫ T_t dμ`.
    pub fn moment(&self, t: usize) -> f64 {
        self.atoms
            .iter()
            .map(|&(point, mass)| mass * chebyshev_u(t, point))
            .sum()
    }
}

/// Spectral measure of the interval problem: mass `a_0²/ρ_k` at `λ_k`.
///
/// The square in the numerator makes the Chebyshev moments reproduce the
/// response exactly; summing the masses telescopes to total mass `a_0`,
/// matching `r_0 = ∫ T_1 dμ`. For windows with `a_0 = 1` the measure is a
/// probability measure.
pub fn measure_from_spectral_data(sd: &SpectralData) -> Result<DiscreteMeasure> {
    DiscreteMeasure::new(
        sd.lambdas
            .iter()
            .zip(&sd.rhos)
            .map(|(&lam, &rho)| (lam, sd.a0 * sd.a0 / rho))
            .collect(),
    )
}

/// Response entries as measure moments: `r_{t-1} = ∫ T_t dμ` for
/// `t = 1 ..= K`. When the measure comes from an interval of length `N`
/// this agrees with the time-domain response for `t ≤ 2N - 1` at every
/// boundary parameter, and through `t = 2N` when `h = 0`.
pub fn response_from_measure(mu: &DiscreteMeasure, k: usize) -> Result<ResponseVector> {
    assert!(k >= 1, "requested an empty response");
    ResponseVector::new((1..=k).map(|t| mu.moment(t)).collect())
}

/// Connecting matrix from moments alone:
/// `C_{ij} = m_tot · ∫ T_{T-i+1} T_{T-j+1} dμ` (1-based `i, j`).
///
/// The total-mass prefactor mirrors the `r_0` prefactor of the
/// response-side construction; for probability measures it disappears.
pub fn connecting_from_measure(mu: &DiscreteMeasure, t: usize) -> ConnectingMatrix {
    assert!(t >= 1, "empty horizon");
    let m_tot = mu.total_mass();
    let mut m = SquareMatrix::zeros(t);
    for &(point, mass) in mu.atoms() {
        let tvals: Vec<f64> = (1..=t).map(|deg| chebyshev_u(deg, point)).collect();
        for i in 0..t {
            for j in 0..t {
                // T_{T-i+1} with 1-based i maps to tvals[t - 1 - i] 0-based.
                let add = m_tot * mass * tvals[t - 1 - i] * tvals[t - 1 - j];
                m.set(i, j, m.get(i, j) + add);
            }
        }
    }
    ConnectingMatrix::from_matrix(m)
}

/// Time-steps the interval system: sites `0 ..= N+1`, the last row being
/// the ghost `v_{N+1} = -h v_N`. Inside the light cone and before waves
/// return from the boundary the values coincide with the half-line system.
pub fn interval_forward(
    problem: &BoundaryProblem,
    f: &ControlVector,
    t_max: usize,
) -> Result<Wavefield> {
    let n = problem.interval();
    let c = problem.coeffs();
    let mut v = vec![vec![0.0; t_max + 1]; n + 2];
    for t in 0..=t_max {
        v[0][t] = f.value(t);
    }
    for t in 0..t_max {
        for site in 1..=n {
            let up = c.a(site) * v[site + 1][t];
            let down = c.a(site - 1) * v[site - 1][t];
            let stay = c.b(site) * v[site][t];
            let past = if t >= 1 { v[site][t - 1] } else { 0.0 };
            v[site][t + 1] = up + down + stay - past;
        }
        v[n + 1][t + 1] = -problem.h() * v[n][t + 1];
    }
    Ok(Wavefield::from_values(v, t_max))
}

/// State at time `t` through the eigenfunction expansion: entry `n` is
/// `Σ_k c_t^k φ_n(λ_k)` with `c_t^k = (a_0²/ρ_k) Σ_{l≤t} T_l(λ_k) f_{t-l}`,
/// for `n = 1 ..= N+1`; entry 0 is the boundary value `f_t` itself.
pub fn eigenexpansion_solution(
    problem: &BoundaryProblem,
    f: &ControlVector,
    t: usize,
) -> Result<Vec<f64>> {
    let sd = spectral_data(problem)?;
    let n = problem.interval();
    let mut out = vec![0.0; n + 2];
    out[0] = f.value(t);
    for (k, &lam) in sd.lambdas.iter().enumerate() {
        let mut driven = 0.0;
        for l in 0..=t {
            driven += chebyshev_u(l, lam) * f.value(t - l);
        }
        let c_kt = sd.a0 * sd.a0 / sd.rhos[k] * driven;
        let phi = phi_solution(problem.coeffs(), lam, n)?;
        for site in 1..=n + 1 {
            out[site] += c_kt * phi[site];
        }
    }
    Ok(out)
}

/// Decides whether an arbitrary atomic measure is the spectral measure of
/// a window with all off-diagonal coefficients equal to one, for every
/// horizon up to `t_max`.
///
/// The moment matrix `H_{ij} = m_tot ∫ T_i T_j dμ` has the index-reversed
/// connecting matrices of all horizons as its leading blocks, so one
/// factorization yields every definiteness pivot and every determinant.
/// On acceptance the diagonal is rebuilt from the moments and the
/// certificate re-simulates it.
pub fn validate_schrodinger_measure(
    mu: &DiscreteMeasure,
    t_max: usize,
) -> Result<CharacterizationReport> {
    validate_schrodinger_measure_scaled(mu, t_max, DET_TOL_SCALE)
}

/// [`validate_schrodinger_measure`] with an adjustable determinant
/// tolerance scale (the per-horizon allowance is `scale · l · ‖H_l‖_max`).
pub fn validate_schrodinger_measure_scaled(
    mu: &DiscreteMeasure,
    t_max: usize,
    det_tol_scale: f64,
) -> Result<CharacterizationReport> {
    assert!(t_max >= 1, "empty horizon");
    let m_tot = mu.total_mass();
    let mut h = SquareMatrix::zeros(t_max);
    for &(point, mass) in mu.atoms() {
        let tvals: Vec<f64> = (1..=t_max).map(|deg| chebyshev_u(deg, point)).collect();
        for i in 0..t_max {
            for j in 0..t_max {
                h.set(i, j, h.get(i, j) + m_tot * mass * tvals[i] * tvals[j]);
            }
        }
    }
    let chol = match Ldlt::factor(&h) {
        Ok(chol) => chol,
        Err(Error::NotPositiveDefinite { k, pivot }) => {
            let mut report = CharacterizationReport {
                verdict: Verdict::Rejected,
                failing_condition: Some(FailingCondition::NotPositiveDefinite { k, pivot }),
                smallest_pivot: Some(pivot),
                max_det_deviation: None,
                max_roundtrip_deviation: None,
                recovered: None,
            };
            report.smallest_pivot = Some(pivot);
            return Ok(report);
        }
        Err(other) => return Err(other),
    };
    let smallest = chol.pivots().iter().cloned().fold(f64::INFINITY, f64::min);
    let dets = chol.leading_determinants();
    let mut max_dev = 0.0f64;
    for l in 1..=t_max {
        let norm = h.leading(l).max_abs().max(1.0);
        let tolerance = det_tol_scale * l as f64 * norm;
        let dev = (dets[l - 1] - 1.0).abs();
        max_dev = max_dev.max(dev);
        if dev > tolerance {
            return Ok(CharacterizationReport {
                verdict: Verdict::Rejected,
                failing_condition: Some(FailingCondition::DetNotOne {
                    l,
                    det: dets[l - 1],
                    tolerance,
                }),
                smallest_pivot: Some(smallest),
                max_det_deviation: Some(max_dev),
                max_roundtrip_deviation: None,
                recovered: None,
            });
        }
    }
    let r = response_from_measure(mu, 2 * t_max - 1)?;
    let mut rec = recover_factorization(&r, t_max)?;
    rec.a = vec![1.0; t_max];
    let again = response_vector(&rec.coefficients()?, 2 * t_max - 1)?;
    let mut worst = (0usize, 0.0f64);
    for idx in 0..r.len() {
        let dev = (again.entry(idx) - r.entry(idx)).abs() / (1.0 + r.entry(idx).abs());
        if dev > worst.1 {
            worst = (idx, dev);
        }
    }
    let mut report = CharacterizationReport {
        verdict: Verdict::Accepted,
        failing_condition: None,
        smallest_pivot: Some(smallest),
        max_det_deviation: Some(max_dev),
        max_roundtrip_deviation: Some(worst.1),
        recovered: Some(rec),
    };
    if worst.1 > ROUNDTRIP_TOL {
        report.verdict = Verdict::Rejected;
        report.failing_condition = Some(FailingCondition::RoundtripMismatch {
            t: worst.0,
            deviation: worst.1,
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::step_forward;
    use crate::operators::{connecting_from_gram, control_matrix};

    fn sample() -> JacobiCoefficients {
        JacobiCoefficients::new(vec![2.0, 1.0, 3.0, 0.8], vec![3.0, 0.0, -1.0, 0.5]).unwrap()
    }

    fn wide() -> JacobiCoefficients {
        JacobiCoefficients::new(
            vec![0.9, 1.4, 0.6, 1.1, 1.3, 0.8, 1.05],
            vec![0.2, -1.5, 0.7, 1.0, -0.3, 0.4, -0.8],
        )
        .unwrap()
    }

    #[test]
    fn chebyshev_low_orders() {
        for lam in [-1.7, 0.0, 0.4, 2.0, 3.1] {
            assert_eq!(chebyshev_u(0, lam), 0.0);
            assert_eq!(chebyshev_u(1, lam), 1.0);
            assert_eq!(chebyshev_u(2, lam), lam);
            assert!((chebyshev_u(3, lam) - (lam * lam - 1.0)).abs() < 1e-14);
            assert!((chebyshev_u(4, lam) - (lam.powi(3) - 2.0 * lam)).abs() < 1e-13);
        }
    }

    #[test]
    fn chebyshev_cycles_at_zero() {
        let cycle = [0.0, 1.0, 0.0, -1.0];
        for t in 0..12 {
            assert_eq!(chebyshev_u(t, 0.0), cycle[t % 4]);
        }
    }

    #[test]
    fn chebyshev_degenerates_linearly_at_two() {
        for t in 0..10 {
            assert!((chebyshev_u(t, 2.0) - t as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn phi_reduces_to_chebyshev_for_free_coefficients() {
        let free = JacobiCoefficients::free(6);
        let phi = phi_solution(&free, 0.73, 5).unwrap();
        for (t, v) in phi.iter().enumerate() {
            assert!((v - chebyshev_u(t, 0.73)).abs() < 1e-13);
        }
    }

    #[test]
    fn phi_satisfies_the_three_term_identity() {
        let c = wide();
        let lam = -0.42;
        let phi = phi_solution(&c, lam, 5).unwrap();
        for n in 1..=5 {
            let res = c.a(n) * phi[n + 1] + c.a(n - 1) * phi[n - 1] + (c.b(n) - lam) * phi[n];
            assert!(res.abs() < 1e-12, "site {n}: {res}");
        }
    }

    #[test]
    fn one_site_spectral_data() {
        let free = JacobiCoefficients::free(2);
        let sd = spectral_data(&BoundaryProblem::new(free.clone(), 1, 0.0).unwrap()).unwrap();
        assert_eq!(sd.lambdas, vec![0.0]);
        assert_eq!(sd.rhos, vec![1.0]);
        let tilted = spectral_data(&BoundaryProblem::new(free, 1, 1.0).unwrap()).unwrap();
        assert_eq!(tilted.lambdas, vec![-1.0]);
    }

    #[test]
    fn free_eigenvalues_are_cosine_points() {
        let free = JacobiCoefficients::free(4);
        let sd = spectral_data(&BoundaryProblem::new(free, 3, 0.0).unwrap()).unwrap();
        let expect = [-(2.0_f64.sqrt()), 0.0, 2.0_f64.sqrt()];
        for (l, e) in sd.lambdas.iter().zip(expect) {
            assert!((l - e).abs() < 1e-12, "{l} vs {e}");
        }
    }

    #[test]
    fn eigenvalues_solve_the_boundary_equation() {
        let c = sample();
        for h in [-1.0, 0.0, 1.0] {
            let problem = BoundaryProblem::new(c.clone(), 3, h).unwrap();
            let sd = spectral_data(&problem).unwrap();
            for &lam in &sd.lambdas {
                let phi = phi_solution(&c, lam, 3).unwrap();
                let scale = phi.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
                let residual = (phi[4] + h * phi[3]).abs();
                assert!(residual <= 1e-8 * scale, "h={h} λ={lam}: {residual}");
            }
        }
    }

    #[test]
    fn weights_orthogonalize_the_recursion_values() {
        let c = wide();
        let n = 5;
        let problem = BoundaryProblem::new(c.clone(), n, 1.0).unwrap();
        let sd = spectral_data(&problem).unwrap();
        for k in 0..n {
            for l in 0..n {
                let pk = phi_solution(&c, sd.lambdas[k], n).unwrap();
                let pl = phi_solution(&c, sd.lambdas[l], n).unwrap();
                let dot: f64 = (1..=n).map(|i| pk[i] * pl[i]).sum();
                let expect = if k == l { sd.rhos[k] / sd.a0 } else { 0.0 };
                assert!(
                    (dot - expect).abs() <= 1e-9 * (sd.rhos[k] / sd.a0).abs(),
                    "k={k} l={l}: {dot} vs {expect}"
                );
            }
        }
    }

    #[test]
    fn eigenvectors_are_orthonormal_and_satisfy_the_matrix_equation() {
        let c = sample();
        let problem = BoundaryProblem::new(c, 3, -1.0).unwrap();
        let sd = spectral_data(&problem).unwrap();
        let diag = problem.effective_diagonal();
        let off = problem.effective_off_diagonal();
        let vecs: Vec<Vec<f64>> = sd
            .lambdas
            .iter()
            .map(|&lam| eigenvector(&problem, lam).unwrap())
            .collect();
        for (k, v) in vecs.iter().enumerate() {
            for i in 0..3 {
                let up = if i + 1 < 3 { off[i] * v[i + 1] } else { 0.0 };
                let down = if i >= 1 { off[i - 1] * v[i - 1] } else { 0.0 };
                let residual = (diag[i] * v[i] + up + down - sd.lambdas[k] * v[i]).abs();
                assert!(residual < 1e-9, "k={k} row {i}: {residual}");
            }
            for (l, w) in vecs.iter().enumerate() {
                let dot: f64 = v.iter().zip(w).map(|(x, y)| x * y).sum();
                let expect = if k == l { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn single_site_measure_is_a_unit_atom() {
        let free = JacobiCoefficients::free(2);
        let sd = spectral_data(&BoundaryProblem::new(free, 1, 0.0).unwrap()).unwrap();
        let mu = measure_from_spectral_data(&sd).unwrap();
        assert_eq!(mu.atoms(), &[(0.0, 1.0)]);
        let r = response_from_measure(&mu, 6).unwrap();
        assert_eq!(r.as_slice(), &[1.0, 0.0, -1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn total_mass_equals_the_leading_coefficient() {
        for h in [-1.0, 0.0, 1.0] {
            let sd = spectral_data(&BoundaryProblem::new(sample(), 3, h).unwrap()).unwrap();
            let mu = measure_from_spectral_data(&sd).unwrap();
            assert!(
                (mu.total_mass() - 2.0).abs() < 1e-12,
                "h={h}: {}",
                mu.total_mass()
            );
        }
    }

    #[test]
    fn moments_reproduce_the_response_independently_of_h() {
        let c = sample();
        let n = 3;
        let r = response_vector(&c, 2 * n).unwrap();
        for h in [-1.0, 0.0, 1.0] {
            let sd = spectral_data(&BoundaryProblem::new(c.clone(), n, h).unwrap()).unwrap();
            let mu = measure_from_spectral_data(&sd).unwrap();
            let top = if h == 0.0 { 2 * n } else { 2 * n - 1 };
            for t in 1..=top {
                let moment = mu.moment(t);
                assert!(
                    (moment - r.entry(t - 1)).abs() < 1e-10 * (1.0 + r.entry(t - 1).abs()),
                    "h={h} t={t}: {moment} vs {}",
                    r.entry(t - 1)
                );
            }
        }
    }

    #[test]
    fn edge_moment_deviation_has_the_predicted_closed_form() {
        // At t = 2N the moment sees the deformed entry b_N - a_N h, and the
        // deviation from the response is -h a_N a_0 (a_1 ⋯ a_{N-1})². For
        // the sample window and N = 3 that is -h · 0.8 · 2 · (1 · 3)².
        let c = sample();
        let n = 3;
        let r = response_vector(&c, 2 * n).unwrap();
        for h in [-1.0, 0.5, 1.0] {
            let sd = spectral_data(&BoundaryProblem::new(c.clone(), n, h).unwrap()).unwrap();
            let mu = measure_from_spectral_data(&sd).unwrap();
            let predicted = -h * 14.4;
            let got = mu.moment(2 * n) - r.entry(2 * n - 1);
            assert!(
                (got - predicted).abs() < 1e-10 * (1.0 + predicted.abs()),
                "h={h}: {got} vs {predicted}"
            );
        }
    }

    #[test]
    fn measure_connecting_matrix_matches_the_gram_construction() {
        let c = wide();
        for t in [2usize, 3, 4] {
            let gram = connecting_from_gram(&control_matrix(&c, t).unwrap());
            for n in [t, t + 1, t + 2] {
                for h in [-1.0, 0.0, 1.0] {
                    let sd =
                        spectral_data(&BoundaryProblem::new(c.clone(), n, h).unwrap()).unwrap();
                    let mu = measure_from_spectral_data(&sd).unwrap();
                    let via_mu = connecting_from_measure(&mu, t);
                    let scale = 1.0 + gram.as_matrix().max_abs();
                    for i in 0..t {
                        for j in 0..t {
                            let x = via_mu.as_matrix().get(i, j);
                            let y = gram.as_matrix().get(i, j);
                            assert!(
                                (x - y).abs() < 1e-10 * scale,
                                "t={t} N={n} h={h} ({i},{j}): {x} vs {y}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn single_atom_connecting_matrix_is_rank_one() {
        let mu = DiscreteMeasure::new(vec![(0.7, 1.3)]).unwrap();
        let c = connecting_from_measure(&mu, 3);
        // One atom of mass m: C = m² v vᵀ with v_i = T_{T-i+1}(point).
        let v = [chebyshev_u(3, 0.7), chebyshev_u(2, 0.7), chebyshev_u(1, 0.7)];
        for i in 0..3 {
            for j in 0..3 {
                let expect = 1.3 * 1.3 * v[i] * v[j];
                assert!((c.as_matrix().get(i, j) - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn interval_agrees_with_half_line_before_reflection() {
        let c = wide();
        let n = 4;
        let f = ControlVector::new(vec![1.0, -0.6, 0.3, 0.8]).unwrap();
        let problem = BoundaryProblem::new(c.clone(), n, -1.0).unwrap();
        let v = interval_forward(&problem, &f, n).unwrap();
        let u = step_forward(&c, &f, n).unwrap();
        for t in 0..=n {
            for site in 0..=t.min(n) {
                assert_eq!(v.value(site, t), u.value(site, t), "site {site} t {t}");
            }
        }
    }

    #[test]
    fn dirichlet_wall_reflects_with_a_sign_flip() {
        let free = JacobiCoefficients::free(3);
        let problem = BoundaryProblem::new(free, 2, 0.0).unwrap();
        let v = interval_forward(&problem, &ControlVector::delta(6), 6).unwrap();
        assert_eq!(v.value(1, 1), 1.0);
        assert_eq!(v.value(2, 2), 1.0);
        assert_eq!(v.value(1, 3), 0.0);
        assert_eq!(v.value(2, 4), -1.0); // bounced off the pinned site
        assert_eq!(v.value(1, 5), -1.0);
        for t in 0..=6 {
            assert_eq!(v.value(3, t), 0.0, "ghost must stay pinned");
        }
    }

    #[test]
    fn zero_control_stays_zero() {
        let problem = BoundaryProblem::new(sample(), 3, 1.0).unwrap();
        let v = interval_forward(&problem, &ControlVector::new(vec![0.0; 4]).unwrap(), 4).unwrap();
        for row in v.rows() {
            assert!(row.iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn ghost_row_obeys_the_boundary_condition() {
        let problem = BoundaryProblem::new(sample(), 3, 0.6).unwrap();
        let f = ControlVector::new(vec![0.5, -1.0, 0.7, 0.1, 0.9]).unwrap();
        let v = interval_forward(&problem, &f, 5).unwrap();
        for t in 0..=5 {
            assert!((v.value(4, t) + 0.6 * v.value(3, t)).abs() < 1e-12);
        }
    }

    #[test]
    fn eigenexpansion_matches_time_stepping() {
        let c = wide();
        let n = 4;
        let f = ControlVector::new(vec![0.9, -0.4, 1.6, 0.2, -0.7, 0.5]).unwrap();
        for h in [-1.0, 0.0, 0.6] {
            let problem = BoundaryProblem::new(c.clone(), n, h).unwrap();
            let v = interval_forward(&problem, &f, 2 * n).unwrap();
            for t in [0usize, 1, 3, 5, 2 * n] {
                let expansion = eigenexpansion_solution(&problem, &f, t).unwrap();
                for site in 0..=n + 1 {
                    assert!(
                        (expansion[site] - v.value(site, t)).abs() < 1e-10,
                        "h={h} t={t} site={site}: {} vs {}",
                        expansion[site],
                        v.value(site, t)
                    );
                }
            }
        }
    }

    #[test]
    fn scalar_interval_is_a_driven_chebyshev_recursion() {
        // N = 1: v_{1,t+1} = a_0 f_t + (b_1 - a_1 h) v_{1,t} - v_{1,t-1},
        // which the expansion must reproduce through a single eigenvalue.
        let c = JacobiCoefficients::new(vec![2.0, 1.0], vec![3.0, 0.0]).unwrap();
        let problem = BoundaryProblem::new(c, 1, 0.0).unwrap();
        let f = ControlVector::delta(6);
        let v = interval_forward(&problem, &f, 5).unwrap();
        let mut hand = [0.0; 6];
        for t in 0..5 {
            let drive = 2.0 * f.value(t);
            let prev = if t >= 1 { hand[t - 1] } else { 0.0 };
            hand[t + 1] = drive + 3.0 * hand[t] - prev;
        }
        for t in 0..=5 {
            assert!((v.value(1, t) - hand[t]).abs() < 1e-12);
            let expansion = eigenexpansion_solution(&problem, &f, t).unwrap();
            assert!((expansion[1] - hand[t]).abs() < 1e-10);
        }
    }

    #[test]
    fn measure_validation_accepts_schrodinger_spectra() {
        let c = JacobiCoefficients::schrodinger(vec![0.6, -0.9, 0.3, 1.2, 0.0]).unwrap();
        let problem = BoundaryProblem::new(c, 4, 0.0).unwrap();
        let mu = measure_from_spectral_data(&spectral_data(&problem).unwrap()).unwrap();
        let report = validate_schrodinger_measure(&mu, 3).unwrap();
        assert!(report.accepted(), "{:?}", report.failing_condition);
        let rec = report.recovered.unwrap();
        assert!((rec.b[0] - 0.6).abs() < 1e-8);
        assert!((rec.b[1] + 0.9).abs() < 1e-8);
    }

    #[test]
    fn measure_validation_catches_scaled_masses() {
        let free = JacobiCoefficients::free(5);
        let problem = BoundaryProblem::new(free, 4, 0.0).unwrap();
        let sd = spectral_data(&problem).unwrap();
        let mu = measure_from_spectral_data(&sd).unwrap();
        assert!(validate_schrodinger_measure(&mu, 3).unwrap().accepted());
        let doubled = DiscreteMeasure::new(
            mu.atoms().iter().map(|&(p, m)| (p, 2.0 * m)).collect(),
        )
        .unwrap();
        let report = validate_schrodinger_measure(&doubled, 3).unwrap();
        assert!(matches!(
            report.failing_condition,
            Some(FailingCondition::DetNotOne { l: 1, .. })
        ));
    }

    #[test]
    fn single_atom_passes_only_the_first_horizon() {
        let mu = DiscreteMeasure::new(vec![(0.0, 1.0)]).unwrap();
        assert!(validate_schrodinger_measure(&mu, 1).unwrap().accepted());
        let report = validate_schrodinger_measure(&mu, 2).unwrap();
        assert!(matches!(
            report.failing_condition,
            Some(FailingCondition::NotPositiveDefinite { k: 2, .. })
        ));
    }

    #[test]
    fn malformed_measures_are_rejected_eagerly() {
        assert!(matches!(
            DiscreteMeasure::new(vec![(0.0, -1.0)]),
            Err(Error::NonPositiveMass { index: 0, .. })
        ));
        assert!(matches!(
            DiscreteMeasure::new(vec![(1.0, 0.5), (1.0, 0.5)]),
            Err(Error::DuplicateSupportPoint { .. })
        ));
        assert!(DiscreteMeasure::new(vec![(f64::INFINITY, 1.0)]).is_err());
    }

    #[test]
    fn atoms_are_sorted_by_support_point() {
        let mu = DiscreteMeasure::new(vec![(2.0, 0.1), (-1.0, 0.2), (0.5, 0.3)]).unwrap();
        let points: Vec<f64> = mu.atoms().iter().map(|a| a.0).collect();
        assert_eq!(points, vec![-1.0, 0.5, 2.0]);
    }
}
