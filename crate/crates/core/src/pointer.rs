//! The pointer algebra: diagonal observables in the σ³ product basis.
//!
//! A diagonal observable is a function `X(η)` on spin configurations. The
//! normalized trace of the chain becomes integration against the fair-coin
//! product measure, `tr(X) = 2^(−n) Σ_η X(η)`. At finite `n` the algebra
//! has minimal projections (single configurations); what survives is that
//! the attainable projection traces `k/2ⁿ` fill `[0, 1]` with spacing that
//! halves with every added site.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::dynamics::Dephasing;
use crate::error::{Error, Result};
use crate::model::{SpinChainModel, SpinConfiguration};
use crate::operator::{DensityMatrix, Observable};

/// `X(η)` for every configuration `η`, in basis-index order.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalObservable {
    values: Vec<Complex64>,
}

impl DiagonalObservable {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.len() < 2 || !values.len().is_power_of_two() {
            return Err(Error::BadShape {
                rows: values.len(),
                cols: 1,
            });
        }
        Ok(Self { values })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// The function `η ↦ f(η)` over all configurations of `model`.
    pub fn from_fn(model: &SpinChainModel, f: impl Fn(&SpinConfiguration) -> Complex64) -> Self {
        let n = model.n_sites();
        let values = (0..model.dim()).map(|i| f(&SpinConfiguration::from_index(n, i))).collect();
        Self { values }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn to_observable(&self) -> Observable {
        Observable::from_diagonal(&self.values)
    }

    /// Pointwise product; diagonal observables commute.
    pub fn product(&self, other: &DiagonalObservable) -> Result<DiagonalObservable> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(Self {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        })
    }
}

/// The conditional expectation `P` onto the diagonal algebra.
pub fn diagonal_projection(x: &Observable) -> DiagonalObservable {
    DiagonalObservable { values: x.diagonal() }
}

/// `P(X)` as a full matrix.
pub fn conditional_expectation(x: &Observable) -> Observable {
    diagonal_projection(x).to_observable()
}

/// Integral of `X(η)` against the fair product measure, `2^(−n) Σ_η X(η)`.
pub fn measure_trace(x: &DiagonalObservable) -> Complex64 {
    let sum: Complex64 = x.values.iter().sum();
    sum / x.dim() as f64
}

/// `tr(X)/2ⁿ`, the tracial state of the chain.
pub fn normalized_trace(x: &Observable) -> Complex64 {
    x.trace() / x.dim() as f64
}

/// A projection in the pointer algebra: the indicator of a set of
/// configurations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointerProjection {
    subset: Vec<usize>,
    dim: usize,
}

impl PointerProjection {
    pub fn new(mut subset: Vec<usize>, dim: usize) -> Result<Self> {
        subset.sort_unstable();
        subset.dedup();
        if let Some(&bad) = subset.iter().find(|&&i| i >= dim) {
            return Err(Error::IndexOutOfRange { index: bad, dim });
        }
        Ok(Self { subset, dim })
    }

    pub fn subset(&self) -> &[usize] {
        &self.subset
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.subset.len()
    }

    /// `|subset| / 2ⁿ`.
    pub fn normalized_trace(&self) -> f64 {
        self.subset.len() as f64 / self.dim as f64
    }

    pub fn indicator(&self) -> DiagonalObservable {
        let mut values = vec![Complex64::ZERO; self.dim];
        for &i in &self.subset {
            values[i] = Complex64::ONE;
        }
        DiagonalObservable { values }
    }

    pub fn to_observable(&self) -> Observable {
        self.indicator().to_observable()
    }
}

/// Projection onto the first `round(s·2ⁿ)` configurations (round half up),
/// so `|tr(e) − s| ≤ 2^(−n−1)`.
pub fn projection_with_trace(s: f64, model: &SpinChainModel) -> Result<PointerProjection> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::param("s", format!("must lie in [0, 1], got {s}")));
    }
    let dim = model.dim();
    let rank = ((s * dim as f64) + 0.5).floor() as usize;
    PointerProjection::new((0..rank.min(dim)).collect(), dim)
}

/// σᵏ at 1-based `site`, identity elsewhere.
pub fn site_observable(site: usize, axis: u8, model: &SpinChainModel) -> Result<Observable> {
    let n = model.n_sites();
    if site == 0 || site > n {
        return Err(Error::SiteOutOfRange { site, n_sites: n });
    }
    let dim = model.dim();
    let bit = 1usize << (n - site);
    let mut m = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let down = col & bit != 0;
        match axis {
            1 => m[(col ^ bit, col)] = Complex64::ONE,
            // σ² |↑⟩ = i|↓⟩, σ² |↓⟩ = −i|↑⟩
            2 => m[(col ^ bit, col)] = if down { -Complex64::I } else { Complex64::I },
            3 => m[(col, col)] = Complex64::new(if down { -1.0 } else { 1.0 }, 0.0),
            _ => return Err(Error::param("axis", format!("must be 1, 2 or 3, got {axis}"))),
        }
    }
    Observable::new(m)
}

/// `|⟨T_t(X)⟩_Λ − ⟨P(X)⟩_Λ|`.
pub fn limit_distance(dynamics: &Dephasing, rho: &DensityMatrix, x: &Observable, t: f64) -> Result<f64> {
    let evolved = rho.expectation(&dynamics.evolve(x, t)?)?;
    let limit = rho.expectation(&conditional_expectation(x))?;
    Ok((evolved - limit).norm())
}

/// `exp(−γt/4^(n−1)) Σ_{i≠j} |Λ_ji| |x_ij|`: every off-diagonal entry decays
/// at least as fast as the nearest-neighbour modes `|j − i| = 1`.
pub fn limit_envelope(dynamics: &Dephasing, rho: &DensityMatrix, x: &Observable, t: f64) -> f64 {
    let d = x.dim();
    let mut weight = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                weight += rho.get(j, i).norm() * x.get(i, j).norm();
            }
        }
    }
    let n = dynamics.model().n_sites() as i32;
    let slowest = dynamics.coefficients().gamma() / 4f64.powi(n - 1);
    (-slowest * t).exp() * weight
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitSample {
    pub t: f64,
    pub distance: f64,
    pub envelope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitTheoremReport {
    /// Smallest sampled time with distance at most `tol`.
    pub t_tol: f64,
    pub samples: Vec<LimitSample>,
}

/// Checks the long-time limit `⟨T_t(X)⟩_Λ → ⟨P(X)⟩_Λ` on the sampled
/// `times`, and the exponential envelope at every one of them.
pub fn verify_limit_theorem(
    rho: &DensityMatrix,
    x: &Observable,
    dynamics: &Dephasing,
    tol: f64,
    times: &[f64],
) -> Result<LimitTheoremReport> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::param("tol", format!("must be positive, got {tol}")));
    }
    if times.is_empty() {
        return Err(Error::param("times", "need at least one sample time"));
    }
    let mut samples = Vec::with_capacity(times.len());
    for &t in times {
        let distance = limit_distance(dynamics, rho, x, t)?;
        let envelope = limit_envelope(dynamics, rho, x, t);
        // rounding slack: the two sides agree exactly for a single mode
        if distance > envelope * (1.0 + 1e-10) + 1e-14 {
            return Err(Error::EnvelopeViolated { t, distance, bound: envelope });
        }
        samples.push(LimitSample { t, distance, envelope });
    }
    let t_tol = samples
        .iter()
        .filter(|s| s.distance <= tol)
        .map(|s| s.t)
        .fold(f64::INFINITY, f64::min);
    if t_tol.is_infinite() {
        let last = samples
            .iter()
            .max_by(|a, b| a.t.total_cmp(&b.t))
            .expect("nonempty");
        return Err(Error::HorizonExceeded {
            horizon: last.t,
            distance: last.distance,
        });
    }
    Ok(LimitTheoremReport { t_tol, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{CoefficientSource, GeneratorCoefficients};
    use crate::sampling::{random_observable, seeded_rng};

    fn model(n: usize) -> SpinChainModel {
        SpinChainModel::new(n, 1.0, 1.0).unwrap()
    }

    fn dynamics(n: usize, gamma: f64, b: f64) -> Dephasing {
        Dephasing::new(model(n), GeneratorCoefficients::new(gamma, b, CoefficientSource::ClosedForm).unwrap())
    }

    #[test]
    fn projection_examples() {
        let diag = Observable::from_real_diagonal(&[1.0, 2.0, -1.0, 0.5]);
        assert_eq!(conditional_expectation(&diag), diag);
        for site in 1..=3 {
            let sx = site_observable(site, 1, &model(3)).unwrap();
            assert!(diagonal_projection(&sx).values().iter().all(|v| *v == Complex64::ZERO));
        }
        let mut rng = seeded_rng(1);
        for _ in 0..100 {
            let x = random_observable(&mut rng, 16);
            assert!((x.trace() - conditional_expectation(&x).trace()).norm() < 1e-13);
        }
    }

    #[test]
    fn projection_is_a_conditional_expectation() {
        let mut rng = seeded_rng(2);
        for _ in 0..20 {
            let x = random_observable(&mut rng, 8);
            let d1 = conditional_expectation(&random_observable(&mut rng, 8));
            let d2 = conditional_expectation(&random_observable(&mut rng, 8));
            let lhs = conditional_expectation(
                &Observable::new(d1.matrix() * x.matrix() * d2.matrix()).unwrap(),
            );
            let rhs = d1.matrix() * conditional_expectation(&x).matrix() * d2.matrix();
            assert!(lhs.max_abs_diff(&Observable::new(rhs).unwrap()) < 1e-13);
            // idempotent
            let px = conditional_expectation(&x);
            assert_eq!(conditional_expectation(&px), px);
        }
        let id = Observable::identity(8);
        assert_eq!(conditional_expectation(&id), id);
    }

    #[test]
    fn measure_trace_examples() {
        let m = model(4);
        let one = DiagonalObservable::from_fn(&m, |_| Complex64::ONE);
        assert_eq!(measure_trace(&one), Complex64::ONE);
        let s1 = DiagonalObservable::from_fn(&m, |c| Complex64::new(f64::from(c.spin(1)), 0.0));
        assert_eq!(measure_trace(&s1), Complex64::ZERO);
        let sz = site_observable(1, 3, &m).unwrap();
        assert_eq!(diagonal_projection(&sz), s1);
    }

    #[test]
    fn measure_trace_matches_matrix_trace() {
        let mut rng = seeded_rng(3);
        for _ in 0..100 {
            let x = diagonal_projection(&random_observable(&mut rng, 32));
            let direct = normalized_trace(&x.to_observable());
            assert!((measure_trace(&x) - direct).norm() < 1e-15);
        }
    }

    #[test]
    fn diagonal_products_commute() {
        let a = DiagonalObservable::from_real(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        let b = DiagonalObservable::from_real(&[-1.0, 0.5, 0.0, 2.0]).unwrap();
        assert_eq!(a.product(&b).unwrap(), b.product(&a).unwrap());
        assert!(DiagonalObservable::from_real(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn projection_with_trace_examples() {
        let m = model(3);
        let empty = projection_with_trace(0.0, &m).unwrap();
        assert_eq!(empty.rank(), 0);
        assert_eq!(empty.normalized_trace(), 0.0);
        let full = projection_with_trace(1.0, &m).unwrap();
        assert_eq!(full.to_observable(), Observable::identity(8));
        for n in 1..=12 {
            assert_eq!(projection_with_trace(0.5, &model(n)).unwrap().normalized_trace(), 0.5);
        }
        let third = projection_with_trace(1.0 / 3.0, &model(10)).unwrap();
        assert_eq!(third.rank(), 341);
        let err = (third.normalized_trace() - 1.0 / 3.0).abs();
        assert!((err - 3.26e-4).abs() < 1e-6);
        assert!(err <= 2f64.powi(-11));
        assert!(projection_with_trace(1.5, &m).is_err());
        assert!(projection_with_trace(-0.1, &m).is_err());
    }

    #[test]
    fn projections_are_idempotent_and_self_adjoint() {
        let e = projection_with_trace(0.4, &model(4)).unwrap().to_observable();
        let sq = Observable::new(e.matrix() * e.matrix()).unwrap();
        assert_eq!(sq, e);
        assert!(e.is_hermitian(0.0));
    }

    #[test]
    fn site_observable_structure() {
        let m = model(3);
        for site in 1..=3 {
            let z = site_observable(site, 3, &m).unwrap();
            let x = site_observable(site, 1, &m).unwrap();
            let y = site_observable(site, 2, &m).unwrap();
            assert!(z.is_diagonal());
            for i in 0..8 {
                let c = SpinConfiguration::from_index(3, i);
                assert_eq!(z.get(i, i).re, f64::from(c.spin(site)));
            }
            // σ¹ is the permutation flipping the site's bit
            for col in 0..8 {
                for row in 0..8 {
                    let expected = if row == col ^ (1 << (3 - site)) { 1.0 } else { 0.0 };
                    assert_eq!(x.get(row, col), Complex64::new(expected, 0.0));
                }
            }
            let anti = x.matrix() * z.matrix() + z.matrix() * x.matrix();
            assert!(anti.iter().all(|v| v.norm() < 1e-15));
            // σ¹σ² = iσ³
            let xy = x.matrix() * y.matrix();
            assert!((xy - z.matrix() * Complex64::I).iter().all(|v| v.norm() < 1e-15));
        }
        assert!(matches!(site_observable(4, 1, &m), Err(Error::SiteOutOfRange { .. })));
        assert!(site_observable(0, 1, &m).is_err());
        assert!(site_observable(1, 4, &m).is_err());
    }

    #[test]
    fn limit_theorem_diagonal_is_immediate() {
        let d = dynamics(3, 1.0, 0.3);
        let rho = crate::sampling::random_density_matrix(&mut seeded_rng(4), 8);
        let x = Observable::from_real_diagonal(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        let report = verify_limit_theorem(&rho, &x, &d, 1e-12, &[0.0, 1.0, 2.0]).unwrap();
        assert_eq!(report.t_tol, 0.0);
    }

    #[test]
    fn limit_theorem_single_site() {
        let d = dynamics(1, 1.0, 0.0);
        let plus = DensityMatrix::pure(&[Complex64::ONE, Complex64::ONE]).unwrap();
        let sx = site_observable(1, 1, d.model()).unwrap();
        let tol = 1e-3;
        let times: Vec<f64> = (0..=2000).map(|k| k as f64 * 0.005).collect();
        let report = verify_limit_theorem(&plus, &sx, &d, tol, &times).unwrap();
        for s in &report.samples {
            assert!((s.distance - (-s.t).exp()).abs() < 1e-14);
        }
        assert!((report.t_tol - (1.0 / tol).ln()).abs() <= 0.005);
        // nonincreasing for b = 0
        assert!(report.samples.windows(2).all(|w| w[1].distance <= w[0].distance));
    }

    #[test]
    fn limit_theorem_horizon() {
        let d = dynamics(2, 1.0, 0.0);
        let plus = DensityMatrix::pure(&[Complex64::ONE; 4]).unwrap();
        let sx = site_observable(2, 1, d.model()).unwrap();
        let err = verify_limit_theorem(&plus, &sx, &d, 1e-9, &[0.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::HorizonExceeded { horizon, .. } if horizon == 1.0));
    }
}
