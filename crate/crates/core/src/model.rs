//! The truncated spin chain and its collective coupling operator.
//!
//! The chain keeps `n` spin-½ sites. Basis states are products of σ³
//! eigenstates, indexed lexicographically with site 1 as the most
//! significant bit: bit value 0 is spin up (σ³ = +1), bit value 1 is spin
//! down (σ³ = −1). Indices are zero-based, so index `i` runs over
//! `0..2^n`. Differences of indices are what enter the dephasing law and
//! are the same in either base.
//!
//! The coupling operator is `Q = Σ_m σ³_m / 2^m`, diagonal in this basis.
//! With the ordering above its eigenvalues form an arithmetic progression,
//! `q_i − q_j = (j − i) / 2^(n−1)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::Observable;

/// Largest chain accepted by default: 2^12 = 4096 dense complex rows.
pub const DEFAULT_MAX_SITES: usize = 12;

/// Hard ceiling on the size limit itself, so `1 << n` stays meaningful.
const ABSOLUTE_MAX_SITES: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinChainModel {
    n_sites: usize,
    lambda: f64,
    beta: f64,
}

impl SpinChainModel {
    pub fn new(n_sites: usize, lambda: f64, beta: f64) -> Result<Self> {
        Self::with_max_sites(n_sites, lambda, beta, DEFAULT_MAX_SITES)
    }

    /// Like [`SpinChainModel::new`] with a custom matrix-size limit.
    pub fn with_max_sites(n_sites: usize, lambda: f64, beta: f64, max_sites: usize) -> Result<Self> {
        if n_sites == 0 {
            return Err(Error::param("n_sites", "must be at least 1"));
        }
        let max_sites = max_sites.min(ABSOLUTE_MAX_SITES);
        if n_sites > max_sites {
            return Err(Error::TooManySites { n_sites, max_sites });
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::param("lambda", format!("must be positive and finite, got {lambda}")));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::param("beta", format!("must be positive and finite, got {beta}")));
        }
        Ok(Self { n_sites, lambda, beta })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn temperature(&self) -> f64 {
        1.0 / self.beta
    }

    /// Dephasing rate `γ = π λ / β` (Boltzmann constant set to one).
    pub fn gamma(&self) -> f64 {
        PI * self.lambda / self.beta
    }

    /// Hilbert-space dimension `2^n`.
    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }

    /// Same chain at a different inverse temperature.
    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::with_max_sites(self.n_sites, self.lambda, beta, ABSOLUTE_MAX_SITES)
    }

    pub(crate) fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.dim() {
            return Err(Error::IndexOutOfRange { index, dim: self.dim() });
        }
        Ok(())
    }

    /// Eigenvalues of `Q` for every basis index, in index order.
    pub fn q_spectrum(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|i| q_eigenvalue(&SpinConfiguration::from_index(self.n_sites, i)))
            .collect()
    }
}

/// One point of the configuration space: an up/down assignment per site.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpinConfiguration {
    /// `bits[m - 1]` is the state of site `m`; `false` is up, `true` is down.
    bits: Vec<bool>,
}

impl SpinConfiguration {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::param("bits", "a configuration needs at least one site"));
        }
        if bits.len() > ABSOLUTE_MAX_SITES {
            return Err(Error::TooManySites {
                n_sites: bits.len(),
                max_sites: ABSOLUTE_MAX_SITES,
            });
        }
        Ok(Self { bits })
    }

    /// Configuration for zero-based basis index `index` of an `n_sites` chain.
    ///
    /// Panics if `index >= 2^n_sites`.
    pub fn from_index(n_sites: usize, index: usize) -> Self {
        assert!(index < (1 << n_sites), "index {index} out of range for {n_sites} sites");
        let bits = (1..=n_sites).map(|m| (index >> (n_sites - m)) & 1 == 1).collect();
        Self { bits }
    }

    pub fn n_sites(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn index(&self) -> usize {
        self.bits.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b))
    }

    /// σ³ eigenvalue (+1 or −1) at 1-based site `m`.
    pub fn spin(&self, site: usize) -> i8 {
        if self.bits[site - 1] {
            -1
        } else {
            1
        }
    }
}

/// Eigenvalue of `Q` on a basis configuration: `Σ_m s_m / 2^m`.
///
/// Every partial sum is a dyadic rational with at most `n` bits, so the
/// result is exact in `f64` for any chain below 53 sites.
pub fn q_eigenvalue(config: &SpinConfiguration) -> f64 {
    config
        .bits
        .iter()
        .enumerate()
        .map(|(k, &down)| {
            let s = if down { -1.0 } else { 1.0 };
            s * 0.5f64.powi(k as i32 + 1)
        })
        .sum()
}

/// `q_i − q_j` for zero-based basis indices `i`, `j`.
pub fn eigenvalue_gap(model: &SpinChainModel, i: usize, j: usize) -> Result<f64> {
    model.check_index(i)?;
    model.check_index(j)?;
    let n = model.n_sites();
    let qi = q_eigenvalue(&SpinConfiguration::from_index(n, i));
    let qj = q_eigenvalue(&SpinConfiguration::from_index(n, j));
    Ok(qi - qj)
}

/// The coupling operator `Q` as a dense diagonal observable, subject to the
/// default matrix-size limit.
pub fn build_q_matrix(model: &SpinChainModel) -> Result<Observable> {
    build_q_matrix_with_limit(model, DEFAULT_MAX_SITES)
}

pub fn build_q_matrix_with_limit(model: &SpinChainModel, max_sites: usize) -> Result<Observable> {
    if model.n_sites() > max_sites {
        return Err(Error::TooManySites {
            n_sites: model.n_sites(),
            max_sites,
        });
    }
    Ok(Observable::from_real_diagonal(&model.q_spectrum()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(bits: &[u8]) -> SpinConfiguration {
        SpinConfiguration::new(bits.iter().map(|&b| b == 1).collect()).unwrap()
    }

    #[test]
    fn q_eigenvalue_examples() {
        assert_eq!(q_eigenvalue(&config(&[0, 0])), 0.75);
        assert_eq!(q_eigenvalue(&config(&[1])), -0.5);
        assert_eq!(q_eigenvalue(&config(&[0, 1, 0])), 0.375);
    }

    #[test]
    fn q_eigenvalue_matches_brute_force_sum() {
        // independent: sum of ±1/2^m computed with integer numerators over 2^n
        for n in 1..=8usize {
            for idx in 0..(1usize << n) {
                let c = SpinConfiguration::from_index(n, idx);
                let numerator: i64 = (1..=n)
                    .map(|m| i64::from(c.spin(m)) * (1i64 << (n - m)))
                    .sum();
                let expected = numerator as f64 / (1u64 << n) as f64;
                assert_eq!(q_eigenvalue(&c), expected);
            }
        }
    }

    #[test]
    fn index_bijection() {
        for n in 1..=10usize {
            for idx in 0..(1usize << n) {
                let c = SpinConfiguration::from_index(n, idx);
                assert_eq!(c.n_sites(), n);
                assert_eq!(c.index(), idx);
            }
        }
    }

    #[test]
    fn gap_law_is_exact() {
        for n in 1..=6usize {
            let model = SpinChainModel::new(n, 1.0, 1.0).unwrap();
            let scale = 2f64.powi(n as i32 - 1);
            for i in 0..model.dim() {
                for j in 0..model.dim() {
                    let gap = eigenvalue_gap(&model, i, j).unwrap();
                    assert_eq!(gap, (j as f64 - i as f64) / scale, "n={n} ({i},{j})");
                    assert_eq!(gap * gap, (j as f64 - i as f64).powi(2) / 4f64.powi(n as i32 - 1));
                }
            }
        }
    }

    #[test]
    fn gap_examples() {
        let m1 = SpinChainModel::new(1, 1.0, 1.0).unwrap();
        assert_eq!(eigenvalue_gap(&m1, 0, 1).unwrap(), 1.0);
        let m4 = SpinChainModel::new(4, 1.0, 1.0).unwrap();
        for i in 0..16 {
            assert_eq!(eigenvalue_gap(&m4, i, i).unwrap(), 0.0);
        }
        assert!(matches!(
            eigenvalue_gap(&m4, 0, 16),
            Err(Error::IndexOutOfRange { index: 16, dim: 16 })
        ));
    }

    #[test]
    fn q_matrix_small_cases() {
        let q1 = build_q_matrix(&SpinChainModel::new(1, 1.0, 1.0).unwrap()).unwrap();
        assert_eq!(q1.real_diagonal(), vec![0.5, -0.5]);
        let q2 = build_q_matrix(&SpinChainModel::new(2, 1.0, 1.0).unwrap()).unwrap();
        assert_eq!(q2.real_diagonal(), vec![0.75, 0.25, -0.25, -0.75]);
        assert!(q2.is_diagonal());
    }

    #[test]
    fn q_norm_and_simple_spectrum() {
        for n in 1..=10usize {
            let model = SpinChainModel::new(n, 1.0, 1.0).unwrap();
            let spec = model.q_spectrum();
            let norm = spec.iter().fold(0.0f64, |m, q| m.max(q.abs()));
            assert_eq!(norm, 1.0 - 0.5f64.powi(n as i32));
            // strictly decreasing, hence all eigenvalues distinct
            assert!(spec.windows(2).all(|w| w[0] > w[1]));
        }
    }

    #[test]
    fn rejects_bad_models() {
        assert!(SpinChainModel::new(0, 1.0, 1.0).is_err());
        assert!(SpinChainModel::new(2, 0.0, 1.0).is_err());
        assert!(SpinChainModel::new(2, 1.0, -1.0).is_err());
        assert!(SpinChainModel::new(2, 1.0, f64::NAN).is_err());
        assert_eq!(
            SpinChainModel::new(13, 1.0, 1.0),
            Err(Error::TooManySites { n_sites: 13, max_sites: 12 })
        );
        let big = SpinChainModel::with_max_sites(13, 1.0, 1.0, 14).unwrap();
        assert!(matches!(build_q_matrix(&big), Err(Error::TooManySites { .. })));
        assert!(build_q_matrix_with_limit(&big, 13).is_ok());
    }

    #[test]
    fn gamma_tracks_temperature() {
        let m = SpinChainModel::new(3, 0.7, 2.0).unwrap();
        assert_eq!(m.gamma(), PI * 0.7 / 2.0);
        assert_eq!(m.with_beta(1.0).unwrap().gamma(), 2.0 * m.gamma());
    }
}
