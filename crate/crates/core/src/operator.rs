//! Dense operators on the `2^n`-dimensional chain space.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::SpinChainModel;

/// Entrywise tolerance for the density-matrix invariants.
pub const DENSITY_TOL: f64 = 1e-12;

/// An observable of the chain, written in the σ³ product basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    entries: DMatrix<Complex64>,
}

impl Observable {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        check_shape(&entries)?;
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { entries })
    }

    pub(crate) fn from_matrix_unchecked(entries: DMatrix<Complex64>) -> Self {
        Self { entries }
    }

    pub fn identity(dim: usize) -> Self {
        Self { entries: DMatrix::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { entries: DMatrix::zeros(dim, dim) }
    }

    pub fn from_diagonal(values: &[Complex64]) -> Self {
        let dim = values.len();
        let mut entries = DMatrix::zeros(dim, dim);
        for (k, v) in values.iter().enumerate() {
            entries[(k, k)] = *v;
        }
        Self { entries }
    }

    pub fn from_real_diagonal(values: &[f64]) -> Self {
        let values: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        Self::from_diagonal(&values)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n_sites(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.dim()).map(|k| self.entries[(k, k)]).collect()
    }

    pub fn real_diagonal(&self) -> Vec<f64> {
        self.diagonal().iter().map(|z| z.re).collect()
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    pub fn is_diagonal(&self) -> bool {
        let d = self.dim();
        (0..d).all(|i| (0..d).all(|j| i == j || self.entries[(i, j)] == Complex64::ZERO))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let d = self.dim();
        (0..d).all(|i| (i..d).all(|j| (self.entries[(i, j)] - self.entries[(j, i)].conj()).norm() <= tol))
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Observable) -> f64 {
        self.entries
            .iter()
            .zip(other.entries.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn check_model(&self, model: &SpinChainModel) -> Result<()> {
        if self.dim() != model.dim() {
            return Err(Error::DimensionMismatch {
                expected: model.dim(),
                found: self.dim(),
            });
        }
        Ok(())
    }
}

/// A statistical state: Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        check_shape(&entries)?;
        let d = entries.nrows();
        for i in 0..d {
            for j in i..d {
                let skew = (entries[(i, j)] - entries[(j, i)].conj()).norm();
                if skew.is_nan() || skew > DENSITY_TOL {
                    return Err(Error::InvalidDensityMatrix(format!(
                        "not Hermitian at ({i}, {j}): deviation {skew:e}"
                    )));
                }
            }
        }
        let trace = entries.trace();
        if (trace - Complex64::ONE).norm() > DENSITY_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {trace} is not 1")));
        }
        let min_eig = min_eigenvalue(&entries);
        if min_eig < -DENSITY_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min_eig:e}"
            )));
        }
        Ok(Self { entries })
    }

    /// Projector onto a (not necessarily normalized) state vector.
    pub fn pure(state: &[Complex64]) -> Result<Self> {
        let norm2: f64 = state.iter().map(|z| z.norm_sqr()).sum();
        if !(norm2 > 0.0 && norm2.is_finite()) {
            return Err(Error::InvalidDensityMatrix("zero or non-finite state vector".into()));
        }
        let d = state.len();
        let entries = DMatrix::from_fn(d, d, |i, j| state[i] * state[j].conj() / norm2);
        Self::new(entries)
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Self::new(DMatrix::identity(dim, dim) / Complex64::new(dim as f64, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }

    /// `tr(Λ X)`, summed without forming the product.
    pub fn expectation(&self, x: &Observable) -> Result<Complex64> {
        if x.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.dim(),
            });
        }
        Ok(trace_of_product(&self.entries, x.matrix()))
    }

    pub fn check_model(&self, model: &SpinChainModel) -> Result<()> {
        if self.dim() != model.dim() {
            return Err(Error::DimensionMismatch {
                expected: model.dim(),
                found: self.dim(),
            });
        }
        Ok(())
    }
}

/// `tr(A B) = Σ_ij A_ji B_ij`.
pub(crate) fn trace_of_product(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> Complex64 {
    let d = a.nrows();
    let mut acc = Complex64::ZERO;
    for i in 0..d {
        for j in 0..d {
            acc += a[(j, i)] * b[(i, j)];
        }
    }
    acc
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    herm.symmetric_eigenvalues().iter().fold(f64::INFINITY, |a, &b| a.min(b))
}

fn check_shape(m: &DMatrix<Complex64>) -> Result<()> {
    let (rows, cols) = m.shape();
    if rows != cols || !rows.is_power_of_two() || rows < 2 {
        return Err(Error::BadShape { rows, cols });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(
            Observable::new(DMatrix::zeros(3, 3)),
            Err(Error::BadShape { rows: 3, cols: 3 })
        ));
        assert!(Observable::new(DMatrix::zeros(2, 4)).is_err());
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 1)] = c(f64::NAN, 0.0);
        assert_eq!(Observable::new(m), Err(Error::NonFinite));
    }

    #[test]
    fn density_validation() {
        let plus = DensityMatrix::pure(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((plus.get(0, 1) - c(0.5, 0.0)).norm() < 1e-15);

        let not_herm = DMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.1, 0.0), c(0.0, 0.0), c(0.5, 0.0)]);
        assert!(DensityMatrix::new(not_herm).is_err());

        let bad_trace = DMatrix::from_row_slice(2, 2, &[c(0.6, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.6, 0.0)]);
        assert!(DensityMatrix::new(bad_trace).is_err());

        let negative = DMatrix::from_row_slice(2, 2, &[c(1.5, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)]);
        assert!(DensityMatrix::new(negative).is_err());
    }

    #[test]
    fn expectation_of_identity_is_one() {
        let rho = DensityMatrix::maximally_mixed(8).unwrap();
        let e = rho.expectation(&Observable::identity(8)).unwrap();
        assert!((e - Complex64::ONE).norm() < 1e-15);
        assert!(rho.expectation(&Observable::identity(4)).is_err());
    }
}
