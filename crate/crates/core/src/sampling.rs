//! Seeded random observables and states.
//!
//! * states: `G G† / tr(G G†)` with independent standard complex Gaussian `G`
//! * Hermitian observables: `(G + G†)/2`
//! * general observables: `G` itself

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::operator::{DensityMatrix, Observable};

pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Complex Gaussian with unit variance split evenly over both parts.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DMatrix<Complex64> {
    // Row-major fill so the draw order does not depend on storage layout.
    let values: Vec<Complex64> = (0..dim * dim).map(|_| complex_gaussian(rng)).collect();
    DMatrix::from_row_slice(dim, dim, &values)
}

pub fn random_observable<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Observable {
    Observable::new(gaussian_matrix(rng, dim)).expect("Gaussian matrix of power-of-two size")
}

pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Observable {
    let g = gaussian_matrix(rng, dim);
    let h = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
    Observable::new(h).expect("Gaussian matrix of power-of-two size")
}

pub fn random_density_matrix<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DensityMatrix {
    let g = gaussian_matrix(rng, dim);
    let mut w = &g * g.adjoint();
    let tr = w.trace();
    w /= tr;
    // Restore exact Hermiticity lost to rounding in the product.
    let w = (&w + w.adjoint()) * Complex64::new(0.5, 0.0);
    DensityMatrix::new(w).expect("G G† / tr is a density matrix")
}

/// Uniform draws from `[0, 1)`.
pub fn uniform_samples<R: Rng + ?Sized>(rng: &mut R, count: usize) -> Vec<f64> {
    (0..count).map(|_| rng.random::<f64>()).collect()
}
