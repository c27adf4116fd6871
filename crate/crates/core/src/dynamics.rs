//! Reduced Markovian dynamics of chain observables.
//!
//! The generator is `L(X) = i[H', X] + 2γ (QXQ − ½{Q², X})` with
//! `H' = b Q²` and `γ = πλ/β`. Because `Q` is diagonal, `L` acts on each
//! matrix entry by multiplication:
//!
//! ```text
//! L(X)_ij = (i b (q_i² − q_j²) − γ (q_i − q_j)²) x_ij
//! ```
//!
//! The Hamiltonian and dissipative parts commute, so the semigroup is the
//! product of the two exponentials taken in either order.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bath::BathCoefficients;
use crate::error::{Error, Result};
use crate::model::{build_q_matrix_with_limit, SpinChainModel};
use crate::operator::{trace_of_product, DensityMatrix, Observable};

/// Largest admissible `step × max rate` for the RK4 oracle.
pub const RK4_STABILITY_LIMIT: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientSource {
    ClosedForm,
    BathNumerical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorCoefficients {
    gamma: f64,
    b: f64,
    source: CoefficientSource,
}

impl GeneratorCoefficients {
    pub fn new(gamma: f64, b: f64, source: CoefficientSource) -> Result<Self> {
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::param("gamma", format!("must be nonnegative and finite, got {gamma}")));
        }
        if !b.is_finite() {
            return Err(Error::param("b", "must be finite"));
        }
        Ok(Self { gamma, b, source })
    }

    /// `γ = πλ/β` from the model, with the given Hamiltonian coefficient.
    pub fn closed_form(model: &SpinChainModel, b: f64) -> Result<Self> {
        Self::new(model.gamma(), b, CoefficientSource::ClosedForm)
    }

    /// From bath coefficients: the dissipator prefactor is `λa`, so `γ = λa/2`.
    pub fn from_bath(model: &SpinChainModel, bath: &BathCoefficients) -> Result<Self> {
        Self::new(0.5 * model.lambda() * bath.a, bath.b, CoefficientSource::BathNumerical)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn source(&self) -> CoefficientSource {
        self.source
    }

    pub fn with_b(self, b: f64) -> Result<Self> {
        Self::new(self.gamma, b, self.source)
    }
}

/// The dephasing semigroup of one model, with the spectrum of `Q` cached.
#[derive(Debug, Clone)]
pub struct Dephasing {
    model: SpinChainModel,
    coeffs: GeneratorCoefficients,
    q: Vec<f64>,
}

impl Dephasing {
    pub fn new(model: SpinChainModel, coeffs: GeneratorCoefficients) -> Self {
        let q = model.q_spectrum();
        Self { model, coeffs, q }
    }

    pub fn model(&self) -> &SpinChainModel {
        &self.model
    }

    pub fn coefficients(&self) -> &GeneratorCoefficients {
        &self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    /// Decay rate `γ (q_i − q_j)²` of entry `(i, j)`.
    pub fn decay_rate(&self, i: usize, j: usize) -> f64 {
        let gap = self.q[i] - self.q[j];
        self.coeffs.gamma * gap * gap
    }

    /// Phase velocity `b (q_i² − q_j²)` of entry `(i, j)`.
    pub fn frequency(&self, i: usize, j: usize) -> f64 {
        self.coeffs.b * (self.q[i] * self.q[i] - self.q[j] * self.q[j])
    }

    /// Multiplier of entry `(i, j)` under the generator.
    pub fn generator_factor(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(-self.decay_rate(i, j), self.frequency(i, j))
    }

    /// Multiplier of entry `(i, j)` under `T_t`.
    pub fn propagator_factor(&self, i: usize, j: usize, t: f64) -> Complex64 {
        let (s, c) = (self.frequency(i, j) * t).sin_cos();
        Complex64::new(c, s) * (-self.decay_rate(i, j) * t).exp()
    }

    /// `γ(2ⁿ−1)²/4^(n−1) + |b| max|q_i² − q_j²|`, bounding every `|L_ij|`.
    pub fn max_rate(&self) -> f64 {
        let n = self.model.n_sites() as i32;
        let span = (self.dim() as f64 - 1.0).powi(2) / 4f64.powi(n - 1);
        let (lo, hi) = self
            .q
            .iter()
            .map(|q| q * q)
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), q2| (lo.min(q2), hi.max(q2)));
        self.coeffs.gamma * span + self.coeffs.b.abs() * (hi - lo)
    }

    fn check(&self, x: &Observable) -> Result<()> {
        x.check_model(&self.model)
    }

    /// `L(X)` entry by entry.
    pub fn apply_generator(&self, x: &Observable) -> Result<Observable> {
        self.check(x)?;
        let m = x.matrix();
        let out = DMatrix::from_fn(self.dim(), self.dim(), |i, j| self.generator_factor(i, j) * m[(i, j)]);
        Ok(Observable::from_matrix_unchecked(out))
    }

    /// `L(X) = i[bQ², X] + 2γ(QXQ − ½{Q², X})` by dense matrix products.
    pub fn apply_generator_matrix(&self, x: &Observable) -> Result<Observable> {
        self.check(x)?;
        let q = build_q_matrix_with_limit(&self.model, self.model.n_sites())?.into_matrix();
        let q2 = &q * &q;
        let h = &q2 * Complex64::new(self.coeffs.b, 0.0);
        let xm = x.matrix();
        let commutator = &h * xm - xm * &h;
        let anticommutator = &q2 * xm + xm * &q2;
        let dissipator = (&q * xm * &q - anticommutator * Complex64::new(0.5, 0.0))
            * Complex64::new(2.0 * self.coeffs.gamma, 0.0);
        Ok(Observable::from_matrix_unchecked(commutator * Complex64::I + dissipator))
    }

    /// `T_t(X)` in closed form.
    pub fn evolve(&self, x: &Observable, t: f64) -> Result<Observable> {
        self.check(x)?;
        check_time(t)?;
        let m = x.matrix();
        let out = DMatrix::from_fn(self.dim(), self.dim(), |i, j| self.propagator_factor(i, j, t) * m[(i, j)]);
        Ok(Observable::from_matrix_unchecked(out))
    }

    /// `e^{t L_D}(X)`: dissipative factor only.
    pub fn dissipate(&self, x: &Observable, t: f64) -> Result<Observable> {
        self.check(x)?;
        check_time(t)?;
        let m = x.matrix();
        let out = DMatrix::from_fn(self.dim(), self.dim(), |i, j| m[(i, j)] * (-self.decay_rate(i, j) * t).exp());
        Ok(Observable::from_matrix_unchecked(out))
    }

    /// `e^{itH'} X e^{−itH'}` computed from the diagonal unitary.
    pub fn conjugate_hamiltonian(&self, x: &Observable, t: f64) -> Result<Observable> {
        self.check(x)?;
        check_time(t)?;
        let phases: Vec<Complex64> = self
            .q
            .iter()
            .map(|q| Complex64::from_polar(1.0, self.coeffs.b * q * q * t))
            .collect();
        let m = x.matrix();
        let out = DMatrix::from_fn(self.dim(), self.dim(), |i, j| phases[i] * m[(i, j)] * phases[j].conj());
        Ok(Observable::from_matrix_unchecked(out))
    }

    /// Schrödinger-picture evolution of a state, dual to [`Dephasing::evolve`]:
    /// `tr(Λ_t X) = tr(Λ T_t(X))`.
    pub fn evolve_state(&self, rho: &DensityMatrix, t: f64) -> Result<DMatrix<Complex64>> {
        rho.check_model(&self.model)?;
        check_time(t)?;
        let m = rho.matrix();
        Ok(DMatrix::from_fn(self.dim(), self.dim(), |i, j| {
            m[(i, j)] * self.propagator_factor(j, i, t)
        }))
    }

    fn check_step(&self, step: f64) -> Result<()> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::param("step", format!("must be positive, got {step}")));
        }
        let product = step * self.max_rate();
        if product > RK4_STABILITY_LIMIT {
            return Err(Error::StepTooLarge {
                step,
                product,
                limit: RK4_STABILITY_LIMIT,
            });
        }
        Ok(())
    }

    fn rk4_step(&self, y: &Observable, h: f64) -> Result<Observable> {
        let half = Complex64::new(0.5 * h, 0.0);
        let full = Complex64::new(h, 0.0);
        let ym = y.matrix();
        let k1 = self.apply_generator(y)?.into_matrix();
        let k2 = self
            .apply_generator(&Observable::from_matrix_unchecked(ym + &k1 * half))?
            .into_matrix();
        let k3 = self
            .apply_generator(&Observable::from_matrix_unchecked(ym + &k2 * half))?
            .into_matrix();
        let k4 = self
            .apply_generator(&Observable::from_matrix_unchecked(ym + &k3 * full))?
            .into_matrix();
        let incr = (k1 + (k2 + k3) * Complex64::new(2.0, 0.0) + k4) * Complex64::new(h / 6.0, 0.0);
        Ok(Observable::from_matrix_unchecked(ym + incr))
    }

    fn integrate_ode(&self, mut y: Observable, duration: f64, step: f64) -> Result<Observable> {
        if duration == 0.0 {
            return Ok(y);
        }
        let steps = (duration / step).ceil().max(1.0) as usize;
        let h = duration / steps as f64;
        for _ in 0..steps {
            y = self.rk4_step(&y, h)?;
        }
        Ok(y)
    }

    /// `T_t(X)` by classical fixed-step RK4 on `dX/dt = L(X)`. The step is
    /// shrunk to land exactly on `t`.
    pub fn evolve_ode(&self, x: &Observable, t: f64, step: f64) -> Result<Observable> {
        self.check(x)?;
        check_time(t)?;
        self.check_step(step)?;
        self.integrate_ode(x.clone(), t, step)
    }

    /// RK4 solution at each of the nondecreasing `times`, integrating
    /// continuously from one time to the next.
    pub fn evolve_ode_trajectory(&self, x: &Observable, times: &[f64], step: f64) -> Result<Vec<Observable>> {
        self.check(x)?;
        self.check_step(step)?;
        check_times(times)?;
        let mut out = Vec::with_capacity(times.len());
        let mut y = x.clone();
        let mut now = 0.0;
        for &t in times {
            y = self.integrate_ode(y, t - now, step)?;
            now = t;
            out.push(y.clone());
        }
        Ok(out)
    }

    /// Time at which `|x_ij(t)/x_ij(0)| = ε`:
    /// `ln(1/ε) · 4^(n−1) / (γ (j − i)²)`.
    pub fn decoherence_time(&self, i: usize, j: usize, epsilon: f64) -> Result<f64> {
        self.model.check_index(i)?;
        self.model.check_index(j)?;
        if i == j {
            return Err(Error::DiagonalPair(i));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::param("epsilon", format!("must lie in (0, 1), got {epsilon}")));
        }
        Ok((1.0 / epsilon).ln() / self.decay_rate(i, j))
    }

    /// `tr(Λ T_t(X))` for each time.
    pub fn expectation_trajectory(&self, rho: &DensityMatrix, x: &Observable, times: &[f64]) -> Result<Vec<Complex64>> {
        self.check(x)?;
        rho.check_model(&self.model)?;
        times.iter().try_for_each(|&t| check_time(t))?;
        times
            .iter()
            .map(|&t| Ok(trace_of_product(rho.matrix(), self.evolve(x, t)?.matrix())))
            .collect()
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    if !t.is_finite() {
        return Err(Error::param("t", "must be finite"));
    }
    Ok(())
}

fn check_times(times: &[f64]) -> Result<()> {
    times.iter().try_for_each(|&t| check_time(t))?;
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::param("times", "must be nondecreasing"));
    }
    Ok(())
}

pub fn apply_generator(x: &Observable, model: &SpinChainModel, coeffs: &GeneratorCoefficients) -> Result<Observable> {
    Dephasing::new(*model, *coeffs).apply_generator(x)
}

pub fn evolve_closed_form(x: &Observable, t: f64, model: &SpinChainModel, coeffs: &GeneratorCoefficients) -> Result<Observable> {
    Dephasing::new(*model, *coeffs).evolve(x, t)
}

pub fn evolve_ode(
    x: &Observable,
    t: f64,
    model: &SpinChainModel,
    coeffs: &GeneratorCoefficients,
    step: f64,
) -> Result<Observable> {
    Dephasing::new(*model, *coeffs).evolve_ode(x, t, step)
}

pub fn decoherence_time(
    i: usize,
    j: usize,
    epsilon: f64,
    model: &SpinChainModel,
    coeffs: &GeneratorCoefficients,
) -> Result<f64> {
    Dephasing::new(*model, *coeffs).decoherence_time(i, j, epsilon)
}

pub fn expectation_trajectory(
    rho: &DensityMatrix,
    x: &Observable,
    times: &[f64],
    model: &SpinChainModel,
    coeffs: &GeneratorCoefficients,
) -> Result<Vec<Complex64>> {
    Dephasing::new(*model, *coeffs).expectation_trajectory(rho, x, times)
}
