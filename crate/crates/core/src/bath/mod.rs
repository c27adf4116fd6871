//! The phonon bath: spectral density, thermal correlation function and the
//! coefficients `a`, `b` of the Markovian generator.
//!
//! Fourier convention: `F(f)(t) = (2π)^(−½) ∫ f(k) e^(−ikt) dk`. With it the
//! thermal correlation function is
//!
//! ```text
//! C(t) = ∫ f₁(k) e^(−ikt) dk + ½ ∫ f₂(k) e^(−ikt) dk + ½ ∫ f₃(k) e^(−ikt) dk
//! f₁ = |k|χ²/(e^(β|k|) − 1),   f₂ = |k|χ²,   f₃ = kχ²
//! ```
//!
//! and `∫₀^∞ C(t) dt = a/2 + i b` with `a = 2π/β`, `b = −∫₀^∞ χ² dk`.

mod cutoff;

use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use cutoff::{CutoffFamily, CutoffFunction};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, uniform_breakpoints, QuadratureOptions};

/// Discarded `k`-tail mass for a single correlation-function evaluation.
pub const DEFAULT_K_TAIL: f64 = 1e-12;

/// Below this `|k|` the Planck factor is replaced by its series.
const SMALL_K: f64 = 1e-8;

/// Ohmic spectral density `J(ω) = 2 ω χ²(ω)`, the evaluation of
/// `∫ dk g(k)² δ(ω − |k|)` with unit proportionality constant. Zero for
/// `ω ≤ 0`, where the delta function has no support.
pub fn spectral_density(omega: f64, cutoff: &CutoffFunction) -> f64 {
    if omega <= 0.0 {
        return 0.0;
    }
    2.0 * omega * cutoff.squared(omega)
}

/// Planck occupation `ρ(k) = 1/(e^(β|k|) − 1)`.
pub fn planck_weight(k: f64, beta: f64) -> f64 {
    1.0 / (beta * k.abs()).exp_m1()
}

/// The three spectral functions entering the correlation function at
/// inverse temperature `β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralFunctions {
    beta: f64,
    cutoff: CutoffFunction,
}

impl SpectralFunctions {
    pub fn new(beta: f64, cutoff: CutoffFunction) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::param("beta", format!("must be positive and finite, got {beta}")));
        }
        Ok(Self { beta, cutoff })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn cutoff(&self) -> &CutoffFunction {
        &self.cutoff
    }

    /// `f₁(k) = |k|χ²(k)/(e^(β|k|) − 1)`, with `f₁(0) = 1/β`.
    pub fn f1(&self, k: f64) -> f64 {
        let x = self.beta * k.abs();
        let bose = if x < SMALL_K {
            // |k|/(e^{β|k|} − 1) = (1/β)(1 − x/2 + x²/12 − …)
            (1.0 - 0.5 * x + x * x / 12.0) / self.beta
        } else {
            k.abs() / x.exp_m1()
        };
        bose * self.cutoff.squared(k)
    }

    pub fn f2(&self, k: f64) -> f64 {
        k.abs() * self.cutoff.squared(k)
    }

    pub fn f3(&self, k: f64) -> f64 {
        k * self.cutoff.squared(k)
    }

    /// Integrand of `C(t)` at wave number `k`.
    fn correlation_integrand(&self, k: f64, t: f64) -> Complex64 {
        let weight = self.f1(k) + 0.5 * self.f2(k) + 0.5 * self.f3(k);
        let (s, c) = (k * t).sin_cos();
        Complex64::new(weight * c, -weight * s)
    }

    /// Cut-off `K` with `∫_K^∞ (f₁ + ½f₂ + ½|f₃|) dk ≤ tail`.
    pub fn truncation(&self, tail: f64) -> f64 {
        let chi = self.cutoff;
        let beta = self.beta;
        chi.truncation_point(tail, |cut| {
            chi.tail_first_moment(cut) * (1.0 + planck_weight(cut, beta))
        })
    }

    fn truncation_mass(&self, cut: f64) -> f64 {
        self.cutoff.tail_first_moment(cut) * (1.0 + planck_weight(cut, self.beta))
    }
}

/// A numerical value with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate<T> {
    pub value: T,
    pub error: f64,
}

impl<T> Estimate<T> {
    pub fn exact(value: T) -> Self {
        Self { value, error: 0.0 }
    }
}

/// Settings for a correlation-function evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationOptions {
    /// Discarded `k`-tail mass on each side of the origin.
    pub k_tail: f64,
    pub quadrature: QuadratureOptions,
}

impl Default for CorrelationOptions {
    fn default() -> Self {
        Self {
            k_tail: DEFAULT_K_TAIL,
            quadrature: QuadratureOptions::with_abs_tol(1e-11),
        }
    }
}

/// Breakpoints on `[−K, K]`: the origin is always one, and for `|t| > 0` no
/// panel is wider than a quarter period `π/(4|t|)`.
fn k_breakpoints(cut: f64, t: f64) -> Vec<f64> {
    let base = 32usize;
    let per_side = if t == 0.0 {
        base
    } else {
        let width = PI / (4.0 * t.abs());
        base.max((cut / width).ceil() as usize)
    };
    let mut pts = uniform_breakpoints(-cut, 0.0, per_side);
    pts.pop();
    pts.extend(uniform_breakpoints(0.0, cut, per_side));
    pts
}

/// Thermal correlation function `C(t)` by adaptive quadrature over
/// `k ∈ [−K, K]`. The reported error includes the truncated tails.
pub fn correlation_function(t: f64, spec: &SpectralFunctions, opts: &CorrelationOptions) -> Result<Estimate<Complex64>> {
    if !t.is_finite() {
        return Err(Error::param("t", "must be finite"));
    }
    let cut = spec.truncation(opts.k_tail);
    let pts = k_breakpoints(cut, t);
    let r = integrate(|k| spec.correlation_integrand(k, t), &pts, &opts.quadrature)?;
    Ok(Estimate {
        value: r.value,
        error: r.error + 2.0 * spec.truncation_mass(cut),
    })
}

/// `∫₀^{t_max} C(t) dt` together with its error budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationIntegral {
    pub value: Complex64,
    /// Outer quadrature error plus propagated inner errors.
    pub quadrature_error: f64,
    /// `|I(t_max) − I(t_max/2)|`: Richardson-style estimate of the
    /// neglected `∫_{t_max}^∞`, padded by the quadrature error.
    pub tail_bound: f64,
    pub t_max: f64,
}

impl CorrelationIntegral {
    pub fn total_error(&self) -> f64 {
        self.quadrature_error + self.tail_bound
    }
}

fn time_breakpoints(a: f64, b: f64) -> Vec<f64> {
    // Geometric panels from the origin: C(t) varies fastest at small t.
    let mut pts = vec![a];
    let mut x = if a == 0.0 { 0.25 } else { a * 1.5 };
    while x < b {
        pts.push(x);
        x *= 1.5;
    }
    pts.push(b);
    pts.dedup();
    pts
}

fn integrate_correlation_on(
    spec: &SpectralFunctions,
    a: f64,
    b: f64,
    inner: &CorrelationOptions,
    outer: &QuadratureOptions,
) -> Result<(Complex64, f64)> {
    let failure: OnceLock<Error> = OnceLock::new();
    let worst_inner = AtomicU64::new(0.0f64.to_bits());
    let r = integrate(
        |t| match correlation_function(t, spec, inner) {
            Ok(c) => {
                worst_inner.fetch_max(c.error.to_bits(), Ordering::Relaxed);
                c.value
            }
            Err(e) => {
                let _ = failure.set(e);
                Complex64::ZERO
            }
        },
        &time_breakpoints(a, b),
        outer,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let r = r?;
    let inner_err = f64::from_bits(worst_inner.into_inner());
    Ok((r.value, r.error + (b - a) * inner_err))
}

/// `∫₀^{t_max} C(t) dt` by adaptive quadrature in `t` over values of `C`
/// that are themselves computed by quadrature in `k`.
///
/// Fails with [`Error::TailTooLarge`] when the tail estimate exceeds `tol`.
pub fn integrate_correlation(spec: &SpectralFunctions, t_max: f64, tol: f64) -> Result<CorrelationIntegral> {
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(Error::param("t_max", format!("must be positive, got {t_max}")));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::param("tol", format!("must be positive, got {tol}")));
    }
    // The k-truncation error accumulates linearly in t.
    let inner = CorrelationOptions {
        k_tail: tol / (20.0 * t_max),
        quadrature: QuadratureOptions::with_abs_tol((tol / (20.0 * t_max)).min(1e-10)),
    };
    let outer = QuadratureOptions {
        abs_tol: tol / 20.0,
        rel_tol: 0.0,
        ..QuadratureOptions::default()
    };
    let half = 0.5 * t_max;
    let (first, err_first) = integrate_correlation_on(spec, 0.0, half, &inner, &outer)?;
    let (second, err_second) = integrate_correlation_on(spec, half, t_max, &inner, &outer)?;
    let quadrature_error = err_first + err_second;
    let tail_bound = second.norm() + quadrature_error;
    if tail_bound > tol {
        return Err(Error::TailTooLarge { tail: tail_bound, tol, t_max });
    }
    Ok(CorrelationIntegral {
        value: first + second,
        quadrature_error,
        tail_bound,
        t_max,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AMethod {
    /// `a = 2π/β`.
    ClosedForm,
    /// `2π f₁(0) + π f₂(0)` with both values taken as limits `k → 0⁺`.
    Numerical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BMethod {
    /// `−∫₀^∞ χ²(k) dk` by adaptive quadrature.
    Quadrature,
    /// `Im ∫₀^∞ C(t) dt`.
    CorrelationIntegral,
}

/// Richardson extrapolation of `f(0⁺)` assuming an expansion in integer
/// powers of `k`. Two second-order extrapolants, from `(h, h/2, h/4)` and
/// from `(h/2, h/4, h/8)`, give the value and its error estimate.
fn limit_at_zero(f: impl Fn(f64) -> f64, h: f64) -> Estimate<f64> {
    let samples = [f(h), f(0.5 * h), f(0.25 * h), f(0.125 * h)];
    let extrapolate = |s: &[f64]| {
        let r1 = 2.0 * s[1] - s[0];
        let r2 = 2.0 * s[2] - s[1];
        (4.0 * r2 - r1) / 3.0
    };
    let coarse = extrapolate(&samples[..3]);
    let value = extrapolate(&samples[1..]);
    Estimate {
        value,
        error: (value - coarse).abs(),
    }
}

/// The dissipative coefficient `a`.
pub fn coefficient_a(spec: &SpectralFunctions, method: AMethod) -> Estimate<f64> {
    match method {
        AMethod::ClosedForm => Estimate::exact(2.0 * PI / spec.beta),
        AMethod::Numerical => {
            let h = 1e-3 * spec.cutoff.scale().min(1.0 / spec.beta);
            let f1 = limit_at_zero(|k| spec.f1(k), h);
            let f2 = limit_at_zero(|k| spec.f2(k), h);
            Estimate {
                value: 2.0 * PI * f1.value + PI * f2.value,
                error: 2.0 * PI * f1.error + PI * f2.error,
            }
        }
    }
}

/// Time horizon and tolerance for the correlation-integral route to `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationIntegralSettings {
    pub t_max: f64,
    pub tol: f64,
}

impl Default for CorrelationIntegralSettings {
    fn default() -> Self {
        Self { t_max: 200.0, tol: 1e-4 }
    }
}

/// `−∫₀^∞ χ²(k) dk` by quadrature, the Lamb-shift coefficient `b`.
pub fn b_by_quadrature(cutoff: &CutoffFunction) -> Result<Estimate<f64>> {
    let tail = 1e-13;
    let cut = cutoff.truncation_point(tail, |c| cutoff.tail_l1(c));
    let pts = uniform_breakpoints(0.0, cut, 64);
    let r = integrate(|k| cutoff.squared(k), &pts, &QuadratureOptions::with_abs_tol(1e-13))?;
    Ok(Estimate {
        value: -r.value,
        error: r.error + cutoff.tail_l1(cut),
    })
}

/// The Hamiltonian coefficient `b`. The correlation-integral route needs
/// the temperature, so it takes the full spectral functions.
pub fn coefficient_b(spec: &SpectralFunctions, method: BMethod, settings: &CorrelationIntegralSettings) -> Result<Estimate<f64>> {
    match method {
        BMethod::Quadrature => b_by_quadrature(&spec.cutoff),
        BMethod::CorrelationIntegral => {
            let ci = integrate_correlation(spec, settings.t_max, settings.tol)?;
            Ok(Estimate {
                value: ci.value.im,
                error: ci.total_error(),
            })
        }
    }
}

/// The pair `(a, b)` with error estimates (zero for closed forms).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathCoefficients {
    pub a: f64,
    pub b: f64,
    pub a_error: f64,
    pub b_error: f64,
}

impl BathCoefficients {
    pub fn compute(
        spec: &SpectralFunctions,
        a_method: AMethod,
        b_method: BMethod,
        settings: &CorrelationIntegralSettings,
    ) -> Result<Self> {
        let a = coefficient_a(spec, a_method);
        let b = coefficient_b(spec, b_method, settings)?;
        Ok(Self {
            a: a.value,
            b: b.value,
            a_error: a.error,
            b_error: b.error,
        })
    }

    /// Both coefficients read off one correlation integral:
    /// `a = 2 Re ∫C`, `b = Im ∫C`.
    pub fn from_correlation_integral(ci: &CorrelationIntegral) -> Self {
        Self {
            a: 2.0 * ci.value.re,
            b: ci.value.im,
            a_error: 2.0 * ci.total_error(),
            b_error: ci.total_error(),
        }
    }
}
