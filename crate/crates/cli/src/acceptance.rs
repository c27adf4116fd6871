//! The acceptance suite: each criterion runs at its stated tolerance and
//! reports one pass/fail line.

use std::f64::consts::PI;
use std::fmt;
use std::time::{Duration, Instant};

use dephasing_core::bath::{
    b_by_quadrature, coefficient_a, integrate_correlation, spectral_density, AMethod, CutoffFunction,
    SpectralFunctions,
};
use dephasing_core::dynamics::{CoefficientSource, Dephasing, GeneratorCoefficients};
use dephasing_core::pointer::{
    conditional_expectation, limit_distance, projection_with_trace, verify_limit_theorem,
};
use dephasing_core::sampling::{
    random_density_matrix, random_hermitian, random_observable, seeded_rng, uniform_samples,
};
use dephasing_core::{Observable, SpinChainModel};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::commands::log_linear_fit;

type Check = Result<(bool, String), dephasing_core::Error>;

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] C{} {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail
        )
    }
}

pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    check: fn() -> Check,
}

impl Criterion {
    pub fn run(&self) -> CriterionResult {
        let start = Instant::now();
        let (passed, detail) = match (self.check)() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        CriterionResult {
            id: self.id,
            name: self.name,
            passed,
            detail,
            elapsed: start.elapsed(),
        }
    }
}

pub const CRITERIA: [Criterion; 9] = [
    Criterion { id: 1, name: "bath coefficients and correlation identity", check: bath_coefficients },
    Criterion { id: 2, name: "decay exponent law", check: decay_exponents },
    Criterion { id: 3, name: "closed form against ODE integration", check: closed_form_vs_ode },
    Criterion { id: 4, name: "limit theorem time scale", check: limit_time_scale },
    Criterion { id: 5, name: "rate scales with temperature", check: temperature_scaling },
    Criterion { id: 6, name: "approximate pointer projections", check: pointer_projections },
    Criterion { id: 7, name: "structural identities", check: structure },
    Criterion { id: 8, name: "ohmic small-frequency limit", check: ohmic_limit },
    Criterion { id: 9, name: "evolution throughput", check: throughput },
];

pub fn run_all() -> Vec<CriterionResult> {
    run_all_with(|_| {})
}

/// Runs every criterion in order, handing each result to `each` as soon as
/// it is available.
pub fn run_all_with(mut each: impl FnMut(&CriterionResult)) -> Vec<CriterionResult> {
    CRITERIA
        .iter()
        .map(|c| {
            let r = c.run();
            each(&r);
            r
        })
        .collect()
}

const BETAS: [f64; 3] = [0.5, 1.0, 2.0];

fn cutoffs() -> Vec<CutoffFunction> {
    vec![
        CutoffFunction::gaussian(1.0).expect("valid"),
        CutoffFunction::exponential(1.0).expect("valid"),
        CutoffFunction::algebraic(1.0, 3.0).expect("valid"),
    ]
}

fn bath_coefficients() -> Check {
    let start = Instant::now();
    let (mut worst_a, mut worst_re, mut worst_im) = (0.0f64, 0.0f64, 0.0f64);
    for cutoff in cutoffs() {
        let b = b_by_quadrature(&cutoff)?.value;
        for beta in BETAS {
            let spec = SpectralFunctions::new(beta, cutoff)?;
            let exact = 2.0 * PI / beta;
            let a = coefficient_a(&spec, AMethod::Numerical).value;
            worst_a = worst_a.max((a - exact).abs() / exact);
            let ci = integrate_correlation(&spec, 200.0, 1e-4)?;
            worst_re = worst_re.max((ci.value.re - exact / 2.0).abs());
            worst_im = worst_im.max((ci.value.im - b).abs());
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let passed = worst_a <= 1e-4 && worst_re <= 1e-3 && worst_im <= 1e-3 && elapsed < 30.0;
    Ok((
        passed,
        format!(
            "max rel dev a {worst_a:.2e} (<= 1e-4), max |Re - a/2| {worst_re:.2e}, max |Im - b| {worst_im:.2e} (<= 1e-3), {elapsed:.1}s (< 30s)"
        ),
    ))
}

fn ones(dim: usize) -> Observable {
    Observable::new(DMatrix::from_element(dim, dim, Complex64::ONE)).expect("valid")
}

fn gaussian_b() -> Result<f64, dephasing_core::Error> {
    Ok(b_by_quadrature(&CutoffFunction::gaussian(1.0)?)?.value)
}

fn decay_exponents() -> Check {
    let b = gaussian_b()?;
    let t = 1.0;
    let mut worst = 0.0f64;
    for n in 1..=6 {
        let model = SpinChainModel::new(n, 1.0, 1.0)?;
        let coeffs = GeneratorCoefficients::closed_form(&model, b)?;
        let gamma = coeffs.gamma();
        let evolved = Dephasing::new(model, coeffs).evolve(&ones(model.dim()), t)?;
        for i in 0..model.dim() {
            for j in 0..model.dim() {
                if i == j {
                    continue;
                }
                let d = (j as f64 - i as f64).abs();
                let predicted = -gamma * t * d * d / 4f64.powi(n as i32 - 1);
                let measured = evolved.get(i, j).norm().ln();
                worst = worst.max((measured - predicted).abs() / predicted.abs());
            }
        }
    }
    Ok((worst <= 1e-9, format!("max rel dev of exponent {worst:.2e} over n = 1..6 (<= 1e-9)")))
}

fn closed_form_vs_ode() -> Check {
    let start = Instant::now();
    let b = gaussian_b()?;
    let times = [0.1, 1.0, 10.0];
    let mut worst = 0.0f64;
    for n in 1..=5 {
        let model = SpinChainModel::new(n, 1.0, 1.0)?;
        let dynamics = Dephasing::new(model, GeneratorCoefficients::closed_form(&model, b)?);
        let mut rng = seeded_rng(300 + n as u64);
        for _ in 0..20 {
            let x = random_observable(&mut rng, model.dim());
            let numeric = dynamics.evolve_ode_trajectory(&x, &times, 1e-3)?;
            for (t, y) in times.iter().zip(&numeric) {
                worst = worst.max(dynamics.evolve(&x, *t)?.max_abs_diff(y));
            }
        }
    }

    let model = SpinChainModel::new(3, 1.0, 1.0)?;
    let dynamics = Dephasing::new(model, GeneratorCoefficients::closed_form(&model, b)?);
    let x = random_observable(&mut seeded_rng(399), model.dim());
    let t = 1.0;
    let steps = (t * dynamics.max_rate() / 0.04).ceil();
    let exact = dynamics.evolve(&x, t)?;
    // a hair above t/steps so the integrator takes exactly `steps` steps
    let coarse = dynamics.evolve_ode(&x, t, t / steps * (1.0 + 1e-12))?;
    let fine = dynamics.evolve_ode(&x, t, t / (2.0 * steps) * (1.0 + 1e-12))?;
    let order = (exact.max_abs_diff(&coarse) / exact.max_abs_diff(&fine)).log2();
    let elapsed = start.elapsed().as_secs_f64();
    let passed = worst <= 1e-6 && (order - 4.0).abs() <= 0.2 && elapsed < 60.0;
    Ok((
        passed,
        format!("max entry error {worst:.2e} (<= 1e-6), observed order {order:.3} (4 +- 0.2), {elapsed:.1}s (< 60s)"),
    ))
}

fn limit_time_scale() -> Check {
    let model = SpinChainModel::new(6, 1.0, 1.0)?;
    let coeffs = GeneratorCoefficients::closed_form(&model, 0.0)?;
    let dynamics = Dephasing::new(model, coeffs);
    let mut rng = seeded_rng(2024);
    let rho = random_density_matrix(&mut rng, model.dim());
    let x = random_hermitian(&mut rng, model.dim());
    let tol = 1e-8;
    let slowest = coeffs.gamma() / 4f64.powi(5);

    let mut weight = Complex64::ZERO;
    for i in 0..model.dim() - 1 {
        weight += rho.get(i + 1, i) * x.get(i, i + 1) + rho.get(i, i + 1) * x.get(i + 1, i);
    }
    let t_pred = (weight.norm() / tol).ln() / slowest;

    let distance = |t: f64| limit_distance(&dynamics, &rho, &x, t);
    let (mut lo, mut hi) = (0.5 * t_pred, 2.0 * t_pred);
    if !(distance(lo)? > tol && distance(hi)? < tol) {
        return Ok((false, format!("crossing not bracketed by [{lo:.1}, {hi:.1}]")));
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if distance(mid)? > tol {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t_cross = 0.5 * (lo + hi);
    let crossing_dev = (t_cross - t_pred).abs() / t_pred;

    let window: Vec<f64> = (0..=100).map(|k| t_pred * (0.5 + 0.005 * k as f64)).collect();
    let values = window.iter().map(|&t| distance(t)).collect::<Result<Vec<_>, _>>()?;
    let slope = log_linear_fit(&window, &values).map_or(f64::NAN, |(s, _, _)| s);
    let slope_dev = (slope / -slowest - 1.0).abs();

    let grid: Vec<f64> = (0..=400).map(|k| 1.5 * t_pred * k as f64 / 400.0).collect();
    let report = verify_limit_theorem(&rho, &x, &dynamics, tol, &grid)?;
    let t_tol_dev = (report.t_tol - t_pred).abs() / t_pred;

    let passed = crossing_dev <= 0.01 && slope_dev <= 0.01 && t_tol_dev <= 0.01;
    Ok((
        passed,
        format!(
            "predicted t_tol {t_pred:.2}, bisected {t_cross:.2} (dev {crossing_dev:.2e}), sampled {:.2} (dev {t_tol_dev:.2e}), log-slope dev {slope_dev:.2e} (all <= 1e-2), envelope held",
            report.t_tol
        ),
    ))
}

fn slowest_fitted_rate(beta: f64, b: f64) -> Result<(f64, f64), dephasing_core::Error> {
    let model = SpinChainModel::new(6, 1.0, beta)?;
    let coeffs = GeneratorCoefficients::closed_form(&model, b)?;
    let dynamics = Dephasing::new(model, coeffs);
    let x = ones(model.dim());
    let times: Vec<f64> = (0..=100).map(|k| 10.0 * k as f64).collect();
    let values = times
        .iter()
        .map(|&t| Ok(dynamics.evolve(&x, t)?.get(0, 1).norm()))
        .collect::<Result<Vec<f64>, dephasing_core::Error>>()?;
    let rate = log_linear_fit(&times, &values).map_or(f64::NAN, |(s, _, _)| -s);
    Ok((rate, coeffs.gamma() / 4f64.powi(5)))
}

fn temperature_scaling() -> Check {
    let b = gaussian_b()?;
    let (cold, cold_exact) = slowest_fitted_rate(1.0, b)?;
    let (hot, hot_exact) = slowest_fitted_rate(0.5, b)?;
    let ratio_dev = (hot / cold / 2.0 - 1.0).abs();
    let fit_dev = ((cold - cold_exact).abs() / cold_exact).max((hot - hot_exact).abs() / hot_exact);
    Ok((
        ratio_dev <= 1e-9 && fit_dev <= 1e-9,
        format!("rate ratio beta 0.5 vs 1 is 2 to {ratio_dev:.2e} (<= 1e-9), fit vs analytic {fit_dev:.2e}"),
    ))
}

fn pointer_projections() -> Check {
    let samples = uniform_samples(&mut seeded_rng(6), 1000);
    let model = SpinChainModel::new(12, 1.0, 1.0)?;
    let mut worst = 0.0f64;
    for &s in &samples {
        let e = projection_with_trace(s, &model)?;
        worst = worst.max((e.normalized_trace() - s).abs());
    }
    let bound = 0.5f64.powi(13);

    // widest gap between achievable traces, by sweeping s finely
    let mut gaps = Vec::new();
    for n in 4..=12 {
        let m = SpinChainModel::new(n, 1.0, 1.0)?;
        let mut traces = Vec::new();
        for k in 0..=(1u32 << 14) {
            traces.push(projection_with_trace(f64::from(k) / f64::from(1u32 << 14), &m)?.normalized_trace());
        }
        traces.dedup();
        let gap = traces.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
        gaps.push(gap);
    }
    let exact_gaps = gaps.iter().zip(4..=12).all(|(g, n)| *g == 0.5f64.powi(n));
    let halving = gaps.windows(2).all(|w| w[0] == 2.0 * w[1]);
    Ok((
        worst <= bound && exact_gaps && halving,
        format!(
            "max trace error at n = 12 over 1000 draws {worst:.3e} (<= {bound:.3e}); gap 2^-n exact and halving for n = 4..12: {}",
            exact_gaps && halving
        ),
    ))
}

fn structure() -> Check {
    let mut rng = seeded_rng(77);
    let mut failures = Vec::new();
    let (mut semigroup, mut trotter) = (0.0f64, 0.0f64);
    for case in 0..40 {
        let n = 1 + case % 6;
        let u = uniform_samples(&mut rng, 5);
        let model = SpinChainModel::new(n, 0.1 + 2.0 * u[0], 0.2 + 3.0 * u[1])?;
        let coeffs = GeneratorCoefficients::closed_form(&model, 4.0 * u[2] - 2.0)?;
        let dynamics = Dephasing::new(model, coeffs);
        let (s, t) = (5.0 * u[3], 5.0 * u[4]);
        let x = random_observable(&mut rng, model.dim());
        let scale = x.matrix().iter().map(|z| z.norm()).fold(0.0, f64::max);

        let diag = conditional_expectation(&x);
        if dynamics.evolve(&diag, t)? != diag {
            failures.push(format!("case {case}: diagonal observable moved"));
        }
        let id = Observable::identity(model.dim());
        if dynamics.evolve(&id, t)? != id {
            failures.push(format!("case {case}: identity not preserved"));
        }
        if conditional_expectation(&dynamics.evolve(&x, t)?) != diag {
            failures.push(format!("case {case}: P T_t != P"));
        }
        let composed = dynamics.evolve(&dynamics.evolve(&x, t)?, s)?;
        semigroup = semigroup.max(composed.max_abs_diff(&dynamics.evolve(&x, s + t)?) / scale);
        let a = dynamics.dissipate(&dynamics.conjugate_hamiltonian(&x, t)?, t)?;
        let b = dynamics.conjugate_hamiltonian(&dynamics.dissipate(&x, t)?, t)?;
        trotter = trotter.max(a.max_abs_diff(&b) / scale);
    }
    if semigroup > 1e-14 {
        failures.push(format!("semigroup defect {semigroup:.2e}"));
    }
    if trotter > 1e-14 {
        failures.push(format!("Trotter order defect {trotter:.2e}"));
    }
    let detail = if failures.is_empty() {
        format!("40 random cases: P fixed exactly, T_t(1) = 1, P T_t = P, semigroup {semigroup:.1e}, Trotter {trotter:.1e} (<= 1e-14)")
    } else {
        failures.join("; ")
    };
    Ok((failures.is_empty(), detail))
}

fn ohmic_limit() -> Check {
    let omegas = [1e-1, 1e-2, 1e-3, 1e-4];
    let mut monotone = true;
    let mut finals = Vec::new();
    for cutoff in cutoffs() {
        let devs: Vec<f64> = omegas
            .iter()
            .map(|&w| (spectral_density(w, &cutoff) / (2.0 * w) - 1.0).abs())
            .collect();
        monotone &= devs.windows(2).all(|p| p[1] < p[0]);
        finals.push(devs[3]);
    }
    let gaussian = finals[0];
    Ok((
        monotone && gaussian < 1e-6,
        format!(
            "J/2w -> 1 monotonically for all families: {monotone}; deviation at w = 1e-4: gaussian {gaussian:.1e} (< 1e-6), exponential {:.1e}, algebraic {:.1e}",
            finals[1], finals[2]
        ),
    ))
}

fn throughput() -> Check {
    let model = SpinChainModel::new(8, 1.0, 1.0)?;
    let dynamics = Dephasing::new(model, GeneratorCoefficients::new(PI, -0.5, CoefficientSource::ClosedForm)?);
    let x = random_observable(&mut seeded_rng(8), model.dim());
    let start = Instant::now();
    let mut checksum = 0.0;
    for k in 0..100 {
        checksum += dynamics.evolve(&x, 0.1 * k as f64)?.get(0, 1).norm();
    }
    let elapsed = start.elapsed().as_secs_f64();
    Ok((
        elapsed < 1.0 && checksum.is_finite(),
        format!("100 evolutions of a 256 x 256 observable in {elapsed:.3}s (< 1s)"),
    ))
}
