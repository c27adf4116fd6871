//! The report-producing commands behind the CLI.

use std::path::PathBuf;

use dephasing_core::bath::{
    b_by_quadrature, coefficient_a, integrate_correlation, AMethod, BathCoefficients, CutoffFamily,
    CutoffFunction, SpectralFunctions,
};
use dephasing_core::dynamics::{CoefficientSource, Dephasing, GeneratorCoefficients};
use dephasing_core::pointer::{
    conditional_expectation, limit_distance, limit_envelope, projection_with_trace, verify_limit_theorem,
};
use dephasing_core::sampling::{random_density_matrix, random_hermitian, seeded_rng};
use dephasing_core::{Error, Observable, SpinChainModel};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{OutputDir, Summary, Table};
use crate::{acceptance, CliError};

/// Thresholds of the coefficient identity check.
pub const A_RELATIVE_TOL: f64 = 1e-4;
pub const CORRELATION_ABS_TOL: f64 = 1e-3;

/// Largest chain whose projections are checked by dense evolution.
const DENSE_CHECK_MAX_SITES: usize = 8;

/// A finished command: JSON summary, CSV tables and the outcome that
/// decides the exit status.
#[derive(Debug)]
pub struct CommandOutput {
    pub name: &'static str,
    pub summary: String,
    pub tables: Vec<Table>,
    pub outcome: Result<(), CliError>,
}

impl CommandOutput {
    pub fn write(&self, out: &OutputDir) -> Result<Vec<PathBuf>, CliError> {
        let mut written = vec![out.write(&format!("{}.json", self.name), &self.summary)?];
        for t in &self.tables {
            written.push(out.write_table(t)?);
        }
        Ok(written)
    }
}

/// Generator coefficients as selected by `coefficients.source`, with the
/// bath coefficients they came from.
pub fn resolve_coefficients(cfg: &RunConfig) -> Result<(GeneratorCoefficients, BathCoefficients), CliError> {
    let model = cfg.model()?;
    let spec = cfg.spectral_functions()?;
    let (coeffs, bath) = match cfg.coefficients.source {
        CoefficientSource::ClosedForm => {
            let b = b_by_quadrature(spec.cutoff())?;
            let a = coefficient_a(&spec, AMethod::ClosedForm);
            let bath = BathCoefficients {
                a: a.value,
                b: b.value,
                a_error: 0.0,
                b_error: b.error,
            };
            (GeneratorCoefficients::closed_form(&model, b.value)?, bath)
        }
        CoefficientSource::BathNumerical => {
            let ci = integrate_correlation(&spec, cfg.coefficients.t_max, cfg.tolerances.quadrature)?;
            let bath = BathCoefficients::from_correlation_integral(&ci);
            (GeneratorCoefficients::from_bath(&model, &bath)?, bath)
        }
    };
    let coeffs = match cfg.coefficients.b {
        Some(b) => coeffs.with_b(b)?,
        None => coeffs,
    };
    Ok((coeffs, bath))
}

#[derive(Debug, Clone, Serialize)]
pub struct CoefficientRow {
    pub family: CutoffFamily,
    pub beta: f64,
    pub k0: f64,
    pub p: Option<f64>,
    pub a_closed: f64,
    pub a_numerical: f64,
    pub a_numerical_error: f64,
    pub a_correlation: f64,
    pub b_quadrature: f64,
    pub b_quadrature_error: f64,
    pub b_correlation: f64,
    pub correlation_error: f64,
    pub tail_bound: f64,
    pub identity_check: bool,
}

fn coefficient_row(cfg: &RunConfig, cutoff: CutoffFunction) -> Result<CoefficientRow, CliError> {
    let spec = SpectralFunctions::new(cfg.model.beta, cutoff)?;
    let a_closed = coefficient_a(&spec, AMethod::ClosedForm).value;
    let a_num = coefficient_a(&spec, AMethod::Numerical);
    let b_quad = b_by_quadrature(&cutoff)?;
    let ci = integrate_correlation(&spec, cfg.coefficients.t_max, cfg.tolerances.quadrature)?;
    let identity_check = (a_num.value - a_closed).abs() <= A_RELATIVE_TOL * a_closed
        && (ci.value.re - 0.5 * a_closed).abs() <= CORRELATION_ABS_TOL
        && (ci.value.im - b_quad.value).abs() <= CORRELATION_ABS_TOL;
    Ok(CoefficientRow {
        family: cutoff.family(),
        beta: cfg.model.beta,
        k0: cutoff.scale(),
        p: cutoff.exponent(),
        a_closed,
        a_numerical: a_num.value,
        a_numerical_error: a_num.error,
        a_correlation: 2.0 * ci.value.re,
        b_quadrature: b_quad.value,
        b_quadrature_error: b_quad.error,
        b_correlation: ci.value.im,
        correlation_error: ci.quadrature_error,
        tail_bound: ci.tail_bound,
        identity_check,
    })
}

/// `a` and `b` by closed form, by quadrature and from the correlation
/// integral, for the configured cutoff or for every family.
pub fn cmd_coefficients(cfg: &RunConfig, all_families: bool) -> Result<CommandOutput, CliError> {
    let families: Vec<CutoffFamily> = if all_families {
        CutoffFamily::ALL.to_vec()
    } else {
        vec![cfg.cutoff.family]
    };
    let mut rows = Vec::new();
    for family in families {
        let cutoff = CutoffFunction::new(family, cfg.cutoff.k0, Some(cfg.cutoff.p))?;
        rows.push(coefficient_row(cfg, cutoff)?);
    }
    let mut table = Table::new(
        "coefficients",
        &[
            "family",
            "beta",
            "k0",
            "p",
            "a_closed",
            "a_numerical",
            "a_numerical_error",
            "a_correlation",
            "b_quadrature",
            "b_quadrature_error",
            "b_correlation",
            "correlation_error",
            "tail_bound",
            "identity_check",
        ],
    );
    for r in &rows {
        table.push(vec![
            r.family.name().into(),
            r.beta.into(),
            r.k0.into(),
            r.p.unwrap_or(f64::NAN).into(),
            r.a_closed.into(),
            r.a_numerical.into(),
            r.a_numerical_error.into(),
            r.a_correlation.into(),
            r.b_quadrature.into(),
            r.b_quadrature_error.into(),
            r.b_correlation.into(),
            r.correlation_error.into(),
            r.tail_bound.into(),
            r.identity_check.into(),
        ]);
    }
    let passed = rows.iter().all(|r| r.identity_check);
    let outcome = if passed {
        Ok(())
    } else {
        Err(CliError::Numerical("coefficient identity check failed".into()))
    };
    Ok(CommandOutput {
        name: "coefficients",
        summary: Summary::new("coefficients", cfg, passed, &rows).to_json(),
        tables: vec![table],
        outcome,
    })
}

/// Least-squares slope of `ys` against `xs`, with the coefficient of
/// determination.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some((slope, intercept, r2))
}

/// Fits `ln|values|` against `times`, skipping samples that underflowed.
pub fn log_linear_fit(times: &[f64], values: &[f64]) -> Option<(f64, f64, f64)> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(values)
        .filter(|(_, v)| v.abs() > 1e-290)
        .map(|(t, v)| (*t, v.abs().ln()))
        .unzip();
    linear_fit(&xs, &ys)
}

#[derive(Debug, Clone, Serialize)]
pub struct DecoherenceRow {
    pub distance: usize,
    pub pairs: usize,
    pub analytic_rate: f64,
    pub fitted_rate: f64,
    pub relative_deviation: f64,
    pub crossing_time: f64,
}

#[derive(Debug, Clone, Serialize)]
struct DecoherenceResults<'a> {
    gamma: f64,
    b: f64,
    epsilon: f64,
    max_relative_deviation: f64,
    ode_check_time: Option<f64>,
    ode_max_deviation: Option<f64>,
    rows: &'a [DecoherenceRow],
}

/// Analytic and fitted decay rate for every distance `|j − i|` from the
/// diagonal, with the ε-crossing times.
pub fn cmd_decoherence_map(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let model = cfg.model()?;
    let (coeffs, _) = resolve_coefficients(cfg)?;
    let dynamics = Dephasing::new(model, coeffs);
    let times = cfg.time.times();
    let n = model.n_sites() as i32;
    let gamma = coeffs.gamma();

    let mut rows = Vec::new();
    for distance in 1..model.dim() {
        // entry (0, distance) of the all-ones observable
        let samples: Vec<f64> = times
            .iter()
            .map(|&t| dynamics.propagator_factor(0, distance, t).norm())
            .collect();
        let analytic_rate = gamma * (distance as f64).powi(2) / 4f64.powi(n - 1);
        let fitted_rate = log_linear_fit(&times, &samples).map_or(f64::NAN, |(slope, _, _)| -slope);
        let relative_deviation = if analytic_rate > 0.0 {
            (fitted_rate - analytic_rate).abs() / analytic_rate
        } else {
            fitted_rate.abs()
        };
        let crossing_time = if gamma > 0.0 {
            dynamics.decoherence_time(0, distance, cfg.decoherence.epsilon)?
        } else {
            f64::INFINITY
        };
        rows.push(DecoherenceRow {
            distance,
            pairs: model.dim() - distance,
            analytic_rate,
            fitted_rate,
            relative_deviation,
            crossing_time,
        });
    }

    let mut table = Table::new(
        "decoherence_map",
        &["distance", "pairs", "analytic_rate", "fitted_rate", "relative_deviation", "crossing_time"],
    );
    for r in &rows {
        table.push(vec![
            r.distance.into(),
            r.pairs.into(),
            r.analytic_rate.into(),
            r.fitted_rate.into(),
            r.relative_deviation.into(),
            r.crossing_time.into(),
        ]);
    }
    let max_dev = rows.iter().map(|r| r.relative_deviation).fold(0.0, f64::max);

    // cross-check the closed form against direct integration
    let ode_check_time = times.iter().copied().find(|&t| t > 0.0);
    let ode_max_deviation = match ode_check_time {
        Some(t) => {
            let x = Observable::new(DMatrix::from_element(model.dim(), model.dim(), Complex64::ONE))?;
            let numeric = dynamics.evolve_ode(&x, t, cfg.tolerances.ode_step)?;
            Some(dynamics.evolve(&x, t)?.max_abs_diff(&numeric))
        }
        None => None,
    };
    let passed = max_dev <= 1e-9 && ode_max_deviation.is_none_or(|d| d <= 1e-6);
    let results = DecoherenceResults {
        gamma,
        b: coeffs.b(),
        epsilon: cfg.decoherence.epsilon,
        max_relative_deviation: max_dev,
        ode_check_time,
        ode_max_deviation,
        rows: &rows,
    };
    Ok(CommandOutput {
        name: "decoherence_map",
        summary: Summary::new("decoherence-map", cfg, passed, results).to_json(),
        tables: vec![table],
        outcome: if passed {
            Ok(())
        } else {
            Err(CliError::Numerical(format!(
                "fitted rates deviate by {max_dev:e}, integration by {ode_max_deviation:?}"
            )))
        },
    })
}

#[derive(Debug, Clone, Serialize)]
struct TheoremResults {
    observable: &'static str,
    gamma: f64,
    b: f64,
    predicted_log_slope: f64,
    fitted_log_slope: Option<f64>,
    limit_value: f64,
    tol: f64,
    t_tol: Option<f64>,
    failure: Option<String>,
}

/// Distance of `⟨T_t X⟩_Λ` from its long-time limit `⟨P X⟩_Λ` over the
/// time grid, for a seeded random state and Hermitian observable.
pub fn cmd_theorem(cfg: &RunConfig, diagonal_observable: bool) -> Result<CommandOutput, CliError> {
    let model = cfg.model()?;
    let (coeffs, _) = resolve_coefficients(cfg)?;
    let dynamics = Dephasing::new(model, coeffs);
    let mut rng = seeded_rng(cfg.seed);
    let rho = random_density_matrix(&mut rng, model.dim());
    let mut x = random_hermitian(&mut rng, model.dim());
    if diagonal_observable {
        x = conditional_expectation(&x);
    }
    let times = cfg.time.times();
    let n = model.n_sites() as i32;

    let mut table = Table::new("theorem", &["t", "distance", "envelope", "ln_distance"]);
    let mut distances = Vec::with_capacity(times.len());
    for &t in &times {
        let d = limit_distance(&dynamics, &rho, &x, t)?;
        let env = limit_envelope(&dynamics, &rho, &x, t);
        table.push(vec![t.into(), d.into(), env.into(), d.ln().into()]);
        distances.push(d);
    }
    let half = times.len() / 2;
    let fitted = log_linear_fit(&times[half..], &distances[half..]).map(|(s, _, _)| s);

    let limit_value = rho.expectation(&conditional_expectation(&x))?.re;
    let check = verify_limit_theorem(&rho, &x, &dynamics, cfg.tolerances.theorem, &times);
    let (t_tol, failure, outcome) = match check {
        Ok(r) => (Some(r.t_tol), None, Ok(())),
        Err(e @ (Error::HorizonExceeded { .. } | Error::EnvelopeViolated { .. })) => {
            (None, Some(e.to_string()), Err(CliError::Numerical(e.to_string())))
        }
        Err(e) => return Err(e.into()),
    };
    let results = TheoremResults {
        observable: if diagonal_observable { "diagonal" } else { "random_hermitian" },
        gamma: coeffs.gamma(),
        b: coeffs.b(),
        predicted_log_slope: -coeffs.gamma() / 4f64.powi(n - 1),
        fitted_log_slope: fitted,
        limit_value,
        tol: cfg.tolerances.theorem,
        t_tol,
        failure,
    };
    Ok(CommandOutput {
        name: "theorem",
        summary: Summary::new("theorem", cfg, outcome.is_ok(), results).to_json(),
        tables: vec![table],
        outcome,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PointerRow {
    pub s: f64,
    pub n_sites: usize,
    pub rank: usize,
    pub trace: f64,
    pub error: f64,
    pub bound: f64,
    pub within_bound: bool,
    pub invariant: bool,
    pub invariance_check: &'static str,
}

/// Up to `count` times spread evenly over the grid, endpoints included.
fn subsample(times: &[f64], count: usize) -> Vec<f64> {
    if times.len() <= count {
        return times.to_vec();
    }
    (0..count)
        .map(|k| times[k * (times.len() - 1) / (count - 1)])
        .collect()
}

/// Projections with prescribed trace across a sweep of chain sizes, and
/// their invariance under the dynamics.
pub fn cmd_pointer(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let (coeffs, _) = resolve_coefficients(cfg)?;
    let check_times = subsample(&cfg.time.times(), 11);
    let mut rows = Vec::new();
    for &s in &cfg.pointer.s_values {
        for n in cfg.pointer.n_min..=cfg.pointer.n_max {
            let model = SpinChainModel::new(n, cfg.model.lambda, cfg.model.beta)?;
            let dynamics = Dephasing::new(model, coeffs);
            let e = projection_with_trace(s, &model)?;
            let trace = e.normalized_trace();
            let bound = 0.5f64.powi(n as i32 + 1);
            let (invariant, method) = if n <= DENSE_CHECK_MAX_SITES {
                let dense = e.to_observable();
                let ok = check_times
                    .iter()
                    .map(|&t| dynamics.evolve(&dense, t))
                    .collect::<Result<Vec<Observable>, _>>()?
                    .iter()
                    .all(|evolved| *evolved == dense);
                (ok, "dense")
            } else {
                // off-diagonal entries are zero and stay zero; the diagonal
                // factors decide invariance
                let ok = check_times.iter().all(|&t| {
                    (0..model.dim()).all(|i| dynamics.propagator_factor(i, i, t) == Complex64::ONE)
                });
                (ok, "diagonal_factors")
            };
            rows.push(PointerRow {
                s,
                n_sites: n,
                rank: e.rank(),
                trace,
                error: (trace - s).abs(),
                bound,
                within_bound: (trace - s).abs() <= bound,
                invariant,
                invariance_check: method,
            });
        }
    }
    let mut table = Table::new(
        "pointer",
        &["s", "n_sites", "rank", "trace", "error", "bound", "within_bound", "invariant", "invariance_check"],
    );
    for r in &rows {
        table.push(vec![
            r.s.into(),
            r.n_sites.into(),
            r.rank.into(),
            r.trace.into(),
            r.error.into(),
            r.bound.into(),
            r.within_bound.into(),
            r.invariant.into(),
            r.invariance_check.into(),
        ]);
    }
    let passed = rows.iter().all(|r| r.within_bound && r.invariant);
    Ok(CommandOutput {
        name: "pointer",
        summary: Summary::new("pointer", cfg, passed, &rows).to_json(),
        tables: vec![table],
        outcome: if passed {
            Ok(())
        } else {
            Err(CliError::Numerical("a projection missed its trace bound or was not invariant".into()))
        },
    })
}

/// Runs the acceptance suite. Per-criterion lines go to `log`.
pub fn cmd_verify(cfg: &RunConfig, mut log: impl FnMut(&acceptance::CriterionResult)) -> CommandOutput {
    let results = acceptance::run_all_with(|r| log(r));
    let passed = results.iter().all(|r| r.passed);
    let mut table = Table::new("verify", &["criterion", "name", "status", "detail"]);
    for r in &results {
        table.push(vec![(r.id as usize).into(), r.name.into(), r.passed.into(), r.detail.clone().into()]);
    }
    let failed: Vec<String> = results.iter().filter(|r| !r.passed).map(|r| r.id.to_string()).collect();
    CommandOutput {
        name: "verify",
        summary: Summary::new("verify", cfg, passed, &results).to_json(),
        tables: vec![table],
        outcome: if passed {
            Ok(())
        } else {
            Err(CliError::Acceptance(format!("criteria failed: {}", failed.join(", "))))
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fits_exact_lines() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 0.5 * x).collect();
        let (slope, intercept, r2) = linear_fit(&xs, &ys).unwrap();
        assert!((slope + 0.5).abs() < 1e-15);
        assert!((intercept - 2.0).abs() < 1e-15);
        assert!((r2 - 1.0).abs() < 1e-15);
        assert!(linear_fit(&[1.0], &[1.0]).is_none());
    }

    #[test]
    fn subsample_keeps_endpoints() {
        let t: Vec<f64> = (0..101).map(f64::from).collect();
        let s = subsample(&t, 11);
        assert_eq!(s.len(), 11);
        assert_eq!(s[0], 0.0);
        assert_eq!(s[10], 100.0);
    }

    #[test]
    fn b_override_applies() {
        let mut cfg = RunConfig::default();
        cfg.coefficients.b = Some(0.0);
        let (coeffs, bath) = resolve_coefficients(&cfg).unwrap();
        assert_eq!(coeffs.b(), 0.0);
        assert!(bath.b < 0.0);
    }
}
