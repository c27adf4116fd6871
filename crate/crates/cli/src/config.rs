//! Run configuration: a TOML file with dotted sections, overridden by flags.
//!
//! ```toml
//! seed = 7
//!
//! [model]
//! n_sites = 4
//! lambda = 1.0
//! beta = 1.0
//!
//! [cutoff]
//! family = "gaussian"   # gaussian | exponential | algebraic
//! k0 = 1.0
//! p = 3.0               # algebraic only
//!
//! [coefficients]
//! source = "closed_form"  # closed_form | bath_numerical
//! # b = 0.0             # optional override of the Hamiltonian coefficient
//! t_max = 200.0
//!
//! [tolerances]
//! quadrature = 1e-4
//! ode_step = 1e-3
//! theorem = 1e-8
//!
//! [time]
//! start = 0.0
//! end = 500.0
//! points = 501
//! spacing = "linear"    # linear | log
//! ```

use std::path::Path;

use dephasing_core::bath::{CutoffFamily, CutoffFunction, SpectralFunctions};
use dephasing_core::dynamics::CoefficientSource;
use dephasing_core::model::DEFAULT_MAX_SITES;
use dephasing_core::SpinChainModel;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub model: ModelConfig,
    pub cutoff: CutoffConfig,
    pub coefficients: CoefficientConfig,
    pub tolerances: Tolerances,
    pub time: TimeGrid,
    pub decoherence: DecoherenceConfig,
    pub pointer: PointerConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            model: ModelConfig::default(),
            cutoff: CutoffConfig::default(),
            coefficients: CoefficientConfig::default(),
            tolerances: Tolerances::default(),
            time: TimeGrid::default(),
            decoherence: DecoherenceConfig::default(),
            pointer: PointerConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub n_sites: usize,
    pub lambda: f64,
    pub beta: f64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            n_sites: 4,
            lambda: 1.0,
            beta: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CutoffConfig {
    pub family: CutoffFamily,
    pub k0: f64,
    pub p: f64,
}

impl Default for CutoffConfig {
    fn default() -> Self {
        Self {
            family: CutoffFamily::Gaussian,
            k0: 1.0,
            p: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoefficientConfig {
    pub source: CoefficientSource,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    pub t_max: f64,
}

impl Default for CoefficientConfig {
    fn default() -> Self {
        Self {
            source: CoefficientSource::ClosedForm,
            b: None,
            t_max: 200.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub quadrature: f64,
    pub ode_step: f64,
    pub theorem: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            quadrature: 1e-4,
            ode_step: 1e-3,
            theorem: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeGrid {
    pub start: f64,
    pub end: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            start: 0.0,
            end: 500.0,
            points: 501,
            spacing: Spacing::Linear,
        }
    }
}

impl TimeGrid {
    pub fn times(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let last = (self.points - 1) as f64;
        let mut out: Vec<f64> = (0..self.points)
            .map(|k| {
                let f = k as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.start + (self.end - self.start) * f,
                    Spacing::Log => self.start * (self.end / self.start).powf(f),
                }
            })
            .collect();
        // pin the endpoints against rounding
        out[0] = self.start;
        *out.last_mut().unwrap() = self.end;
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecoherenceConfig {
    /// Coherence fraction for the crossing times.
    pub epsilon: f64,
}

impl Default for DecoherenceConfig {
    fn default() -> Self {
        Self { epsilon: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PointerConfig {
    pub s_values: Vec<f64>,
    pub n_min: usize,
    pub n_max: usize,
}

impl Default for PointerConfig {
    fn default() -> Self {
        Self {
            s_values: vec![0.0, 0.25, 1.0 / 3.0, 0.5, 2.0 / 3.0, 0.9, 1.0],
            n_min: 1,
            n_max: DEFAULT_MAX_SITES,
        }
    }
}

/// Flag values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub n_sites: Option<usize>,
    pub lambda: Option<f64>,
    pub beta: Option<f64>,
    pub cutoff: Option<CutoffFamily>,
    pub k0: Option<f64>,
    pub p: Option<f64>,
    pub quadrature_tol: Option<f64>,
    pub theorem_tol: Option<f64>,
    pub s_values: Option<Vec<f64>>,
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(CliError::Validation(format!("{name} must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.n_sites {
            self.model.n_sites = v;
        }
        if let Some(v) = o.lambda {
            self.model.lambda = v;
        }
        if let Some(v) = o.beta {
            self.model.beta = v;
        }
        if let Some(v) = o.cutoff {
            self.cutoff.family = v;
        }
        if let Some(v) = o.k0 {
            self.cutoff.k0 = v;
        }
        if let Some(v) = o.p {
            self.cutoff.p = v;
        }
        if let Some(v) = o.quadrature_tol {
            self.tolerances.quadrature = v;
        }
        if let Some(v) = o.theorem_tol {
            self.tolerances.theorem = v;
        }
        if let Some(v) = &o.s_values {
            self.pointer.s_values = v.clone();
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.model()?;
        self.cutoff()?;
        positive("coefficients.t_max", self.coefficients.t_max)?;
        if let Some(b) = self.coefficients.b {
            if !b.is_finite() {
                return Err(CliError::Validation("coefficients.b must be finite".into()));
            }
        }
        positive("tolerances.quadrature", self.tolerances.quadrature)?;
        positive("tolerances.ode_step", self.tolerances.ode_step)?;
        positive("tolerances.theorem", self.tolerances.theorem)?;

        let t = &self.time;
        if t.points == 0 {
            return Err(CliError::Validation("time.points must be at least 1".into()));
        }
        if !(t.start.is_finite() && t.end.is_finite() && t.start >= 0.0 && t.end >= t.start) {
            return Err(CliError::Validation(format!(
                "time grid must satisfy 0 <= start <= end, got [{}, {}]",
                t.start, t.end
            )));
        }
        if t.spacing == Spacing::Log && t.start <= 0.0 {
            return Err(CliError::Validation("log spacing needs time.start > 0".into()));
        }

        let eps = self.decoherence.epsilon;
        if !(eps > 0.0 && eps < 1.0) {
            return Err(CliError::Validation(format!("decoherence.epsilon must lie in (0, 1), got {eps}")));
        }
        let p = &self.pointer;
        if let Some(s) = p.s_values.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(CliError::Validation(format!("pointer s value {s} outside [0, 1]")));
        }
        if p.n_min == 0 || p.n_min > p.n_max || p.n_max > DEFAULT_MAX_SITES {
            return Err(CliError::Validation(format!(
                "pointer sweep needs 1 <= n_min <= n_max <= {DEFAULT_MAX_SITES}"
            )));
        }
        Ok(())
    }

    pub fn model(&self) -> Result<SpinChainModel, CliError> {
        Ok(SpinChainModel::new(self.model.n_sites, self.model.lambda, self.model.beta)?)
    }

    pub fn cutoff(&self) -> Result<CutoffFunction, CliError> {
        Ok(CutoffFunction::new(self.cutoff.family, self.cutoff.k0, Some(self.cutoff.p))?)
    }

    pub fn spectral_functions(&self) -> Result<SpectralFunctions, CliError> {
        Ok(SpectralFunctions::new(self.model.beta, self.cutoff()?)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_roundtrip_through_toml() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        cfg.validate().unwrap();
    }

    #[test]
    fn partial_files_fill_defaults() {
        let cfg = RunConfig::from_toml("seed = 3\n[model]\nbeta = 2.0\n[cutoff]\nfamily = \"algebraic\"\n").unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.model.beta, 2.0);
        assert_eq!(cfg.model.n_sites, 4);
        assert_eq!(cfg.cutoff.family, CutoffFamily::Algebraic);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml("[model]\nn_site = 3\n").is_err());
    }

    #[test]
    fn flags_win() {
        let mut cfg = RunConfig::from_toml("[model]\nlambda = 0.5\n").unwrap();
        cfg.apply(&Overrides {
            lambda: Some(2.0),
            cutoff: Some(CutoffFamily::Exponential),
            ..Overrides::default()
        });
        assert_eq!(cfg.model.lambda, 2.0);
        assert_eq!(cfg.cutoff.family, CutoffFamily::Exponential);
    }

    #[test]
    fn validation_failures() {
        let mut cfg = RunConfig::default();
        cfg.model.beta = -1.0;
        assert!(cfg.validate().is_err());

        let mut cfg = RunConfig::default();
        cfg.time.end = -1.0;
        assert!(cfg.validate().is_err());

        let mut cfg = RunConfig::default();
        cfg.time.spacing = Spacing::Log;
        assert!(cfg.validate().is_err());

        let mut cfg = RunConfig::default();
        cfg.model.n_sites = 13;
        assert!(cfg.validate().is_err());

        let mut cfg = RunConfig::default();
        cfg.pointer.s_values = vec![1.5];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn grids() {
        let lin = TimeGrid { start: 0.0, end: 1.0, points: 5, spacing: Spacing::Linear };
        assert_eq!(lin.times(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let log = TimeGrid { start: 0.01, end: 100.0, points: 5, spacing: Spacing::Log };
        let t = log.times();
        assert_eq!(t[0], 0.01);
        assert_eq!(t[4], 100.0);
        assert!((t[2] - 1.0).abs() < 1e-12);
        let single = TimeGrid { start: 2.0, end: 2.0, points: 1, spacing: Spacing::Linear };
        assert_eq!(single.times(), vec![2.0]);
    }
}
