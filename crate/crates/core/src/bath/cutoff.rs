//! Cutoff families for the bath coupling `g(k) = |k|^½ χ(k)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutoffFamily {
    Gaussian,
    /// Exponential-type decay realised as `sech(k/k₀)`, which is smooth at 0.
    Exponential,
    Algebraic,
}

impl CutoffFamily {
    pub const ALL: [CutoffFamily; 3] = [
        CutoffFamily::Gaussian,
        CutoffFamily::Exponential,
        CutoffFamily::Algebraic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CutoffFamily::Gaussian => "gaussian",
            CutoffFamily::Exponential => "exponential",
            CutoffFamily::Algebraic => "algebraic",
        }
    }
}

impl fmt::Display for CutoffFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CutoffFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(CutoffFamily::Gaussian),
            "exponential" => Ok(CutoffFamily::Exponential),
            "algebraic" => Ok(CutoffFamily::Algebraic),
            other => Err(Error::param(
                "cutoff",
                format!("unknown family `{other}` (expected gaussian, exponential or algebraic)"),
            )),
        }
    }
}

/// An even, real cutoff `χ` with `χ(0) = 1`.
///
/// * gaussian: `χ(k) = exp(−k²/(2k₀²))`
/// * exponential: `χ(k) = sech(k/k₀)`
/// * algebraic: `χ(k) = (1 + (k/k₀)²)^(−p/2)` with `p > 2`
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffFunction {
    family: CutoffFamily,
    scale: f64,
    exponent: f64,
}

impl CutoffFunction {
    pub fn gaussian(scale: f64) -> Result<Self> {
        Self::new(CutoffFamily::Gaussian, scale, None)
    }

    pub fn exponential(scale: f64) -> Result<Self> {
        Self::new(CutoffFamily::Exponential, scale, None)
    }

    pub fn algebraic(scale: f64, exponent: f64) -> Result<Self> {
        Self::new(CutoffFamily::Algebraic, scale, Some(exponent))
    }

    /// `exponent` is only read for the algebraic family; it defaults to 3.
    pub fn new(family: CutoffFamily, scale: f64, exponent: Option<f64>) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::param("k0", format!("scale must be positive and finite, got {scale}")));
        }
        let exponent = match family {
            CutoffFamily::Algebraic => {
                let p = exponent.unwrap_or(3.0);
                if !(p.is_finite() && p > 2.0) {
                    return Err(Error::param(
                        "p",
                        format!("algebraic exponent must exceed 2 for the large-k decay bound, got {p}"),
                    ));
                }
                p
            }
            _ => 0.0,
        };
        Ok(Self { family, scale, exponent })
    }

    pub fn family(&self) -> CutoffFamily {
        self.family
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Algebraic exponent `p`; `None` for the other families.
    pub fn exponent(&self) -> Option<f64> {
        (self.family == CutoffFamily::Algebraic).then_some(self.exponent)
    }

    pub fn eval(&self, k: f64) -> f64 {
        let u = k / self.scale;
        match self.family {
            CutoffFamily::Gaussian => (-0.5 * u * u).exp(),
            CutoffFamily::Exponential => 1.0 / u.cosh(),
            CutoffFamily::Algebraic => (1.0 + u * u).powf(-0.5 * self.exponent),
        }
    }

    /// `χ²(k)`, evaluated directly rather than by squaring.
    pub fn squared(&self, k: f64) -> f64 {
        let u = k / self.scale;
        match self.family {
            CutoffFamily::Gaussian => (-u * u).exp(),
            CutoffFamily::Exponential => {
                let s = 1.0 / u.cosh();
                s * s
            }
            CutoffFamily::Algebraic => (1.0 + u * u).powf(-self.exponent),
        }
    }

    /// Upper bound on `∫_K^∞ χ²(k) dk`.
    pub fn tail_l1(&self, cut: f64) -> f64 {
        let k0 = self.scale;
        let u = cut / k0;
        match self.family {
            // erfc(u) ≤ exp(−u²)/(u√π)
            CutoffFamily::Gaussian => k0 * (-u * u).exp() / (2.0 * u),
            // sech² ≤ 4 e^{−2u}
            CutoffFamily::Exponential => 2.0 * k0 * (-2.0 * u).exp(),
            CutoffFamily::Algebraic => {
                let p = self.exponent;
                k0 * u.powf(1.0 - 2.0 * p) / (2.0 * p - 1.0)
            }
        }
    }

    /// Upper bound on `∫_K^∞ k χ²(k) dk`.
    pub fn tail_first_moment(&self, cut: f64) -> f64 {
        let k0 = self.scale;
        let u = cut / k0;
        match self.family {
            CutoffFamily::Gaussian => 0.5 * k0 * k0 * (-u * u).exp(),
            CutoffFamily::Exponential => (-2.0 * u).exp() * (2.0 * cut * k0 + k0 * k0),
            CutoffFamily::Algebraic => {
                let p = self.exponent;
                k0 * k0 * u.powf(2.0 - 2.0 * p) / (2.0 * p - 2.0)
            }
        }
    }

    /// Smallest `K` (to within a relative 1e-6) for which `bound(K) ≤ tol`.
    /// `bound` must be decreasing for `K ≥ k₀`.
    pub(crate) fn truncation_point(&self, tol: f64, bound: impl Fn(f64) -> f64) -> f64 {
        let mut hi = self.scale;
        while bound(hi) > tol {
            hi *= 2.0;
        }
        let mut lo = if hi > self.scale { 0.5 * hi } else { hi };
        if lo == hi {
            return hi;
        }
        while hi - lo > 1e-6 * hi {
            let mid = 0.5 * (lo + hi);
            if bound(mid) > tol {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}
