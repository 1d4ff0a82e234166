//! How many papers a category needs before its share in an overlay can be
//! trusted, given a probability `p` that a paper is assigned correctly.
//!
//! With a one-sided significance level `sigma` and its standard-normal
//! quantile `z`, the smallest sample guaranteeing at least a proportion `m`
//! of correctly assigned papers is
//!
//! ```text
//! N >= (z / (p - m))^2 * p * (1 - p)
//! ```
//!
//! which follows from the normal approximation of the binomial,
//! `z = N (p - m) / sqrt(N p (1 - p))`. The approximation is only valid
//! for `N >= 50` and `N p (1 - p) >= 9`.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReliabilityParams {
    pub p: f64,
    pub m: f64,
    pub sigma: f64,
    pub z: f64,
}

impl ReliabilityParams {
    pub fn new(p: f64, m: f64, sigma: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "p must be in (0, 1), got {p}"
            )));
        }
        if !(m > 0.0 && m < p) {
            return Err(Error::InvalidParameter(format!(
                "m must be in (0, p) = (0, {p}), got {m}"
            )));
        }
        if !(sigma > 0.0 && sigma < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "sigma must be in (0, 0.5), got {sigma}"
            )));
        }
        Ok(Self {
            p,
            m,
            sigma,
            z: one_sided_quantile(sigma),
        })
    }
}

/// `z` such that `P(Z > z) = sigma` for a standard normal `Z`.
pub fn one_sided_quantile(sigma: f64) -> f64 {
    Normal::standard().inverse_cdf(1.0 - sigma)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rounding {
    /// Round half up.
    #[default]
    Nearest,
    /// Always round up.
    Ceiling,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleSize {
    pub n: u64,
    pub unrounded: f64,
    pub params: ReliabilityParams,
    /// Whether the normal approximation holds at `n`.
    pub normal_approx_valid: bool,
}

pub fn min_sample_size(p: f64, m: f64, sigma: f64, rounding: Rounding) -> Result<SampleSize> {
    let params = ReliabilityParams::new(p, m, sigma)?;
    let unrounded = (params.z / (p - m)).powi(2) * p * (1.0 - p);
    let n = match rounding {
        Rounding::Nearest => (unrounded + 0.5).floor(),
        Rounding::Ceiling => unrounded.ceil(),
    } as u64;
    Ok(SampleSize {
        n,
        unrounded,
        params,
        normal_approx_valid: check_normal_approx(n, p),
    })
}

/// `N >= 50` and `N p (1 - p) >= 9`.
pub fn check_normal_approx(n: u64, p: f64) -> bool {
    n >= 50 && n as f64 * p * (1.0 - p) >= 9.0
}

/// `z = N (p - m) / sqrt(N p (1 - p))`; `n` may be fractional.
pub fn reliability_zscore(n: f64, p: f64, m: f64) -> f64 {
    n * (p - m) / (n * p * (1.0 - p)).sqrt()
}
