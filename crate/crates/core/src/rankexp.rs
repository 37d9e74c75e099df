//! Banded random binary matrix classes and Monte Carlo rank experiments.
//!
//! Four variants: regular/irregular x symmetric/asymmetric. Each row picks an
//! aperture start among `chi` positions spaced `alpha - gamma` apart and
//! fills the aperture with i.i.d. uniform bits. Symmetric apertures wrap
//! end-around; asymmetric apertures never wrap (the last aperture ends at
//! column k, which is why chi = (k - gamma)/(alpha - gamma)).

use crate::gf2::{self, random_bit_vector, BitMatrix, Window};
use crate::seed::rng_from;
use crate::stats::clopper_pearson;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RankExpError {
    #[error("spec violation: {0}")]
    SpecViolation(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandedMatrixSpec {
    pub n: usize,
    pub k: usize,
    pub alpha: usize,
    pub gamma: usize,
    pub regular: bool,
    pub symmetric: bool,
}

impl BandedMatrixSpec {
    /// Validate the divisibility constraints and return the aperture count.
    pub fn chi(&self) -> Result<usize, RankExpError> {
        if self.gamma >= self.alpha {
            return Err(RankExpError::SpecViolation(format!(
                "gamma ({}) must be smaller than alpha ({})",
                self.gamma, self.alpha
            )));
        }
        if self.alpha > self.k {
            return Err(RankExpError::SpecViolation(format!(
                "alpha ({}) must not exceed k ({})",
                self.alpha, self.k
            )));
        }
        let stride = self.alpha - self.gamma;
        let chi = if self.symmetric {
            if self.k % stride != 0 {
                return Err(RankExpError::SpecViolation(format!(
                    "symmetric: alpha - gamma ({stride}) must divide k ({})",
                    self.k
                )));
            }
            self.k / stride
        } else {
            if (self.k - self.gamma) % stride != 0 {
                return Err(RankExpError::SpecViolation(format!(
                    "asymmetric: alpha - gamma ({stride}) must divide k - gamma ({})",
                    self.k - self.gamma
                )));
            }
            (self.k - self.gamma) / stride
        };
        if self.regular && self.n % chi != 0 {
            return Err(RankExpError::SpecViolation(format!(
                "regular: chi ({chi}) must divide n ({})",
                self.n
            )));
        }
        Ok(chi)
    }
}

/// Draw one matrix of the spec's class.
pub fn build_banded(spec: &BandedMatrixSpec, seed: u64) -> Result<BitMatrix, RankExpError> {
    let mut rng = rng_from(seed, &[]);
    build_banded_with(spec, &mut rng)
}

pub fn build_banded_with<R: Rng>(
    spec: &BandedMatrixSpec,
    rng: &mut R,
) -> Result<BitMatrix, RankExpError> {
    let chi = spec.chi()?;
    let stride = spec.alpha - spec.gamma;
    let mut m = BitMatrix::new(spec.k);
    for row in 0..spec.n {
        let aperture = if spec.regular {
            row / (spec.n / chi)
        } else {
            rng.random_range(0..chi)
        };
        let start = aperture * stride;
        debug_assert!(spec.symmetric || start + spec.alpha <= spec.k);
        m.push_row(random_bit_vector(
            spec.k,
            Window::Range {
                start,
                width: spec.alpha,
            },
            rng,
        ));
    }
    Ok(m)
}

#[derive(Debug, Clone, Serialize)]
pub struct RankTrialResult {
    pub trials: u64,
    pub failures: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// Monte Carlo estimate of Pr[rank(M) < k] with a 95% Clopper-Pearson
/// interval. Trial t uses a seed derived from (seed, t), so the result does
/// not depend on execution order.
pub fn estimate_failure(
    spec: &BandedMatrixSpec,
    trials: u64,
    seed: u64,
) -> Result<RankTrialResult, RankExpError> {
    spec.chi()?;
    let failures = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_from(seed, &[t]);
            let m = build_banded_with(spec, &mut rng).expect("spec validated");
            u64::from(gf2::rank(&m) < spec.k)
        })
        .sum();
    let p_hat = if trials == 0 {
        0.0
    } else {
        failures as f64 / trials as f64
    };
    let (ci_low, ci_high) = clopper_pearson(failures, trials, 0.95);
    Ok(RankTrialResult {
        trials,
        failures,
        p_hat,
        ci_low,
        ci_high,
    })
}

/// Arithmetic check of the conjectured regime: capacity condition
/// k <= n - log2(1/epsilon) and overlap threshold gamma >= 2 sqrt(k)
/// (symmetric) or gamma >= tau_e tau sqrt(k) (asymmetric), with
/// tau_e tau = alpha^2 / (gamma (alpha - gamma)).
#[derive(Debug, Clone, Serialize)]
pub struct RegimeVerdict {
    pub capacity_ok: bool,
    pub capacity_rhs: f64,
    pub gamma_ok: bool,
    pub gamma_threshold: usize,
    pub symmetric: bool,
}

pub fn conjecture_regime_check(spec: &BandedMatrixSpec, epsilon: f64) -> RegimeVerdict {
    assert!(epsilon > 0.0 && epsilon < 1.0, "epsilon must be in (0,1)");
    let capacity_rhs = spec.n as f64 - (1.0 / epsilon).log2();
    let sqrt_k = (spec.k as f64).sqrt();
    let threshold = if spec.symmetric {
        2.0 * sqrt_k
    } else {
        let a = spec.alpha as f64;
        let g = spec.gamma as f64;
        a * a / (g * (a - g)) * sqrt_k
    };
    // gamma is a packet count, so round the threshold up
    let gamma_threshold = threshold.ceil() as usize;
    RegimeVerdict {
        capacity_ok: spec.k as f64 <= capacity_rhs,
        capacity_rhs,
        gamma_ok: spec.gamma >= gamma_threshold,
        gamma_threshold,
        symmetric: spec.symmetric,
    }
}
