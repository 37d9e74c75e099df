//! Analytic threshold calculators for CC and OCC decodability.
//!
//! These evaluate the chunk/hyperchunk failure conditions and the outer-bound
//! intervals with every intermediate quantity exposed for auditing. The
//! big-O / big-Omega suppressed constants are surfaced as the single knob
//! `c_hidden`; any output depending on it is advisory (asymptotic order, not
//! a calibrated value).

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BoundsError {
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BoundParams {
    pub l: u32,
    pub lambda: f64,
    pub epsilon: f64,
    pub alpha: u32,
    pub tau: u32,
    pub chi: u32,
    /// Stand-in for the suppressed big-O constant inside the flow-capacity
    /// correction; 0 removes the correction term entirely.
    pub c_hidden: f64,
}

impl BoundParams {
    pub fn validate(&self) -> Result<(), BoundsError> {
        if self.l < 1 {
            return Err(BoundsError::InvalidParameter("l must be >= 1".into()));
        }
        if self.lambda <= 0.0 {
            return Err(BoundsError::InvalidParameter("lambda must be > 0".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(BoundsError::InvalidParameter(
                "epsilon must be in (0,1)".into(),
            ));
        }
        if self.c_hidden < 0.0 {
            return Err(BoundsError::InvalidParameter(
                "c_hidden must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Audit record for the CC per-chunk failure condition: the chunk is
/// undecodable with probability at most epsilon when `alpha <= rhs`.
#[derive(Debug, Clone, Serialize)]
pub struct CcConditionAudit {
    pub mu: f64,
    pub correction: f64,
    pub phi: f64,
    pub epsilon_dot: f64,
    pub term_hop_log: f64,
    pub term_eps_log: f64,
    pub rhs: f64,
    pub alpha: f64,
    pub satisfied: bool,
    pub advisory: bool,
}

pub fn cc_chunk_failure_condition(p: &BoundParams) -> Result<CcConditionAudit, BoundsError> {
    p.validate()?;
    let l = f64::from(p.l);
    let alpha = f64::from(p.alpha);
    let eps = p.epsilon;
    let eps_dot = eps / 2.0;
    let mu = (1.0 + p.lambda) * alpha;
    let inner = (l.powi(3) / mu) * (l * mu / eps).ln();
    if inner < 0.0 {
        return Err(BoundsError::DomainError(format!(
            "negative correction argument {inner}"
        )));
    }
    let correction = p.c_hidden * inner.cbrt();
    let phi = (1.0 - correction) * mu;
    if phi <= 0.0 {
        return Err(BoundsError::DomainError(format!(
            "phi = {phi} is nonpositive; correction term dominates"
        )));
    }
    let term_hop_log = l * (l * phi / eps_dot).log2();
    let term_eps_log = (1.0 / eps).log2();
    let rhs = phi - term_hop_log - term_eps_log - l - 1.0;
    Ok(CcConditionAudit {
        mu,
        correction,
        phi,
        epsilon_dot: eps_dot,
        term_hop_log,
        term_eps_log,
        rhs,
        alpha,
        satisfied: alpha <= rhs,
        advisory: p.c_hidden != 0.0,
    })
}

/// Audit record for the OCC per-hyperchunk failure condition: the hyperchunk
/// is bad with probability at most epsilon when `lhs <= rhs`, given the
/// overlap side condition.
#[derive(Debug, Clone, Serialize)]
pub struct OccConditionAudit {
    pub mu: f64,
    pub r: f64,
    pub correction: f64,
    pub phi: f64,
    pub epsilon_dot: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    pub gamma: f64,
    pub side_condition_threshold: f64,
    pub side_condition_ok: bool,
    pub advisory: bool,
}

pub fn occ_hyperchunk_failure_condition(p: &BoundParams) -> Result<OccConditionAudit, BoundsError> {
    p.validate()?;
    if p.tau < 2 {
        return Err(BoundsError::InvalidParameter("tau must be >= 2".into()));
    }
    if p.chi < 1 {
        return Err(BoundsError::InvalidParameter("chi must be >= 1".into()));
    }
    let l = f64::from(p.l);
    let alpha = f64::from(p.alpha);
    let tau = f64::from(p.tau);
    let chi = f64::from(p.chi);
    let eps = p.epsilon;
    let eps_dot = eps / 2.0;
    let mu = (1.0 + p.lambda) * alpha / tau;
    let r = (chi - 1.0) / tau + 1.0;
    let inner = (l.powi(3) / mu) * (l * mu * chi / eps).ln();
    if inner < 0.0 {
        return Err(BoundsError::DomainError(format!(
            "negative correction argument {inner}"
        )));
    }
    let correction = p.c_hidden * inner.cbrt();
    let phi = (1.0 - correction) * mu;
    if phi <= 0.0 {
        return Err(BoundsError::DomainError(format!(
            "phi = {phi} is nonpositive; correction term dominates"
        )));
    }
    let lhs = r * alpha;
    let rhs =
        chi * phi - chi * l * (l * phi * chi / eps_dot).log2() - (1.0 / eps_dot).log2() - chi * l;
    let gamma = alpha * (tau - 1.0) / tau;
    // tau_e * tau = tau^2 / (tau - 1)
    let side_condition_threshold = tau * tau / (tau - 1.0) * lhs.sqrt();
    Ok(OccConditionAudit {
        mu,
        r,
        correction,
        phi,
        epsilon_dot: eps_dot,
        lhs,
        rhs,
        satisfied: lhs <= rhs,
        gamma,
        side_condition_threshold,
        side_condition_ok: gamma >= side_condition_threshold,
        advisory: p.c_hidden != 0.0,
    })
}

/// Outer-bound intervals on MER and PER for OCC: the tight outer upper bound
/// lies between eps^(chi+tau-1) and eps^2, scaled by q for the message rate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OuterBounds {
    pub mer_low: f64,
    pub mer_high: f64,
    pub per_low: f64,
    pub per_high: f64,
}

pub fn theorem_outer_bounds(epsilon: f64, q: u32, chi: u32, tau: u32) -> OuterBounds {
    assert!((0.0..1.0).contains(&epsilon), "epsilon must be in [0,1)");
    assert!(q >= 1 && chi >= 1 && tau >= 1, "inputs must be positive");
    let exp = (chi + tau - 1) as i32;
    let low = epsilon.powi(exp);
    let high = epsilon.powi(2);
    OuterBounds {
        mer_low: low * f64::from(q),
        mer_high: high * f64::from(q),
        per_low: low,
        per_high: high,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApertureMode {
    Cc,
    Occ,
}

/// Order-of-growth lower bound on the aperture size. Advisory only: the
/// asymptotic constant is unknown and enters through `c_hidden`.
pub fn aperture_lower_bound(p: &BoundParams, mode: ApertureMode) -> Result<f64, BoundsError> {
    p.validate()?;
    let l = f64::from(p.l);
    let tau = f64::from(p.tau);
    let base = l.powi(3) / p.lambda.powi(3);
    let arg = l / (p.lambda * p.epsilon);
    let value = match mode {
        ApertureMode::Cc => p.c_hidden * base * arg.ln(),
        ApertureMode::Occ => p.c_hidden * base * tau * (arg * tau).ln(),
    };
    Ok(value)
}
