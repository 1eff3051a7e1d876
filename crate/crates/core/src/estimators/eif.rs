//! Efficient influence functions for each missingness regime.
//!
//! Every variant has the same skeleton,
//!
//! `phi = (A/p) * T - (1-A) pi / ((1-pi) p) * C - (A/p) * theta`,
//!
//! where `T` is the treated-block content, `C` the control-block content,
//! and `p` estimates `E[A]`. Inverse-probability corrections fire only when
//! the matching observation indicator is 1, so a missing outcome is never
//! touched. `phi` is linear in `theta` with slope `-A/p`, which is what the
//! estimating-equation solver relies on.

use crate::data::{MissingnessRegime, ObservedSample};
use crate::error::{Error, Result};
use crate::nuisance::{Arm, Nuisances};

#[inline]
fn check_p_hat(p_hat: f64) -> Result<()> {
    if !(p_hat > 0.0 && p_hat <= 1.0) {
        return Err(Error::InvalidProbability(p_hat));
    }
    Ok(())
}

#[inline]
fn require_y1(s: &ObservedSample) -> Result<f64> {
    s.y1.ok_or(Error::MissingInput("influence function needs observed y1".into()))
}

#[inline]
fn require_y0(s: &ObservedSample) -> Result<f64> {
    s.y0.ok_or(Error::MissingInput("influence function needs observed y0".into()))
}

#[inline]
fn finite(v: f64, what: &'static str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFiniteResult(what))
    }
}

/// Control-arm weight `pi / (1 - pi) / p_hat`, for a control sample.
#[inline]
fn odds_weight<N: Nuisances>(s: &ObservedSample, nuis: &N, p_hat: f64) -> Result<f64> {
    let pi = nuis.pi(s)?;
    Ok(pi / (1.0 - pi) / p_hat)
}

/// Influence function under covariate-driven missingness of the
/// pre-treatment outcome.
pub fn eif_pre_simple<N: Nuisances>(
    s: &ObservedSample,
    nuis: &N,
    theta: f64,
    p_hat: f64,
) -> Result<f64> {
    check_p_hat(p_hat)?;
    let y1 = require_y1(s)?;
    let mu1_c = nuis.mu1(s, Arm::Control)?;
    let value = if s.a {
        let mu0_t = nuis.mu0(s, Arm::Treated)?;
        let mu0_c = nuis.mu0(s, Arm::Control)?;
        let correction = if s.r0 {
            (require_y0(s)? - mu0_t) / nuis.gamma_r0(s, Arm::Treated)?
        } else {
            0.0
        };
        (y1 - (mu0_t + correction) - mu1_c + mu0_c - theta) / p_hat
    } else {
        let mu0_c = nuis.mu0(s, Arm::Control)?;
        let correction = if s.r0 {
            (require_y0(s)? - mu0_c) / nuis.gamma_r0(s, Arm::Control)?
        } else {
            0.0
        };
        -odds_weight(s, nuis, p_hat)? * (y1 - correction - mu1_c)
    };
    finite(value, "eif_pre_simple")
}

/// Influence function under outcome-dependent missingness of the
/// pre-treatment outcome; brings in the nested regression.
pub fn eif_pre_hard<N: Nuisances>(
    s: &ObservedSample,
    nuis: &N,
    theta: f64,
    p_hat: f64,
) -> Result<f64> {
    check_p_hat(p_hat)?;
    let y1 = require_y1(s)?;
    let mu1_c = nuis.mu1(s, Arm::Control)?;
    let eta = nuis.eta(s)?;
    let value = if s.a {
        let mu0_t = nuis.mu0(s, Arm::Treated)?;
        let correction = if s.r0 {
            (require_y0(s)? - mu0_t) / nuis.gamma_r0(s, Arm::Treated)?
        } else {
            0.0
        };
        (y1 - (mu0_t + correction) - mu1_c + eta - theta) / p_hat
    } else {
        let mu0_c = nuis.mu0(s, Arm::Control)?;
        let correction = if s.r0 {
            (require_y0(s)? - mu0_c) / nuis.gamma_r0(s, Arm::Control)?
        } else {
            0.0
        };
        -odds_weight(s, nuis, p_hat)? * (y1 - (mu0_c + correction) - mu1_c + eta)
    };
    finite(value, "eif_pre_hard")
}

/// Influence function with both outcomes fully observed (the classical
/// doubly robust two-period estimator; see Sant'Anna & Zhao, 2020).
pub fn eif_complete<N: Nuisances>(
    s: &ObservedSample,
    nuis: &N,
    theta: f64,
    p_hat: f64,
) -> Result<f64> {
    check_p_hat(p_hat)?;
    if !s.r0 || !s.r1 {
        return Err(Error::MissingInput(
            "complete-data influence function needs both outcomes observed".into(),
        ));
    }
    let y1 = require_y1(s)?;
    let y0 = require_y0(s)?;
    let content = y1 - y0 - nuis.mu1(s, Arm::Control)? + nuis.mu0(s, Arm::Control)?;
    let value = if s.a {
        (content - theta) / p_hat
    } else {
        -odds_weight(s, nuis, p_hat)? * content
    };
    finite(value, "eif_complete")
}

/// Influence function under covariate-driven missingness of the
/// post-treatment outcome.
pub fn eif_post_simple<N: Nuisances>(
    s: &ObservedSample,
    nuis: &N,
    theta: f64,
    p_hat: f64,
) -> Result<f64> {
    check_p_hat(p_hat)?;
    let y0 = require_y0(s)?;
    let mu0_c = nuis.mu0(s, Arm::Control)?;
    let value = if s.a {
        let mu1_t = nuis.mu1(s, Arm::Treated)?;
        let mu1_c = nuis.mu1(s, Arm::Control)?;
        let correction = if s.r1 {
            (require_y1(s)? - mu1_t) / nuis.gamma_r1(s, Arm::Treated)?
        } else {
            0.0
        };
        ((mu1_t + correction) - y0 - mu1_c + mu0_c - theta) / p_hat
    } else {
        let mu1_c = nuis.mu1(s, Arm::Control)?;
        let correction = if s.r1 {
            (require_y1(s)? - mu1_c) / nuis.gamma_r1(s, Arm::Control)?
        } else {
            0.0
        };
        -odds_weight(s, nuis, p_hat)? * (correction - y0 + mu0_c)
    };
    finite(value, "eif_post_simple")
}

/// Influence function under outcome-dependent missingness of the
/// post-treatment outcome.
pub fn eif_post_hard<N: Nuisances>(
    s: &ObservedSample,
    nuis: &N,
    theta: f64,
    p_hat: f64,
) -> Result<f64> {
    check_p_hat(p_hat)?;
    let y0 = require_y0(s)?;
    let mu0_c = nuis.mu0(s, Arm::Control)?;
    let eta = nuis.eta(s)?;
    let value = if s.a {
        let mu1_t = nuis.mu1(s, Arm::Treated)?;
        let correction = if s.r1 {
            (require_y1(s)? - mu1_t) / nuis.gamma_r1(s, Arm::Treated)?
        } else {
            0.0
        };
        ((mu1_t + correction) - y0 - eta + mu0_c - theta) / p_hat
    } else {
        let mu1_c = nuis.mu1(s, Arm::Control)?;
        let correction = if s.r1 {
            (require_y1(s)? - mu1_c) / nuis.gamma_r1(s, Arm::Control)?
        } else {
            0.0
        };
        -odds_weight(s, nuis, p_hat)? * ((mu1_c + correction) - y0 - eta + mu0_c)
    };
    finite(value, "eif_post_hard")
}

/// Influence function when both outcomes are missing at random given
/// covariates and treatment.
pub fn eif_both_simple<N: Nuisances>(
    s: &ObservedSample,
    nuis: &N,
    theta: f64,
    p_hat: f64,
) -> Result<f64> {
    check_p_hat(p_hat)?;
    let value = if s.a {
        let mu1_t = nuis.mu1(s, Arm::Treated)?;
        let mu0_t = nuis.mu0(s, Arm::Treated)?;
        let mu1_c = nuis.mu1(s, Arm::Control)?;
        let mu0_c = nuis.mu0(s, Arm::Control)?;
        let c1 = if s.r1 {
            (require_y1(s)? - mu1_t) / nuis.gamma_r1(s, Arm::Treated)?
        } else {
            0.0
        };
        let c0 = if s.r0 {
            (require_y0(s)? - mu0_t) / nuis.gamma_r0(s, Arm::Treated)?
        } else {
            0.0
        };
        ((mu1_t + c1) - (mu0_t + c0) - mu1_c + mu0_c - theta) / p_hat
    } else {
        let mu1_c = nuis.mu1(s, Arm::Control)?;
        let mu0_c = nuis.mu0(s, Arm::Control)?;
        let c1 = if s.r1 {
            (require_y1(s)? - mu1_c) / nuis.gamma_r1(s, Arm::Control)?
        } else {
            0.0
        };
        let c0 = if s.r0 {
            (require_y0(s)? - mu0_c) / nuis.gamma_r0(s, Arm::Control)?
        } else {
            0.0
        };
        -odds_weight(s, nuis, p_hat)? * (c1 - c0)
    };
    finite(value, "eif_both_simple")
}

/// Dispatch on the regime.
pub fn eif_value<N: Nuisances>(
    regime: MissingnessRegime,
    s: &ObservedSample,
    nuis: &N,
    theta: f64,
    p_hat: f64,
) -> Result<f64> {
    match regime {
        MissingnessRegime::PreSimple => eif_pre_simple(s, nuis, theta, p_hat),
        MissingnessRegime::PreHard => eif_pre_hard(s, nuis, theta, p_hat),
        MissingnessRegime::PostSimple => eif_post_simple(s, nuis, theta, p_hat),
        MissingnessRegime::PostHard => eif_post_hard(s, nuis, theta, p_hat),
        MissingnessRegime::BothSimple => eif_both_simple(s, nuis, theta, p_hat),
    }
}
