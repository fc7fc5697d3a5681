//! Multiplier search for the average-interference constraint.
//!
//! The expectation in the constraint is replaced by the sample mean over a
//! fixed [`SampleSet`], so the calibrated multiplier makes the constraint hold
//! (to `rel_tol`) on exactly that set. Per-state power is non-increasing in
//! `λ`, hence so is the empirical interference, and a bracketing bisection on
//! `λ` always converges.

use crate::channel::{SampleSet, SystemConfig};
use crate::error::{Error, Result};
use crate::policy::{policy_power, saturation_check, CalibratedPolicy, PolicyKind};
use crate::reduce;

pub const DEFAULT_REL_TOL: f64 = 1e-4;

/// Bracket expansions and bisection steps are each capped at this.
const MAX_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationReport {
    pub lambda_star: f64,
    /// Empirical average interference at `lambda_star`.
    pub achieved_interference: f64,
    /// Number of interference evaluations, bracketing included.
    pub iterations: usize,
    /// Final bracket `(λ_lo, λ_hi)` with `U(λ_lo) ≥ q ≥ U(λ_hi)`.
    pub bracket: (f64, f64),
    pub tolerance_met: bool,
}

/// Interference contributed by one state at power `p`: `η P` when the policy
/// reacts to `η`, otherwise `η̄ P`.
pub(crate) fn interference_term(uses_eta: bool, eta: f64, eta_bar: f64, p: f64) -> f64 {
    if uses_eta {
        eta * p
    } else {
        eta_bar * p
    }
}

/// Empirical average interference of `kind` at multiplier `lambda`.
///
/// EBPP and MEBPP use `(1/n) Σ ηⱼ Pⱼ`; the η̄-based kinds use `η̄ (1/n) Σ Pⱼ`.
pub fn average_interference(kind: PolicyKind, lambda: f64, samples: &SampleSet, config: &SystemConfig) -> f64 {
    let uses_eta = kind.uses_instantaneous_eta();
    let eta_bar = config.eta_bar();
    let total = reduce::sum_by(samples.samples(), |s| {
        interference_term(uses_eta, s.eta, eta_bar, policy_power(kind, s, lambda, config))
    });
    total / samples.len() as f64
}

fn check_inputs(samples: &SampleSet, config: &SystemConfig) -> Result<()> {
    config.validate()?;
    if !samples.config().same_channel_law(config) {
        return Err(Error::invalid(
            "sample set was drawn under different antenna counts or variances",
        ));
    }
    Ok(())
}

/// Finds `λ*` with `|Û(λ*) − q| ≤ rel_tol · q`.
///
/// The bracket starts at `λ = 1` and expands geometrically. If bisection runs
/// out of steps (or of floating-point resolution) first, the feasible end of
/// the bracket (`Û ≤ q`) is returned with `tolerance_met = false`.
pub fn calibrate_lambda(
    kind: PolicyKind,
    samples: &SampleSet,
    config: &SystemConfig,
    rel_tol: f64,
) -> Result<CalibrationReport> {
    check_inputs(samples, config)?;
    if !kind.is_optimized() {
        return Err(Error::invalid("the fixed policy has no multiplier"));
    }
    if saturation_check(config) {
        return Err(Error::invalid("config is saturated; full power already meets q"));
    }
    if !(rel_tol.is_finite() && rel_tol > 0.0) {
        return Err(Error::invalid(format!("rel_tol must be > 0, got {rel_tol}")));
    }

    let q = config.q;
    let tol = rel_tol * q;
    let mut evals = 0usize;
    let mut interference = |lambda: f64| {
        evals += 1;
        average_interference(kind, lambda, samples, config)
    };
    let failure = |reason: String| Error::CalibrationFailed {
        kind: kind.to_string(),
        reason,
    };

    let (mut hi, mut u_hi) = (1.0, interference(1.0));
    let mut known_lo = None;
    let mut steps = 0;
    while u_hi > q {
        if u_hi - q <= tol {
            break;
        }
        steps += 1;
        if steps > MAX_STEPS {
            return Err(failure(format!("interference stays above q up to lambda = {hi:e}")));
        }
        known_lo = Some((hi, u_hi));
        hi *= 2.0;
        u_hi = interference(hi);
    }

    let (mut lo, mut u_lo) = match known_lo {
        Some(v) => v,
        None => (hi / 2.0, interference(hi / 2.0)),
    };
    let mut steps = 0;
    while u_lo < q {
        if q - u_lo <= tol {
            break;
        }
        steps += 1;
        if steps > MAX_STEPS {
            return Err(failure(format!(
                "interference stays below q down to lambda = {lo:e}; the sample set cannot reach the threshold"
            )));
        }
        (hi, u_hi) = (lo, u_lo);
        lo /= 2.0;
        u_lo = interference(lo);
    }

    let done = |lambda: f64, u: f64, lo: f64, hi: f64, evals: usize| CalibrationReport {
        lambda_star: lambda,
        achieved_interference: u,
        iterations: evals,
        bracket: (lo, hi),
        tolerance_met: true,
    };
    // the bracket ends may already be within tolerance
    if (u_hi - q).abs() <= tol {
        return Ok(done(hi, u_hi, lo, hi, evals));
    }
    if (u_lo - q).abs() <= tol {
        return Ok(done(lo, u_lo, lo, hi, evals));
    }

    for _ in 0..MAX_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let u = interference(mid);
        if (u - q).abs() <= tol {
            return Ok(done(mid, u, lo, hi, evals));
        }
        if u > q {
            lo = mid;
        } else {
            (hi, u_hi) = (mid, u);
        }
    }
    Ok(CalibrationReport {
        lambda_star: hi,
        achieved_interference: u_hi,
        iterations: evals,
        bracket: (lo, hi),
        tolerance_met: false,
    })
}

/// Builds the [`CalibratedPolicy`] for `kind` at `config.q`: saturated full
/// power when `η̄ P_max ≤ q`, the constant policy for FIXED, and a calibrated
/// multiplier otherwise. The report is present only in the last case.
pub fn calibrate_policy(
    kind: PolicyKind,
    samples: &SampleSet,
    config: &SystemConfig,
    rel_tol: f64,
) -> Result<(CalibratedPolicy, Option<CalibrationReport>)> {
    check_inputs(samples, config)?;
    if kind == PolicyKind::Fixed {
        return Ok((CalibratedPolicy::fixed(config)?, None));
    }
    if saturation_check(config) {
        return Ok((CalibratedPolicy::saturated(kind, config)?, None));
    }
    let report = calibrate_lambda(kind, samples, config, rel_tol)?;
    let policy = CalibratedPolicy::with_lambda(kind, report.lambda_star, config)?;
    Ok((policy, Some(report)))
}
