//! Per-state transmit power for the limited-feedback policies.
//!
//! All four optimized policies share one Lagrangian per channel state,
//! `Σ ln(1 + P lᵢ/N₀) − λ η_eff P` on `[0, P_max]`, and differ only in what
//! they feed it:
//!
//! | kind   | eigenvalues | `η_eff` |
//! |--------|-------------|---------|
//! | EBPP   | all         | `η`     |
//! | MEBPP  | `l_max`     | `η`     |
//! | IEBPP  | all         | `η̄`     |
//! | IMEBPP | `l_max`     | `η̄`     |
//!
//! With a single eigenvalue the stationarity condition has the water-level
//! solution `[1/(λ η_eff) − N₀/l]⁺` clipped at `P_max`. With several, the
//! interior root of [`stationarity_residual`] is found numerically.

use std::fmt;
use std::str::FromStr;

use crate::channel::{ChannelSample, SystemConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolicyKind {
    /// Instantaneous `η`, all eigenvalues.
    Ebpp,
    /// Instantaneous `η`, largest eigenvalue only.
    Mebpp,
    /// Mean `η̄`, all eigenvalues.
    Iebpp,
    /// Mean `η̄`, largest eigenvalue only.
    Imebpp,
    /// Constant `P = Q/η̄`, clipped at `P_max`.
    Fixed,
}

impl PolicyKind {
    /// Canonical order; sweep rows are sorted by it.
    pub const ALL: [PolicyKind; 5] = [
        PolicyKind::Ebpp,
        PolicyKind::Mebpp,
        PolicyKind::Iebpp,
        PolicyKind::Imebpp,
        PolicyKind::Fixed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Ebpp => "EBPP",
            PolicyKind::Mebpp => "MEBPP",
            PolicyKind::Iebpp => "IEBPP",
            PolicyKind::Imebpp => "IMEBPP",
            PolicyKind::Fixed => "FIXED",
        }
    }

    /// Whether the policy reacts to the instantaneous interference gain.
    pub fn uses_instantaneous_eta(self) -> bool {
        matches!(self, PolicyKind::Ebpp | PolicyKind::Mebpp)
    }

    pub fn uses_all_eigenvalues(self) -> bool {
        matches!(self, PolicyKind::Ebpp | PolicyKind::Iebpp)
    }

    pub fn is_optimized(self) -> bool {
        self != PolicyKind::Fixed
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::invalid(format!("unknown policy '{s}'")))
    }
}

/// `Σᵢ lᵢ/(N₀ + P lᵢ) − λ η_eff`: the derivative of the per-state Lagrangian.
pub fn stationarity_residual(p: f64, eigs: &[f64], lambda: f64, eta_eff: f64, n0: f64) -> f64 {
    marginal_rate(p, eigs, n0) - lambda * eta_eff
}

fn marginal_rate(p: f64, eigs: &[f64], n0: f64) -> f64 {
    eigs.iter().map(|&l| l / (n0 + p * l)).sum()
}

fn marginal_rate_slope(p: f64, eigs: &[f64], n0: f64) -> f64 {
    eigs.iter()
        .map(|&l| {
            let d = n0 + p * l;
            -(l * l) / (d * d)
        })
        .sum()
}

/// `min{[1/price − N₀/l]⁺, P_max}` with `price = λ η_eff`.
fn water_level_power(l: f64, price: f64, n0: f64, p_max: f64) -> f64 {
    (1.0 / price - n0 / l).max(0.0).min(p_max)
}

const MAX_ROOT_ITERS: usize = 200;

/// Optimal per-state power for a given multiplier.
///
/// Returns `0` when the residual at zero power is `≤ 0`, `P_max` when the
/// residual at peak power is `≥ 0`, and the interior root otherwise, accurate
/// to `|residual| ≤ 1e-9 · λ · η_eff`. A channel with a single non-zero
/// eigenvalue takes the water-level closed form, which is bit-identical to
/// what [`PolicyKind::Mebpp`] computes for the same inputs.
pub fn solve_stationarity(eigs: &[f64], lambda: f64, eta_eff: f64, config: &SystemConfig) -> f64 {
    let n0 = config.n0;
    let p_max = config.p_max;
    let price = lambda * eta_eff;

    let mut positive = eigs.iter().copied().filter(|&l| l > 0.0);
    match (positive.next(), positive.next()) {
        (None, _) => return 0.0,
        (Some(l), None) => return water_level_power(l, price, n0, p_max),
        _ => {}
    }

    let f = |p: f64| marginal_rate(p, eigs, n0) - price;
    let f_zero = f(0.0);
    if f_zero <= 0.0 {
        return 0.0;
    }
    let f_peak = f(p_max);
    if f_peak >= 0.0 {
        return p_max;
    }

    // f is convex and decreasing, so a Newton step from a point left of the
    // root stays left of it. Bisection steps keep the bracket shrinking.
    let tol = 1e-9 * price;
    let (mut lo, mut f_lo) = (0.0, f_zero);
    let (mut hi, mut f_hi) = (p_max, f_peak);
    for _ in 0..MAX_ROOT_ITERS {
        let width = hi - lo;
        let mut x = lo - f_lo / marginal_rate_slope(lo, eigs, n0);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let fx = f(x);
        if fx.abs() <= tol {
            return x;
        }
        if fx > 0.0 {
            (lo, f_lo) = (x, fx);
        } else {
            (hi, f_hi) = (x, fx);
        }

        if hi - lo > 0.5 * width {
            let mid = 0.5 * (lo + hi);
            let fm = f(mid);
            if fm.abs() <= tol {
                return mid;
            }
            if fm > 0.0 {
                (lo, f_lo) = (mid, fm);
            } else {
                (hi, f_hi) = (mid, fm);
            }
        }

        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    if f_lo.abs() <= f_hi.abs() {
        lo
    } else {
        hi
    }
}

/// Transmit power of `kind` in state `sample` at multiplier `lambda`.
///
/// `lambda` is ignored for [`PolicyKind::Fixed`]. For the optimized kinds
/// `lambda = 0` is the unconstrained limit and yields `P_max`; the same limit
/// applies when an η-aware policy sees `η = 0`.
pub fn policy_power(kind: PolicyKind, sample: &ChannelSample, lambda: f64, config: &SystemConfig) -> f64 {
    let p_max = config.p_max;
    if kind == PolicyKind::Fixed {
        return (config.q / config.eta_bar()).min(p_max);
    }
    debug_assert!(lambda >= 0.0, "multiplier must be non-negative");
    if lambda <= 0.0 {
        return p_max;
    }
    match kind {
        PolicyKind::Ebpp => {
            if sample.eta == 0.0 {
                return p_max;
            }
            solve_stationarity(&sample.eigs, lambda, sample.eta, config)
        }
        PolicyKind::Mebpp => {
            if sample.eta == 0.0 {
                return p_max;
            }
            water_level_power(sample.l_max(), lambda * sample.eta, config.n0, p_max)
        }
        PolicyKind::Iebpp => solve_stationarity(&sample.eigs, lambda, config.eta_bar(), config),
        PolicyKind::Imebpp => water_level_power(sample.l_max(), lambda * config.eta_bar(), config.n0, p_max),
        PolicyKind::Fixed => unreachable!(),
    }
}

/// True iff `η̄ · P_max ≤ Q`, in which case full power meets the constraint.
pub fn saturation_check(config: &SystemConfig) -> bool {
    config.eta_bar() * config.p_max <= config.q
}

/// A policy with its multiplier fixed, ready to map states to powers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibratedPolicy {
    pub kind: PolicyKind,
    pub lambda: f64,
    pub saturated: bool,
    pub config: SystemConfig,
}

impl CalibratedPolicy {
    /// Full power everywhere. Only valid when [`saturation_check`] holds.
    pub fn saturated(kind: PolicyKind, config: &SystemConfig) -> Result<Self> {
        config.validate()?;
        if !saturation_check(config) {
            return Err(Error::invalid(format!(
                "config is not saturated: eta_bar * p_max = {} > q = {}",
                config.eta_bar() * config.p_max,
                config.q
            )));
        }
        Ok(CalibratedPolicy {
            kind,
            lambda: 0.0,
            saturated: true,
            config: *config,
        })
    }

    pub fn fixed(config: &SystemConfig) -> Result<Self> {
        config.validate()?;
        Ok(CalibratedPolicy {
            kind: PolicyKind::Fixed,
            lambda: 0.0,
            saturated: saturation_check(config),
            config: *config,
        })
    }

    /// An optimized policy at a given multiplier, outside saturation.
    pub fn with_lambda(kind: PolicyKind, lambda: f64, config: &SystemConfig) -> Result<Self> {
        config.validate()?;
        if kind == PolicyKind::Fixed {
            return Self::fixed(config);
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::invalid(format!("multiplier must be finite and > 0, got {lambda}")));
        }
        if saturation_check(config) {
            return Err(Error::invalid("saturated config needs no multiplier"));
        }
        Ok(CalibratedPolicy {
            kind,
            lambda,
            saturated: false,
            config: *config,
        })
    }

    pub fn power(&self, sample: &ChannelSample) -> f64 {
        if self.saturated {
            self.config.p_max
        } else {
            policy_power(self.kind, sample, self.lambda, &self.config)
        }
    }
}
