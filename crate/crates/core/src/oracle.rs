//! Brute-force reference solvers.
//!
//! Nothing here uses the stationarity condition or the water-level formula:
//! per-state power is the plain argmax of the Lagrangian over a power grid,
//! and the multiplier is located on a log-spaced grid. Agreement with
//! [`crate::policy`] and [`crate::calibration`] is therefore an independent
//! check. The cost is `O(n · grid)`; keep instances small.

use rayon::prelude::*;

use crate::channel::{SampleSet, SystemConfig};
use crate::error::{Error, Result};
use crate::policy::{saturation_check, PolicyKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Power grid size on `[0, P_max]`, endpoints included.
    pub p_points: usize,
    /// Multiplier grid size, log-spaced over `lambda_range`.
    pub lambda_points: usize,
    pub lambda_range: (f64, f64),
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            p_points: 100_000,
            lambda_points: 10_000,
            lambda_range: (1e-6, 1e6),
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.p_points < 1_000 || self.lambda_points < 1_000 {
            return Err(Error::invalid("oracle grids need at least 1000 points"));
        }
        let (lo, hi) = self.lambda_range;
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return Err(Error::invalid(format!("bad multiplier range ({lo}, {hi})")));
        }
        Ok(())
    }

    pub fn power_at(&self, k: usize, p_max: f64) -> f64 {
        if k + 1 == self.p_points {
            p_max
        } else {
            p_max * k as f64 / (self.p_points - 1) as f64
        }
    }

    pub fn lambda_at(&self, k: usize) -> f64 {
        let (lo, hi) = self.lambda_range;
        if k == 0 {
            lo
        } else if k + 1 == self.lambda_points {
            hi
        } else {
            lo * (hi / lo).powf(k as f64 / (self.lambda_points - 1) as f64)
        }
    }

    pub fn power_step(&self, p_max: f64) -> f64 {
        p_max / (self.p_points - 1) as f64
    }
}

/// Grid argmax of `Σ ln(1 + P lᵢ/N₀) − λ η_eff P`; ties go to the smaller `P`.
pub fn oracle_state_power(eigs: &[f64], eta_eff: f64, lambda: f64, config: &SystemConfig, grid: &GridSpec) -> f64 {
    let price = lambda * eta_eff;
    let mut best_p = 0.0;
    let mut best = f64::NEG_INFINITY;
    for k in 0..grid.p_points {
        let p = grid.power_at(k, config.p_max);
        let value: f64 = eigs.iter().map(|&l| (p * l / config.n0).ln_1p()).sum::<f64>() - price * p;
        if value > best {
            best = value;
            best_p = p;
        }
    }
    best_p
}

fn oracle_interference(kind: PolicyKind, lambda: f64, samples: &SampleSet, config: &SystemConfig, grid: &GridSpec) -> f64 {
    let eta_bar = config.eta_bar();
    let terms: Vec<f64> = samples
        .samples()
        .par_iter()
        .map(|s| match kind {
            PolicyKind::Ebpp => s.eta * oracle_state_power(&s.eigs, s.eta, lambda, config, grid),
            _ => eta_bar * oracle_state_power(&s.eigs, eta_bar, lambda, config, grid),
        })
        .collect();
    terms.iter().sum::<f64>() / terms.len() as f64
}

/// Smallest grid multiplier whose grid-argmax interference is `≤ q`, and that
/// interference. Only EBPP and IEBPP are supported.
///
/// Grid-argmax power is non-increasing in `λ`, so the grid is searched by
/// halving the index range rather than visiting every point.
pub fn oracle_calibrate(
    kind: PolicyKind,
    samples: &SampleSet,
    config: &SystemConfig,
    grid: &GridSpec,
) -> Result<(f64, f64)> {
    config.validate()?;
    grid.validate()?;
    if !matches!(kind, PolicyKind::Ebpp | PolicyKind::Iebpp) {
        return Err(Error::invalid(format!("oracle calibration supports EBPP and IEBPP, not {kind}")));
    }
    if saturation_check(config) {
        return Err(Error::invalid("config is saturated; nothing to calibrate"));
    }
    let q = config.q;
    let u = |k: usize| oracle_interference(kind, grid.lambda_at(k), samples, config, grid);

    let mut lo = 0;
    let mut hi = grid.lambda_points - 1;
    let u_hi = u(hi);
    if u_hi > q || u(lo) <= q {
        return Err(Error::OracleRange {
            lo: grid.lambda_range.0,
            hi: grid.lambda_range.1,
            q,
        });
    }
    let mut best = u_hi;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        let um = u(mid);
        if um <= q {
            hi = mid;
            best = um;
        } else {
            lo = mid;
        }
    }
    Ok((grid.lambda_at(hi), best))
}
