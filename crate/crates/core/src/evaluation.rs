//! Ergodic rate and achieved interference of a calibrated policy.
//!
//! Policies that only look at `l_max` are still scored with the full
//! `Σᵢ log₂(1 + P lᵢ/N₀)` rate, since that is what the link delivers.

use std::f64::consts::LN_2;

use crate::calibration::interference_term;
use crate::channel::{SampleSet, SystemConfig};
use crate::error::{Error, Result};
use crate::policy::{CalibratedPolicy, PolicyKind};
use crate::reduce;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvaluationResult {
    pub kind: PolicyKind,
    pub lambda: f64,
    pub saturated: bool,
    pub q: f64,
    pub n: usize,
    /// Seed of the sample set the result was computed on.
    pub sample_seed: u64,
    /// Ergodic rate in bits/s/Hz.
    pub rate_bits: f64,
    pub rate_stderr: f64,
    /// Same ergodic rate in nats.
    pub rate_nats: f64,
    pub interference: f64,
    pub interference_stderr: f64,
    pub config: SystemConfig,
}

fn rate_nats(p: f64, eigs: &[f64], n0: f64) -> f64 {
    eigs.iter().map(|&l| (p * l / n0).ln_1p()).sum()
}

/// `Σᵢ log₂(1 + p lᵢ/N₀)` in bits/s/Hz.
pub fn instantaneous_rate(p: f64, eigs: &[f64], n0: f64) -> f64 {
    rate_nats(p, eigs, n0) / LN_2
}

/// Mean full-power rate over the set, an upper bound on any policy's rate.
pub fn peak_power_rate(samples: &SampleSet, config: &SystemConfig) -> f64 {
    reduce::sum_by(samples.samples(), |s| instantaneous_rate(config.p_max, &s.eigs, config.n0))
        / samples.len() as f64
}

/// Scores `policy` on `samples`.
///
/// Interference is `(1/n) Σ ηⱼ Pⱼ` for η-aware policies and `η̄ (1/n) Σ Pⱼ`
/// for the rest. A saturated policy always reports the `η̄` form, so all five
/// kinds give identical numbers in saturation.
pub fn evaluate_policy(policy: &CalibratedPolicy, samples: &SampleSet) -> Result<EvaluationResult> {
    let config = &policy.config;
    if !samples.config().same_channel_law(config) {
        return Err(Error::invalid(format!(
            "sample set ({}x{}) does not match policy config ({}x{})",
            samples.config().m_r,
            samples.config().m_t,
            config.m_r,
            config.m_t
        )));
    }

    let uses_eta = !policy.saturated && policy.kind.uses_instantaneous_eta();
    let eta_bar = config.eta_bar();
    let (rates, interference): (Vec<f64>, Vec<f64>) = samples
        .samples()
        .iter()
        .map(|s| {
            let p = policy.power(s);
            (
                rate_nats(p, &s.eigs, config.n0),
                interference_term(uses_eta, s.eta, eta_bar, p),
            )
        })
        .unzip();

    let (nats, nats_se) = reduce::mean_stderr(&rates);
    let (interference, interference_stderr) = reduce::mean_stderr(&interference);
    Ok(EvaluationResult {
        kind: policy.kind,
        lambda: policy.lambda,
        saturated: policy.saturated,
        q: config.q,
        n: samples.len(),
        sample_seed: samples.seed(),
        rate_bits: nats / LN_2,
        rate_stderr: nats_se / LN_2,
        rate_nats: nats,
        interference,
        interference_stderr,
        config: *config,
    })
}

/// A pairwise rate comparison that failed beyond its statistical slack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderingViolation {
    pub expected_higher: PolicyKind,
    pub expected_lower: PolicyKind,
    /// `rate(lower) − rate(higher)`, positive when violated.
    pub excess: f64,
    pub slack: f64,
}

/// Pairs `(a, b)` for which `rate(a) ≥ rate(b)` is expected.
const ORDERINGS: [(PolicyKind, PolicyKind); 4] = [
    (PolicyKind::Ebpp, PolicyKind::Mebpp),
    (PolicyKind::Ebpp, PolicyKind::Iebpp),
    (PolicyKind::Mebpp, PolicyKind::Imebpp),
    (PolicyKind::Iebpp, PolicyKind::Fixed),
];

/// Checks the information orderings among results computed on one sample
/// set at one threshold, each with slack `2 (stderr₁ + stderr₂)`. Pairs with
/// a missing kind are skipped. The IEBPP/FIXED pair only applies while
/// `q/η̄ ≤ P_max`.
pub fn rate_ordering_check(results: &[EvaluationResult]) -> Result<Vec<OrderingViolation>> {
    let Some(first) = results.first() else {
        return Ok(Vec::new());
    };
    for r in results {
        if r.sample_seed != first.sample_seed
            || r.n != first.n
            || r.q != first.q
            || !r.config.same_channel_law(&first.config)
        {
            return Err(Error::invalid(
                "results were not computed on the same sample set and threshold",
            ));
        }
    }

    let find = |kind| results.iter().find(|r| r.kind == kind);
    let mut violations = Vec::new();
    for (higher, lower) in ORDERINGS {
        let (Some(h), Some(l)) = (find(higher), find(lower)) else {
            continue;
        };
        if lower == PolicyKind::Fixed && first.q / first.config.eta_bar() > first.config.p_max {
            continue;
        }
        let slack = 2.0 * (h.rate_stderr + l.rate_stderr);
        let excess = l.rate_bits - h.rate_bits;
        if excess > slack {
            violations.push(OrderingViolation {
                expected_higher: higher,
                expected_lower: lower,
                excess,
                slack,
            });
        }
    }
    Ok(violations)
}
