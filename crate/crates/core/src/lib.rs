//! Limited-feedback power allocation for an underlay cognitive MIMO link.
//!
//! A secondary transmitter with `m_t` antennas talks to a secondary receiver
//! with `m_r` antennas while keeping the average interference it causes at a
//! single-antenna primary receiver below a threshold `q`. The transmitter only
//! learns the eigenvalues of `HHᴴ` (or just the largest one) and either the
//! instantaneous interference gain `η = ||h_sp||²` or its mean `η̄`.
//!
//! The crate provides
//!
//! - [`channel`]: Rayleigh fading realizations reduced to eigenvalues plus `η`,
//!   collected into reproducible [`SampleSet`]s,
//! - [`policy`]: per-state power for the five policies ([`PolicyKind`]),
//! - [`calibration`]: the multiplier search that makes the empirical average
//!   interference meet `q`,
//! - [`evaluation`]: ergodic rates with Monte Carlo standard errors,
//! - [`oracle`]: brute-force grid solvers used to cross-check the above,
//! - [`sweep`]: the threshold sweep behind the `cogmimo-sweep` binary.

pub mod calibration;
pub mod channel;
pub mod error;
pub mod evaluation;
pub mod oracle;
pub mod policy;
mod reduce;
pub mod sweep;

pub use calibration::{average_interference, calibrate_lambda, calibrate_policy, CalibrationReport};
pub use channel::{
    build_sample_set, gram_eigenvalues, sample_channel_matrix, sample_interference_gain,
    ChannelSample, SampleSet, SystemConfig,
};
pub use error::{Error, Result};
pub use evaluation::{evaluate_policy, instantaneous_rate, rate_ordering_check, EvaluationResult};
pub use policy::{
    policy_power, saturation_check, solve_stationarity, stationarity_residual, CalibratedPolicy,
    PolicyKind,
};
pub use sweep::{run_sweep, write_csv, SweepRow, SweepSpec};
