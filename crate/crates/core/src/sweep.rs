//! Threshold sweep over all policies on common random numbers, plus the CSV
//! writer used by the `cogmimo-sweep` binary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::calibration::{calibrate_policy, DEFAULT_REL_TOL};
use crate::channel::{build_sample_set, SampleSet, SystemConfig};
use crate::error::{Error, Result};
use crate::evaluation::evaluate_policy;
use crate::policy::PolicyKind;

pub const CSV_HEADER: &str = "policy,q,mt,mr,n0,pmax,samples,seed,lambda,rate_bits,rate_stderr,interference,interference_stderr,saturated";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QScale {
    Lin,
    Log,
}

/// `steps` thresholds from `min` to `max` inclusive.
pub fn q_grid(min: f64, max: f64, steps: usize, scale: QScale) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite() && min > 0.0 && max >= min) {
        return Err(Error::invalid(format!("bad q range [{min}, {max}]")));
    }
    match steps {
        0 => Err(Error::invalid("q grid needs at least one point")),
        1 => Ok(vec![min]),
        _ => {
            let last = (steps - 1) as f64;
            Ok((0..steps)
                .map(|k| {
                    if k + 1 == steps {
                        return max;
                    }
                    let t = k as f64 / last;
                    match scale {
                        QScale::Lin => min + (max - min) * t,
                        QScale::Log => min * (max / min).powf(t),
                    }
                })
                .collect())
        }
    }
}

/// Default sweep range `[0.05, 1.5] · η̄ · P_max`: constrained and saturated
/// regimes both appear.
pub fn default_q_range(config: &SystemConfig) -> (f64, f64) {
    let full = config.eta_bar() * config.p_max;
    (0.05 * full, 1.5 * full)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Link parameters; `config.q` is replaced by each entry of `q_values`.
    pub config: SystemConfig,
    pub q_values: Vec<f64>,
    pub policies: Vec<PolicyKind>,
    pub n: usize,
    pub seed: u64,
    /// Evaluate on an independent sample set drawn with this seed.
    pub holdout_seed: Option<u64>,
    pub rel_tol: f64,
    pub output_path: PathBuf,
}

impl SweepSpec {
    pub fn new(config: SystemConfig, q_values: Vec<f64>, n: usize, seed: u64) -> Self {
        SweepSpec {
            config,
            q_values,
            policies: PolicyKind::ALL.to_vec(),
            n,
            seed,
            holdout_seed: None,
            rel_tol: DEFAULT_REL_TOL,
            output_path: PathBuf::from("sweep.csv"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        if self.q_values.is_empty() {
            return Err(Error::invalid("no q values"));
        }
        if self.q_values.iter().any(|q| !(q.is_finite() && *q > 0.0)) {
            return Err(Error::invalid("q values must be finite and > 0"));
        }
        if self.q_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("q values must be strictly increasing"));
        }
        if self.policies.is_empty() {
            return Err(Error::invalid("no policies selected"));
        }
        if self.n == 0 {
            return Err(Error::invalid("sample count must be at least 1"));
        }
        if !(self.rel_tol.is_finite() && self.rel_tol > 0.0) {
            return Err(Error::invalid("rel_tol must be > 0"));
        }
        Ok(())
    }
}

/// One CSV line. Result fields are `NaN` and `error` is set when calibration
/// failed for this cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub policy: PolicyKind,
    pub q: f64,
    pub m_t: usize,
    pub m_r: usize,
    pub n0: f64,
    pub p_max: f64,
    pub n: usize,
    pub seed: u64,
    pub lambda: f64,
    pub rate_bits: f64,
    pub rate_stderr: f64,
    pub interference: f64,
    pub interference_stderr: f64,
    pub saturated: bool,
    pub error: Option<String>,
}

fn run_cell(
    kind: PolicyKind,
    config: &SystemConfig,
    calibration: &SampleSet,
    evaluation: &SampleSet,
    spec: &SweepSpec,
) -> Result<SweepRow> {
    let mut row = SweepRow {
        policy: kind,
        q: config.q,
        m_t: config.m_t,
        m_r: config.m_r,
        n0: config.n0,
        p_max: config.p_max,
        n: spec.n,
        seed: spec.seed,
        lambda: f64::NAN,
        rate_bits: f64::NAN,
        rate_stderr: f64::NAN,
        interference: f64::NAN,
        interference_stderr: f64::NAN,
        saturated: false,
        error: None,
    };
    match calibrate_policy(kind, calibration, config, spec.rel_tol) {
        Ok((policy, _)) => {
            let r = evaluate_policy(&policy, evaluation)?;
            row.lambda = r.lambda;
            row.rate_bits = r.rate_bits;
            row.rate_stderr = r.rate_stderr;
            row.interference = r.interference;
            row.interference_stderr = r.interference_stderr;
            row.saturated = r.saturated;
        }
        Err(e @ Error::CalibrationFailed { .. }) => row.error = Some(e.to_string()),
        Err(e) => return Err(e),
    }
    Ok(row)
}

/// Calibrates and evaluates every `(q, policy)` cell on one shared sample
/// set. Rows come back ordered by `q`, then by policy in [`PolicyKind::ALL`]
/// order, whatever the thread count.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let calibration = build_sample_set(spec.seed, spec.n, &spec.config)?;
    let holdout = match spec.holdout_seed {
        Some(seed) => Some(build_sample_set(seed, spec.n, &spec.config)?),
        None => None,
    };
    let evaluation = holdout.as_ref().unwrap_or(&calibration);

    let mut policies = spec.policies.clone();
    policies.sort();
    policies.dedup();

    let cells: Vec<(SystemConfig, PolicyKind)> = spec
        .q_values
        .iter()
        .map(|&q| spec.config.with_q(q))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flat_map(|c| policies.iter().map(move |&k| (c, k)))
        .collect();

    cells
        .par_iter()
        .map(|(config, kind)| run_cell(*kind, config, &calibration, evaluation, spec))
        .collect()
}

/// `printf("%.9g")` formatting.
pub fn format_sig9(x: f64) -> String {
    const DIGITS: i32 = 9;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// The CSV text for `rows`, header included, LF line endings.
pub fn render_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let f = format_sig9;
        let _ = write!(
            out,
            "{},{},{},{},{},{},{},{},",
            r.policy,
            f(r.q),
            r.m_t,
            r.m_r,
            f(r.n0),
            f(r.p_max),
            r.n,
            r.seed
        );
        if r.error.is_some() {
            out.push_str("error,,,,,false\n");
        } else {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                f(r.lambda),
                f(r.rate_bits),
                f(r.rate_stderr),
                f(r.interference),
                f(r.interference_stderr),
                r.saturated
            );
        }
    }
    out
}

pub fn write_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    std::fs::write(path, render_csv(rows))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sig9_matches_printf() {
        let cases = [
            (1.0, "1"),
            (0.1, "0.1"),
            (2.0 / 3.0, "0.666666667"),
            (123456789.0, "123456789"),
            (1234567890.0, "1.23456789e+09"),
            (0.0001, "0.0001"),
            (0.00001234, "1.234e-05"),
            (-2.5, "-2.5"),
            (9.9999999999, "10"),
            (999999999.9, "1e+09"),
            (0.0, "0"),
            (1e300, "1e+300"),
        ];
        for (x, want) in cases {
            assert_eq!(format_sig9(x), want, "{x}");
        }
    }

    proptest! {
        #[test]
        fn sig9_round_trips_to_nine_digits(x in -1e12f64..1e12) {
            let back: f64 = format_sig9(x).parse().unwrap();
            prop_assert!((back - x).abs() <= 5e-9 * x.abs().max(1e-300));
        }
    }

    #[test]
    fn q_grids() {
        let lin = q_grid(1.0, 3.0, 5, QScale::Lin).unwrap();
        assert_eq!(lin, vec![1.0, 1.5, 2.0, 2.5, 3.0]);
        let log = q_grid(0.1, 10.0, 3, QScale::Log).unwrap();
        assert!((log[1] - 1.0).abs() < 1e-12 && log[2] == 10.0);
        assert_eq!(q_grid(2.0, 5.0, 1, QScale::Log).unwrap(), vec![2.0]);
        assert!(q_grid(0.0, 1.0, 3, QScale::Lin).is_err());
        assert!(q_grid(2.0, 1.0, 3, QScale::Lin).is_err());
        assert!(q_grid(1.0, 2.0, 0, QScale::Lin).is_err());
    }

    fn spec(q_values: Vec<f64>) -> SweepSpec {
        let config = SystemConfig::new(2, 2, 1.0, 10.0, 1.0).unwrap();
        SweepSpec::new(config, q_values, 500, 3)
    }

    #[test]
    fn spec_validation() {
        assert!(spec(vec![]).validate().is_err());
        assert!(spec(vec![2.0, 1.0]).validate().is_err());
        assert!(spec(vec![1.0, 1.0]).validate().is_err());
        assert!(spec(vec![-1.0]).validate().is_err());
        let mut s = spec(vec![1.0]);
        s.policies.clear();
        assert!(s.validate().is_err());
        let mut s = spec(vec![1.0]);
        s.n = 0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn empty_rows_give_header_only() {
        assert_eq!(render_csv(&[]), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn fixed_row_has_zero_lambda() {
        let mut s = spec(vec![2.0]);
        s.policies = vec![PolicyKind::Fixed];
        let rows = run_sweep(&s).unwrap();
        assert_eq!(rows.len(), 1);
        let csv = render_csv(&rows);
        let line = csv.lines().nth(1).unwrap();
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 14);
        assert_eq!(fields[0], "FIXED");
        assert_eq!(fields[1], "2");
        assert_eq!(fields[8], "0");
        assert!(fields[9].parse::<f64>().unwrap() > 0.0);
        assert_eq!(fields[11], "2");
        assert_eq!(fields[13], "false");
    }

    #[test]
    fn rows_ordered_by_q_then_policy() {
        let mut s = spec(vec![1.0, 4.0, 30.0]);
        s.policies = vec![PolicyKind::Fixed, PolicyKind::Mebpp, PolicyKind::Fixed];
        let rows = run_sweep(&s).unwrap();
        let keys: Vec<(f64, PolicyKind)> = rows.iter().map(|r| (r.q, r.policy)).collect();
        assert_eq!(
            keys,
            vec![
                (1.0, PolicyKind::Mebpp),
                (1.0, PolicyKind::Fixed),
                (4.0, PolicyKind::Mebpp),
                (4.0, PolicyKind::Fixed),
                (30.0, PolicyKind::Mebpp),
                (30.0, PolicyKind::Fixed),
            ]
        );
        assert!(rows[4].saturated && rows[5].saturated);
        assert_eq!(rows[4].rate_bits, rows[5].rate_bits);
    }

    #[test]
    fn calibration_failure_becomes_error_row() {
        let row = SweepRow {
            policy: PolicyKind::Ebpp,
            q: 1.0,
            m_t: 2,
            m_r: 2,
            n0: 1.0,
            p_max: 10.0,
            n: 5,
            seed: 1,
            lambda: f64::NAN,
            rate_bits: f64::NAN,
            rate_stderr: f64::NAN,
            interference: f64::NAN,
            interference_stderr: f64::NAN,
            saturated: false,
            error: Some("boom".into()),
        };
        let csv = render_csv(&[row]);
        assert_eq!(csv.lines().nth(1).unwrap(), "EBPP,1,2,2,1,10,5,1,error,,,,,false");
    }

    #[test]
    fn holdout_changes_evaluation_only() {
        let mut s = spec(vec![4.0]);
        s.policies = vec![PolicyKind::Iebpp];
        let same = run_sweep(&s).unwrap();
        s.holdout_seed = Some(99);
        let held = run_sweep(&s).unwrap();
        assert_eq!(same[0].lambda, held[0].lambda);
        assert_ne!(same[0].rate_bits, held[0].rate_bits);
        assert!((same[0].interference - 4.0).abs() < 4e-4);
    }
}
