//! Fading model for the secondary MIMO link and the STx→PRx interference link.
//!
//! Entries of `H` (`m_r × m_t`) and of the interference row `h_sp` (`1 × m_t`)
//! are i.i.d. circularly-symmetric complex Gaussian. The policies never see
//! `H` itself, only the eigenvalues of `HHᴴ`, so a [`ChannelSample`] stores
//! those plus `η = ||h_sp||²`. With per-entry variance `σ²_sp`, `η` follows a
//! Gamma law with shape `m_t` and scale `σ²_sp`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Fixed parameters of one experiment point. Powers are linear (watts).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    /// Transmit antennas of the secondary transmitter.
    pub m_t: usize,
    /// Receive antennas of the secondary receiver.
    pub m_r: usize,
    /// Noise power `N₀`.
    pub n0: f64,
    /// Peak per-antenna transmit power.
    pub p_max: f64,
    /// Average interference threshold at the primary receiver.
    pub q: f64,
    /// Per-entry variance of `H`.
    pub sigma_h_sq: f64,
    /// Per-entry variance of `h_sp`.
    pub sigma_sp_sq: f64,
}

impl SystemConfig {
    /// Unit-variance channels on both links.
    pub fn new(m_t: usize, m_r: usize, n0: f64, p_max: f64, q: f64) -> Result<Self> {
        Self::with_variances(m_t, m_r, n0, p_max, q, 1.0, 1.0)
    }

    pub fn with_variances(
        m_t: usize,
        m_r: usize,
        n0: f64,
        p_max: f64,
        q: f64,
        sigma_h_sq: f64,
        sigma_sp_sq: f64,
    ) -> Result<Self> {
        let cfg = SystemConfig {
            m_t,
            m_r,
            n0,
            p_max,
            q,
            sigma_h_sq,
            sigma_sp_sq,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Same parameters with a different threshold.
    pub fn with_q(&self, q: f64) -> Result<Self> {
        let cfg = SystemConfig { q, ..*self };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_t == 0 || self.m_r == 0 {
            return Err(Error::invalid("antenna counts must be at least 1"));
        }
        let positive = [
            ("n0", self.n0),
            ("p_max", self.p_max),
            ("q", self.q),
            ("sigma_h_sq", self.sigma_h_sq),
            ("sigma_sp_sq", self.sigma_sp_sq),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Mean interference gain `η̄ = m_t · σ²_sp`.
    pub fn eta_bar(&self) -> f64 {
        self.m_t as f64 * self.sigma_sp_sq
    }

    /// True when two configs describe the same fading distribution.
    pub(crate) fn same_channel_law(&self, other: &SystemConfig) -> bool {
        self.m_t == other.m_t
            && self.m_r == other.m_r
            && self.sigma_h_sq == other.sigma_h_sq
            && self.sigma_sp_sq == other.sigma_sp_sq
    }
}

/// One joint fading realization as seen by the power policies.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSample {
    /// Eigenvalues of `HHᴴ`, descending, all `≥ 0`, length `m_r`.
    pub eigs: Vec<f64>,
    /// Interference gain `η = ||h_sp||²`.
    pub eta: f64,
}

impl ChannelSample {
    /// Validates the sorting and sign invariants.
    pub fn new(eigs: Vec<f64>, eta: f64) -> Result<Self> {
        if eigs.is_empty() {
            return Err(Error::invalid("a channel sample needs at least one eigenvalue"));
        }
        if eigs.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return Err(Error::invalid("eigenvalues must be finite and non-negative"));
        }
        if eigs.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::invalid("eigenvalues must be sorted in descending order"));
        }
        if !(eta.is_finite() && eta >= 0.0) {
            return Err(Error::invalid(format!("eta must be finite and >= 0, got {eta}")));
        }
        Ok(ChannelSample { eigs, eta })
    }

    pub fn l_max(&self) -> f64 {
        self.eigs[0]
    }

    pub fn trace(&self) -> f64 {
        self.eigs.iter().sum()
    }
}

/// Seeded collection of samples shared by every policy at an experiment point.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    seed: u64,
    samples: Vec<ChannelSample>,
    config: SystemConfig,
}

impl SampleSet {
    /// Wraps externally produced samples. `seed` is only used as a label.
    pub fn from_samples(seed: u64, samples: Vec<ChannelSample>, config: SystemConfig) -> Result<Self> {
        config.validate()?;
        if samples.is_empty() {
            return Err(Error::invalid("sample set must be non-empty"));
        }
        if let Some(bad) = samples.iter().find(|s| s.eigs.len() != config.m_r) {
            return Err(Error::invalid(format!(
                "sample has {} eigenvalues, config has m_r = {}",
                bad.eigs.len(),
                config.m_r
            )));
        }
        Ok(SampleSet { seed, samples, config })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn samples(&self) -> &[ChannelSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Config the samples were drawn under. Only dimensions and variances are
    /// meaningful here.
    pub fn config(&self) -> &SystemConfig {
        &self.config
    }
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}

/// Draws `H` (`m_r × m_t`) with i.i.d. `CN(0, σ²_h)` entries, filled row by row.
pub fn sample_channel_matrix<R: Rng + ?Sized>(rng: &mut R, config: &SystemConfig) -> DMatrix<Complex64> {
    let mut h = DMatrix::zeros(config.m_r, config.m_t);
    for i in 0..config.m_r {
        for j in 0..config.m_t {
            h[(i, j)] = complex_gaussian(rng, config.sigma_h_sq);
        }
    }
    h
}

/// Draws `h_sp` explicitly and returns its squared norm.
pub fn sample_interference_gain<R: Rng + ?Sized>(rng: &mut R, config: &SystemConfig) -> f64 {
    (0..config.m_t)
        .map(|_| complex_gaussian(rng, config.sigma_sp_sq).norm_sqr())
        .sum()
}

/// Eigenvalue round-off below this (relative to `max(1, ||H||²_F)`) is
/// rejected instead of clamped.
const NEGATIVE_EIG_TOL: f64 = -1e-10;

/// Eigenvalues of `HHᴴ`, sorted descending, tiny negatives clamped to zero.
pub fn gram_eigenvalues(h: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    if h.nrows() == 0 || h.ncols() == 0 {
        return Err(Error::invalid("channel matrix must be non-empty"));
    }
    if h.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::invalid("channel matrix has non-finite entries"));
    }
    let frob_sq: f64 = h.iter().map(|z| z.norm_sqr()).sum();
    if h.nrows() == 1 {
        return Ok(vec![frob_sq]);
    }

    let mut gram = h * h.adjoint();
    // exact Hermitian symmetry for the solver
    let n = gram.nrows();
    for i in 0..n {
        gram[(i, i)] = Complex64::new(gram[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let avg = (gram[(i, j)] + gram[(j, i)].conj()) * 0.5;
            gram[(i, j)] = avg;
            gram[(j, i)] = avg.conj();
        }
    }

    let mut eigs: Vec<f64> = gram.symmetric_eigenvalues().iter().copied().collect();
    let floor = NEGATIVE_EIG_TOL * frob_sq.max(1.0);
    for l in eigs.iter_mut() {
        if *l < floor {
            return Err(Error::invalid(format!("Gram matrix eigenvalue {l:e} is negative")));
        }
        if *l < 0.0 {
            *l = 0.0;
        }
    }
    eigs.sort_by(|a, b| b.total_cmp(a));
    Ok(eigs)
}

/// Per-sample stream: sample `i` depends only on `(seed, i)`.
fn sample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn draw_sample(seed: u64, index: u64, config: &SystemConfig) -> ChannelSample {
    let mut rng = sample_rng(seed, index);
    let h = sample_channel_matrix(&mut rng, config);
    let eta = sample_interference_gain(&mut rng, config);
    let eigs = gram_eigenvalues(&h).expect("Gaussian draws are finite");
    ChannelSample { eigs, eta }
}

/// `n` independent joint draws of (eigenvalues of `HHᴴ`, `η`).
///
/// Deterministic in `(seed, n, config)`; generation runs in parallel but each
/// index owns its own ChaCha stream, so thread count plays no role.
pub fn build_sample_set(seed: u64, n: usize, config: &SystemConfig) -> Result<SampleSet> {
    config.validate()?;
    if n == 0 {
        return Err(Error::invalid("sample count must be at least 1"));
    }
    let samples: Vec<ChannelSample> = (0..n as u64)
        .into_par_iter()
        .map(|i| draw_sample(seed, i, config))
        .collect();
    Ok(SampleSet {
        seed,
        samples,
        config: *config,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(m_t: usize, m_r: usize) -> SystemConfig {
        SystemConfig::new(m_t, m_r, 1.0, 10.0, 1.0).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn config_rejects_non_positive_fields() {
        assert!(SystemConfig::new(0, 2, 1.0, 1.0, 1.0).is_err());
        assert!(SystemConfig::new(2, 0, 1.0, 1.0, 1.0).is_err());
        assert!(SystemConfig::new(2, 2, 0.0, 1.0, 1.0).is_err());
        assert!(SystemConfig::new(2, 2, 1.0, -1.0, 1.0).is_err());
        assert!(SystemConfig::new(2, 2, 1.0, 1.0, f64::NAN).is_err());
        assert!(SystemConfig::with_variances(2, 2, 1.0, 1.0, 1.0, 0.0, 1.0).is_err());
        assert!(SystemConfig::with_variances(2, 2, 1.0, 1.0, 1.0, 1.0, 0.0).is_err());
        let ok = SystemConfig::with_variances(3, 2, 1.0, 1.0, 1.0, 1.0, 0.5).unwrap();
        assert_eq!(ok.eta_bar(), 1.5);
    }

    #[test]
    fn identity_and_rank_one() {
        let eye = DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)]);
        let e = gram_eigenvalues(&eye).unwrap();
        assert!((e[0] - 1.0).abs() < 1e-14 && (e[1] - 1.0).abs() < 1e-14);

        let ones = DMatrix::from_element(2, 2, c(1., 0.));
        let e = gram_eigenvalues(&ones).unwrap();
        assert!((e[0] - 4.0).abs() < 1e-14);
        assert_eq!(e[1], 0.0);
    }

    #[test]
    fn rejects_non_finite() {
        let mut h = DMatrix::from_element(2, 2, c(1., 0.));
        h[(1, 0)] = c(f64::INFINITY, 0.0);
        assert!(matches!(gram_eigenvalues(&h), Err(Error::InvalidInput(_))));
        h[(1, 0)] = c(0.0, f64::NAN);
        assert!(gram_eigenvalues(&h).is_err());
    }

    #[test]
    fn wide_and_tall_shapes() {
        let mut rng = sample_rng(3, 0);
        for (m_t, m_r) in [(1, 1), (1, 4), (4, 1), (2, 5), (5, 5)] {
            let config = cfg(m_t, m_r);
            let h = sample_channel_matrix(&mut rng, &config);
            assert_eq!((h.nrows(), h.ncols()), (m_r, m_t));
            let e = gram_eigenvalues(&h).unwrap();
            assert_eq!(e.len(), m_r);
            // rank ≤ min(m_t, m_r)
            for l in &e[m_t.min(m_r)..] {
                assert!(*l < 1e-10);
            }
        }
    }

    #[test]
    fn entry_power_matches_variance() {
        let config = cfg(1, 1);
        let mut rng = sample_rng(11, 0);
        let n = 100_000;
        let mean: f64 = (0..n)
            .map(|_| sample_channel_matrix(&mut rng, &config)[(0, 0)].norm_sqr())
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean |h|^2 = {mean}");
    }

    #[test]
    fn matrices_are_deterministic() {
        let config = cfg(3, 2);
        let a = sample_channel_matrix(&mut sample_rng(5, 9), &config);
        let b = sample_channel_matrix(&mut sample_rng(5, 9), &config);
        assert_eq!(a, b);
    }

    #[test]
    fn sample_set_determinism_and_seed_sensitivity() {
        let config = cfg(2, 2);
        let a = build_sample_set(7, 3, &config).unwrap();
        let b = build_sample_set(7, 3, &config).unwrap();
        assert_eq!(a, b);
        let c = build_sample_set(8, 3, &config).unwrap();
        assert_ne!(a.samples()[0], c.samples()[0]);
        // prefix property of per-index streams
        let longer = build_sample_set(7, 10, &config).unwrap();
        assert_eq!(&longer.samples()[..3], a.samples());
    }

    #[test]
    fn zero_samples_rejected() {
        assert!(matches!(build_sample_set(1, 0, &cfg(2, 2)), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn channel_sample_validation() {
        assert!(ChannelSample::new(vec![1.0, 2.0], 1.0).is_err());
        assert!(ChannelSample::new(vec![2.0, -1.0], 1.0).is_err());
        assert!(ChannelSample::new(vec![], 1.0).is_err());
        assert!(ChannelSample::new(vec![1.0], -0.1).is_err());
        let s = ChannelSample::new(vec![3.0, 1.0], 0.5).unwrap();
        assert_eq!(s.l_max(), 3.0);
        assert_eq!(s.trace(), 4.0);
    }

    #[test]
    fn from_samples_checks_dimensions() {
        let config = cfg(2, 2);
        let wrong = vec![ChannelSample::new(vec![1.0], 1.0).unwrap()];
        assert!(SampleSet::from_samples(0, wrong, config).is_err());
        assert!(SampleSet::from_samples(0, vec![], config).is_err());
    }
}
