//! Monte-Carlo engine: samples network realizations around a base station
//! at the window center and runs the SIC decoding chain as a receiver would.
//!
//! Every trial draws from its own ChaCha stream `(seed, trial index)`, so any
//! trial can be replayed alone and results do not depend on the number of
//! worker threads. Counts are merged as integers.

mod estimate;
mod functional;
mod ppp;
mod trial;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use estimate::{estimate_coverage, estimate_coverage_modes, CoverageReport};
pub use functional::{estimate_laplace_functional, FunctionalKind, LaplaceEstimate};
pub use ppp::{estimate_ppp_baseline, estimate_ppp_baseline_modes, PppReport};
pub use trial::{run_trial, sample_trial, TrialResult, TrialSample};

use crate::error::{Error, Result};
use crate::SicMode;

/// Order in which the receiver ranks (and decodes) the cluster's users.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RankingRule {
    /// Nearest user first, as in the analysis.
    #[default]
    ByDistance,
    /// Strongest received power first, as a real receiver would.
    ByReceivedPower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    #[default]
    Mcp,
    /// Users as an independent PPP with nearest-BS association.
    PppUsers,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub n_trials: usize,
    pub rng_seed: u64,
    /// Measure distances on the torus of side `region_side`.
    pub wraparound: bool,
    pub ranking_rule: RankingRule,
    pub baseline: Baseline,
    /// Total number of clusters in the window, the central one included.
    /// `None` draws the others as a PPP of intensity `λ`.
    pub fixed_cluster_count: Option<usize>,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            n_trials: 10_000,
            rng_seed: 1,
            wraparound: true,
            ranking_rule: RankingRule::ByDistance,
            baseline: Baseline::Mcp,
            fixed_cluster_count: None,
        }
    }
}

/// Smallest trial count accepted by the coverage estimators.
pub const MIN_TRIALS: usize = 100;

impl SimOptions {
    pub fn validate(&self) -> Result<()> {
        if self.n_trials < 1 {
            return Err(Error::InvalidParams(vec!["n_trials: must be >= 1".into()]));
        }
        if self.fixed_cluster_count == Some(0) {
            return Err(Error::InvalidParams(vec![
                "fixed_cluster_count: must include the central cluster (>= 1)".into(),
            ]));
        }
        Ok(())
    }

    pub(crate) fn validate_for_estimate(&self) -> Result<()> {
        self.validate()?;
        if self.n_trials < MIN_TRIALS {
            return Err(Error::InvalidParams(vec![format!(
                "n_trials: estimators need at least {MIN_TRIALS} (got {})",
                self.n_trials
            )]));
        }
        Ok(())
    }
}

/// Random stream of trial `index` under master seed `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Empirical probability with a 95% normal-approximation half-width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoverageEstimate {
    pub estimate: f64,
    pub half_width_95: f64,
    pub n_trials: u64,
    pub mode: SicMode,
}

impl CoverageEstimate {
    /// Binomial estimate from `successes` out of `n`.
    pub fn from_counts(successes: u64, n: u64, mode: SicMode) -> Self {
        let p = if n == 0 { f64::NAN } else { successes as f64 / n as f64 };
        CoverageEstimate {
            estimate: p,
            half_width_95: 1.96 * (p * (1.0 - p) / n as f64).sqrt(),
            n_trials: n,
            mode,
        }
    }

    /// Mean of per-trial values with the sample-variance half-width.
    pub(crate) fn from_moments(sum: f64, sum_sq: f64, n: u64, mode: SicMode) -> Self {
        let nf = n as f64;
        let mean = sum / nf;
        let var = if n > 1 {
            ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0)
        } else {
            0.0
        };
        CoverageEstimate {
            estimate: mean,
            half_width_95: 1.96 * (var / nf).sqrt(),
            n_trials: n,
            mode,
        }
    }

    pub fn contains(&self, value: f64) -> bool {
        (self.estimate - value).abs() <= self.half_width_95
    }
}
