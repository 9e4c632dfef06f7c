use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::trial::{received_power, sample_trial};
use super::{trial_rng, SimOptions};
use crate::error::{Error, Result};
use crate::geometry::{rank_by_distance, sample_disk_offset, NetworkParams};

/// Attempts per accepted sample before a conditioning bin is declared empty.
const MAX_ATTEMPTS: usize = 10_000_000;

/// Which interference the functional is taken of.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionalKind {
    /// Everything received from other clusters at the central station.
    Inter,
    /// Residual intra-cluster interference of `rank` under perfect SIC, given
    /// its serving distance lies in `[r_min, r_max]`.
    IntraPerfect { rank: usize, r_min: f64, r_max: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceEstimate {
    pub s: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub samples: u64,
}

fn intra_sample<R: Rng + ?Sized>(
    params: &NetworkParams,
    rank: usize,
    r_min: f64,
    r_max: f64,
    rng: &mut R,
) -> Option<f64> {
    let c = params.users_per_cluster;
    for _ in 0..MAX_ATTEMPTS {
        let d: Vec<f64> = (0..c)
            .map(|_| sample_disk_offset(params.cluster_radius, rng).norm())
            .collect();
        let order = rank_by_distance(&d);
        let served = d[order[rank - 1]];
        if served < r_min || served > r_max {
            continue;
        }
        return Some(
            order[rank..]
                .iter()
                .map(|&i| received_power(params, Exp1.sample(rng), d[i]))
                .sum(),
        );
    }
    None
}

/// Empirical `E[exp(-s I)]` for every `s` in `s_grid`, over `n_trials`
/// independent interference samples.
pub fn estimate_laplace_functional(
    params: &NetworkParams,
    s_grid: &[f64],
    kind: FunctionalKind,
    options: &SimOptions,
) -> Result<Vec<LaplaceEstimate>> {
    params.validate()?;
    options.validate()?;
    if let Some(s) = s_grid.iter().find(|s| !(**s >= 0.0)) {
        return Err(Error::Domain(format!("s must be >= 0 (got {s})")));
    }
    if let FunctionalKind::IntraPerfect { rank, r_min, r_max } = kind {
        params.check_rank(rank)?;
        if !(0.0 <= r_min && r_min < r_max && r_min < params.cluster_radius) {
            return Err(Error::Domain(format!(
                "conditioning bin [{r_min}, {r_max}] must be a nonempty range within [0, R)"
            )));
        }
    }
    let n = options.n_trials as u64;
    let draws: Vec<Option<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(options.rng_seed, i);
            match kind {
                FunctionalKind::Inter => Some(sample_trial(params, options, &mut rng).inter_noma),
                FunctionalKind::IntraPerfect { rank, r_min, r_max } => {
                    intra_sample(params, rank, r_min, r_max, &mut rng)
                }
            }
        })
        .collect();
    let draws: Vec<f64> = draws
        .into_iter()
        .collect::<Option<_>>()
        .ok_or_else(|| Error::Domain("conditioning bin is (practically) never hit".into()))?;

    Ok(s_grid
        .iter()
        .map(|&s| {
            let nf = n as f64;
            let (sum, sq) = draws.iter().fold((0.0, 0.0), |(a, b), &i| {
                let v = (-s * i).exp();
                (a + v, b + v * v)
            });
            let mean = sum / nf;
            let var = if n > 1 { ((sq - nf * mean * mean) / (nf - 1.0)).max(0.0) } else { 0.0 };
            LaplaceEstimate { s, estimate: mean, std_error: (var / nf).sqrt(), samples: n }
        })
        .collect())
}
