use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::trial::sample_trial;
use super::{trial_rng, CoverageEstimate, SimOptions};
use crate::error::Result;
use crate::geometry::NetworkParams;
use crate::SicMode;

/// Simulated coverage of one mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub mode: SicMode,
    /// Rate coverage of ranks `1..=c̄`.
    pub per_rank: Vec<CoverageEstimate>,
    /// Detection frequency of ranks `1..=c̄` along the decoding chain.
    pub detection: Vec<CoverageEstimate>,
    /// Fraction of the cluster's users covered, averaged over trials. Its
    /// half-width uses the sample variance of the per-trial fractions.
    pub mean: CoverageEstimate,
}

#[derive(Clone)]
struct Tally {
    covered: Vec<u64>,
    detected: Vec<u64>,
    per_trial: u64,
    per_trial_sq: u64,
}

impl Tally {
    fn new(c: usize) -> Self {
        Tally {
            covered: vec![0; c],
            detected: vec![0; c],
            per_trial: 0,
            per_trial_sq: 0,
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.covered.iter_mut().zip(&other.covered) {
            *a += b;
        }
        for (a, b) in self.detected.iter_mut().zip(&other.detected) {
            *a += b;
        }
        self.per_trial += other.per_trial;
        self.per_trial_sq += other.per_trial_sq;
        self
    }
}

/// Per-rank and mean coverage of `mode` over `n_trials` realizations.
pub fn estimate_coverage(
    params: &NetworkParams,
    mode: SicMode,
    options: &SimOptions,
) -> Result<CoverageReport> {
    Ok(estimate_coverage_modes(params, &[mode], options)?.remove(0))
}

/// Evaluates several modes on the same realizations (paired samples).
pub fn estimate_coverage_modes(
    params: &NetworkParams,
    modes: &[SicMode],
    options: &SimOptions,
) -> Result<Vec<CoverageReport>> {
    params.validate()?;
    options.validate_for_estimate()?;
    let c = params.users_per_cluster;
    let n = options.n_trials as u64;
    let empty = || vec![Tally::new(c); modes.len()];
    let tallies = (0..n)
        .into_par_iter()
        .fold(empty, |mut acc, i| {
            let sample = sample_trial(params, options, &mut trial_rng(options.rng_seed, i));
            for (t, &mode) in acc.iter_mut().zip(modes) {
                let r = sample.evaluate(mode, params);
                let mut k = 0u64;
                for m in 0..c {
                    if r.rate_covered[m] {
                        t.covered[m] += 1;
                        k += 1;
                    }
                    if r.decode_success[m] {
                        t.detected[m] += 1;
                    }
                }
                t.per_trial += k;
                t.per_trial_sq += k * k;
            }
            acc
        })
        .reduce(empty, |a, b| a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect());

    Ok(tallies
        .into_iter()
        .zip(modes)
        .map(|(t, &mode)| {
            let cf = c as f64;
            CoverageReport {
                mode,
                per_rank: t.covered.iter().map(|&k| CoverageEstimate::from_counts(k, n, mode)).collect(),
                detection: t.detected.iter().map(|&k| CoverageEstimate::from_counts(k, n, mode)).collect(),
                mean: CoverageEstimate::from_moments(
                    t.per_trial as f64 / cf,
                    t.per_trial_sq as f64 / (cf * cf),
                    n,
                    mode,
                ),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> NetworkParams {
        NetworkParams {
            users_per_cluster: 4,
            rate_targets: crate::RateTargets::Shared(1.0),
            ..NetworkParams::default()
        }
        .with_bs_count(2.0)
    }

    #[test]
    fn estimates_are_probabilities_and_tighten() {
        let p = params();
        let small = SimOptions { n_trials: 1_000, ..Default::default() };
        let big = SimOptions { n_trials: 100_000, ..Default::default() };
        let a = estimate_coverage(&p, SicMode::PerfectSic, &small).unwrap();
        let b = estimate_coverage(&p, SicMode::PerfectSic, &big).unwrap();
        for (x, y) in a.per_rank.iter().zip(&b.per_rank) {
            assert!((0.0..=1.0).contains(&x.estimate));
            if x.half_width_95 > 0.0 {
                let ratio = x.half_width_95 / y.half_width_95;
                assert!((ratio - 10.0).abs() < 2.5, "ratio {ratio}");
            }
        }
        let lo = b.per_rank.iter().map(|e| e.estimate).fold(1.0, f64::min);
        let hi = b.per_rank.iter().map(|e| e.estimate).fold(0.0, f64::max);
        assert!(b.mean.estimate >= lo - 1e-12 && b.mean.estimate <= hi + 1e-12);
    }

    #[test]
    fn mean_is_average_of_ranks() {
        let p = params();
        let o = SimOptions { n_trials: 2_000, ..Default::default() };
        let r = estimate_coverage(&p, SicMode::ImperfectSic, &o).unwrap();
        let avg = r.per_rank.iter().map(|e| e.estimate).sum::<f64>() / 4.0;
        assert!((avg - r.mean.estimate).abs() < 1e-12);
    }

    #[test]
    fn independent_of_thread_count() {
        let p = params();
        let o = SimOptions { n_trials: 3_000, rng_seed: 77, ..Default::default() };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| estimate_coverage_modes(&p, &SicMode::ALL, &o).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn too_few_trials_rejected() {
        let o = SimOptions { n_trials: 10, ..Default::default() };
        assert!(estimate_coverage(&params(), SicMode::Oma, &o).is_err());
    }
}
