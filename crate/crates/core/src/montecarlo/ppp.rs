use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::trial::{evaluate_cluster, link_distance, rank_order, received_power, window_center, Targets};
use super::{trial_rng, CoverageEstimate, SimOptions};
use crate::error::Result;
use crate::geometry::{sample_ppp, NetworkParams, Point};
use crate::SicMode;

/// Coverage when users form an independent PPP and attach to the nearest
/// base station.
///
/// Cell loads are random, so rank `m` is sampled only in cells holding at
/// least `m` users: each per-rank entry is conditional on that event and is
/// `None` when it never occurred. The mean pools all realized users of the
/// central cell; its half-width treats them as independent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PppReport {
    pub mode: SicMode,
    pub per_rank: Vec<Option<CoverageEstimate>>,
    pub mean: Option<CoverageEstimate>,
    /// Average number of users in the central cell.
    pub mean_load: f64,
    pub cells: u64,
}

struct Cell {
    signals: Vec<f64>,
    inter_noma: f64,
    inter_oma: f64,
}

fn sample_cell<R: Rng + ?Sized>(params: &NetworkParams, options: &SimOptions, rng: &mut R) -> Cell {
    let center = window_center(params);
    let side = params.region_side;
    let mut bs = vec![center];
    match options.fixed_cluster_count {
        Some(n) => bs.extend(
            (1..n).map(|_| Point::new(rng.random::<f64>() * side, rng.random::<f64>() * side)),
        ),
        None => bs.extend(sample_ppp(params.bs_intensity, side, rng)),
    }
    let user_intensity = params.bs_intensity * params.users_per_cluster as f64;
    let users = sample_ppp(user_intensity, side, rng);

    let mut members: Vec<Vec<(f64, f64)>> = vec![Vec::new(); bs.len()];
    for &u in &users {
        let (home, d_home) = bs
            .iter()
            .enumerate()
            .map(|(i, &b)| (i, link_distance(u, b, params, options.wraparound)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("at least the central station");
        let d_center = if home == 0 {
            d_home
        } else {
            link_distance(u, center, params, options.wraparound)
        };
        let power = received_power(params, Exp1.sample(rng), d_center);
        members[home].push((d_center, power));
    }

    let mut inter_noma = 0.0;
    let mut inter_oma = 0.0;
    for cell in &members[1..] {
        inter_noma += cell.iter().map(|x| x.1).sum::<f64>();
        if !cell.is_empty() {
            inter_oma += cell[rng.random_range(0..cell.len())].1;
        }
    }
    let own = &members[0];
    let d: Vec<f64> = own.iter().map(|x| x.0).collect();
    let p: Vec<f64> = own.iter().map(|x| x.1).collect();
    let order = rank_order(&d, &p, options.ranking_rule);
    Cell {
        signals: order.iter().map(|&i| p[i]).collect(),
        inter_noma,
        inter_oma,
    }
}

#[derive(Clone)]
struct Tally {
    covered: Vec<u64>,
    present: Vec<u64>,
    users: u64,
    users_covered: u64,
}

pub fn estimate_ppp_baseline(
    params: &NetworkParams,
    mode: SicMode,
    options: &SimOptions,
) -> Result<PppReport> {
    Ok(estimate_ppp_baseline_modes(params, &[mode], options)?.remove(0))
}

/// PPP-user baseline for several modes on shared realizations.
///
/// Ranks above `c̄` use the rank-`c̄` rate target; the OMA target uses the
/// cell's realized load `k`: `2^{R_m k} - 1`.
pub fn estimate_ppp_baseline_modes(
    params: &NetworkParams,
    modes: &[SicMode],
    options: &SimOptions,
) -> Result<Vec<PppReport>> {
    params.validate()?;
    options.validate_for_estimate()?;
    let c = params.users_per_cluster;
    let n = options.n_trials as u64;
    let empty = || {
        vec![
            Tally { covered: vec![0; c], present: vec![0; c], users: 0, users_covered: 0 };
            modes.len()
        ]
    };
    let tallies = (0..n)
        .into_par_iter()
        .fold(empty, |mut acc, i| {
            let cell = sample_cell(params, options, &mut trial_rng(options.rng_seed, i));
            let load = cell.signals.len();
            let rate = |m: usize| params.rate_target(m.min(c));
            let noma = |m: usize| rate(m).exp2() - 1.0;
            let oma = |m: usize| (rate(m) * load as f64).exp2() - 1.0;
            let targets = Targets {
                noma: &noma,
                oma: &oma,
                threshold: params.detection_threshold,
                noise: params.effective_noise(),
            };
            for (t, &mode) in acc.iter_mut().zip(modes) {
                let r = evaluate_cluster(&cell.signals, cell.inter_noma, cell.inter_oma, mode, &targets);
                t.users += load as u64;
                for (m, &ok) in r.rate_covered.iter().enumerate() {
                    t.users_covered += ok as u64;
                    if m < c {
                        t.present[m] += 1;
                        t.covered[m] += ok as u64;
                    }
                }
            }
            acc
        })
        .reduce(empty, |a, b| {
            a.into_iter()
                .zip(b)
                .map(|(mut x, y)| {
                    for m in 0..c {
                        x.covered[m] += y.covered[m];
                        x.present[m] += y.present[m];
                    }
                    x.users += y.users;
                    x.users_covered += y.users_covered;
                    x
                })
                .collect()
        });

    Ok(tallies
        .into_iter()
        .zip(modes)
        .map(|(t, &mode)| PppReport {
            mode,
            per_rank: (0..c)
                .map(|m| {
                    (t.present[m] > 0)
                        .then(|| CoverageEstimate::from_counts(t.covered[m], t.present[m], mode))
                })
                .collect(),
            mean: (t.users > 0).then(|| CoverageEstimate::from_counts(t.users_covered, t.users, mode)),
            mean_load: t.users as f64 / n as f64,
            cells: n,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_load_matches_users_per_cluster() {
        let p = NetworkParams::default().with_bs_count(8.0);
        let o = SimOptions { n_trials: 100_000, rng_seed: 11, ..Default::default() };
        let r = estimate_ppp_baseline(&p, SicMode::PerfectSic, &o).unwrap();
        let c = p.users_per_cluster as f64;
        assert!((r.mean_load - c).abs() / c < 0.02, "load {}", r.mean_load);
    }

    #[test]
    fn no_users_means_undefined() {
        let p = NetworkParams { bs_intensity: 1e-12, ..NetworkParams::default() };
        let o = SimOptions { n_trials: 200, ..Default::default() };
        let r = estimate_ppp_baseline(&p, SicMode::Oma, &o).unwrap();
        assert!(r.mean.is_none());
        assert!(r.per_rank.iter().all(Option::is_none));
    }
}
