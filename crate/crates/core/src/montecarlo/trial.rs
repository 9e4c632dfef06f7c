use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::{RankingRule, SimOptions};
use crate::geometry::{populate_clusters, sample_ppp, NetworkParams, Point};
use crate::SicMode;

/// Per-rank outcome of one trial in one mode. Index `m-1` is rank `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub mode: SicMode,
    /// SINR at least the detection threshold, as the chain ran.
    pub decode_success: Vec<bool>,
    /// SINR at least the rank's rate target.
    pub rate_covered: Vec<bool>,
    /// Linear SINR; `f64::INFINITY` when nothing interferes and `N0 = 0`.
    pub sinr: Vec<f64>,
    /// Residual intra-cluster interference seen by each rank.
    pub intra_power: Vec<f64>,
    /// Inter-cluster interference at the serving base station.
    pub inter_power: f64,
    /// Noise on the same scale as the powers above.
    pub noise_power: f64,
}

impl TrialResult {
    /// Total interference seen by rank `m`.
    pub fn aggregate_interference(&self, m: usize) -> f64 {
        self.intra_power[m - 1] + self.inter_power
    }
}

/// One sampled realization as seen from the central base station.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSample {
    /// Received powers of the serving cluster's users in rank order.
    pub signals: Vec<f64>,
    /// Serving distances in rank order.
    pub distances: Vec<f64>,
    /// All users of every other cluster.
    pub inter_noma: f64,
    /// One uniformly chosen user per other cluster.
    pub inter_oma: f64,
    pub clusters: usize,
}

pub(crate) fn window_center(params: &NetworkParams) -> Point {
    Point::new(params.region_side / 2.0, params.region_side / 2.0)
}

pub(crate) fn link_distance(a: Point, b: Point, params: &NetworkParams, wrap: bool) -> f64 {
    if wrap {
        a.torus_distance(b, params.region_side)
    } else {
        a.distance(b)
    }
}

pub(crate) fn received_power(params: &NetworkParams, fading: f64, d: f64) -> f64 {
    params.tx_power * fading * d.powf(-params.pathloss_exponent)
}

pub(crate) fn rank_order(distances: &[f64], powers: &[f64], rule: RankingRule) -> Vec<usize> {
    let mut order: Vec<usize> = (0..distances.len()).collect();
    match rule {
        RankingRule::ByDistance => order.sort_by(|&a, &b| distances[a].total_cmp(&distances[b])),
        RankingRule::ByReceivedPower => order.sort_by(|&a, &b| powers[b].total_cmp(&powers[a])),
    }
    order
}

/// Draws one realization: the serving base station sits at the window
/// center, the others form a PPP (or a fixed count) on the window.
///
/// Draw order is fixed (stations, users, fading, OMA picks) so that every
/// mode evaluated on the same stream sees the same network.
pub fn sample_trial<R: Rng + ?Sized>(
    params: &NetworkParams,
    options: &SimOptions,
    rng: &mut R,
) -> TrialSample {
    let center = window_center(params);
    let side = params.region_side;
    let mut bs = vec![center];
    match options.fixed_cluster_count {
        Some(n) => bs.extend(
            (1..n).map(|_| Point::new(rng.random::<f64>() * side, rng.random::<f64>() * side)),
        ),
        None => bs.extend(sample_ppp(params.bs_intensity, side, rng)),
    }
    let net = populate_clusters(bs, params, rng);
    let clusters = net.bs_positions.len();

    let serving = &net.users[0];
    let distances: Vec<f64> = serving.iter().map(|&u| u.distance(center)).collect();
    let powers: Vec<f64> = distances
        .iter()
        .map(|&d| received_power(params, Exp1.sample(rng), d))
        .collect();

    let mut inter_noma = 0.0;
    let mut inter_oma = 0.0;
    for cluster in &net.users[1..] {
        let mut own = Vec::with_capacity(cluster.len());
        for &u in cluster {
            let d = link_distance(u, center, params, options.wraparound);
            let p = received_power(params, Exp1.sample(rng), d);
            inter_noma += p;
            own.push(p);
        }
        inter_oma += own[rng.random_range(0..own.len())];
    }

    let order = rank_order(&distances, &powers, options.ranking_rule);
    TrialSample {
        signals: order.iter().map(|&i| powers[i]).collect(),
        distances: order.iter().map(|&i| distances[i]).collect(),
        inter_noma,
        inter_oma,
        clusters,
    }
}

fn sinr(signal: f64, interference: f64) -> f64 {
    if interference <= 0.0 {
        f64::INFINITY
    } else {
        signal / interference
    }
}

/// Per-rank SINR targets for one evaluation.
pub(crate) struct Targets<'a> {
    pub noma: &'a dyn Fn(usize) -> f64,
    pub oma: &'a dyn Fn(usize) -> f64,
    pub threshold: f64,
    pub noise: f64,
}

pub(crate) fn evaluate_cluster(
    signals: &[f64],
    inter_noma: f64,
    inter_oma: f64,
    mode: SicMode,
    t: &Targets<'_>,
) -> TrialResult {
    let n = signals.len();
    let mut decode = Vec::with_capacity(n);
    let mut covered = Vec::with_capacity(n);
    let mut sinrs = Vec::with_capacity(n);
    let mut intra = Vec::with_capacity(n);
    // suffix[i]: total signal of ranks below rank i+1
    let mut suffix = vec![0.0; n];
    for i in (0..n.saturating_sub(1)).rev() {
        suffix[i] = suffix[i + 1] + signals[i + 1];
    }
    let mut stuck = 0.0;
    let mut chain_ok = true;
    let inter = if mode == SicMode::Oma { inter_oma } else { inter_noma };
    for (i, &s) in signals.iter().enumerate() {
        let m = i + 1;
        let above_m = suffix[i];
        let residual = match mode {
            SicMode::PerfectSic | SicMode::WorstCaseSic => above_m,
            SicMode::ImperfectSic => above_m + stuck,
            SicMode::Oma => 0.0,
        };
        let g = sinr(s, residual + inter + t.noise);
        let detected = g >= t.threshold;
        let (dec, cov) = match mode {
            SicMode::PerfectSic => (detected, g >= (t.noma)(m)),
            SicMode::ImperfectSic => {
                if !detected {
                    stuck += s;
                }
                (detected, g >= (t.noma)(m))
            }
            SicMode::WorstCaseSic => {
                let ok = chain_ok;
                chain_ok &= detected;
                (ok && detected, ok && g >= (t.noma)(m))
            }
            SicMode::Oma => (detected, g >= (t.oma)(m)),
        };
        decode.push(dec);
        covered.push(cov);
        sinrs.push(g);
        intra.push(residual);
    }
    TrialResult {
        mode,
        decode_success: decode,
        rate_covered: covered,
        sinr: sinrs,
        intra_power: intra,
        inter_power: inter,
        noise_power: t.noise,
    }
}

impl TrialSample {
    pub fn evaluate(&self, mode: SicMode, params: &NetworkParams) -> TrialResult {
        let noma = |m: usize| params.sinr_target(m);
        let oma = |m: usize| params.oma_target(m);
        let t = Targets {
            noma: &noma,
            oma: &oma,
            threshold: params.detection_threshold,
            noise: params.effective_noise(),
        };
        evaluate_cluster(&self.signals, self.inter_noma, self.inter_oma, mode, &t)
    }
}

/// Samples one realization and runs the receiver in `mode`.
pub fn run_trial<R: Rng + ?Sized>(
    params: &NetworkParams,
    mode: SicMode,
    options: &SimOptions,
    rng: &mut R,
) -> TrialResult {
    sample_trial(params, options, rng).evaluate(mode, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::montecarlo::trial_rng;

    fn params() -> NetworkParams {
        NetworkParams::default().with_bs_count(4.0)
    }

    #[test]
    fn last_rank_has_no_intra_under_perfect_sic() {
        let p = params();
        let o = SimOptions::default();
        for i in 0..200 {
            let r = run_trial(&p, SicMode::PerfectSic, &o, &mut trial_rng(3, i));
            assert_eq!(r.intra_power[p.users_per_cluster - 1], 0.0);
        }
    }

    #[test]
    fn same_stream_same_result() {
        let p = params();
        let o = SimOptions::default();
        for mode in SicMode::ALL {
            let a = run_trial(&p, mode, &o, &mut trial_rng(9, 17));
            let b = run_trial(&p, mode, &o, &mut trial_rng(9, 17));
            assert_eq!(a, b);
        }
    }

    #[test]
    fn lone_cluster_without_noise_is_always_covered() {
        let p = NetworkParams { noise_power: 0.0, ..params() };
        let o = SimOptions { fixed_cluster_count: Some(1), ..Default::default() };
        let c = p.users_per_cluster;
        for i in 0..50 {
            let r = run_trial(&p, SicMode::PerfectSic, &o, &mut trial_rng(1, i));
            assert!(r.sinr[c - 1].is_infinite());
            assert!(r.rate_covered[c - 1]);
        }
    }

    #[test]
    fn aggregate_splits_into_intra_and_inter() {
        let p = params();
        let o = SimOptions::default();
        for i in 0..100 {
            let s = sample_trial(&p, &o, &mut trial_rng(5, i));
            let r = s.evaluate(SicMode::ImperfectSic, &p);
            for m in 1..=p.users_per_cluster {
                let total = r.aggregate_interference(m);
                assert_eq!(total, r.intra_power[m - 1] + r.inter_power);
                if r.sinr[m - 1].is_finite() {
                    let back = s.signals[m - 1] / r.sinr[m - 1] - r.noise_power;
                    assert!((back - total).abs() <= 1e-9 * total.max(1e-300));
                }
            }
        }
    }

    #[test]
    fn worst_case_success_implies_imperfect_success() {
        let p = NetworkParams { rate_targets: crate::RateTargets::Shared(0.5), ..params() };
        let o = SimOptions::default();
        for i in 0..500 {
            let s = sample_trial(&p, &o, &mut trial_rng(2, i));
            let w = s.evaluate(SicMode::WorstCaseSic, &p);
            let im = s.evaluate(SicMode::ImperfectSic, &p);
            let pf = s.evaluate(SicMode::PerfectSic, &p);
            for m in 0..p.users_per_cluster {
                assert!(!w.rate_covered[m] || im.rate_covered[m]);
                assert!(!im.rate_covered[m] || pf.rate_covered[m]);
            }
        }
    }

    #[test]
    fn received_power_ranking_is_descending() {
        let p = params();
        let o = SimOptions { ranking_rule: RankingRule::ByReceivedPower, ..Default::default() };
        let s = sample_trial(&p, &o, &mut trial_rng(4, 0));
        assert!(s.signals.windows(2).all(|w| w[0] >= w[1]));
        let o = SimOptions::default();
        let s = sample_trial(&p, &o, &mut trial_rng(4, 0));
        assert!(s.distances.windows(2).all(|w| w[0] <= w[1]));
    }
}
