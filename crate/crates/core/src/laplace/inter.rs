use std::cell::RefCell;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{pdf_intercluster_distance, NetworkParams};

use super::quadrature::{integrate, integrate_pieces, integrate_tail, QuadratureConfig};
use super::special::beta_fn;

/// `J(v) = 1 - E_u[1/(1 + sP u^{-α})]` for one user of a cluster whose
/// center sits at distance `v` from the receiver.
fn single_user_deficit(
    sp: f64,
    v: f64,
    params: &NetworkParams,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let big_r = params.cluster_radius;
    let alpha = params.pathloss_exponent;
    let pts: Vec<f64> = if v == 0.0 {
        vec![0.0, big_r]
    } else if v < big_r {
        vec![0.0, big_r - v, big_r + v]
    } else {
        vec![v - big_r, v + big_r]
    };
    let g = |u: f64| sp / (u.powf(alpha) + sp) * pdf_intercluster_distance(u, v, big_r);
    let mut total = 0.0;
    for w in pts.windows(2) {
        // u = mid - half cos τ smooths the square-root edges of the density
        let (mid, half) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
        total += integrate(|tau: f64| g(mid - half * tau.cos()) * half * tau.sin(), 0.0, PI, cfg)?.value;
    }
    Ok(total.clamp(0.0, 1.0))
}

/// `∫_0^∞ (1 - (1 - J(v))^k) v dv` with `k` simultaneously active users per
/// interfering cluster. The part beyond `tail_cutoff_multiplier · R` is
/// mapped onto `(0, 1]` rather than truncated.
pub(crate) fn inter_exponent(
    sp: f64,
    active_users: usize,
    params: &NetworkParams,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let big_r = params.cluster_radius;
    let k = active_users as f64;
    let inner_cfg = cfg.nested();
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let integrand = |v: f64| -> f64 {
        match single_user_deficit(sp, v, params, &inner_cfg) {
            // 1 - (1 - J)^k without cancellation
            Ok(j) => -(k * (-j).ln_1p()).exp_m1() * v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let cutoff = cfg.tail_cutoff_multiplier * big_r;
    let near = integrate_pieces(integrand, &[0.0, big_r, 2.0 * big_r, cutoff], cfg);
    // far field decays like v^{1-α}
    let tail = integrate_tail(integrand, cutoff, params.pathloss_exponent - 1.0, cfg);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(near?.value + tail?.value)
}

fn check_s(s: f64) -> Result<()> {
    if !(s >= 0.0) {
        return Err(Error::Domain(format!("Laplace argument must be >= 0 (got {s})")));
    }
    Ok(())
}

/// Exact Laplace transform of the inter-cluster interference at a cluster
/// center: `exp(-2πλ ∫_0^∞ (1 - E_u[(1 + sP u^{-α})^{-1}]^{c̄}) v dv)`.
pub fn laplace_inter_exact(s: f64, params: &NetworkParams, cfg: &QuadratureConfig) -> Result<f64> {
    laplace_inter_exact_with(s, params.users_per_cluster, params, cfg)
}

/// [`laplace_inter_exact`] with `active_users` transmitters per interfering
/// cluster (1 for OMA).
pub fn laplace_inter_exact_with(
    s: f64,
    active_users: usize,
    params: &NetworkParams,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    check_s(s)?;
    if s == 0.0 || params.bs_intensity == 0.0 || active_users == 0 {
        return Ok(1.0);
    }
    let e = inter_exponent(s * params.tx_power, active_users, params, cfg)?;
    Ok((-2.0 * PI * params.bs_intensity * e).exp())
}

/// Closed-form Jensen bound
/// `exp(-πλ (sP)^{2/α} c̄ B(1 - 2/α, c̄ + 2/α))`.
///
/// Moving the power inside the expectation shrinks the exponent, so this
/// value is never below [`laplace_inter_exact`].
pub fn laplace_inter_bound(s: f64, params: &NetworkParams) -> Result<f64> {
    laplace_inter_bound_with(s, params.users_per_cluster, params)
}

pub fn laplace_inter_bound_with(
    s: f64,
    active_users: usize,
    params: &NetworkParams,
) -> Result<f64> {
    check_s(s)?;
    let alpha = params.pathloss_exponent;
    if !(alpha > 2.0) {
        return Err(Error::Domain(format!("Jensen bound needs α > 2 (got {alpha})")));
    }
    if s == 0.0 || active_users == 0 {
        return Ok(1.0);
    }
    let k = active_users as f64;
    let delta = 2.0 / alpha;
    let b = beta_fn(1.0 - delta, k + delta)?;
    Ok((-PI * params.bs_intensity * (s * params.tx_power).powf(delta) * k * b).exp())
}
