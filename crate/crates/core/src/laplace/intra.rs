use crate::error::{Error, Result};
use crate::geometry::{pdf_rank_conditional, NetworkParams};

use super::quadrature::{integrate, QuadratureConfig};

fn check_query(s: f64, m: usize, r_hat: f64, params: &NetworkParams) -> Result<()> {
    params.check_rank(m)?;
    if !(s >= 0.0) {
        return Err(Error::Domain(format!("Laplace argument must be >= 0 (got {s})")));
    }
    if !(r_hat > 0.0 && r_hat <= params.cluster_radius) {
        return Err(Error::Domain(format!(
            "conditioning distance {r_hat} outside (0, {}]",
            params.cluster_radius
        )));
    }
    Ok(())
}

/// `E[1/(1 + sP r^{-α})]` for one outer interferer, `r` uniform-area on
/// `(r̂, R]`, by quadrature. `sp` is `s·P_u`.
pub(crate) fn outer_factor_quadrature(
    sp: f64,
    r_hat: f64,
    params: &NetworkParams,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let big_r = params.cluster_radius;
    let alpha = params.pathloss_exponent;
    let span = big_r * big_r - r_hat * r_hat;
    if span <= big_r * big_r * 1e-12 {
        let g = big_r.powf(alpha);
        return Ok(g / (g + sp));
    }
    let q = integrate(
        |r| {
            let g = r.powf(alpha);
            g / (g + sp) * 2.0 * r / span
        },
        r_hat,
        big_r,
        cfg,
    )?;
    Ok(q.value)
}

/// Same factor for `α = 4` in closed form:
/// `1 - √(sP) [atan(r̂²/√(sP)) - atan(R²/√(sP))] / (r̂² - R²)`.
pub(crate) fn outer_factor_alpha4(sp: f64, r_hat: f64, big_r: f64) -> f64 {
    let a = sp.sqrt();
    let d = big_r * big_r - r_hat * r_hat;
    let q = sp + r_hat * r_hat * big_r * big_r;
    if q == 0.0 {
        return 1.0;
    }
    // difference of arctangents folded into one: atan(a d / q)
    let x = a * d / q;
    let atan_over_x = if x.abs() < 1e-8 { 1.0 - x * x / 3.0 } else { x.atan() / x };
    1.0 - sp / q * atan_over_x
}

/// Laplace transform of the intra-cluster interference seen by rank `m`
/// under perfect SIC, conditioned on `r_(m) = r̂`.
///
/// `[∫_{r̂}^R (1 + sP_u r^{-α})^{-1} 2r/(R² - r̂²) dr]^{c̄-m}`; the bracket is
/// in closed form when `α = 4` and by adaptive quadrature otherwise.
pub fn laplace_intra_perfect(
    s: f64,
    m: usize,
    r_hat: f64,
    params: &NetworkParams,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    check_query(s, m, r_hat, params)?;
    let outer = params.users_per_cluster - m;
    if outer == 0 || s == 0.0 {
        return Ok(1.0);
    }
    let sp = s * params.tx_power;
    let factor = if params.pathloss_exponent == 4.0 {
        outer_factor_alpha4(sp, r_hat, params.cluster_radius)
    } else {
        outer_factor_quadrature(sp, r_hat, params, cfg)?
    };
    Ok(factor.powi(outer as i32))
}

/// [`laplace_intra_perfect`] forced through quadrature for every `α`.
pub fn laplace_intra_perfect_quadrature(
    s: f64,
    m: usize,
    r_hat: f64,
    params: &NetworkParams,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    check_query(s, m, r_hat, params)?;
    let outer = params.users_per_cluster - m;
    if outer == 0 || s == 0.0 {
        return Ok(1.0);
    }
    let f = outer_factor_quadrature(s * params.tx_power, r_hat, params, cfg)?;
    Ok(f.powi(outer as i32))
}

/// Closed-form path of [`laplace_intra_perfect`]; only defined for `α = 4`.
pub fn laplace_intra_perfect_alpha4(
    s: f64,
    m: usize,
    r_hat: f64,
    params: &NetworkParams,
) -> Result<f64> {
    if params.pathloss_exponent != 4.0 {
        return Err(Error::Unsupported(format!(
            "arctan closed form needs α = 4 (got {})",
            params.pathloss_exponent
        )));
    }
    check_query(s, m, r_hat, params)?;
    let outer = params.users_per_cluster - m;
    if outer == 0 || s == 0.0 {
        return Ok(1.0);
    }
    Ok(outer_factor_alpha4(s * params.tx_power, r_hat, params.cluster_radius).powi(outer as i32))
}

/// `E[1/(1 + sP r_(j)^{-α}) | r_(m) = r̂]` for an inner rank `j < m`,
/// integrating against the conditional order-statistic density.
pub(crate) fn inner_factor(
    sp: f64,
    j: usize,
    m: usize,
    r_hat: f64,
    params: &NetworkParams,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if sp == 0.0 {
        return Ok(1.0);
    }
    let alpha = params.pathloss_exponent;
    let c = params.users_per_cluster;
    let big_r = params.cluster_radius;
    let q = integrate(
        |g| {
            let p = pdf_rank_conditional(g, j, m, r_hat, c, big_r).unwrap_or(0.0);
            let ga = g.powf(alpha);
            ga / (ga + sp) * p
        },
        0.0,
        r_hat,
        cfg,
    )?;
    Ok(q.value.min(1.0))
}

/// Inner factors for every rank `j = 1..m-1`, in rank order.
pub(crate) fn inner_factors(
    sp: f64,
    m: usize,
    r_hat: f64,
    params: &NetworkParams,
    cfg: &QuadratureConfig,
) -> Result<Vec<f64>> {
    (1..m)
        .map(|j| inner_factor(sp, j, m, r_hat, params, cfg))
        .collect()
}

fn check_combination(m: usize, detected: &[bool]) -> Result<()> {
    if detected.len() + 1 != m {
        return Err(Error::Domain(format!(
            "combination must have m-1 = {} entries (got {})",
            m.saturating_sub(1),
            detected.len()
        )));
    }
    Ok(())
}

/// Laplace transform of the extra interference left by undetected inner
/// users: the product over `j < m` with `detected[j-1] == false` of the
/// inner factor. Inner ranked distances are treated as independent, each with
/// its own conditional marginal.
pub fn laplace_intra_additional(
    s: f64,
    m: usize,
    r_hat: f64,
    detected: &[bool],
    params: &NetworkParams,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    check_query(s, m, r_hat, params)?;
    check_combination(m, detected)?;
    let sp = s * params.tx_power;
    let mut acc = 1.0;
    for (idx, &hit) in detected.iter().enumerate() {
        if !hit {
            acc *= inner_factor(sp, idx + 1, m, r_hat, params, cfg)?;
        }
    }
    Ok(acc)
}

/// Perfect-SIC transform times the undetected-inner-user transform.
pub fn laplace_intra_imperfect(
    s: f64,
    m: usize,
    r_hat: f64,
    detected: &[bool],
    params: &NetworkParams,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    let perfect = laplace_intra_perfect(s, m, r_hat, params, cfg)?;
    Ok(perfect * laplace_intra_additional(s, m, r_hat, detected, params, cfg)?)
}
