use std::f64::consts::PI;

use statrs::function::beta::{beta_reg, ln_beta};

use crate::error::{Error, Result};

fn check_ranks(m: usize, users_per_cluster: usize) -> Result<()> {
    if m == 0 || m > users_per_cluster {
        return Err(Error::Domain(format!(
            "rank {m} outside 1..={users_per_cluster}"
        )));
    }
    Ok(())
}

/// Density of `r_(m)`, the m-th smallest of `c̄` i.i.d. distances with law
/// `2r/R²` on `[0, R]` (a generalized Beta law of the first kind).
///
/// `2 r^{2m-1} (1 - r²/R²)^{c̄-m} / (R^{2m} B(m, c̄-m+1))`, zero off `[0, R]`.
pub fn pdf_rank_distance(r: f64, m: usize, users_per_cluster: usize, radius: f64) -> Result<f64> {
    check_ranks(m, users_per_cluster)?;
    if !(0.0..=radius).contains(&r) {
        return Ok(0.0);
    }
    let x = r / radius;
    let ln_norm = ln_beta(m as f64, (users_per_cluster - m + 1) as f64);
    let body = x.powi(2 * m as i32 - 1) * (1.0 - x * x).powi((users_per_cluster - m) as i32);
    Ok(2.0 / radius * body * (-ln_norm).exp())
}

/// CDF of `r_(m)`: the regularized incomplete Beta `I_{r²/R²}(m, c̄-m+1)`.
pub fn cdf_rank_distance(r: f64, m: usize, users_per_cluster: usize, radius: f64) -> Result<f64> {
    check_ranks(m, users_per_cluster)?;
    let z = (r / radius).powi(2).clamp(0.0, 1.0);
    Ok(beta_reg(m as f64, (users_per_cluster - m + 1) as f64, z))
}

/// Density of an inner interferer's distance given `r_(m) = r̂`: `2 r_in / r̂²`.
pub fn pdf_inner_conditional(r_in: f64, r_hat: f64) -> Result<f64> {
    if !(r_hat > 0.0) {
        return Err(Error::Domain(format!("conditioning distance {r_hat} must be > 0")));
    }
    if (0.0..r_hat).contains(&r_in) {
        Ok(2.0 * r_in / (r_hat * r_hat))
    } else {
        Ok(0.0)
    }
}

pub fn cdf_inner_conditional(r_in: f64, r_hat: f64) -> Result<f64> {
    if !(r_hat > 0.0) {
        return Err(Error::Domain(format!("conditioning distance {r_hat} must be > 0")));
    }
    Ok((r_in / r_hat).clamp(0.0, 1.0).powi(2))
}

fn check_outer(r_hat: f64, radius: f64) -> Result<()> {
    if !(r_hat >= 0.0 && r_hat < radius) {
        return Err(Error::Domain(format!(
            "conditioning distance {r_hat} must lie in [0, {radius})"
        )));
    }
    Ok(())
}

/// Density of an outer interferer's distance given `r_(m) = r̂`:
/// `2 r_out / (R² - r̂²)` on `(r̂, R]`.
pub fn pdf_outer_conditional(r_out: f64, r_hat: f64, radius: f64) -> Result<f64> {
    check_outer(r_hat, radius)?;
    if r_out > r_hat && r_out <= radius {
        Ok(2.0 * r_out / (radius * radius - r_hat * r_hat))
    } else {
        Ok(0.0)
    }
}

pub fn cdf_outer_conditional(r_out: f64, r_hat: f64, radius: f64) -> Result<f64> {
    check_outer(r_hat, radius)?;
    let r = r_out.clamp(r_hat, radius);
    Ok((r * r - r_hat * r_hat) / (radius * radius - r_hat * r_hat))
}

/// Maps the j-th ranked distance given `r_(m) = r̂` onto an order statistic of
/// i.i.d. uniforms: returns `(w, dw/dγ, a, b)` with `w ~ Beta(a, b)`.
fn rank_conditional_frame(
    gamma: f64,
    j: usize,
    m: usize,
    r_hat: f64,
    users_per_cluster: usize,
    radius: f64,
) -> Result<Option<(f64, f64, f64, f64)>> {
    check_ranks(m, users_per_cluster)?;
    check_ranks(j, users_per_cluster)?;
    if j == m {
        return Err(Error::Domain("secondary rank must differ from rank".into()));
    }
    if j > m {
        check_outer(r_hat, radius)?;
        if !(gamma > r_hat && gamma <= radius) {
            return Ok(None);
        }
        let span = radius * radius - r_hat * r_hat;
        let w = (gamma * gamma - r_hat * r_hat) / span;
        Ok(Some((
            w,
            2.0 * gamma / span,
            (j - m) as f64,
            (users_per_cluster - j + 1) as f64,
        )))
    } else {
        if !(r_hat > 0.0 && r_hat <= radius) {
            return Err(Error::Domain(format!(
                "conditioning distance {r_hat} outside (0, {radius}]"
            )));
        }
        if !(gamma > 0.0 && gamma < r_hat) {
            return Ok(None);
        }
        let w = (gamma / r_hat).powi(2);
        Ok(Some((w, 2.0 * gamma / (r_hat * r_hat), j as f64, (m - j) as f64)))
    }
}

/// Density of `r_(j)` given `r_(m) = r̂`.
///
/// For `j > m` it is the `(j-m)`-th order statistic of the `c̄-m` outer
/// distances; for `j < m` the `j`-th order statistic of the `m-1` inner ones.
pub fn pdf_rank_conditional(
    gamma: f64,
    j: usize,
    m: usize,
    r_hat: f64,
    users_per_cluster: usize,
    radius: f64,
) -> Result<f64> {
    let Some((w, dw, a, b)) =
        rank_conditional_frame(gamma, j, m, r_hat, users_per_cluster, radius)?
    else {
        return Ok(0.0);
    };
    let body = w.powi(a as i32 - 1) * (1.0 - w).powi(b as i32 - 1);
    Ok(body * dw * (-ln_beta(a, b)).exp())
}

pub fn cdf_rank_conditional(
    gamma: f64,
    j: usize,
    m: usize,
    r_hat: f64,
    users_per_cluster: usize,
    radius: f64,
) -> Result<f64> {
    let upper = if j > m { radius } else { r_hat };
    let lower = if j > m { r_hat } else { 0.0 };
    if gamma <= lower {
        // still validates the arguments
        rank_conditional_frame(upper, j, m, r_hat, users_per_cluster, radius)?;
        return Ok(0.0);
    }
    if gamma >= upper {
        rank_conditional_frame(lower, j, m, r_hat, users_per_cluster, radius)?;
        return Ok(1.0);
    }
    let (w, _, a, b) = rank_conditional_frame(gamma, j, m, r_hat, users_per_cluster, radius)?
        .expect("gamma inside support");
    Ok(beta_reg(a, b, w))
}

/// Density of `u = |x + y|` where `|x| = v` and `y` is uniform on the disk of
/// radius `R`: `u/(πR²)` times the length of the circle of radius `u` that
/// falls inside the disk, i.e. `2u φ(u) / (πR²)` with
/// `φ = arccos((u² + v² - R²) / (2uv))` clamped to `[0, π]`.
pub fn pdf_intercluster_distance(u: f64, v: f64, radius: f64) -> f64 {
    if u < 0.0 || v < 0.0 {
        return 0.0;
    }
    let r2 = radius * radius;
    if v == 0.0 || u == 0.0 {
        return if u <= radius { 2.0 * u / r2 } else { 0.0 };
    }
    2.0 * u * ring_angle(u, v, radius) / (PI * r2)
}

/// `arccos((u² + v² - R²) / (2uv))` clamped to `[0, π]`, through half-angle
/// forms on factored differences so that far clusters (`v ≫ R`) keep full
/// relative precision.
fn ring_angle(u: f64, v: f64, radius: f64) -> f64 {
    let two_uv = 2.0 * u * v;
    // 1 - cos φ and 1 + cos φ
    let below = (radius - u + v) * (radius + u - v) / two_uv;
    let above = (u + v - radius) * (u + v + radius) / two_uv;
    if below <= 0.0 {
        0.0
    } else if above <= 0.0 {
        PI
    } else if below <= 1.0 {
        2.0 * (0.5 * below).sqrt().asin()
    } else {
        PI - 2.0 * (0.5 * above).sqrt().asin()
    }
}

/// CDF of `u`: area of the lens `disk(0, u) ∩ disk(x, R)` over `πR²`.
pub fn cdf_intercluster_distance(u: f64, v: f64, radius: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    let disk = PI * radius * radius;
    if v >= u + radius {
        return 0.0;
    }
    if v <= (u - radius).abs() {
        return (PI * u.min(radius).powi(2) / disk).min(1.0);
    }
    let a1 = ((v * v + u * u - radius * radius) / (2.0 * v * u)).clamp(-1.0, 1.0).acos();
    let a2 = ((v * v + radius * radius - u * u) / (2.0 * v * radius))
        .clamp(-1.0, 1.0)
        .acos();
    let k = ((-v + u + radius) * (v + u - radius) * (v - u + radius) * (v + u + radius)).max(0.0);
    let lens = u * u * a1 + radius * radius * a2 - 0.5 * k.sqrt();
    (lens / disk).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laplace::quadrature::{integrate, QuadratureConfig};

    fn quad<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
        let cfg = QuadratureConfig {
            abs_tol: 1e-14,
            rel_tol: 1e-12,
            ..QuadratureConfig::default()
        };
        integrate(f, a, b, &cfg).unwrap().value
    }

    #[test]
    fn rank_pdf_values() {
        assert!((pdf_rank_distance(0.5, 1, 1, 1.0).unwrap() - 1.0).abs() < 1e-14);
        // 2 * 0.5^3 * 0.75 * Γ(4)/(Γ(2)Γ(2)) = 1.125
        assert!((pdf_rank_distance(0.5, 2, 3, 1.0).unwrap() - 1.125).abs() < 1e-13);
        assert_eq!(pdf_rank_distance(1.2, 2, 3, 1.0).unwrap(), 0.0);
        assert!(pdf_rank_distance(0.5, 0, 3, 1.0).is_err());
        assert!(pdf_rank_distance(0.5, 4, 3, 1.0).is_err());
    }

    #[test]
    fn rank_pdf_normalizes() {
        for (m, c) in [(1, 8), (4, 8), (8, 8)] {
            let total = quad(|r| pdf_rank_distance(r, m, c, 0.8).unwrap(), 0.0, 0.8);
            assert!((total - 1.0).abs() < 1e-10, "m={m}: {total}");
        }
    }

    #[test]
    fn rank_mixture_is_unordered_law() {
        for k in 1..=20 {
            let r = 0.8 * k as f64 / 21.0;
            let mix: f64 = (1..=8)
                .map(|m| pdf_rank_distance(r, m, 8, 0.8).unwrap())
                .sum::<f64>()
                / 8.0;
            assert!((mix - 2.0 * r / 0.64).abs() < 1e-10);
        }
    }

    #[test]
    fn rank_cdf_matches_pdf() {
        let r = 0.37;
        let by_quad = quad(|x| pdf_rank_distance(x, 3, 8, 0.8).unwrap(), 0.0, r);
        assert!((by_quad - cdf_rank_distance(r, 3, 8, 0.8).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn inner_outer_conditionals() {
        assert_eq!(pdf_inner_conditional(0.25, 0.5).unwrap(), 2.0);
        assert!(pdf_inner_conditional(0.25, 0.0).is_err());
        assert_eq!(pdf_inner_conditional(0.6, 0.5).unwrap(), 0.0);
        assert!((quad(|r| pdf_inner_conditional(r, 0.5).unwrap(), 0.0, 0.5) - 1.0).abs() < 1e-12);

        assert!((pdf_outer_conditional(0.9, 0.5, 1.0).unwrap() - 2.4).abs() < 1e-14);
        assert!(pdf_outer_conditional(0.9, 1.0, 1.0).is_err());
        assert_eq!(pdf_outer_conditional(0.4, 0.5, 1.0).unwrap(), 0.0);
        let total = quad(|r| pdf_outer_conditional(r, 0.5, 1.0).unwrap(), 0.5, 1.0);
        assert!((total - 1.0).abs() < 1e-12);
    }

    /// Lemma-style closed forms written with factorials, used as an oracle.
    fn printed_outer(g: f64, j: usize, m: usize, rh: f64, c: usize, big_r: f64) -> f64 {
        let f = |n: usize| (1..=n).product::<usize>() as f64;
        2.0 * g * f(c - m) * (g * g - rh * rh).powi((j - m - 1) as i32)
            * (big_r * big_r - g * g).powi((c - j) as i32)
            / (f(j - m - 1) * f(c - j) * (big_r * big_r - rh * rh).powi((c - m) as i32))
    }

    fn printed_inner(g: f64, j: usize, m: usize, rh: f64) -> f64 {
        let f = |n: usize| (1..=n).product::<usize>() as f64;
        2.0 * f(m - 1) * (rh * rh - g * g).powi((m - j - 1) as i32) * g.powi(2 * j as i32 - 1)
            / (f(m - j - 1) * f(j - 1) * rh.powi(2 * m as i32 - 2))
    }

    #[test]
    fn rank_conditional_matches_closed_forms() {
        for &g in &[0.45, 0.55, 0.7, 0.79] {
            let a = pdf_rank_conditional(g, 5, 3, 0.4, 8, 0.8).unwrap();
            let b = printed_outer(g, 5, 3, 0.4, 8, 0.8);
            assert!((a - b).abs() < 1e-12 * b.max(1.0), "{a} {b}");
        }
        for &g in &[0.05, 0.2, 0.35] {
            let a = pdf_rank_conditional(g, 2, 4, 0.4, 8, 0.8).unwrap();
            let b = printed_inner(g, 2, 4, 0.4);
            assert!((a - b).abs() < 1e-12 * b.max(1.0), "{a} {b}");
        }
    }

    #[test]
    fn rank_conditional_edges() {
        assert!(pdf_rank_conditional(0.2, 3, 3, 0.4, 8, 0.8).is_err());
        // single inner user reduces to the inner conditional law
        for &g in &[0.1, 0.25, 0.39] {
            let a = pdf_rank_conditional(g, 1, 2, 0.4, 8, 0.8).unwrap();
            assert!((a - pdf_inner_conditional(g, 0.4).unwrap()).abs() < 1e-12);
        }
        assert_eq!(pdf_rank_conditional(0.5, 2, 4, 0.4, 8, 0.8).unwrap(), 0.0);
        assert_eq!(pdf_rank_conditional(0.3, 5, 4, 0.4, 8, 0.8).unwrap(), 0.0);
        let total = quad(|g| pdf_rank_conditional(g, 2, 4, 0.4, 8, 0.8).unwrap(), 0.0, 0.4);
        assert!((total - 1.0).abs() < 1e-10);
        let total = quad(|g| pdf_rank_conditional(g, 5, 3, 0.4, 8, 0.8).unwrap(), 0.4, 0.8);
        assert!((total - 1.0).abs() < 1e-10);
        let c = cdf_rank_conditional(0.6, 5, 3, 0.4, 8, 0.8).unwrap();
        let q = quad(|g| pdf_rank_conditional(g, 5, 3, 0.4, 8, 0.8).unwrap(), 0.4, 0.6);
        assert!((c - q).abs() < 1e-10);
    }

    #[test]
    fn intercluster_degenerate_center() {
        for &u in &[0.1, 0.5, 0.79] {
            assert!((pdf_intercluster_distance(u, 0.0, 0.8) - 2.0 * u / 0.64).abs() < 1e-14);
        }
        assert_eq!(pdf_intercluster_distance(0.9, 0.0, 0.8), 0.0);
    }

    #[test]
    fn intercluster_normalizes() {
        let big_r = 0.8f64;
        for &v in &[0.3 * big_r, big_r, 2.5 * big_r] {
            let lo = (v - big_r).max(0.0);
            let mut pts = vec![lo, v + big_r];
            if v < big_r {
                pts.insert(1, big_r - v);
            }
            let total: f64 = pts
                .windows(2)
                .map(|w| quad(|u| pdf_intercluster_distance(u, v, big_r), w[0], w[1]))
                .sum();
            assert!((total - 1.0).abs() < 1e-8, "v={v}: {total}");
        }
    }

    #[test]
    fn intercluster_cdf_matches_pdf() {
        for &(v, u) in &[(0.24, 0.7), (0.8, 0.9), (2.0, 1.7), (2.0, 2.6)] {
            let q = quad(|t| pdf_intercluster_distance(t, v, 0.8), 0.0, u);
            assert!((q - cdf_intercluster_distance(u, v, 0.8)).abs() < 1e-8, "{v} {u}");
        }
        assert_eq!(cdf_intercluster_distance(5.0, 2.0, 0.8), 1.0);
    }
}
