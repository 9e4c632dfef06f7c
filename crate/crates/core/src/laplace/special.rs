//! Beta-family and confluent hypergeometric functions.

use statrs::function::beta::{beta_reg, ln_beta};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Euler Beta function `B(p, q) = Γ(p)Γ(q)/Γ(p+q)`, via log-gamma.
pub fn beta_fn(p: f64, q: f64) -> Result<f64> {
    if !(p > 0.0 && q > 0.0) {
        return Err(Error::Domain(format!("B(p, q) needs p, q > 0 (got {p}, {q})")));
    }
    Ok(ln_beta(p, q).exp())
}

/// Lower incomplete Beta `B_z(p, q) = ∫_0^z t^{p-1}(1-t)^{q-1} dt`.
pub fn incomplete_beta(z: f64, p: f64, q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::Domain(format!("incomplete Beta needs 0 <= z <= 1 (got {z})")));
    }
    Ok(beta_reg(p, q, z) * beta_fn(p, q)?)
}

const SERIES_MAX_TERMS: usize = 20_000;

/// Kummer series `Σ (a)_k/(b)_k x^k/k!` for `x >= 0`, scaled by `e^{-x}`.
fn kummer_series_scaled(a: f64, b: f64, x: f64) -> Result<f64> {
    let mut term = (-x).exp();
    let mut sum = term;
    let mut peak = term;
    for k in 0..SERIES_MAX_TERMS {
        let kf = k as f64;
        term *= (a + kf) / (b + kf) * x / (kf + 1.0);
        sum += term;
        peak = peak.max(term.abs());
        if term.abs() <= f64::EPSILON * sum.abs() && kf > x {
            return Ok(sum);
        }
        if term == 0.0 {
            return Ok(sum);
        }
    }
    Err(Error::Numerical {
        context: format!("1F1 series a={a} b={b} x={x}"),
        estimate: sum,
        error: peak * f64::EPSILON,
        evaluations: SERIES_MAX_TERMS,
    })
}

/// Regularized confluent hypergeometric `₁F̃₁(a; b; x) = ₁F₁(a; b; x)/Γ(b)`.
///
/// For `x < 0` the Kummer transformation `₁F₁(a;b;x) = e^x ₁F₁(b-a;b;-x)`
/// keeps every series term positive; for very negative `x` the large-argument
/// expansion is used, which terminates when `a - b + 1` is a non-positive
/// integer.
pub fn hyp1f1_regularized(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::Domain(format!("1F1 needs b > 0 (got {b})")));
    }
    let ln_gb = ln_gamma(b);
    if x >= 0.0 {
        if x > 700.0 {
            return Err(Error::Unsupported(format!("1F1 argument {x} too large")));
        }
        return Ok(kummer_series_scaled(a, b, x)? * x.exp() / ln_gb.exp());
    }
    let big = -x;
    if big <= 500.0 {
        // e^x 1F1(b-a; b; -x); the scaled series already carries e^{-|x|}
        return Ok(kummer_series_scaled(b - a, b, big)? / ln_gb.exp());
    }
    // ₁F̃₁(a;b;-X) ~ X^{-a}/Γ(b-a) Σ_s (a)_s (a-b+1)_s / s! X^{-s}
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for s in 0..200 {
        let sf = s as f64;
        let next = term * (a + sf) * (a - b + 1.0 + sf) / ((sf + 1.0) * big);
        if next == 0.0 || next.abs() < f64::EPSILON * sum.abs() {
            break;
        }
        if next.abs() > term.abs() {
            // asymptotic series started to diverge; stop at the smallest term
            break;
        }
        term = next;
        sum += term;
    }
    let gba = b - a;
    if gba <= 0.0 && gba.fract() == 0.0 {
        // 1/Γ(b-a) = 0; only the exponentially small part remains
        return Ok(0.0);
    }
    let sign = statrs::function::gamma::gamma(gba).signum();
    Ok(sign * (-a * big.ln() - ln_gamma(gba)).exp() * sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_values() {
        assert!((beta_fn(1.0, 1.0).unwrap() - 1.0).abs() < 1e-14);
        // Γ(4)Γ(5)/Γ(9) = 6·24/40320
        assert!((beta_fn(4.0, 5.0).unwrap() - 1.0 / 280.0).abs() < 1e-15);
        // B(1/2, 3/2) = π/2
        assert!((beta_fn(0.5, 1.5).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-13);
        assert!(beta_fn(0.0, 1.0).is_err());
    }

    #[test]
    fn incomplete_beta_values() {
        for &(p, q) in &[(0.5, 2.5), (3.0, 4.0), (1.0, 1.0)] {
            let full = incomplete_beta(1.0, p, q).unwrap();
            assert!((full - beta_fn(p, q).unwrap()).abs() < 1e-13);
        }
        // B_z(1, 1) = z ; B_z(2, 1) = z²/2
        assert!((incomplete_beta(0.3, 1.0, 1.0).unwrap() - 0.3).abs() < 1e-14);
        assert!((incomplete_beta(0.3, 2.0, 1.0).unwrap() - 0.045).abs() < 1e-14);
        assert!(incomplete_beta(1.5, 2.0, 1.0).is_err());
    }

    #[test]
    fn hyp1f1_closed_forms() {
        // 1F1(1; 2; x) = (e^x - 1)/x and Γ(2) = 1
        for &x in &[-30.0, -3.0, -0.1, 0.5, 4.0] {
            let want = (f64::exp(x) - 1.0) / x;
            let got = hyp1f1_regularized(1.0, 2.0, x).unwrap();
            assert!((got - want).abs() < 1e-13 * want.abs().max(1.0), "x={x}: {got} vs {want}");
        }
        // 1F1(a; a; x) = e^x
        let got = hyp1f1_regularized(2.5, 2.5, -7.0).unwrap() * statrs::function::gamma::gamma(2.5);
        assert!((got - f64::exp(-7.0)).abs() < 1e-15);
    }

    #[test]
    fn hyp1f1_large_negative_matches_series_region() {
        // at X = 500 both branches apply; compare with the asymptotic branch at 501
        let a = 3.0;
        let b = 9.0;
        let s = hyp1f1_regularized(a, b, -500.0).unwrap();
        let t = hyp1f1_regularized(a, b, -501.0).unwrap();
        let ratio = s / t;
        let want = (501.0f64 / 500.0).powf(a);
        assert!((ratio / want - 1.0).abs() < 1e-3, "{ratio} {want}");
    }
}
