//! Special functions not covered by `statrs`.

use statrs::function::gamma::{gamma_lr, ln_gamma};

/// `e^x x^(-a) Γ(a, x)` for `x > 0` and any real `a`, by the Legendre continued
/// fraction (modified Lentz). Accurate when `x` is not small compared to `|a|`;
/// convergence slows as `x -> 0`.
pub fn scaled_upper_gamma(a: f64, x: f64) -> f64 {
    debug_assert!(x > 0.0);
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..20_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// `E[(c + A)^(-p)]` for `A ~ Exp(rate)`, `c > 0`, `p > 0`.
pub fn exp_shifted_power_mean(rate: f64, c: f64, p: f64) -> f64 {
    // = rate e^(rate c) ∫_c^∞ e^(-rate s) s^(-p) ds = rate c^(1-p) S(1-p, rate c)
    rate * c.powf(1.0 - p) * scaled_upper_gamma(1.0 - p, rate * c)
}

/// Lower incomplete gamma `γ(a, x) = Γ(a) P(a, x)`.
pub fn lower_gamma(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    gamma_lr(a, x) * ln_gamma(a).exp()
}

/// `x^(-a) γ(a, x)`, finite at `x = 0` where it equals `1/a`.
pub fn scaled_lower_gamma(a: f64, x: f64) -> f64 {
    if x < 1e-3 {
        // Series: x^(-a) γ(a,x) = Σ_k (-x)^k / (k! (a+k))
        let mut term = 1.0;
        let mut sum = 1.0 / a;
        for k in 1..20 {
            term *= -x / k as f64;
            sum += term / (a + k as f64);
        }
        return sum;
    }
    lower_gamma(a, x) * x.powf(-a)
}

/// Draw from Gamma(shape, 1) conditioned on `(0, upper]`, by inverting the
/// regularized lower incomplete gamma at `u * P(shape, upper)`.
pub fn truncated_gamma_quantile(shape: f64, upper: f64, u: f64) -> f64 {
    let target = u * gamma_lr(shape, upper);
    if target <= 0.0 {
        return 0.0;
    }
    let log_norm = ln_gamma(shape);
    let mut lo = 0.0;
    let mut hi = upper;
    // Start from the small-x expansion P(a,x) ~ x^a / Γ(a+1).
    let mut x = (target.ln() + ln_gamma(shape + 1.0)).exp().powf(1.0 / shape).clamp(0.0, upper);
    if !(x > 0.0 && x < upper) {
        x = 0.5 * upper;
    }
    for _ in 0..200 {
        let p = gamma_lr(shape, x);
        let diff = p - target;
        if diff > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        if diff.abs() <= 1e-15 * target || (hi - lo) <= 1e-15 * hi {
            break;
        }
        let density = ((shape - 1.0) * x.ln() - x - log_norm).exp();
        let newton = x - diff / density;
        x = if newton > lo && newton < hi && density > 0.0 { newton } else { 0.5 * (lo + hi) };
    }
    x
}
