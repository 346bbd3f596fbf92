//! Increment laws with regularly varying right tails.
//!
//! Each model provides the tail `Pr{X > x}`, the integrated tail
//! `∫_x^∞ Pr{X > u} du`, nominal and conditional sampling, and the pieces the
//! truncated exponential twist needs (density, support edge, kinks).

mod twisted;

pub use twisted::TwistedTruncated;

use crate::error::{param, Error, RegimeError, Result};
use crate::quadrature::{integrate, integrate_log_tail, integrate_pieces, Tolerance};
use crate::rng::RandomSource;
use crate::special::{exp_shifted_power_mean, scaled_lower_gamma, truncated_gamma_quantile};

/// Relative tolerance used for every quadrature in this module.
pub const QUAD_RTOL: f64 = 1e-10;

/// How a tail quantity is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalPath {
    /// Closed form (or special-function form) when available.
    #[default]
    Auto,
    /// Force numerical integration of the defining integral. Used to
    /// cross-check the closed forms.
    Quadrature,
}

/// `X = V + offset` where `Pr{V > t} = (1 + t)^(-alpha)` for `t >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftedPareto {
    pub alpha: f64,
    pub offset: f64,
}

impl ShiftedPareto {
    fn tail(&self, x: f64) -> f64 {
        let t = x - self.offset;
        if t < 0.0 {
            1.0
        } else {
            (1.0 + t).powf(-self.alpha)
        }
    }

    fn density(&self, x: f64) -> f64 {
        let t = x - self.offset;
        if t < 0.0 {
            0.0
        } else {
            self.alpha * (1.0 + t).powf(-self.alpha - 1.0)
        }
    }

    fn integrated_tail(&self, x: f64) -> f64 {
        let t = x - self.offset;
        let a1 = self.alpha - 1.0;
        if t < 0.0 {
            -t + 1.0 / a1
        } else {
            (1.0 + t).powf(-a1) / a1
        }
    }

    /// Draw of `V` given `V >= s` (`s >= 0`).
    #[inline]
    fn sample_v_above<R: RandomSource + ?Sized>(alpha: f64, s: f64, rng: &mut R) -> f64 {
        let e = -rng.uniform().ln() / alpha;
        if s <= 0.0 {
            e.exp_m1()
        } else {
            ((1.0 + s) * e.exp() - 1.0).max(s)
        }
    }
}

/// `X = Λ R` with `Pr{Λ > x} = min(1, x^(-alpha_lambda))` and `R` standard
/// Laplace (density `e^(-|x|)/2`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaLaplace {
    pub alpha_lambda: f64,
}

impl LambdaLaplace {
    // For x >= 0: Pr{ΛR > x} = (a/2) x^(-a) γ(a, x).
    fn tail(&self, x: f64) -> f64 {
        let a = self.alpha_lambda;
        let right = 0.5 * a * scaled_lower_gamma(a, x.abs());
        if x >= 0.0 {
            right
        } else {
            1.0 - right
        }
    }

    fn density(&self, x: f64) -> f64 {
        let a = self.alpha_lambda;
        0.5 * a * scaled_lower_gamma(a + 1.0, x.abs())
    }

    // E[(X - x)^+] = E[Λ e^(-x/Λ)] / 2 for x >= 0.
    fn integrated_tail(&self, x: f64) -> f64 {
        let a = self.alpha_lambda;
        let right = 0.5 * a * scaled_lower_gamma(a - 1.0, x.abs());
        if x >= 0.0 {
            right
        } else {
            -x + right
        }
    }

    fn tail_quadrature(&self, x: f64) -> Result<f64> {
        let a = self.alpha_lambda;
        let laplace_tail = |y: f64| if y >= 0.0 { 0.5 * (-y).exp() } else { 1.0 - 0.5 * y.exp() };
        let f = |l: f64| a * l.powf(-a - 1.0) * laplace_tail(x / l);
        let mut points = vec![1.0];
        if x.abs() > 1.0 {
            points.push(x.abs());
        }
        points.push(f64::INFINITY);
        Ok(integrate_pieces(f, &points, Tolerance::relative(QUAD_RTOL))?.value)
    }
}

/// Centered M/G/1 increment `X = V - A + drift`: `V` is a service time with
/// `Pr{V > t} = (1 + t)^(-alpha)`, `A ~ Exp(arrival_rate)` an inter-arrival
/// time and `drift = E[A] - E[V]` makes the mean zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueIncrement {
    pub service_alpha: f64,
    pub arrival_rate: f64,
    pub drift: f64,
    /// `E[(1 + A)^(-alpha)]`
    h_tail: f64,
    /// `E[(1 + A)^(1 - alpha)]`
    h_integrated: f64,
}

impl QueueIncrement {
    pub fn new(service_alpha: f64, arrival_rate: f64) -> Result<Self> {
        if !(service_alpha > 1.0 && service_alpha.is_finite()) {
            return Err(param(format!("service tail index must be finite and > 1, got {service_alpha}")));
        }
        if !(arrival_rate > 0.0 && arrival_rate.is_finite()) {
            return Err(param(format!("arrival rate must be positive, got {arrival_rate}")));
        }
        let drift = 1.0 / arrival_rate - 1.0 / (service_alpha - 1.0);
        if drift <= 0.0 {
            return Err(param(format!(
                "unstable queue: load {} >= 1",
                arrival_rate / (service_alpha - 1.0)
            )));
        }
        Ok(Self {
            service_alpha,
            arrival_rate,
            drift,
            h_tail: exp_shifted_power_mean(arrival_rate, 1.0, service_alpha),
            h_integrated: exp_shifted_power_mean(arrival_rate, 1.0, service_alpha - 1.0),
        })
    }

    /// Arrival rate chosen so the traffic intensity `λ E[V]` equals `load`.
    pub fn from_load(service_alpha: f64, load: f64) -> Result<Self> {
        if !(load > 0.0 && load < 1.0) {
            return Err(param(format!("load must lie in (0, 1), got {load}")));
        }
        Self::new(service_alpha, load * (service_alpha - 1.0))
    }

    #[inline]
    fn h(&self, c: f64, p: f64) -> f64 {
        exp_shifted_power_mean(self.arrival_rate, c, p)
    }

    fn tail(&self, x: f64) -> f64 {
        let y = x - self.drift;
        if y >= 0.0 {
            self.h(1.0 + y, self.service_alpha)
        } else {
            1.0 - (self.arrival_rate * y).exp() * (1.0 - self.h_tail)
        }
    }

    fn density(&self, x: f64) -> f64 {
        let y = x - self.drift;
        if y >= 0.0 {
            self.service_alpha * self.h(1.0 + y, self.service_alpha + 1.0)
        } else {
            self.arrival_rate * (self.arrival_rate * y).exp() * (1.0 - self.h_tail)
        }
    }

    fn integrated_tail(&self, x: f64) -> f64 {
        let y = x - self.drift;
        let a1 = self.service_alpha - 1.0;
        let lam = self.arrival_rate;
        if y >= 0.0 {
            self.h(1.0 + y, a1) / a1
        } else {
            -y - (1.0 - self.h_tail) * -(lam * y).exp_m1() / lam + self.h_integrated / a1
        }
    }

    fn service_tail(&self, t: f64) -> f64 {
        if t < 0.0 {
            1.0
        } else {
            (1.0 + t).powf(-self.service_alpha)
        }
    }

    fn tail_quadrature(&self, x: f64) -> Result<f64> {
        let y = x - self.drift;
        let lam = self.arrival_rate;
        let f = |a: f64| lam * (-lam * a).exp() * self.service_tail(y + a);
        let mut points = vec![0.0];
        if y < 0.0 {
            points.push(-y);
        }
        points.push(f64::INFINITY);
        Ok(integrate_pieces(f, &points, Tolerance::relative(QUAD_RTOL))?.value)
    }
}

/// Finitely supported law, for exact enumeration. Atoms are kept sorted by value.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteToy {
    atoms: Vec<(f64, f64)>,
}

impl DiscreteToy {
    pub fn new(atoms: &[(f64, f64)]) -> Result<Self> {
        if atoms.is_empty() {
            return Err(param("discrete law needs at least one atom"));
        }
        let mut atoms = atoms.to_vec();
        for &(v, p) in &atoms {
            if !v.is_finite() {
                return Err(param(format!("atom value {v} is not finite")));
            }
            if !(p > 0.0 && p <= 1.0) {
                return Err(param(format!("atom probability {p} must lie in (0, 1]")));
            }
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(param(format!("atom probabilities sum to {total}, not 1")));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        if atoms.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(param("atom values must be distinct"));
        }
        Ok(Self { atoms })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    fn tail(&self, x: f64) -> f64 {
        self.atoms.iter().filter(|a| a.0 > x).map(|a| a.1).sum()
    }

    fn tail_at_least(&self, x: f64) -> f64 {
        self.atoms.iter().filter(|a| a.0 >= x).map(|a| a.1).sum()
    }

    fn integrated_tail(&self, x: f64) -> f64 {
        self.atoms.iter().map(|&(v, p)| p * (v - x).max(0.0)).sum()
    }

    /// Index of the first atom `>= x`.
    fn first_at_least(&self, x: f64) -> usize {
        self.atoms.partition_point(|a| a.0 < x)
    }
}

/// An increment distribution.
#[derive(Debug, Clone, PartialEq)]
pub enum IncrementModel {
    ParetoShifted(ShiftedPareto),
    ProductLambdaLaplace(LambdaLaplace),
    Queue(QueueIncrement),
    DiscreteToy(DiscreteToy),
}

impl IncrementModel {
    pub fn pareto(alpha: f64, offset: f64) -> Result<Self> {
        if !(alpha > 1.0 && alpha.is_finite()) {
            return Err(param(format!("Pareto tail index must be finite and > 1, got {alpha}")));
        }
        if !offset.is_finite() {
            return Err(param("Pareto offset must be finite"));
        }
        Ok(Self::ParetoShifted(ShiftedPareto { alpha, offset }))
    }

    /// Shifted Pareto moved to mean zero.
    pub fn pareto_centered(alpha: f64) -> Result<Self> {
        Self::pareto(alpha, -1.0 / (alpha - 1.0))
    }

    /// Service-time law `Pr{V > t} = (1 + t)^(-alpha)`, `t >= 0`.
    pub fn pareto_service(alpha: f64) -> Result<Self> {
        Self::pareto(alpha, 0.0)
    }

    /// `Pr{X > x} = x^(-alpha)` on `x >= 1`.
    pub fn pareto_pure(alpha: f64) -> Result<Self> {
        Self::pareto(alpha, 1.0)
    }

    pub fn lambda_laplace(alpha_lambda: f64) -> Result<Self> {
        if !(alpha_lambda > 1.0 && alpha_lambda.is_finite()) {
            return Err(param(format!("Λ tail index must be finite and > 1, got {alpha_lambda}")));
        }
        Ok(Self::ProductLambdaLaplace(LambdaLaplace { alpha_lambda }))
    }

    pub fn queue(service_alpha: f64, load: f64) -> Result<Self> {
        Ok(Self::Queue(QueueIncrement::from_load(service_alpha, load)?))
    }

    pub fn discrete(atoms: &[(f64, f64)]) -> Result<Self> {
        Ok(Self::DiscreteToy(DiscreteToy::new(atoms)?))
    }

    /// Regular-variation index of the right tail; infinite for the discrete law.
    pub fn tail_index(&self) -> f64 {
        match self {
            Self::ParetoShifted(m) => m.alpha,
            Self::ProductLambdaLaplace(m) => m.alpha_lambda,
            Self::Queue(m) => m.service_alpha,
            Self::DiscreteToy(_) => f64::INFINITY,
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Self::ParetoShifted(m) => m.offset + 1.0 / (m.alpha - 1.0),
            Self::ProductLambdaLaplace(_) => 0.0,
            // drift is defined so that the mean vanishes
            Self::Queue(_) => 0.0,
            Self::DiscreteToy(m) => m.atoms.iter().map(|&(v, p)| v * p).sum(),
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, Self::DiscreteToy(_))
    }

    /// Left edge of the support (`-inf` when unbounded).
    pub fn support_lower(&self) -> f64 {
        match self {
            Self::ParetoShifted(m) => m.offset,
            Self::ProductLambdaLaplace(_) | Self::Queue(_) => f64::NEG_INFINITY,
            Self::DiscreteToy(m) => m.atoms[0].0,
        }
    }

    /// Points where the density is not smooth.
    pub fn kinks(&self) -> Vec<f64> {
        match self {
            Self::ParetoShifted(m) => vec![m.offset],
            Self::ProductLambdaLaplace(_) => vec![0.0],
            Self::Queue(m) => vec![m.drift],
            Self::DiscreteToy(m) => m.atoms.iter().map(|a| a.0).collect(),
        }
    }

    /// `Pr{X > x}`.
    pub fn tail(&self, x: f64) -> f64 {
        match self {
            Self::ParetoShifted(m) => m.tail(x),
            Self::ProductLambdaLaplace(m) => m.tail(x),
            Self::Queue(m) => m.tail(x),
            Self::DiscreteToy(m) => m.tail(x),
        }
    }

    /// `Pr{X >= x}`. Differs from [`tail`](Self::tail) only at atoms.
    pub fn tail_at_least(&self, x: f64) -> f64 {
        match self {
            Self::DiscreteToy(m) => m.tail_at_least(x),
            _ => self.tail(x),
        }
    }

    pub fn tail_with(&self, x: f64, path: EvalPath) -> Result<f64> {
        if x.is_nan() {
            return Err(param("tail evaluated at NaN"));
        }
        match (path, self) {
            (EvalPath::Auto, _) | (_, Self::DiscreteToy(_)) => Ok(self.tail(x)),
            (EvalPath::Quadrature, Self::ProductLambdaLaplace(m)) => m.tail_quadrature(x),
            (EvalPath::Quadrature, Self::Queue(m)) => m.tail_quadrature(x),
            (EvalPath::Quadrature, Self::ParetoShifted(m)) => {
                let lo = x.max(m.offset);
                let above = integrate(|u| m.density(u), lo, f64::INFINITY, Tolerance::relative(QUAD_RTOL))?;
                Ok(above.value + if x < m.offset { 1.0 - self.tail(m.offset) } else { 0.0 })
            }
        }
    }

    /// Density, or `None` for the discrete law.
    pub fn density(&self, x: f64) -> Option<f64> {
        match self {
            Self::ParetoShifted(m) => Some(m.density(x)),
            Self::ProductLambdaLaplace(m) => Some(m.density(x)),
            Self::Queue(m) => Some(m.density(x)),
            Self::DiscreteToy(_) => None,
        }
    }

    /// `∫_x^∞ Pr{X > u} du`.
    pub fn integrated_tail(&self, x: f64) -> f64 {
        match self {
            Self::ParetoShifted(m) => m.integrated_tail(x),
            Self::ProductLambdaLaplace(m) => m.integrated_tail(x),
            Self::Queue(m) => m.integrated_tail(x),
            Self::DiscreteToy(m) => m.integrated_tail(x),
        }
    }

    pub fn integrated_tail_with(&self, x: f64, path: EvalPath) -> Result<f64> {
        if x.is_nan() {
            return Err(param("integrated tail evaluated at NaN"));
        }
        if path == EvalPath::Auto || self.is_discrete() {
            return Ok(self.integrated_tail(x));
        }
        let points = self.breakpoints_from(x);
        Ok(integrate_pieces(|u| self.tail(u), &points, Tolerance::relative(QUAD_RTOL))?.value)
    }

    /// `x`, the kinks above it, a geometric ladder and `+inf`.
    fn breakpoints_from(&self, x: f64) -> Vec<f64> {
        let mut points = vec![x];
        points.extend(self.kinks().into_iter().filter(|&k| k > x));
        let mut p = x.abs().max(1.0);
        for _ in 0..4 {
            p *= 4.0;
            points.push(if x >= 0.0 { x + p } else { p });
        }
        points.push(f64::INFINITY);
        points.sort_by(f64::total_cmp);
        points.dedup();
        points
    }

    fn check_g_args(&self, x: f64, beta: f64) -> Result<f64> {
        let alpha = self.tail_index();
        if !alpha.is_finite() {
            return Err(RegimeError::InfiniteTailIndex { alpha }.into());
        }
        if !(beta > 2.0) {
            return Err(param(format!("beta must exceed 2, got {beta}")));
        }
        if !(x > 0.0) {
            return Err(param(format!("G-family tails need x > 0, got {x}")));
        }
        Ok(alpha)
    }

    /// `Pr{X > x} / x^(beta - alpha)`.
    pub fn g_beta_tail(&self, x: f64, beta: f64) -> Result<f64> {
        let alpha = self.check_g_args(x, beta)?;
        Ok(self.tail(x) * x.powf(alpha - beta))
    }

    /// `∫_x^∞ Pr{X > u} / u^(beta - alpha) du`.
    pub fn g_beta_integrated(&self, x: f64, beta: f64) -> Result<f64> {
        let alpha = self.check_g_args(x, beta)?;
        if let Self::ParetoShifted(m) = self {
            if m.offset == 1.0 && x >= 1.0 {
                return Ok(x.powf(1.0 - beta) / (beta - 1.0));
            }
        }
        let mut points = self.breakpoints_from(x);
        points.pop();
        let last = *points.last().expect("x is always a breakpoint");
        let f = |u: f64| self.tail(u) * u.powf(alpha - beta);
        let tol = Tolerance::relative(QUAD_RTOL);
        let body = integrate_pieces(f, &points, tol)?;
        let tail = integrate_log_tail(f, last, tol)?;
        Ok(body.value + tail.value)
    }

    /// One draw from the law.
    #[inline]
    pub fn sample<R: RandomSource + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::ParetoShifted(m) => ShiftedPareto::sample_v_above(m.alpha, 0.0, rng) + m.offset,
            Self::ProductLambdaLaplace(m) => {
                let lambda = (-rng.uniform().ln() / m.alpha_lambda).exp();
                let u = rng.uniform();
                let r = if u < 0.5 { (2.0 * u).ln() } else { -(2.0 * (1.0 - u)).ln() };
                lambda * r
            }
            Self::Queue(m) => {
                let v = ShiftedPareto::sample_v_above(m.service_alpha, 0.0, rng);
                let a = -rng.uniform().ln() / m.arrival_rate;
                v - a + m.drift
            }
            Self::DiscreteToy(m) => {
                let atoms = &m.atoms;
                let i = rng.pick_weighted(atoms.len() as u64, 1.0, &mut |i| atoms[i as usize].1);
                atoms[i as usize].0
            }
        }
    }

    /// One draw from `X | X >= threshold`. The result is never below `threshold`.
    pub fn sample_conditional_tail<R: RandomSource + ?Sized>(&self, threshold: f64, rng: &mut R) -> Result<f64> {
        let x = match self {
            Self::ParetoShifted(m) => {
                ShiftedPareto::sample_v_above(m.alpha, threshold - m.offset, rng) + m.offset
            }
            Self::ProductLambdaLaplace(m) => {
                if threshold > 0.0 {
                    // Given ΛE >= t (E the positive Laplace part), X = t (1 + E'/s)
                    // with s ~ Gamma(a) restricted to (0, t] and E' ~ Exp(1).
                    let s = truncated_gamma_quantile(m.alpha_lambda, threshold, rng.uniform());
                    if !(s > 0.0) {
                        return Err(Error::TailUnderflow { threshold });
                    }
                    threshold * (1.0 - rng.uniform().ln() / s)
                } else {
                    self.rejection_above(threshold, rng)
                }
            }
            Self::Queue(m) => {
                let y = threshold - m.drift;
                let reference = m.service_tail(y.max(0.0));
                if !(reference > 0.0) {
                    return Err(Error::TailUnderflow { threshold });
                }
                loop {
                    let a = -rng.uniform().ln() / m.arrival_rate;
                    let z = y + a;
                    if rng.uniform() * reference < m.service_tail(z) {
                        let v = ShiftedPareto::sample_v_above(m.service_alpha, z, rng);
                        break v - a + m.drift;
                    }
                }
            }
            Self::DiscreteToy(m) => {
                let start = m.first_at_least(threshold);
                let above = &m.atoms[start..];
                if above.is_empty() {
                    return Err(Error::TailUnderflow { threshold });
                }
                let total: f64 = above.iter().map(|a| a.1).sum();
                let i = rng.pick_weighted(above.len() as u64, total, &mut |i| above[i as usize].1);
                above[i as usize].0
            }
        };
        // Rounding in the inverse transforms can land an ulp short.
        let x = x.max(threshold);
        debug_assert!(x >= threshold);
        Ok(x)
    }

    /// Plain rejection; only used when the threshold sits in the body.
    fn rejection_above<R: RandomSource + ?Sized>(&self, threshold: f64, rng: &mut R) -> f64 {
        loop {
            let x = self.sample(rng);
            if x >= threshold {
                return x;
            }
        }
    }

    /// `log ∫_{x < u} e^(θx) F(dx)`, by quadrature (or a finite sum).
    pub fn log_mgf_truncated(&self, u: f64, theta: f64) -> Result<f64> {
        if !(theta >= 0.0 && theta.is_finite()) || !u.is_finite() {
            return Err(param(format!("twist needs finite u and theta >= 0, got u={u}, theta={theta}")));
        }
        if let Self::DiscreteToy(m) = self {
            let s: f64 = m
                .atoms
                .iter()
                .filter(|a| a.0 < u)
                .map(|&(v, p)| p * (theta * (v - u)).exp())
                .sum();
            if s <= 0.0 {
                return Err(Error::TailUnderflow { threshold: u });
            }
            return Ok(theta * u + s.ln());
        }
        let lower = self.support_lower();
        if u <= lower {
            return Err(Error::TailUnderflow { threshold: u });
        }
        let split = u.min(0.0).max(lower);
        let f = |x: f64| {
            let d = self.density(x).unwrap_or(0.0);
            if d == 0.0 {
                0.0
            } else {
                d * (theta * (x - u)).exp()
            }
        };
        let tol = Tolerance::relative(QUAD_RTOL);
        let mut points = vec![lower, split];
        points.extend(self.kinks().into_iter().filter(|&k| k > lower && k < u));
        let mut p = 1.0;
        while p < u {
            if p > split {
                points.push(p);
            }
            p *= 2.0;
        }
        points.push(u);
        points.sort_by(f64::total_cmp);
        points.dedup();
        let mass = integrate_pieces(f, &points, tol)?.value;
        if !(mass > 0.0) {
            return Err(Error::TailUnderflow { threshold: u });
        }
        Ok(theta * u + mass.ln())
    }

    /// Sampler for `F` restricted to `(-inf, u)` and tilted by `e^(θx)`.
    pub fn make_twisted(&self, u: f64, theta: f64) -> Result<TwistedTruncated> {
        TwistedTruncated::new(self.clone(), u, theta)
    }
}
