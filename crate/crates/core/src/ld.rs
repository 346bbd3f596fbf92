//! `Pr{S_n > b}` as the sum of a single-big-jump part and a residual part.
//!
//! * `Z_dom`: pick `I` uniformly, draw `X_I` from `F(·|X >= b)` and the other
//!   increments from `F`; return `n Pr{X >= b} / #{i: X_i >= b}` on `S_n > b`.
//! * `Z_res`: draw every increment from the twisted law truncated below `b`
//!   with `θ = -log(n Pr{X >= b}) / b`; return the likelihood ratio
//!   `exp(-θ S_n + n Λ_b(θ))` on `S_n > b`.
//!
//! The two parts are drawn from independent streams and summed.

use crate::error::{param, Error, RegimeError, RegimeWarning, Result};
use crate::harness::Replicate;
use crate::rng::{RandomSource, StreamKey, SubStream};
use crate::sample::EstimatorSample;
use crate::tail_models::{IncrementModel, TwistedTruncated};

pub const DOMINANT: &str = "dom";
pub const RESIDUAL: &str = "res";

#[derive(Debug, Clone, PartialEq)]
pub struct LdProblem {
    pub model: IncrementModel,
    pub n: u64,
    pub b: f64,
    /// The `ε` in the range condition `b > n^(β + ε)`.
    pub epsilon_regime: f64,
}

impl LdProblem {
    pub fn new(model: IncrementModel, n: u64, b: f64) -> Result<Self> {
        if n == 0 {
            return Err(param("n must be at least 1"));
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(param(format!("b must be positive and finite, got {b}")));
        }
        Ok(Self { model, n, b, epsilon_regime: 0.1 })
    }

    /// `1 / min(alpha, 2)`.
    pub fn beta(&self) -> f64 {
        1.0 / self.model.tail_index().min(2.0)
    }

    pub fn warnings(&self) -> Vec<RegimeWarning> {
        let mut out = Vec::new();
        let threshold = (self.n as f64).powf(self.beta() + self.epsilon_regime);
        if self.b <= threshold {
            out.push(RegimeWarning::OutsideLargeDeviationRange { n: self.n, b: self.b, threshold });
        }
        let mean = self.model.mean();
        if mean.abs() > 1e-12 {
            out.push(RegimeWarning::NonZeroMean { mean });
        }
        out
    }
}

/// `θ = -log(n_tail) / b`, rejecting `n_tail >= 1`.
pub fn twist_parameter(n_tail: f64, b: f64) -> Result<f64> {
    if n_tail >= 1.0 {
        return Err(RegimeError::NotRare { n_tail }.into());
    }
    Ok(-n_tail.ln() / b)
}

#[derive(Debug, Clone)]
pub struct LdEstimator {
    problem: LdProblem,
    /// `n Pr{X >= b}`.
    n_tail: f64,
    twisted: TwistedTruncated,
}

impl LdEstimator {
    pub fn new(problem: LdProblem) -> Result<Self> {
        let tail = problem.model.tail_at_least(problem.b);
        if tail == 0.0 && !problem.model.is_discrete() {
            return Err(Error::TailUnderflow { threshold: problem.b });
        }
        let n_tail = problem.n as f64 * tail;
        // With no mass at or above b the big-jump part vanishes and any twist is
        // unbiased; use none.
        let theta = if tail == 0.0 { 0.0 } else { twist_parameter(n_tail, problem.b)? };
        let twisted = problem.model.make_twisted(problem.b, theta)?;
        for w in problem.warnings() {
            log::warn!("{w}");
        }
        log::debug!(
            "n={} b={}: n F(b) = {:.4e}, theta = {:.6}, exp(n Lambda) = {:.6}",
            problem.n,
            problem.b,
            n_tail,
            theta,
            (problem.n as f64 * twisted.log_mgf()).exp()
        );
        Ok(Self { problem, n_tail, twisted })
    }

    pub fn problem(&self) -> &LdProblem {
        &self.problem
    }

    pub fn theta(&self) -> f64 {
        self.twisted.theta()
    }

    /// `n Pr{X >= b}`, also the asymptotic value of `Pr{S_n > b}`.
    pub fn n_tail(&self) -> f64 {
        self.n_tail
    }

    /// `Λ_b(θ)`.
    pub fn log_mgf(&self) -> f64 {
        self.twisted.log_mgf()
    }

    /// Largest value `Z_res` can take: `exp(-θ b + n Λ_b(θ))`.
    pub fn residual_bound(&self) -> f64 {
        (-self.theta() * self.problem.b + self.problem.n as f64 * self.log_mgf()).exp()
    }

    pub fn sample_dom<R: RandomSource + ?Sized>(&self, rng: &mut R) -> Result<EstimatorSample> {
        let LdProblem { ref model, n, b, .. } = self.problem;
        if self.n_tail == 0.0 {
            return Ok(EstimatorSample::single(DOMINANT, 0.0, 0, 0));
        }
        let big = rng.pick_index(n);
        let mut sum = 0.0;
        let mut count = 0u64;
        for i in 0..n {
            let x = if i == big { model.sample_conditional_tail(b, rng)? } else { model.sample(rng) };
            sum += x;
            count += u64::from(x >= b);
        }
        let value = if sum > b { self.n_tail / count as f64 } else { 0.0 };
        assert!(value <= self.n_tail, "Z_dom = {value} exceeds n F(b) = {}", self.n_tail);
        Ok(EstimatorSample::single(DOMINANT, value, n, n))
    }

    pub fn sample_res<R: RandomSource + ?Sized>(&self, rng: &mut R) -> EstimatorSample {
        let LdProblem { n, b, .. } = self.problem;
        let mut sum = 0.0;
        for _ in 0..n {
            sum += self.twisted.sample(rng);
        }
        let value = if sum > b {
            (-self.theta() * sum + n as f64 * self.log_mgf()).exp()
        } else {
            0.0
        };
        let bound = self.residual_bound();
        assert!(value <= bound * (1.0 + 1e-12), "Z_res = {value} exceeds its bound {bound}");
        EstimatorSample::single(RESIDUAL, value, n, n)
    }

    /// One composite replication, using separate streams for the two parts.
    pub fn sample<R: RandomSource + ?Sized>(&self, dom_rng: &mut R, res_rng: &mut R) -> Result<EstimatorSample> {
        let dom = self.sample_dom(dom_rng)?;
        let res = self.sample_res(res_rng);
        Ok(EstimatorSample::combine([dom, res]))
    }
}

impl Replicate for LdEstimator {
    fn replicate(&self, seed: u64, index: u64) -> Result<EstimatorSample> {
        let mut dom = StreamKey::new(seed, index, SubStream::Dominant).stream();
        let mut res = StreamKey::new(seed, index, SubStream::Residual).stream();
        self.sample(&mut dom, &mut res)
    }
}
