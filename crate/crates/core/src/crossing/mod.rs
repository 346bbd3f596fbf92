//! `Pr{τ_b < ∞}` for the walk `S_n - nμ`, `τ_b = inf{n: S_n - nμ > b}`.
//!
//! Time is cut into blocks `(n_(k-1), n_k]` with `n_0 = 0`, `n_k = r^k`. A block
//! index `K` is drawn from a [`BlockPmf`] and the block probability
//! `Pr{n_(K-1) < τ_b <= n_K}` is estimated by three unbiased sub-estimators,
//! one for each part of a partition of the block event:
//!
//! * `A'`: some `X_i >= b + iμ` with `n_(k-1) < i <= τ_b` (a jump that crosses
//!   on its own);
//! * `B'`: every `X_i < b + n_(k-1) μ` up to `τ_b` (no big jump at all);
//! * `C'`: the rest.
//!
//! `Z_(k,1)` samples one large jump placed in proportion to `Pr{X >= b + iμ}`,
//! `Z_(k,2)` a twisted walk truncated below `b + n_(k-1) μ`, `Z_(k,3)` one jump
//! above `b + n_(k-1) μ` at a uniform time. The replication returns
//! `(Z_(K,1) + Z_(K,2) + Z_(K,3)) / p_K`.

mod pmf;

use std::sync::OnceLock;

pub use pmf::{resolve_regime, BlockPmf, BlockRegime, ResolvedRegime};

use crate::error::{param, Error, RegimeError, RegimeWarning, Result};
use crate::harness::Replicate;
use crate::ld::twist_parameter;
use crate::rng::{NeumaierSum, RandomSource, StreamKey, SubStream};
use crate::sample::EstimatorSample;
use crate::tail_models::{IncrementModel, TwistedTruncated};

pub const BIG_JUMP: &str = "z1";
pub const BOUNDED: &str = "z2";
pub const MIXED: &str = "z3";

/// Geometric blocks `n_k = r^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockScheme {
    r: u64,
    k_max: u32,
}

impl BlockScheme {
    pub fn new(r: u64) -> Result<Self> {
        if r < 2 {
            return Err(param(format!("block ratio r must be at least 2, got {r}")));
        }
        let mut k_max = 0;
        while r.checked_pow(k_max + 1).is_some() {
            k_max += 1;
        }
        Ok(Self { r, k_max })
    }

    pub fn r(&self) -> u64 {
        self.r
    }

    /// Largest `k` whose `n_k` fits in a `u64`.
    pub fn k_max(&self) -> u32 {
        self.k_max
    }

    /// `n_k`; `n_0 = 0`. Panics beyond [`k_max`](Self::k_max).
    pub fn n(&self, k: u32) -> u64 {
        if k == 0 {
            0
        } else {
            self.r.checked_pow(k).expect("block index beyond k_max")
        }
    }
}

impl Default for BlockScheme {
    fn default() -> Self {
        Self::new(2).expect("r = 2 is valid")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossingProblem {
    pub model: IncrementModel,
    pub mu: f64,
    pub b: f64,
    pub scheme: BlockScheme,
}

impl CrossingProblem {
    pub fn new(model: IncrementModel, mu: f64, b: f64, scheme: BlockScheme) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(param(format!("drift mu must be positive, got {mu}")));
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(param(format!("level b must be positive, got {b}")));
        }
        Ok(Self { model, mu, b, scheme })
    }

    /// Drift of the walk for the M/G/1 increment, so that the supremum is the
    /// stationary waiting time.
    pub fn queue_drift(model: &IncrementModel) -> Option<f64> {
        match model {
            IncrementModel::Queue(q) => Some(q.drift),
            _ => None,
        }
    }

    /// Jump threshold `b + iμ` at time `i`.
    #[inline]
    fn level(&self, i: u64) -> f64 {
        self.b + i as f64 * self.mu
    }
}

/// The crossing estimator with its block pmf and per-block caches.
#[derive(Debug)]
pub struct CrossingEstimator {
    problem: CrossingProblem,
    pmf: BlockPmf,
    q: Vec<OnceLock<f64>>,
    twisted: Vec<OnceLock<Result<TwistedTruncated>>>,
}

impl CrossingEstimator {
    pub fn new(problem: CrossingProblem, regime: BlockRegime) -> Result<Self> {
        let pmf = BlockPmf::new(&problem, regime)?;
        for w in pmf.warnings() {
            log::warn!("{w}");
        }
        let mean = problem.model.mean();
        if mean.abs() > 1e-12 {
            log::warn!("{}", RegimeWarning::NonZeroMean { mean });
        }
        let k_max = problem.scheme.k_max();
        for k in 1..=k_max {
            let n_tail = problem.scheme.n(k) as f64 * problem.model.tail_at_least(problem.level(problem.scheme.n(k - 1)));
            if n_tail >= 1.0 {
                return Err(RegimeError::BlockNotRare { k, n_tail }.into());
            }
        }
        let slots = k_max as usize + 1;
        Ok(Self {
            problem,
            pmf,
            q: (0..slots).map(|_| OnceLock::new()).collect(),
            twisted: (0..slots).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn problem(&self) -> &CrossingProblem {
        &self.problem
    }

    pub fn pmf(&self) -> &BlockPmf {
        &self.pmf
    }

    pub fn warnings(&self) -> &[RegimeWarning] {
        self.pmf.warnings()
    }

    fn check_k(&self, k: u32) -> Result<()> {
        if k == 0 || k > self.problem.scheme.k_max() {
            return Err(Error::BlockOverflow { k });
        }
        Ok(())
    }

    /// `q_k = Σ_{n_(k-1) < i <= n_k} Pr{X >= b + iμ}`, summed directly and cached.
    pub fn q(&self, k: u32) -> f64 {
        *self.q[k as usize].get_or_init(|| {
            let p = &self.problem;
            let mut s = NeumaierSum::default();
            for i in p.scheme.n(k - 1) + 1..=p.scheme.n(k) {
                let t = p.model.tail_at_least(p.level(i));
                if t == 0.0 {
                    break;
                }
                s.add(t);
            }
            s.value()
        })
    }

    /// `θ_k = -log(n_k Pr{X >= u_k}) / u_k` with `u_k = b + n_(k-1) μ`.
    pub fn theta(&self, k: u32) -> Result<f64> {
        self.check_k(k)?;
        let p = &self.problem;
        let u = p.level(p.scheme.n(k - 1));
        let tail = p.model.tail_at_least(u);
        if tail == 0.0 {
            return Ok(0.0);
        }
        twist_parameter(p.scheme.n(k) as f64 * tail, u)
    }

    /// Twisted-truncated law used in block `k`, built on first use.
    pub fn twisted(&self, k: u32) -> Result<&TwistedTruncated> {
        self.check_k(k)?;
        self.twisted[k as usize]
            .get_or_init(|| {
                let p = &self.problem;
                let theta = self.theta(k)?;
                p.model.make_twisted(p.level(p.scheme.n(k - 1)), theta)
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Number of indices in `(from, to]`, other than `skip`, whose nominal
    /// increment is at least `threshold(i)`; `threshold` must be nondecreasing.
    ///
    /// Continuous laws skip ahead geometrically under a dominating rate and thin;
    /// discrete laws draw every increment so that enumeration sees each choice.
    fn count_exceedances<R, T>(&self, from: u64, to: u64, skip: u64, threshold: T, rng: &mut R) -> u64
    where
        R: RandomSource + ?Sized,
        T: Fn(u64) -> f64,
    {
        let model = &self.problem.model;
        let mut count = 0;
        if model.is_discrete() {
            for i in from + 1..=to {
                if i != skip && model.sample(rng) >= threshold(i) {
                    count += 1;
                }
            }
            return count;
        }
        let mut i = from + 1;
        while i <= to {
            let bound = model.tail(threshold(i));
            if bound <= 0.0 {
                break;
            }
            if bound < 1.0 {
                let gap = rng.uniform().ln() / (-bound).ln_1p();
                if gap >= (to - i + 1) as f64 {
                    break;
                }
                i += gap as u64;
            }
            let p = model.tail(threshold(i));
            if i != skip && rng.uniform() * bound < p {
                count += 1;
            }
            i += 1;
        }
        count
    }

    /// Big-jump sub-estimator for block `k`.
    pub fn sample_zk1<R: RandomSource + ?Sized>(&self, k: u32, rng: &mut R) -> Result<EstimatorSample> {
        self.check_k(k)?;
        let p = &self.problem;
        let (lo, hi) = (p.scheme.n(k - 1), p.scheme.n(k));
        let q = self.q(k);
        let zero = |nu| Ok(EstimatorSample::single(BIG_JUMP, 0.0, nu, nu));
        if q == 0.0 {
            return zero(0);
        }
        let model = &p.model;
        let j = lo + 1 + rng.pick_weighted(hi - lo, q, &mut |j| model.tail_at_least(p.level(lo + 1 + j)));
        let mut sum = 0.0;
        let mut count = 0u64;
        let mut jumped = false;
        for i in 1..=hi {
            let level = p.level(i);
            let x = if i == j { model.sample_conditional_tail(level, rng)? } else { model.sample(rng) };
            sum += x;
            if i > lo && x >= level {
                count += 1;
                jumped = true;
            }
            if sum - i as f64 * p.mu > p.b {
                if i <= lo || !jumped {
                    return zero(i);
                }
                count += self.count_exceedances(i, hi, j, |m| p.level(m), rng);
                if j > i {
                    count += 1;
                }
                let value = q / count as f64;
                assert!(value <= q, "Z_k1 = {value} exceeds q_k = {q}");
                return Ok(EstimatorSample::single(BIG_JUMP, value, hi, hi));
            }
        }
        zero(hi)
    }

    /// Twisted, truncated sub-estimator for block `k`; stops at `τ_b` or `n_k`.
    pub fn sample_zk2<R: RandomSource + ?Sized>(&self, k: u32, rng: &mut R) -> Result<EstimatorSample> {
        let tw = self.twisted(k)?;
        let p = &self.problem;
        let (lo, hi) = (p.scheme.n(k - 1), p.scheme.n(k));
        let mut sum = 0.0;
        for i in 1..=hi {
            sum += tw.sample(rng);
            if sum - i as f64 * p.mu > p.b {
                if i <= lo {
                    return Ok(EstimatorSample::single(BOUNDED, 0.0, i, i));
                }
                let theta = tw.theta();
                assert!(theta * sum >= theta * p.b);
                let value = (-theta * sum + i as f64 * tw.log_mgf()).exp();
                return Ok(EstimatorSample::single(BOUNDED, value, i, i));
            }
        }
        Ok(EstimatorSample::single(BOUNDED, 0.0, hi, hi))
    }

    /// Uniform-time jump sub-estimator for block `k`.
    pub fn sample_zk3<R: RandomSource + ?Sized>(&self, k: u32, rng: &mut R) -> Result<EstimatorSample> {
        self.check_k(k)?;
        let p = &self.problem;
        let (lo, hi) = (p.scheme.n(k - 1), p.scheme.n(k));
        let u = p.level(lo);
        let model = &p.model;
        let tail_u = model.tail_at_least(u);
        let zero = |nu| Ok(EstimatorSample::single(MIXED, 0.0, nu, nu));
        if tail_u == 0.0 {
            return zero(0);
        }
        let scale = hi as f64 * tail_u;
        let j = 1 + rng.pick_index(hi);
        let mut sum = 0.0;
        let mut count = 0u64;
        let mut crossing_jump = false;
        for i in 1..=hi {
            let x = if i == j { model.sample_conditional_tail(u, rng)? } else { model.sample(rng) };
            sum += x;
            if x >= u {
                count += 1;
            }
            if i > lo && x >= p.level(i) {
                crossing_jump = true;
            }
            if sum - i as f64 * p.mu > p.b {
                // C' needs a jump above u before τ but none that crosses alone.
                if i <= lo || crossing_jump || count == 0 {
                    return zero(i);
                }
                count += self.count_exceedances(i, hi, j, |_| u, rng);
                if j > i {
                    count += 1;
                }
                let value = scale / count as f64;
                assert!(value <= scale, "Z_k3 = {value} exceeds n_k tail = {scale}");
                return Ok(EstimatorSample::single(MIXED, value, hi, hi));
            }
        }
        zero(hi)
    }

    /// `Z_(k,1) + Z_(k,2) + Z_(k,3)` from three independent streams.
    pub fn sample_block<R: RandomSource + ?Sized>(
        &self,
        k: u32,
        rngs: [&mut R; 3],
    ) -> Result<EstimatorSample> {
        let [r1, r2, r3] = rngs;
        Ok(EstimatorSample::combine([
            self.sample_zk1(k, r1)?,
            self.sample_zk2(k, r2)?,
            self.sample_zk3(k, r3)?,
        ]))
    }

    /// One replication: draw `K`, estimate block `K`, divide by `p_K`.
    pub fn sample_z<R: RandomSource + ?Sized>(
        &self,
        k_rng: &mut R,
        rngs: [&mut R; 3],
    ) -> Result<EstimatorSample> {
        let k = self.pmf.sample_k(k_rng)?;
        Ok(self.sample_block(k, rngs)?.scaled(1.0 / self.pmf.p(k)))
    }
}

impl Replicate for CrossingEstimator {
    fn replicate(&self, seed: u64, index: u64) -> Result<EstimatorSample> {
        let stream = |s| StreamKey::new(seed, index, s).stream();
        let mut kr = stream(SubStream::BlockIndex);
        let (mut a, mut b, mut c) = (stream(SubStream::BigJump), stream(SubStream::Bounded), stream(SubStream::Mixed));
        self.sample_z(&mut kr, [&mut a, &mut b, &mut c])
    }
}
