use std::fmt;

use super::CrossingProblem;
use crate::error::{param, Error, RegimeError, RegimeWarning, Result};
use crate::rng::RandomSource;

/// How the block index `K` is randomized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlockRegime {
    /// `p_k ∝ F_I(b + n_(k-1) μ) - F_I(b + n_k μ)`; meant for `alpha > 2`.
    FiniteVariance,
    /// G-family tails with index `beta ∈ (2, 2 alpha - 1)`; needs `alpha > 1.5`.
    /// `beta = None` picks the midpoint. `allow_boundary` admits `alpha = 1.5`.
    StrongEfficiency { beta: Option<f64>, allow_boundary: bool },
    /// G-family tails for `alpha ∈ (1, 1.5]`, trading strong efficiency for a
    /// finite `(1 + gamma)`-th moment. `None` picks midpoints.
    SubStrong { beta: Option<f64>, gamma: Option<f64> },
}

impl BlockRegime {
    pub fn name(&self) -> &'static str {
        match self {
            BlockRegime::FiniteVariance => "finite_variance",
            BlockRegime::StrongEfficiency { .. } => "strong_efficiency",
            BlockRegime::SubStrong { .. } => "sub_strong",
        }
    }
}

impl fmt::Display for BlockRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Regime with every parameter filled in and checked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResolvedRegime {
    FiniteVariance,
    StrongEfficiency { beta: f64 },
    SubStrong { beta: f64, gamma: f64 },
}

impl ResolvedRegime {
    pub fn beta(&self) -> Option<f64> {
        match *self {
            ResolvedRegime::FiniteVariance => None,
            ResolvedRegime::StrongEfficiency { beta } | ResolvedRegime::SubStrong { beta, .. } => Some(beta),
        }
    }
}

/// Checks `regime` against the tail index and fills in defaults.
pub fn resolve_regime(regime: BlockRegime, alpha: f64) -> Result<(ResolvedRegime, Vec<RegimeWarning>)> {
    let mut warnings = Vec::new();
    let resolved = match regime {
        BlockRegime::FiniteVariance => {
            if alpha <= 2.0 {
                warnings.push(RegimeWarning::InfiniteExpectedWork { alpha });
            }
            ResolvedRegime::FiniteVariance
        }
        BlockRegime::StrongEfficiency { beta, allow_boundary } => {
            if !alpha.is_finite() {
                return Err(RegimeError::InfiniteTailIndex { alpha }.into());
            }
            if alpha < 1.5 {
                return Err(RegimeError::ImpossibleStrongEfficiency { alpha }.into());
            }
            if alpha == 1.5 {
                if !allow_boundary {
                    return Err(RegimeError::StrongEfficiencyBoundary.into());
                }
                // No admissible interval exists at the boundary; only beta > 2 is enforced.
                let beta = beta.unwrap_or(2.25);
                if !(beta > 2.0) {
                    return Err(RegimeError::StrongEfficiencyBeta { alpha, beta, upper: f64::INFINITY }.into());
                }
                ResolvedRegime::StrongEfficiency { beta }
            } else {
                let upper = 2.0 * alpha - 1.0;
                let beta = beta.unwrap_or(0.5 * (2.0 + upper));
                if !(beta > 2.0 && beta < upper) {
                    return Err(RegimeError::StrongEfficiencyBeta { alpha, beta, upper }.into());
                }
                ResolvedRegime::StrongEfficiency { beta }
            }
        }
        BlockRegime::SubStrong { beta, gamma } => {
            if !(alpha > 1.0 && alpha <= 1.5) {
                return Err(RegimeError::SubStrongAlpha { alpha }.into());
            }
            let gamma_upper = (alpha - 1.0) / (2.0 - alpha);
            let gamma = gamma.unwrap_or(0.5 * gamma_upper);
            if !(gamma > 0.0 && gamma < gamma_upper) {
                return Err(RegimeError::SubStrongGamma { gamma, upper: gamma_upper }.into());
            }
            let beta_upper = alpha + (alpha - 1.0) / gamma;
            let beta = beta.unwrap_or(0.5 * (2.0 + beta_upper));
            if !(beta > 2.0 && beta < beta_upper) {
                return Err(RegimeError::SubStrongBeta { beta, upper: beta_upper }.into());
            }
            ResolvedRegime::SubStrong { beta, gamma }
        }
    };
    Ok((resolved, warnings))
}

/// Law of the block index: `p_k = (T(b + n_(k-1) μ) - T(b + n_k μ)) / T(b)` with
/// `T` the integrated tail of the regime. The sum telescopes to 1.
#[derive(Debug, Clone)]
pub struct BlockPmf {
    regime: ResolvedRegime,
    /// `T(b + n_k μ)` for `k = 0..=k_max`.
    t: Vec<f64>,
    warnings: Vec<RegimeWarning>,
}

impl BlockPmf {
    pub fn new(problem: &CrossingProblem, regime: BlockRegime) -> Result<Self> {
        let (regime, warnings) = resolve_regime(regime, problem.model.tail_index())?;
        let mut t = Vec::with_capacity(problem.scheme.k_max() as usize + 1);
        for k in 0..=problem.scheme.k_max() {
            let x = problem.b + problem.scheme.n(k) as f64 * problem.mu;
            let v = match regime {
                ResolvedRegime::FiniteVariance => problem.model.integrated_tail(x),
                ResolvedRegime::StrongEfficiency { beta } | ResolvedRegime::SubStrong { beta, .. } => {
                    problem.model.g_beta_integrated(x, beta)?
                }
            };
            t.push(v);
        }
        if !(t[0] > 0.0 && t[0].is_finite()) {
            return Err(param(format!("integrated tail at b = {} is {}, cannot normalize", problem.b, t[0])));
        }
        if t.windows(2).any(|w| w[1] > w[0]) {
            return Err(param("integrated tail is not monotone; quadrature failed to resolve it"));
        }
        Ok(Self { regime, t, warnings })
    }

    pub fn regime(&self) -> ResolvedRegime {
        self.regime
    }

    pub fn warnings(&self) -> &[RegimeWarning] {
        &self.warnings
    }

    pub fn k_max(&self) -> u32 {
        (self.t.len() - 1) as u32
    }

    /// `p_k` for `k >= 1` (0 beyond `k_max`).
    pub fn p(&self, k: u32) -> f64 {
        let k = k as usize;
        if k == 0 || k >= self.t.len() {
            return 0.0;
        }
        (self.t[k - 1] - self.t[k]) / self.t[0]
    }

    /// `Pr{K > k} = T(b + n_k μ) / T(b)`.
    pub fn survival(&self, k: u32) -> f64 {
        self.t.get(k as usize).map_or(0.0, |v| v / self.t[0])
    }

    /// Inverse transform on the closed-form survival function, by binary search.
    pub fn sample_k<R: RandomSource + ?Sized>(&self, rng: &mut R) -> Result<u32> {
        // K <= k  iff  V >= survival(k), for V uniform.
        let v = rng.uniform() * self.t[0];
        let k = self.t.partition_point(|&t| t > v);
        if k >= self.t.len() {
            return Err(Error::BlockOverflow { k: self.t.len() as u32 });
        }
        Ok(k.max(1) as u32)
    }
}
