use std::fmt;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("quadrature did not converge: achieved relative error {achieved:.3e}, requested {requested:.3e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("tail underflow: Pr{{X >= {threshold}}} is zero or not representable")]
    TailUnderflow { threshold: f64 },

    #[error("regime violation: {0}")]
    Regime(#[from] RegimeError),

    #[error("enumeration of {outcomes} outcomes exceeds the limit of {limit}")]
    EnumerationTooLarge { outcomes: f64, limit: u64 },

    #[error("work budget exceeded: {requested} increments requested, budget {budget}")]
    WorkBudget { requested: u128, budget: u128 },

    #[error("block index {k} exceeds the largest representable block (n_k overflows u64)")]
    BlockOverflow { k: u32 },
}

/// Parameter choices that a result of the underlying theory rules out.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RegimeError {
    #[error(
        "n * tail(b) = {n_tail:.4e} >= 1: the event is not rare and the exponential twist \
         would be negative; use naive simulation instead"
    )]
    NotRare { n_tail: f64 },

    #[error(
        "block {k}: n_k * tail(b + n_(k-1) mu) = {n_tail:.4e} >= 1, so the block twist \
         theta_k is not positive"
    )]
    BlockNotRare { k: u32, n_tail: f64 },

    #[error(
        "strong-efficiency block pmf rejected for tail index {alpha}: by the impossibility \
         result, no assignment of block sizes and probabilities gives both finite second \
         moment and finite expected termination time when alpha < 1.5"
    )]
    ImpossibleStrongEfficiency { alpha: f64 },

    #[error(
        "strong-efficiency block pmf at the boundary alpha = 1.5 depends on the slowly \
         varying factor of the tail; pass the explicit boundary override to proceed"
    )]
    StrongEfficiencyBoundary,

    #[error(
        "strong-efficiency block pmf needs 1.5 < alpha (got {alpha}) and beta in \
         (2, 2 alpha - 1) = (2, {upper}) (got {beta})"
    )]
    StrongEfficiencyBeta { alpha: f64, beta: f64, upper: f64 },

    #[error("sub-strong block pmf needs tail index alpha in (1, 1.5], got {alpha}")]
    SubStrongAlpha { alpha: f64 },

    #[error("sub-strong block pmf needs gamma in (0, (alpha-1)/(2-alpha)) = (0, {upper}), got {gamma}")]
    SubStrongGamma { gamma: f64, upper: f64 },

    #[error("sub-strong block pmf needs beta in (2, alpha + (alpha-1)/gamma) = (2, {upper}), got {beta}")]
    SubStrongBeta { beta: f64, upper: f64 },

    #[error("block pmf needs a finite tail index for the G-family tails, model has alpha = {alpha}")]
    InfiniteTailIndex { alpha: f64 },
}

impl RegimeError {
    /// Short name of the result the violated constraint comes from.
    pub fn source_result(&self) -> &'static str {
        match self {
            RegimeError::NotRare { .. } | RegimeError::BlockNotRare { .. } => {
                "twist-parameter positivity"
            }
            RegimeError::ImpossibleStrongEfficiency { .. } => "impossibility result for alpha < 1.5",
            RegimeError::StrongEfficiencyBoundary => "boundary remark for alpha = 1.5",
            RegimeError::StrongEfficiencyBeta { .. } => {
                "strong efficiency and linear termination for alpha in (1.5, 2]"
            }
            RegimeError::SubStrongAlpha { .. }
            | RegimeError::SubStrongGamma { .. }
            | RegimeError::SubStrongBeta { .. } => {
                "(1+gamma)-moment efficiency and linear termination for alpha in (1, 1.5]"
            }
            RegimeError::InfiniteTailIndex { .. } => "G-family tails",
        }
    }
}

/// Non-fatal findings about a configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum RegimeWarning {
    /// Finite-variance block pmf with `alpha <= 2`: every replication terminates,
    /// but the expected number of generated increments is infinite.
    InfiniteExpectedWork { alpha: f64 },
    /// `b <= n^(beta + eps)`: outside the range where the large-deviation estimator is
    /// known to have vanishing relative error.
    OutsideLargeDeviationRange { n: u64, b: f64, threshold: f64 },
    /// The increment law does not have mean zero.
    NonZeroMean { mean: f64 },
}

impl fmt::Display for RegimeWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegimeWarning::InfiniteExpectedWork { alpha } => write!(
                f,
                "finite-variance block pmf with tail index {alpha} <= 2: each run terminates \
                 but the expected termination time is infinite"
            ),
            RegimeWarning::OutsideLargeDeviationRange { n, b, threshold } => write!(
                f,
                "b = {b} is not above n^(beta+eps) = {threshold:.4} for n = {n}; efficiency \
                 guarantees do not apply"
            ),
            RegimeWarning::NonZeroMean { mean } => {
                write!(f, "increment mean is {mean:.3e}, expected zero")
            }
        }
    }
}

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}
