//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong when evaluating run statistics.
///
/// Domain errors (bad parameters, formulas evaluated outside their range)
/// and size errors (oracle inputs beyond the exact methods' limits) are
/// separate variants so callers can map them to distinct exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("heads probability must lie strictly in (0,1), got p = {p}")]
    InvalidHeadsProbability { p: f64 },

    #[error("bit at index {index} is {value}; sequence elements must be 0 or 1")]
    InvalidBit { index: usize, value: u8 },

    #[error("window length m must be positive")]
    ZeroWindowLength,

    #[error("window starting at n = {n} with length m = {m} does not fit in a sequence of length {len} (need 1 <= n <= N - m + 1)")]
    WindowOutOfRange { n: usize, m: u32, len: usize },

    #[error("formula requires m >= {min}, got m = {m}")]
    WindowTooShort { m: u32, min: u32 },

    #[error("need m >= T for a window with T tails, got m = {m}, T = {t}")]
    ContaminationExceedsWindow { m: u32, t: u32 },

    #[error("logarithm argument must be positive, got {x}")]
    NonPositiveLogArgument { x: f64 },

    #[error("centering requires q*N > 1 (iterated logarithm domain), got q*N = {qn}")]
    IteratedLogDomain { qn: f64 },

    #[error("the corrected centering m(N) is defined for T >= 1 only")]
    CenteringRequiresContamination,

    #[error("alpha = {alpha} is not positive for T = {t}, m = {m}; the hitting-time scale is undefined at this window length")]
    NonPositiveAlpha { alpha: f64, t: u32, m: u32 },

    #[error("sandwich requires alpha in (0,1], got {alpha}")]
    AlphaOutOfRange { alpha: f64 },

    #[error("sandwich requires epsilon >= 0, got {epsilon}")]
    NegativeEpsilon { epsilon: f64 },

    #[error("scaled time must be nonnegative, got x = {x}")]
    NegativeScaledTime { x: f64 },

    #[error("enumeration limited to N <= {max}, got N = {n}")]
    EnumerationTooLarge { n: u64, max: u64 },

    #[error("conditional enumeration limited to m <= {max}, got m = {m}")]
    ConditionalEnumerationTooLarge { m: u32, max: u32 },

    #[error("P(A_1) = 0; the conditional probability is undefined")]
    DegenerateConditioning,

    #[error("dp limits exceeded: need T <= {max_t}, m <= {max_m}, N <= {max_n}; got T = {t}, m = {m}, N = {n}")]
    DpLimitsExceeded {
        t: u32,
        m: u32,
        n: u64,
        max_t: u32,
        max_m: u32,
        max_n: u64,
    },

    #[error("empirical distribution is empty")]
    EmptyDistribution,

    #[error("simulation config invalid: {reason}")]
    InvalidSimulationConfig { reason: String },

    #[error("streaming scanner: {reason}")]
    ScannerMisuse { reason: String },
}

impl Error {
    /// True for errors caused by inputs beyond an exact method's size
    /// limits, as opposed to parameters outside a formula's domain.
    pub fn is_size_error(&self) -> bool {
        matches!(
            self,
            Error::EnumerationTooLarge { .. }
                | Error::ConditionalEnumerationTooLarge { .. }
                | Error::DpLimitsExceeded { .. }
        )
    }
}
