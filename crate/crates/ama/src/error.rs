//! Crate-wide error type.
//!
//! Every fallible operation returns [`Error`]. The CLI maps each variant to a
//! stable process exit code: input/validation problems exit with 2, runtime
//! failures with 3 (certification failures are reported separately and exit
//! with 1; they are verdicts, not errors).

use thiserror::Error;

/// Convenient alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Matrix/vector sizes are inconsistent with the problem template.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// BᵀB is not diagonal, so the v-subproblem has no exact coordinatewise
    /// solution and the instance is outside the supported class.
    #[error("unsupported coupling matrix: BᵀB must be diagonal")]
    UnsupportedB,

    /// h is an indicator but V has an infinite bound, so the dual component
    /// d² is not finite.
    #[error("V must be a bounded box (otherwise d² is -infinite)")]
    UnboundedV,

    /// Neither smoothing route is open: g has no strong convexity and U is
    /// unbounded, so the prox-diameter is infinite.
    #[error("instance is not smoothable: g has modulus 0 and U is unbounded")]
    NotSmoothable,

    /// Power iteration failed to settle; the input is pathological.
    #[error("spectral norm estimation did not converge within {0} iterations")]
    NonConvergence(usize),

    /// Prox-diameter requested over a box with an infinite bound.
    #[error("prox-diameter is infinite: box is unbounded at coordinate {0}")]
    UnboundedSet(usize),

    /// Lower bound meets or exceeds the upper bound somewhere.
    #[error("bad bounds: a[{0}] >= b[{0}]")]
    BadBounds(usize),

    /// An operation reserved for strongly convex g was called with min diag = 0.
    #[error("g is not strongly convex (some diagonal entry is zero)")]
    NotStronglyConvex,

    /// A diagonal entry of BᵀB is zero; the v-subproblem is singular there.
    #[error("singular v-subproblem: (BᵀB)[{0},{0}] = 0")]
    SingularB(usize),

    /// An unsmoothed dual component has no attained minimizer (flat direction
    /// against an infinite bound).
    #[error("dual component minimum is not attained at coordinate {0}")]
    UnattainedMin(usize),

    /// Line search exhausted its doubling budget or drove the step below
    /// representable size.
    #[error("line search failed: step size driven below tolerance")]
    StepTooSmall,

    /// The trace was produced by one algorithm variant but checked against
    /// another.
    #[error("trace variant mismatch: trace says `{found}`, caller says `{expected}`")]
    TraceVariantMismatch { expected: String, found: String },

    /// Active-set enumeration found no KKT-consistent point (cannot happen
    /// for generated instances).
    #[error("no feasible KKT point found by active-set enumeration")]
    Infeasible,

    /// Instance exceeds the desk-scale guard for exact enumeration.
    #[error("instance too large for the exact oracle: n + p1 = {0} > {1}")]
    TooLarge(usize, usize),

    /// The requested target accuracy lies below the smoothing floor γ·D_U,
    /// so no iteration count can certify it.
    #[error("target accuracy unreachable: smoothing floor {floor:e} exceeds eps {eps:e}")]
    Unreachable { floor: f64, eps: f64 },

    /// A solver or certificate configuration is internally inconsistent.
    #[error("bad configuration: {0}")]
    BadConfig(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A problem, trace, or reference file failed to parse.
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable exit-code contract: 2 = input error, 3 = runtime failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DimensionMismatch(_)
            | Error::UnsupportedB
            | Error::UnboundedV
            | Error::NotSmoothable
            | Error::UnboundedSet(_)
            | Error::BadBounds(_)
            | Error::NotStronglyConvex
            | Error::TraceVariantMismatch { .. }
            | Error::TooLarge(_, _)
            | Error::Unreachable { .. }
            | Error::BadConfig(_)
            | Error::Io(_)
            | Error::Parse(_) => 2,
            Error::NonConvergence(_)
            | Error::SingularB(_)
            | Error::UnattainedMin(_)
            | Error::StepTooSmall
            | Error::Infeasible => 3,
        }
    }
}
