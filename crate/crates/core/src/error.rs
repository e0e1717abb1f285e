use num_complex::Complex64;
use thiserror::Error;

/// Failure modes shared by every module.
///
/// Variants fall into two classes (see [`Error::is_validation`]): input data
/// that violates a declared invariant, and mathematical preconditions that the
/// requested computation cannot meet.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("element is not a unit of the quotient ring")]
    NonUnit,
    #[error("roots {0} and {1} of the denominator are not distinct")]
    RepeatedRoot(usize, usize),
    #[error("total pole degree {0} is below 2")]
    DegenerateOrder(usize),
    #[error("h^0 part of the matrix is singular")]
    SingularBase,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("no cyclic vector found after {0} attempts")]
    NotCyclic(usize),
    #[error("phi(N) does not vanish (norm {0:.3e})")]
    PhiNotAnnihilating(f64),
    #[error("factorizations are not gauge equivalent (residual {0:.3e})")]
    Inequivalent(f64),
    #[error("tangent pair is not in the kernel of d1")]
    NotTangent,
    #[error("linear solve residual {residual:.3e} exceeds {bound:.3e}")]
    Unsolvable { residual: f64, bound: f64 },
    #[error("mu_{0} and mu_{1} coincide")]
    DuplicateMu(usize, usize),
    #[error("nu(mu_{k}) and nu(mu_{k2}) coincide at z = {root}")]
    GenericityFailure { k: usize, k2: usize, root: Complex64 },
    #[error("P(T) -> P(N) is not injective")]
    NotInjectiveAction,
    #[error("spectrum mismatch at z = {root}: {detail}")]
    SpectralMismatch { root: Complex64, detail: String },
    #[error("interpolation node difference nu(mu_{0}) - nu(mu_{1}) is not a unit")]
    InterpolationSingular(usize, usize),
    #[error("joint commutant has dimension {0} > 1")]
    CommutantTooBig(usize),
    #[error("leading eigenvalues {0} and {1} collide")]
    ResonantLeading(usize, usize),
    #[error("truncation order {order} is below the required {needed}")]
    InsufficientOrder { order: usize, needed: usize },
    #[error("j = m - 1 produces a logarithmic primitive")]
    LogTerm,
    #[error("diagonalizing gauge is unavailable: {0}")]
    GaugeUnavailable(String),
    #[error("resonance at order {k}: eigenvalues {a} and {b} of the residue at infinity differ by an integer")]
    Resonance { k: usize, a: usize, b: usize },
    #[error("residue at infinity depends on h (norm {0:.3e}); channel is unadjusted")]
    ResidueNotConstant(f64),
    #[error("grid point {0} lies outside the certified domain")]
    OutsideDomain(Complex64),
    #[error("direction moves lambda: v[{0}][m-1] is nonzero")]
    LambdaViolation(usize),
    #[error("delta = {0} is outside (0, pi/(24m))")]
    DeltaOutOfRange(f64),
    #[error("start point is a zero of the vector field")]
    ZeroStart,
    #[error("trajectory did not converge to the requested root")]
    NotConverged,
    #[error("path passes within {0:.3e} of a divisor point")]
    PathTooClose(f64),
    #[error("real parts of e^(i theta) nu_k at the root are not distinct")]
    OrderingViolated,
    #[error("wrong stratum: {0}")]
    WrongStratum(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("integral exponent difference: {0}")]
    IntegralExponents(String),
}

impl Error {
    /// True for errors that report invalid input data rather than an unmet
    /// mathematical precondition of a computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::DuplicateMu(..)
                | Error::GenericityFailure { .. }
                | Error::SpectralMismatch { .. }
                | Error::PhiNotAnnihilating(_)
                | Error::ShapeMismatch(_)
                | Error::InvalidParameter(_)
                | Error::DeltaOutOfRange(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
