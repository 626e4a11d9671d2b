//! Iterated outer `L^p` spaces on finite ground sets.
//!
//! A finite ground set carries a weight measure `ω` together with two outer
//! measures `μ` and `ν`, each induced by a family of generating subsets with
//! strictly positive rational pre-measures: the value of an outer measure on a
//! subset is the minimal total pre-measure of a generator cover.
//!
//! On top of the measures, the crate computes single and double iterated outer
//! `L^p` quasi-norms.  The inner size of a function `f` on a test set `A` is
//! `ν(A)^{-1/r} · ‖f·1_A‖_{L^r(ω)}`; the single iterated norm integrates the
//! ν-super-level measure of that size against `q λ^{q-1} dλ`; the double
//! iterated norm repeats the construction once more with `μ`, the exponent
//! `p`, and the size built from the single iterated norm.  All super-level
//! measures are exact rationals; norms are floating point with a pinned
//! relative tolerance.
//!
//! The crate also provides:
//!
//! * verified structural conditions on covering functions (parent bounds,
//!   Carathéodory collections, the canopy and crop closure conditions),
//! * atomic decompositions of functions at geometric levels (one interior
//!   variant and three exterior variants) together with a verifier that
//!   re-checks every per-level property with explicit constants,
//! * a constructive dualizing-function builder with certified lower pairing
//!   bounds and realized upper-bound envelopes,
//! * ready-made example settings (singleton-generated spaces, product spaces
//!   with column/slab generators, two extremal families with closed-form
//!   norms, and a dyadic strip/tree setting with structured measure engines).

#![warn(missing_docs)]

pub mod conditions;
pub mod decompose;
pub mod duality;
pub mod dyadic;
pub mod io;
pub mod norms;
pub mod settings;
pub mod space;

pub use space::{FiniteSpace, Generator, MeasureKind, MeasureTable, Rational, SubsetMask};

/// Errors reported by constructors and engine entry points.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Ground set larger than the representation supports.
    #[error("ground set of {got} points exceeds the supported maximum of {max}")]
    TooManyPoints {
        /// Requested number of points.
        got: usize,
        /// Hard cap imposed by the mask representation.
        max: usize,
    },
    /// An exact enumeration was requested beyond the configured limit.
    #[error("exact enumeration over {points} points exceeds the exact-mode limit {limit}")]
    ExactLimitExceeded {
        /// Number of points of the instance.
        points: usize,
        /// Configured exact-mode limit.
        limit: usize,
    },
    /// A weight or pre-measure was zero or negative.
    #[error("weights and pre-measures must be strictly positive")]
    NonpositiveWeight,
    /// A weight had a denominator or magnitude outside the safe integer range.
    #[error("weight magnitude outside the supported exact range")]
    WeightOutOfRange,
    /// A generator was empty or referenced points outside the ground set.
    #[error("generator sets must be nonempty subsets of the ground set")]
    BadGenerator,
    /// Some point is not covered by any generator of the named family.
    #[error("point {point} is not covered by any {family} generator")]
    UncoveredPoint {
        /// Family name (`"mu"` or `"nu"`).
        family: &'static str,
        /// Index of the uncovered point.
        point: usize,
    },
    /// A function vector had the wrong length for the space.
    #[error("function has {got} values but the ground set has {expected} points")]
    FunctionLength {
        /// Provided length.
        got: usize,
        /// Expected length.
        expected: usize,
    },
    /// A function value was negative, NaN, or infinite.
    #[error("function values must be finite and nonnegative")]
    BadFunctionValue,
    /// An exponent was outside `(0, ∞]`.
    #[error("exponents must lie in (0, ∞]")]
    BadExponent,
    /// A collection that must be pairwise disjoint was not.
    #[error("collection members must be pairwise disjoint")]
    NotDisjoint,
    /// A covering-function table was missing an entry.
    #[error("explicit covering assignment has no entry for a required set")]
    MissingAssignment,
    /// A covering-function value was structurally invalid.
    #[error("covering assignment must consist of pairwise disjoint family members covering the argument")]
    BadAssignment,
    /// The two exponents of a dual construction coincide.
    #[error("dual construction requires q ≠ r; the q = r case reduces to a single iterated space")]
    EqualExponents,
    /// A parameter combination outside the supported range was requested.
    #[error("{0}")]
    Unsupported(String),
    /// Malformed input data (files, descriptors).
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Convenience alias used across the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Tunable limits and seeds shared by enumeration-heavy operations.
#[derive(Debug, Clone, Copy)]
pub struct EngineOptions {
    /// Largest ground set for which exhaustive subset enumeration is used.
    pub exact_limit: usize,
    /// Number of random probes for quantifiers that cannot be enumerated.
    pub budget: u64,
    /// Seed for all sampled quantifiers.
    pub seed: u64,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            exact_limit: 12,
            budget: 2000,
            seed: 0,
        }
    }
}
