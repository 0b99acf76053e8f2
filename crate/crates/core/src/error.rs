use thiserror::Error;

/// Library-wide error type.
///
/// Violations of *checked mathematical properties* are not errors — they are
/// reported inside the result structs (balance profiles, bound reports, …).
/// `Error` covers contract violations: malformed inputs, out-of-range
/// parameters, and preconditions a caller can test for.
#[derive(Debug, Error)]
pub enum Error {
    #[error("base must be at least 2, got {0}")]
    BaseTooSmall(u32),

    #[error("digit {digit} out of range for base {p}")]
    DigitOutOfRange { digit: u32, p: u32 },

    #[error("word depth {depth} exceeds maximum {max}")]
    DepthTooLarge { depth: usize, max: usize },

    #[error("word must have at least one digit")]
    EmptyWord,

    #[error("cannot shift to empty word")]
    ShiftEmptyWord,

    #[error("cannot parse word {input:?} in base {p}: {reason}")]
    WordParse { input: String, p: u32, reason: String },

    #[error("point {0} outside the fundamental domain [0,1)")]
    PointOutOfRange(String),

    #[error("cell count p^depth = {p}^{depth} does not fit in memory bounds")]
    CellCountOverflow { p: u32, depth: u32 },

    #[error("weight vector has length {got}, expected p^depth = {expected}")]
    WeightLength { got: usize, expected: usize },

    #[error("negative weight at index {index}")]
    NegativeWeight { index: usize },

    #[error("weights sum to {total}, not 1 (tolerance {tol:e})")]
    MassNotOne { total: String, tol: f64 },

    #[error("word of depth {word_depth} is below the resolution of a depth-{depth} measure")]
    BelowResolution { word_depth: usize, depth: u32 },

    #[error("measure is not invariant under the times-p map: max defect {defect:e} exceeds {tol:e}")]
    NotInvariant { defect: f64, tol: f64 },

    #[error("degenerate cylinder family at base word {word}: all sibling masses vanish")]
    DegenerateCylinder { word: String },

    #[error("balance constant is zero (witness {witness}); a positive lower bound is required")]
    Unbalanced { witness: String },

    #[error("smoothing level {level} must be below the measure depth {depth}")]
    SmoothingTooDeep { level: u32, depth: u32 },

    #[error("{what} must be positive")]
    NotPositive { what: &'static str },

    #[error("stochastic data invalid: {0}")]
    NonStochastic(String),

    #[error("initial row is not stationary for the transition matrix (defect {defect:e})")]
    NotStationary { defect: f64 },

    #[error("bases {p} and {q} must be multiplicatively independent inputs with gcd({p},{q}) = 1")]
    NotCoprime { p: u64, q: u64 },

    #[error("{what} = {got} out of range: {requirement}")]
    ParamOutOfRange { what: &'static str, got: String, requirement: &'static str },

    #[error("orbit sizes not yet stabilized at n_max = {n_max} (partial table: {table}); increase n_max")]
    NotStabilized { n_max: u32, table: String },

    #[error("orbit size at level {n} is not yet in the stabilized regime (threshold {n0}); increase n")]
    BelowStabilization { n: u32, n0: u32 },

    #[error("cannot factor {0} with the configured trial-division bound")]
    FactorBound(String),

    #[error("order search exceeded {limit} iterations for modulus {modulus}")]
    OrderSearchExceeded { modulus: String, limit: u64 },

    #[error("expansion sum would enumerate {terms} terms, above the configured cap {cap}")]
    ExpansionTooLarge { terms: String, cap: u64 },

    #[error("branch system is not uniformly expanding (min forward derivative {a})")]
    NotExpanding { a: f64 },

    #[error("non-monotone branch detected during composition near x = {x}")]
    NonMonotoneBranch { x: f64 },

    #[error("fixed-density iteration did not reach residual {tol:e} in {iters} steps (last residual {residual:e})")]
    NoConvergence { residual: f64, tol: f64, iters: u32 },

    #[error("density is not bounded away from zero (min value {min:e})")]
    DensityVanishes { min: f64 },

    #[error("derivative partition check failed: max |sum - 1| = {deviation:e} exceeds {tol:e}")]
    PartitionDeviation { deviation: f64, tol: f64 },

    #[error("cannot parse rational {0:?}")]
    RationalParse(String),

    #[error("measure file invalid: {0}")]
    MeasureFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
