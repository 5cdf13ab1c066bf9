use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("invalid sublattice: {0}")]
    InvalidSublattice(String),
    #[error("sublattice is degenerate")]
    DegenerateSublattice,
    #[error("sublattice is not primitive (elementary divisors {0:?})")]
    NotPrimitive(Vec<i64>),
    #[error("sublattice is not negative definite")]
    NotNegativeDefinite,
    #[error("lattice is not positive definite")]
    NotPositiveDefinite,
    #[error("rank(M) = {0} <= 4: the Witt index condition must be asserted explicitly")]
    WittUnverified(usize),
    #[error("embedding invariant violated: {0}")]
    Embedding(String),
    #[error("vector is not in the dual lattice")]
    NotInDual,
    #[error("invalid finite quadratic module: {0}")]
    InvalidModule(String),
    #[error("element {0:?} does not belong to the module")]
    BadElement(Vec<i64>),
    #[error("subgroup is not isotropic: q({0:?}) = {1}")]
    NotIsotropic(Vec<i64>, String),
    #[error("projection of the glue group is not injective")]
    NonInjectiveProjection,
    #[error("Gauss sum magnitude {found} deviates from sqrt|A| = {expected}")]
    GaussSum { found: f64, expected: f64 },
    #[error("matrix is not in SL2(Z): determinant {0}")]
    NotSl2(i64),
    #[error("module mismatch: {0}")]
    ModuleMismatch(String),
    #[error("weight mismatch: {0} vs {1}")]
    WeightMismatch(String, String),
    #[error("truncation underflow: {0}")]
    TruncationUnderflow(String),
    #[error("support condition violated at component {0:?}, exponent {1}")]
    Support(Vec<i64>, String),
    #[error("symmetry check is only defined for weight 1 - b/2 with sigma = 2 - b mod 8")]
    SymmetryOutsideScope,
    #[error("Borcherds hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("quotient mismatch: {0}")]
    QuotientMismatch(String),
    #[error("Theta contraction shape mismatch: {0}")]
    ContractionShape(String),
    #[error("glue image G_K is degenerate in A_K")]
    DegenerateGlue,
    #[error("vector is not a primitive vector of K(-1): {0}")]
    BadDirection(String),
    #[error("internal weight formulas disagree: {0} vs {1}")]
    InternalMismatch(String, String),
    #[error("induced form depends on the coset representatives (max deviation {0:e})")]
    RepresentativeDependence(f64),
    #[error("rational reconstruction failed for {0} (residual {1:e})")]
    Rationalization(String, f64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
