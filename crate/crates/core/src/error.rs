use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("arity error in `{table}`: expected {expected} entries, found {found}")]
    Arity {
        table: String,
        expected: usize,
        found: usize,
    },

    #[error("unknown element id `{0}`")]
    UnknownElement(String),

    #[error("unknown builtin quantale `{0}` (expected boolean2, godelN, lukasiewiczN or powersetN)")]
    UnknownBuiltin(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("objects do not match: {0}")]
    ObjectMismatch(String),

    #[error("relations are valued in different quantales (`{0}` vs `{1}`)")]
    QuantaleMismatch(String, String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("scalar {scalar} is not an element of quantale `{quantale}`")]
    ForeignScalar { scalar: usize, quantale: String },

    #[error("not a partition: {0}")]
    NotAPartition(String),

    #[error("generators live on different ambient objects")]
    MixedAmbient,

    #[error("|Hom(X,X)| = {size} exceeds the bound {bound}; use generated mode or raise QSPEC_MAX_HOM_SIZE")]
    BoundExceeded { size: u128, bound: u128 },

    #[error("quantale `{0}` is not zero-divisor free; the requested construction needs a ZDF quantale")]
    NotZdf(String),

    #[error("member set is not closed under the algebra operations: {0}")]
    NotClosed(String),

    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("algebra is not von Neumann (A != A'')")]
    NotVonNeumann,

    #[error("not a subunital idempotent of the algebra: {0}")]
    NotSubunital(String),

    #[error("point belongs to algebra {found}, expected {expected}")]
    ForeignPoint { expected: String, found: String },

    #[error("not an inclusion: {0}")]
    NotAnInclusion(String),

    #[error("functor law violated: {0}")]
    FunctorLaw(String),

    #[error("the diagonal algebra is not an object of the poset")]
    DiagonalAbsent,

    #[error("inconsistent section: {0}")]
    InconsistentSection(String),

    #[error("the direct Gelfand search and the prime-spectrum route disagree: {0}")]
    RouteDisagreement(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
