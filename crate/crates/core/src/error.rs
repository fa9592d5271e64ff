use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("polynomial spaces differ: (n={n1}, d={d1}) vs (n={n2}, d={d2})")]
    SpaceMismatch { n1: usize, d1: u32, n2: usize, d2: u32 },

    #[error("monomial {alpha:?} does not belong to the space (n={n}, d={d}, homogeneous={homogeneous})")]
    InvalidMonomial {
        alpha: Vec<u32>,
        n: usize,
        d: u32,
        homogeneous: bool,
    },

    #[error("unsupported polynomial space (n={n}, d={d}): {reason}")]
    UnsupportedSpace { n: usize, d: u32, reason: &'static str },

    #[error("the zero polynomial has no normalized evaluator or condition number")]
    ZeroPolynomial,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unknown {kind} `{name}` (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error("rank-deficient Gram matrix for the singular-subspace projection")]
    RankDeficient,

    #[error("subdivision exceeded max depth {max_depth}: {failing} cube(s) still fail the predicate")]
    MaxDepthExceeded {
        max_depth: u32,
        failing: usize,
        leaves_so_far: usize,
    },

    #[error("subdivision exceeded the cube budget of {budget}")]
    CubeBudgetExceeded { budget: usize },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
