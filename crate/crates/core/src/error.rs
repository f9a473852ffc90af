use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("site {site} out of range for a {n_sites}-site system")]
    SiteOutOfRange { site: usize, n_sites: usize },

    #[error(
        "hierarchy with {count} auxiliary density operators needs {required_bytes} bytes, \
         over the {budget_bytes} byte budget"
    )]
    Capacity {
        count: usize,
        required_bytes: usize,
        budget_bytes: usize,
    },

    #[error("propagation diverged at t = {time} ps (max |element| = {max_magnitude:e})")]
    Divergence { time: f64, max_magnitude: f64 },

    #[error("series too short: need at least {required} points, got {actual}")]
    SeriesTooShort { required: usize, actual: usize },

    #[error("missing history: need {required} trailing values, got {actual}")]
    MissingHistory { required: usize, actual: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("incomplete site coverage: {0}")]
    IncompleteCoverage(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
