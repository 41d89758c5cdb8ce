use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("phase space has {size} configurations, above the enumeration cap of {cap}")]
    CapExceeded { size: u128, cap: usize },

    #[error("site {site} is outside the lattice of {sites} sites")]
    UnknownSite { site: usize, sites: usize },

    #[error("configuration index {index} is outside a phase space of size {size}")]
    UnknownConfiguration { index: usize, size: usize },

    #[error("region {0} is not a region of this model")]
    UnknownRegion(String),

    #[error("size mismatch: expected {expected} entries, got {found}")]
    Mismatch { expected: usize, found: usize },

    #[error("local table for a region of {sites} sites needs {expected} entries, got {found}")]
    IncompleteTable {
        sites: usize,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("weights sum to {sum}, not 1")]
    WeightSum { sum: f64 },

    #[error(
        "energy shell |H - {energy}| <= {width} is empty; nearest attainable energy is {nearest}"
    )]
    EmptyShell {
        energy: f64,
        width: f64,
        nearest: f64,
    },

    #[error(
        "inconsistent thread: marginal of {larger} onto {smaller} disagrees by {discrepancy:e}"
    )]
    InconsistentThread {
        smaller: String,
        larger: String,
        discrepancy: f64,
    },

    #[error("invalid spectral measure: {0}")]
    InvalidMeasure(String),

    #[error("function is undefined at spectral value {0}")]
    Undefined(f64),

    #[error("invalid Borel set: {0}")]
    InvalidBorel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid rule: {0}")]
    InvalidRule(String),

    #[error("unknown observable `{0}`")]
    UnknownObservable(String),

    #[error("internal consistency violated: {0}")]
    Consistency(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for I/O and parse failures, including unreadable observable
    /// names, as opposed to errors raised by the model itself (empty shells,
    /// cap overflow, invalid states, ...).
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Io(_) | Error::Csv(_) | Error::Parse(_) | Error::UnknownObservable(_)
        )
    }
}
