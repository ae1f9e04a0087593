use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("model has {retained} interaction type(s) after pruning; at least 2 are required")]
    EmptyModel { retained: usize },
    #[error("transition graph is not strongly connected: no cycle passes through `{label}`")]
    Disconnected { label: String },
    #[error("commutator-bounded model is missing K for transition {from} -> {to}")]
    MissingK { from: String, to: String },
    #[error("invalid value for {field}: {value}")]
    NegativeValue { field: String, value: f64 },
    #[error("{field}: lattice transition counts must be integers, got {value}")]
    NonIntegerCount { field: String, value: f64 },
    #[error("duplicate interaction label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown interaction label `{0}`")]
    UnknownLabel(String),
    #[error("transition {0} -> {0} is not allowed: operators of one type commute")]
    SelfTransition(String),
    #[error("transition {from} -> {to} is listed twice")]
    DuplicateTransition { from: String, to: String },
    #[error("lambda must be positive and finite, got {0}")]
    InvalidLambda(f64),

    #[error("model admits no elementary cycle")]
    NoCycles,
    #[error("cycle {0} has zero mean step distance")]
    ZeroXi(String),
    #[error("cycle {0} has a zero coupling or transition count")]
    ZeroK(String),
    #[error("invalid cycle: {0}")]
    InvalidCycle(String),
    #[error("{arcs} transitions exceed the enumeration limit of {limit}")]
    TooManyArcs { arcs: usize, limit: usize },
    #[error("closed form does not match the active cycles: {0}")]
    FormMismatch(String),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error("solver failed at grid point (x = {x}, y = {y}): {source}")]
    GridPoint {
        x: f64,
        y: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("{what} needs at least {min} sites, got {got}")]
    TooSmall {
        what: &'static str,
        min: usize,
        got: usize,
    },
    #[error("invalid graph model: {0}")]
    InvalidGraph(String),
    #[error("no chains follow the requested pattern: {0}")]
    NoChains(String),
    #[error("chain count {count} exceeds the {bound} bound {value:.6e} at n = {n}")]
    BoundViolated {
        n: usize,
        bound: &'static str,
        count: String,
        value: f64,
    },

    #[error("{sites} sites exceed the dense limit of {max}")]
    TooLarge { sites: usize, max: usize },
    #[error("operator is not Hermitian (deviation {0:.3e})")]
    NonHermitian(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("numerical check failed: {0}")]
    Numerical(String),

    #[error("LRBOUND_THREADS must be a non-negative integer, got `{0}`")]
    Threads(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed model file: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of internal consistency checks, as opposed to bad
    /// input. The CLI maps these to exit code 2.
    pub fn is_internal(&self) -> bool {
        match self {
            Error::FormMismatch(_)
            | Error::BoundViolated { .. }
            | Error::NonHermitian(_)
            | Error::Numerical(_) => true,
            Error::GridPoint { source, .. } => source.is_internal(),
            _ => false,
        }
    }
}
