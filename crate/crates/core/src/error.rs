use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A hypothesis of the gain formulas that the input violates.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Hypothesis {
    #[error("G disconnected")]
    DiffusiveGraphDisconnected,
    #[error("G disconnected (discontinuous layer G_d)")]
    DiscontinuousGraphDisconnected,
    #[error("sym(PΓ) not positive definite (λ_min = {0})")]
    SymPGammaNotPositive(f64),
    #[error("μ∞⁻(PΓ_d) ≤ 0 (value {0})")]
    MuPGammaDNotPositive(f64),
    #[error("minimum density of G_d not positive ({0})")]
    DensityNotPositive(f64),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {reason} at edge ({}, {})", .edge.0, .edge.1)]
    InvalidEdge { edge: (usize, usize), reason: &'static str },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("enumeration limit exceeded: {nodes} nodes > limit {limit}")]
    EnumerationLimit { nodes: usize, limit: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite value while evaluating {what} at {sample:?}")]
    NonFinite { what: &'static str, sample: Vec<f64> },
    #[error("state blew up at t = {time}")]
    BlowUp { time: f64 },
    #[error("hypothesis violated: {0}")]
    Hypothesis(#[from] Hypothesis),
    #[error("not synchronized at t = {time}: e_tot = {e_tot} ≥ {tol}")]
    NotSynchronized { time: f64, e_tot: f64, tol: f64 },
    #[error("initial condition {index}: {source}")]
    InitialCondition {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("model `{0}` does not provide Jacobian bounds")]
    MissingJacobianBounds(String),
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerics (blow-up, non-finite evaluations) as
    /// opposed to rejected inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::BlowUp { .. } | Error::NonFinite { .. } => true,
            Error::InitialCondition { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
