use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("integration failure: {0}")]
    Integration(String),
    #[error("Dirichlet-singular point: |s(zeta, pi)| = {s_abs:e} at zeta = {zeta}")]
    DirichletSingular { zeta: crate::C64, s_abs: f64 },
    #[error("contour failure: {0}")]
    Contour(String),
    #[error("clustering failure: {0}")]
    Clustering(String),
    #[error("degenerate cluster {k}: {quantity}")]
    DegenerateCluster { k: usize, quantity: String },
    #[error("resolvent singular: {0}")]
    ResolventSingular(String),
    #[error("projection: {0}")]
    Projection(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("eigensolver: {0}")]
    Eigensolver(String),
    #[error("spectrum mismatch: {0}")]
    SpectrumMismatch(String),
    #[error("rejected: {0}")]
    Rejected(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Contour(_) | Error::Clustering(_) | Error::SpectrumMismatch(_) => 2,
            Error::Integration(_) | Error::DirichletSingular { .. } | Error::Eigensolver(_) => 3,
            Error::DegenerateCluster { .. }
            | Error::ResolventSingular(_)
            | Error::Projection(_)
            | Error::GridMismatch(_)
            | Error::Rejected(_) => 4,
            Error::InvalidPotential(_)
            | Error::InvalidGrid(_)
            | Error::Config(_)
            | Error::Io(_)
            | Error::Json(_)
            | Error::Csv(_) => 64,
        }
    }
}
