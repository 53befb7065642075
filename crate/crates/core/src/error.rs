use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("placement infeasible: {0}")]
    PlacementInfeasible(String),
    #[error("empty region: {0}")]
    EmptyRegion(String),
    #[error("no root found: {0}")]
    NoRoot(String),
    #[error("scan limit exceeded: {0}")]
    ScanLimit(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("linear solver diverged at t = {t}: {msg}")]
    SolverDivergence { t: f64, msg: String },
    #[error("fixed-point iteration stalled at t = {t} after {iters} iterations (last update {last:.3e})")]
    FixedPointStall { t: f64, iters: usize, last: f64 },
    #[error("fit infeasible: {0}")]
    FitInfeasible(String),
    #[error("fit targets are empty")]
    EmptyTargets,
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("missing artifact: {}", .0.display())]
    MissingArtifact(PathBuf),
    #[error("io error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True for errors caused by bad input rather than numerical trouble.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation(_)
                | Error::Domain(_)
                | Error::Dimension(_)
                | Error::Parse(_)
                | Error::EmptyTargets
                | Error::PlacementInfeasible(_)
                | Error::MissingArtifact(_)
                | Error::EmptyRegion(_)
        )
    }
}
