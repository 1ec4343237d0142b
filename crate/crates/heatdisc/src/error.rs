use thiserror::Error;

/// Errors raised by grid construction, flow design, bounds and solves.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("inadmissible source: {0}")]
    InadmissibleSource(String),
    #[error("{0}")]
    InvalidParameter(String),
    #[error("grid under-resolved: design needs at least {required} modes, grid has {available}")]
    Unresolved { required: usize, available: usize },
    #[error("flow has zero {0} norm")]
    ZeroNorm(&'static str),
    #[error(
        "cell Peclet number {cell_pe:.3} exceeds 2; need about nr={required_nr}, modes={required_modes}"
    )]
    Resolvability {
        cell_pe: f64,
        required_nr: usize,
        required_modes: usize,
    },
    #[error("Krylov solver stalled after {iterations} iterations (relative residual {last:.3e})")]
    NoConvergence {
        iterations: usize,
        last: f64,
        history: Vec<f64>,
    },
    #[error("solution rejected: {0}")]
    Rejected(String),
}

pub type Result<T> = std::result::Result<T, Error>;
