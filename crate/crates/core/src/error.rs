use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no outward turning arc: |c| = {c} is not below h(base_r) = {h_base}")]
    NoTurningArc { c: f64, h_base: f64 },

    #[error("degenerate radial arc: c = 0 never turns (delta_t = 0)")]
    DegenerateRadial,

    #[error("quadrature did not converge on [{a}, {b}]: estimated error {error:e} after {intervals} intervals")]
    Quadrature { a: f64, b: f64, error: f64, intervals: usize },

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("precondition failed: {0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
