use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(
        "pulse times {first} and {second} share the nearest segment boundary {boundary}; increase the segment count"
    )]
    AmbiguousMapping { first: usize, second: usize, boundary: usize },
    #[error("grid spans {grid} s but the composite pulse lasts {pulse} s")]
    GridMismatch { grid: f64, pulse: f64 },
    #[error("rotation angle {angle} rad is within 1e-6 of pi; axis is ill-conditioned")]
    BranchPoint { angle: f64 },
    #[error("{what} = {value} is out of range")]
    OutOfRange { what: &'static str, value: f64 },
    #[error("pulse {index} cannot be encoded: required chi = {chi} outside [{chi_min}, {chi_max}]")]
    Unencodable { index: usize, chi: f64, chi_min: f64, chi_max: f64 },
    #[error("training diverged at epoch {epoch}: loss = {loss}")]
    Diverged { epoch: usize, loss: f64 },
    #[error("invalid input: {0}")]
    Invalid(String),
}
