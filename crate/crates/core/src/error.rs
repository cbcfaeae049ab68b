use crate::tensor::{Dims3, SliceKind};
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimensions {n1}x{n2}x{n3}: every extent must be at least 1")]
    InvalidDims { n1: usize, n2: usize, n3: usize },

    #[error("dimension mismatch in {op}: {left} vs {right}")]
    DimMismatch {
        op: &'static str,
        left: Dims3,
        right: Dims3,
    },

    #[error("data length {got} does not match dims {dims} (expected {expected})")]
    DataLength {
        dims: Dims3,
        got: usize,
        expected: usize,
    },

    #[error("{kind} slice index {index} out of range (extent {extent})")]
    SliceIndex {
        kind: SliceKind,
        index: usize,
        extent: usize,
    },

    #[error("{kind} slice {index} is identically zero")]
    ZeroSlice { kind: SliceKind, index: usize },

    #[error("tensor is identically zero")]
    ZeroTensor,

    #[error("SVD did not converge within {0} sweeps")]
    NoConvergence(usize),

    #[error("inverse DFT left an imaginary residue of {0:e}")]
    ImaginaryResidue(f64),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("algorithm {algorithm} requires the {required} objective")]
    IncompatibleObjective {
        algorithm: &'static str,
        required: &'static str,
    },

    #[error("malformed tensor file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
