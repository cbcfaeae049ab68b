//! Third-order tensor t-product algebra and randomized Kaczmarz solvers for
//! regularized tensor recovery.
//!
//! * [`tensor`]: dense `n1 × n2 × n3` tensors and the t-product.
//! * [`spectral`]: spectral norm, smallest nonzero singular value and
//!   pseudoinverse through the DFT along the third mode.
//! * [`objectives`]: strongly convex objectives, conjugates and Bregman
//!   distances.
//! * [`solvers`]: the row and extended Kaczmarz iterations and their rates.
//! * [`oracle`]: dense reference computations for testing.
//! * [`harness`]: experiment generators, trial runner and file formats.

// `!(x > 0.0)` is how parameter checks reject NaN along with bad values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod objectives;
pub mod oracle;
pub mod rng;
pub mod solvers;
pub mod spectral;
pub mod tensor;

pub use error::{Error, Result};
pub use objectives::{bregman_distance, soft_shrinkage, BregmanPair, Objective};
pub use solvers::{run, Algorithm, RunResult, SolverConfig, StopReason};
pub use spectral::RankTolerance;
pub use tensor::{Dims3, SliceKind, Tensor3};
