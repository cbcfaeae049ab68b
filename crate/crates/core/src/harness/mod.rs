//! Synthetic experiments: problem generators, the multi-trial runner, the
//! binary tensor format and CSV traces.

pub mod experiment;
pub mod generate;
pub mod selftest;
pub mod tensor_file;
pub mod trace_csv;

pub use experiment::{run_experiment, trace_grid, ExperimentOutcome, TrialOutcome};
pub use generate::{
    gen_least_squares, gen_sparse_recovery, generate_trial, ExperimentKind, ExperimentSpec,
    Instance,
};
pub use selftest::{run_selftest, CheckResult, SelftestReport};
pub use tensor_file::{read_tensor, write_tensor};
pub use trace_csv::TraceCsv;
