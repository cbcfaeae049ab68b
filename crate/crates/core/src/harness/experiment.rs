//! Multi-trial experiment runner.

use std::path::Path;

use rayon::prelude::*;

use super::generate::{generate_trial, ExperimentKind, ExperimentSpec, Instance};
use super::tensor_file::write_tensor;
use super::trace_csv::{column_name, TraceCsv};
use crate::error::Result;
use crate::rng;
use crate::solvers::{self, Algorithm, RunResult, SolverConfig, StopReason, TracePoint};
use crate::tensor::Tensor3;

/// One algorithm on one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub trial: usize,
    pub algorithm: Algorithm,
    pub iterations_used: usize,
    pub stop_reason: StopReason,
    pub final_relerr: f64,
    /// Whether the zero pattern of the final iterate equals that of the
    /// ground truth; sparse recovery only.
    pub support_match: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub csv: TraceCsv,
    /// Indexed by trial, then by position in `spec.algorithms`.
    pub trials: Vec<Vec<TrialOutcome>>,
}

impl ExperimentOutcome {
    pub fn outcomes_for(&self, algorithm: Algorithm) -> impl Iterator<Item = &TrialOutcome> {
        self.trials
            .iter()
            .flatten()
            .filter(move |o| o.algorithm == algorithm)
    }

    pub fn mean_final_relerr(&self, algorithm: Algorithm) -> Option<f64> {
        let v: Vec<f64> = self
            .outcomes_for(algorithm)
            .map(|o| o.final_relerr)
            .collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    }
}

/// Logged iterations of a full-budget run: `0, s, 2s, …` and the budget.
pub fn trace_grid(max_iters: usize, log_every: usize) -> Vec<usize> {
    let mut g: Vec<usize> = (0..=max_iters).step_by(log_every).collect();
    if g.last() != Some(&max_iters) {
        g.push(max_iters);
    }
    g
}

/// Trace values at `grid`, each the last recorded value at or before the
/// grid point (runs that stopped early hold their final value).
fn on_grid(trace: &[TracePoint], grid: &[usize]) -> Vec<f64> {
    let mut out = Vec::with_capacity(grid.len());
    let mut pos = 0;
    for &g in grid {
        while pos + 1 < trace.len() && trace[pos + 1].iter <= g {
            pos += 1;
        }
        out.push(trace[pos].value);
    }
    out
}

fn support_matches(x: &Tensor3, truth: &Tensor3) -> bool {
    x.as_slice()
        .iter()
        .zip(truth.as_slice())
        .all(|(&a, &b)| (a == 0.0) == (b == 0.0))
}

struct TrialRuns {
    outcomes: Vec<TrialOutcome>,
    traces: Vec<Vec<f64>>,
}

fn run_trial(
    spec: &ExperimentSpec,
    trial: usize,
    grid: &[usize],
    dump_dir: Option<&Path>,
) -> Result<TrialRuns> {
    let inst = generate_trial(spec, trial as u64)?;
    let obj = spec.objective()?;
    let (alpha_r, alpha_c) = solvers::scaled_stepsizes(&inst.a, &obj, spec.step_factor)?;
    let mut config = SolverConfig::new(alpha_r, alpha_c, spec.max_iters)
        .with_seed(
            spec.seed,
            rng::trial_stream(trial as u64, rng::SOLVER_STREAM_BASE),
        )
        .with_log_every(spec.log_every)
        .with_tol(spec.tol)
        .with_reference(inst.reference.clone());
    config.check_steps = trial == 0;

    if let Some(dir) = dump_dir {
        dump_instance(dir, spec.kind, trial, &inst)?;
    }

    let mut outcomes = Vec::with_capacity(spec.algorithms.len());
    let mut traces = Vec::with_capacity(spec.algorithms.len());
    for &algorithm in &spec.algorithms {
        let res: RunResult = solvers::run(algorithm, &inst.a, &inst.b, &obj, &config)?;
        let final_relerr = res.error_trace.last().map(|p| p.value).unwrap_or(f64::NAN);
        let support_match = (spec.kind == ExperimentKind::SparseRecovery)
            .then(|| support_matches(&res.final_x, &inst.reference));
        log::debug!(
            "trial {trial} {algorithm}: {} iterations, relerr {final_relerr:.3e}",
            res.iterations_used
        );
        if let Some(dir) = dump_dir {
            write_tensor(
                dir.join(format!("trial{trial}_{algorithm}_x.tt3")),
                &res.final_x,
            )?;
        }
        traces.push(on_grid(&res.error_trace, grid));
        outcomes.push(TrialOutcome {
            trial,
            algorithm,
            iterations_used: res.iterations_used,
            stop_reason: res.stop_reason,
            final_relerr,
            support_match,
        });
    }
    Ok(TrialRuns { outcomes, traces })
}

fn dump_instance(dir: &Path, kind: ExperimentKind, trial: usize, inst: &Instance) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_tensor(dir.join(format!("trial{trial}_A.tt3")), &inst.a)?;
    write_tensor(dir.join(format!("trial{trial}_B.tt3")), &inst.b)?;
    let name = match kind {
        ExperimentKind::LeastSquares => "reference",
        ExperimentKind::SparseRecovery => "ground_truth",
    };
    write_tensor(
        dir.join(format!("trial{trial}_{name}.tt3")),
        &inst.reference,
    )
}

/// Runs every algorithm of `spec` on `spec.trials` generated instances (each
/// algorithm sees the same instance and the same sampling stream within a
/// trial) and averages the relative-error traces pointwise over trials.
///
/// Trials run in parallel; the averages are summed in trial order, so the
/// output does not depend on scheduling.
pub fn run_experiment(spec: &ExperimentSpec, dump_dir: Option<&Path>) -> Result<ExperimentOutcome> {
    spec.validate()?;
    let grid = trace_grid(spec.max_iters, spec.log_every);
    let runs = (0..spec.trials)
        .into_par_iter()
        .map(|t| run_trial(spec, t, &grid, dump_dir))
        .collect::<Result<Vec<_>>>()?;

    let mut csv = TraceCsv::new(grid.clone())?;
    for (col, algorithm) in spec.algorithms.iter().enumerate() {
        let mut mean = vec![0.0; grid.len()];
        for r in &runs {
            for (m, v) in mean.iter_mut().zip(&r.traces[col]) {
                *m += v;
            }
        }
        let n = spec.trials as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        csv.push_column(column_name(algorithm.name()), mean)?;
    }
    Ok(ExperimentOutcome {
        csv,
        trials: runs.into_iter().map(|r| r.outcomes).collect(),
    })
}
