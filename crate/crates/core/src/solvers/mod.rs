//! Randomized Kaczmarz solvers for `min f(X)` subject to `Aᵀ * A * X = Aᵀ * B`.
//!
//! | algorithm     | scheme                        | objective        |
//! |---------------|-------------------------------|------------------|
//! | `trk`         | row Kaczmarz                  | Frobenius        |
//! | `rrk`         | regularized row Kaczmarz      | any              |
//! | `trek`        | extended Kaczmarz             | Frobenius        |
//! | `rrek`        | regularized extended Kaczmarz | any              |
//! | `rrek_sparse` | regularized extended Kaczmarz | elastic net      |
//!
//! The row-only schemes converge for consistent systems and stall at a
//! residual-sized horizon otherwise; the extended schemes track the part of
//! `B` outside the range of `A` in an auxiliary iterate `z` and converge to
//! the regularized least-squares solution.

mod rates;
mod sampling;
mod step;

use std::fmt;
use std::str::FromStr;

pub use rates::{
    default_stepsizes, scaled_stepsizes, theoretical_rates, z_error_bound_check, RateReport,
    ZBoundReport, ZCheckpoint,
};
pub use sampling::SamplingDist;
pub use step::{rrek_step, rrk_step, KaczmarzSystem, SolverState, StepSample};

use crate::error::{Error, Result};
use crate::objectives::{bregman_from_dual, Objective};
use crate::rng;
use crate::spectral;
use crate::tensor::Tensor3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Trk,
    Rrk,
    Trek,
    Rrek,
    RrekSparse,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Trk,
        Algorithm::Rrk,
        Algorithm::Trek,
        Algorithm::Rrek,
        Algorithm::RrekSparse,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Trk => "trk",
            Algorithm::Rrk => "rrk",
            Algorithm::Trek => "trek",
            Algorithm::Rrek => "rrek",
            Algorithm::RrekSparse => "rrek_sparse",
        }
    }

    pub fn is_extended(&self) -> bool {
        matches!(
            self,
            Algorithm::Trek | Algorithm::Rrek | Algorithm::RrekSparse
        )
    }

    pub fn check_objective(&self, obj: &Objective) -> Result<()> {
        match self {
            Algorithm::Trk | Algorithm::Trek if !obj.is_frobenius() => {
                Err(Error::IncompatibleObjective {
                    algorithm: self.name(),
                    required: "frobenius",
                })
            }
            Algorithm::RrekSparse if !obj.is_elastic_net() => Err(Error::IncompatibleObjective {
                algorithm: self.name(),
                required: "elastic_net",
            }),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == norm)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub alpha_r: f64,
    /// Only read by the extended schemes.
    pub alpha_c: f64,
    pub max_iters: usize,
    /// Stop once `‖x^k − x^{k−1}‖_F / ‖x^{k−1}‖_F < tol`; 0 disables the rule.
    pub tol: f64,
    pub seed: u64,
    /// ChaCha stream under `seed`.
    pub stream: u64,
    pub log_every: usize,
    /// When set, traces report `‖x^k − ref‖_F / ‖ref‖_F`; otherwise the
    /// relative change between consecutive iterates.
    pub reference_solution: Option<Tensor3>,
    pub track_bregman: bool,
    pub record_samples: bool,
    /// Log a warning when the step sizes fall outside the convergent range.
    pub check_steps: bool,
}

impl SolverConfig {
    pub fn new(alpha_r: f64, alpha_c: f64, max_iters: usize) -> Self {
        Self {
            alpha_r,
            alpha_c,
            max_iters,
            tol: 0.0,
            seed: 0,
            stream: 0,
            log_every: 1,
            reference_solution: None,
            track_bregman: false,
            record_samples: false,
            check_steps: false,
        }
    }

    pub fn with_seed(mut self, seed: u64, stream: u64) -> Self {
        self.seed = seed;
        self.stream = stream;
        self
    }

    pub fn with_reference(mut self, reference: Tensor3) -> Self {
        self.reference_solution = Some(reference);
        self
    }

    pub fn with_log_every(mut self, log_every: usize) -> Self {
        self.log_every = log_every;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.alpha_r > 0.0) || !self.alpha_r.is_finite() {
            return bad(format!("alpha_r must be positive, got {}", self.alpha_r));
        }
        if !(self.alpha_c > 0.0) || !self.alpha_c.is_finite() {
            return bad(format!("alpha_c must be positive, got {}", self.alpha_c));
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1".into());
        }
        if !(self.tol >= 0.0) {
            return bad(format!("tol must be nonnegative, got {}", self.tol));
        }
        if self.log_every == 0 {
            return bad("log_every must be at least 1".into());
        }
        Ok(())
    }

    /// Messages for step sizes outside `0 < α_r < 2γ/λ_r`, `0 < α_c < 2/λ_c`.
    pub fn step_warnings(
        &self,
        a: &Tensor3,
        obj: &Objective,
        extended: bool,
    ) -> Result<Vec<String>> {
        let mut out = Vec::new();
        let lr = spectral::lambda_row(a)?;
        let limit_r = 2.0 * obj.gamma() / lr;
        if self.alpha_r >= limit_r {
            out.push(format!(
                "alpha_r = {} is not below 2*gamma/lambda_r = {limit_r}",
                self.alpha_r
            ));
        }
        if extended {
            let lc = spectral::lambda_col(a)?;
            let limit_c = 2.0 / lc;
            if self.alpha_c >= limit_c {
                out.push(format!(
                    "alpha_c = {} is not below 2/lambda_c = {limit_c}",
                    self.alpha_c
                ));
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    ToleranceMet,
    BudgetExhausted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub iter: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub final_x: Tensor3,
    pub final_y: Tensor3,
    pub final_z: Option<Tensor3>,
    pub iterations_used: usize,
    pub stop_reason: StopReason,
    pub error_trace: Vec<TracePoint>,
    pub bregman_trace: Option<Vec<TracePoint>>,
    pub samples: Option<Vec<StepSample>>,
}

/// Runs `algorithm` from `y = 0` (so `x = ∇f*(0)`, and `z = B` for extended
/// schemes).
///
/// Traces are recorded at iteration 0 (reference mode only), at every
/// multiple of `log_every`, and at the final iteration. In relative-change
/// mode an iteration whose previous iterate is zero records the absolute
/// change instead. The stop rule is skipped for such iterations.
pub fn run(
    algorithm: Algorithm,
    a: &Tensor3,
    b: &Tensor3,
    obj: &Objective,
    config: &SolverConfig,
) -> Result<RunResult> {
    algorithm.check_objective(obj)?;
    config.validate()?;
    let sys = KaczmarzSystem::new(a, b, algorithm.is_extended())?;
    if let Some(r) = &config.reference_solution {
        if r.dims() != sys.solution_dims() {
            return Err(Error::DimMismatch {
                op: "reference_solution",
                left: sys.solution_dims(),
                right: r.dims(),
            });
        }
    }
    if config.check_steps {
        for w in config.step_warnings(a, obj, algorithm.is_extended())? {
            log::warn!("{algorithm}: {w}");
        }
    }

    let mut rng = rng::substream(config.seed, config.stream);
    let mut state = SolverState::initial(&sys, obj);
    let reference = config.reference_solution.as_ref();
    let ref_norm = reference.map(|r| r.frobenius_norm());
    let track_bregman = config.track_bregman && reference.is_some();

    let mut error_trace = Vec::new();
    let mut bregman_trace = track_bregman.then(Vec::new);
    let mut samples = config.record_samples.then(Vec::new);

    let record = |state: &SolverState,
                  prev: Option<&Tensor3>,
                  error_trace: &mut Vec<TracePoint>,
                  bregman_trace: &mut Option<Vec<TracePoint>>|
     -> Result<()> {
        let value = match (reference, prev) {
            (Some(r), _) => {
                let d = state.x.distance(r)?;
                let n = ref_norm.unwrap_or(0.0);
                if n > 0.0 {
                    d / n
                } else {
                    d
                }
            }
            (None, Some(p)) => relative_change(&state.x, p)?.0,
            (None, None) => return Ok(()),
        };
        error_trace.push(TracePoint {
            iter: state.k,
            value,
        });
        if let (Some(trace), Some(r)) = (bregman_trace.as_mut(), reference) {
            trace.push(TracePoint {
                iter: state.k,
                value: bregman_from_dual(obj, &state.y, r)?,
            });
        }
        Ok(())
    };

    record(&state, None, &mut error_trace, &mut bregman_trace)?;
    let keep_prev = config.tol > 0.0 || reference.is_none();
    let mut prev = keep_prev.then(|| state.x.clone());
    let mut stop_reason = StopReason::BudgetExhausted;

    while state.k < config.max_iters {
        if let Some(p) = prev.as_mut() {
            p.as_mut_slice().copy_from_slice(state.x.as_slice());
        }
        let sample = if algorithm.is_extended() {
            rrek_step(
                &mut state,
                &sys,
                obj,
                config.alpha_r,
                config.alpha_c,
                &mut rng,
            )?
        } else {
            rrk_step(&mut state, &sys, obj, config.alpha_r, &mut rng)?
        };
        if let Some(s) = samples.as_mut() {
            s.push(sample);
        }

        let mut stop = false;
        if config.tol > 0.0 {
            let (ratio, relative) = relative_change(&state.x, prev.as_ref().expect("kept"))?;
            stop = relative && ratio < config.tol;
        }
        let last = stop || state.k == config.max_iters;
        if state.k.is_multiple_of(config.log_every) || last {
            record(&state, prev.as_ref(), &mut error_trace, &mut bregman_trace)?;
        }
        if stop {
            stop_reason = StopReason::ToleranceMet;
            break;
        }
    }

    Ok(RunResult {
        iterations_used: state.k,
        final_x: state.x,
        final_y: state.y,
        final_z: state.z,
        stop_reason,
        error_trace,
        bregman_trace,
        samples,
    })
}

// (‖x − prev‖ / ‖prev‖, true), or (‖x − prev‖, false) when prev = 0.
fn relative_change(x: &Tensor3, prev: &Tensor3) -> Result<(f64, bool)> {
    let d = x.distance(prev)?;
    let n = prev.frobenius_norm();
    Ok(if n > 0.0 { (d / n, true) } else { (d, false) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Dims3;

    fn small_problem() -> (Tensor3, Tensor3) {
        let a = Tensor3::from_fn(Dims3::new(5, 3, 2).unwrap(), |i, j, k| {
            ((i * 7 + j * 3 + k * 5) % 11) as f64 / 5.0 - 1.0 + if i == j { 1.0 } else { 0.0 }
        });
        let b = Tensor3::from_fn(Dims3::new(5, 2, 2).unwrap(), |i, j, k| {
            ((i + 2 * j + 3 * k) % 5) as f64 - 2.0
        });
        (a, b)
    }

    #[test]
    fn parse_names() {
        assert_eq!("trek".parse::<Algorithm>().unwrap(), Algorithm::Trek);
        assert_eq!(
            "RREK-sparse".parse::<Algorithm>().unwrap(),
            Algorithm::RrekSparse
        );
        assert!("rk".parse::<Algorithm>().is_err());
    }

    #[test]
    fn objective_compatibility() {
        let en = Objective::elastic_net(1.0).unwrap();
        assert!(Algorithm::Trek.check_objective(&en).is_err());
        assert!(Algorithm::Trk.check_objective(&en).is_err());
        assert!(Algorithm::RrekSparse
            .check_objective(&Objective::Frobenius)
            .is_err());
        assert!(Algorithm::Rrek.check_objective(&en).is_ok());
    }

    #[test]
    fn zero_tolerance_uses_whole_budget() {
        let (a, b) = small_problem();
        let cfg = SolverConfig::new(1.0, 1.0, 37).with_log_every(10);
        let res = run(Algorithm::Trek, &a, &b, &Objective::Frobenius, &cfg).unwrap();
        assert_eq!(res.iterations_used, 37);
        assert_eq!(res.stop_reason, StopReason::BudgetExhausted);
        let iters: Vec<usize> = res.error_trace.iter().map(|p| p.iter).collect();
        assert_eq!(iters, vec![10, 20, 30, 37]);
    }

    #[test]
    fn tolerance_stops_early() {
        let (a, b) = small_problem();
        let cfg = SolverConfig::new(1.0, 1.0, 100_000).with_tol(1e-6);
        let res = run(Algorithm::Trek, &a, &b, &Objective::Frobenius, &cfg).unwrap();
        assert_eq!(res.stop_reason, StopReason::ToleranceMet);
        assert!(res.iterations_used < 100_000);
    }

    #[test]
    fn runs_are_deterministic() {
        let (a, b) = small_problem();
        let cfg = SolverConfig::new(1.0, 1.2, 500).with_seed(42, 3);
        let obj = Objective::elastic_net(0.5).unwrap();
        let r1 = run(Algorithm::Rrek, &a, &b, &obj, &cfg).unwrap();
        let r2 = run(Algorithm::Rrek, &a, &b, &obj, &cfg).unwrap();
        assert_eq!(r1, r2);
    }

    #[test]
    fn reference_trace_starts_at_one() {
        let (a, b) = small_problem();
        let reference = spectral::pinv_apply(&a, &b, Default::default()).unwrap();
        let cfg = SolverConfig::new(1.0, 1.0, 20)
            .with_reference(reference)
            .with_log_every(5);
        let mut cfg = cfg;
        cfg.track_bregman = true;
        let res = run(Algorithm::Trek, &a, &b, &Objective::Frobenius, &cfg).unwrap();
        assert_eq!(res.error_trace[0].iter, 0);
        assert!((res.error_trace[0].value - 1.0).abs() < 1e-15);
        assert_eq!(res.bregman_trace.unwrap().len(), res.error_trace.len());
    }

    #[test]
    fn bad_config_rejected() {
        let (a, b) = small_problem();
        let obj = Objective::Frobenius;
        assert!(run(
            Algorithm::Trk,
            &a,
            &b,
            &obj,
            &SolverConfig::new(0.0, 1.0, 5)
        )
        .is_err());
        assert!(run(
            Algorithm::Trk,
            &a,
            &b,
            &obj,
            &SolverConfig::new(1.0, 1.0, 0)
        )
        .is_err());
        let wrong = SolverConfig::new(1.0, 1.0, 5).with_reference(Tensor3::zeros(a.dims()));
        assert!(run(Algorithm::Trk, &a, &b, &obj, &wrong).is_err());
    }

    #[test]
    fn zero_slice_is_an_error() {
        let (mut a, b) = small_problem();
        a.embed_slice(
            crate::tensor::SliceKind::Horizontal,
            2,
            &Tensor3::zeros(Dims3::new(1, 3, 2).unwrap()),
        )
        .unwrap();
        let cfg = SolverConfig::new(1.0, 1.0, 5);
        assert!(matches!(
            run(Algorithm::Trk, &a, &b, &Objective::Frobenius, &cfg),
            Err(Error::ZeroSlice { index: 2, .. })
        ));
    }

    #[test]
    fn step_warnings() {
        let (a, _) = small_problem();
        let cfg = SolverConfig::new(100.0, 100.0, 1);
        assert_eq!(
            cfg.step_warnings(&a, &Objective::Frobenius, true)
                .unwrap()
                .len(),
            2
        );
        let cfg = SolverConfig::new(0.5, 0.5, 1);
        assert!(cfg
            .step_warnings(&a, &Objective::Frobenius, true)
            .unwrap()
            .is_empty());
    }
}
