//! Synthetic problem generators.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::objectives::Objective;
use crate::rng::{self, randn};
use crate::solvers::{Algorithm, SamplingDist};
use crate::spectral::{self, RankTolerance};
use crate::tensor::{Dims3, SliceKind, Tensor3};

/// Entries of the sparse ground truth below this are zeroed.
pub const SPARSE_THRESHOLD: f64 = 2.33;

/// Instance generation gives up after this many all-zero-slice draws.
pub const MAX_GENERATION_ATTEMPTS: u64 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    /// Inconsistent least squares with a dense Gaussian solution.
    LeastSquares,
    /// Sparse recovery with rank-deficient `A` and noise orthogonal to its
    /// range.
    SparseRecovery,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentKind::LeastSquares => "least_squares",
            ExperimentKind::SparseRecovery => "sparse_recovery",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    /// Lateral extent of `B` and `X`.
    pub k: usize,
    pub noise_scale: f64,
    /// Elastic-net weight; sparse recovery only.
    pub lambda: f64,
    pub trials: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
    /// Step sizes are `step_factor/λ_r` and `step_factor/λ_c`.
    pub step_factor: f64,
    pub algorithms: Vec<Algorithm>,
    pub log_every: usize,
}

impl ExperimentSpec {
    /// `100 × 20 × 20`, `K = 20`, 1000 iterations of TRK and TREK.
    pub fn least_squares() -> Self {
        Self {
            kind: ExperimentKind::LeastSquares,
            n1: 100,
            n2: 20,
            n3: 20,
            k: 20,
            noise_scale: 0.1,
            lambda: 1.0,
            trials: 10,
            max_iters: 1000,
            tol: 0.0,
            seed: 0,
            step_factor: 1.5,
            algorithms: vec![Algorithm::Trk, Algorithm::Trek],
            log_every: 10,
        }
    }

    /// `100 × 200 × 10`, `K = 20`, 20000 iterations of RRK and RREK with
    /// `λ = 1`.
    pub fn sparse_recovery() -> Self {
        Self {
            kind: ExperimentKind::SparseRecovery,
            n1: 100,
            n2: 200,
            n3: 10,
            k: 20,
            max_iters: 20_000,
            log_every: 100,
            algorithms: vec![Algorithm::Rrk, Algorithm::Rrek],
            ..Self::least_squares()
        }
    }

    pub fn a_dims(&self) -> Result<Dims3> {
        Dims3::new(self.n1, self.n2, self.n3)
    }

    pub fn b_dims(&self) -> Result<Dims3> {
        Dims3::new(self.n1, self.k, self.n3)
    }

    pub fn x_dims(&self) -> Result<Dims3> {
        Dims3::new(self.n2, self.k, self.n3)
    }

    pub fn objective(&self) -> Result<Objective> {
        match self.kind {
            ExperimentKind::LeastSquares => Ok(Objective::Frobenius),
            ExperimentKind::SparseRecovery => Objective::elastic_net(self.lambda),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        self.a_dims()?;
        self.b_dims()?;
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1".into());
        }
        if self.log_every == 0 {
            return bad("log_every must be at least 1".into());
        }
        if !(self.step_factor > 0.0 && self.step_factor < 2.0) {
            return bad(format!(
                "step factor must lie in (0, 2), got {}",
                self.step_factor
            ));
        }
        if !(self.noise_scale >= 0.0) || !self.noise_scale.is_finite() {
            return bad(format!(
                "noise scale must be nonnegative, got {}",
                self.noise_scale
            ));
        }
        if !(self.tol >= 0.0) {
            return bad(format!("tol must be nonnegative, got {}", self.tol));
        }
        if self.algorithms.is_empty() {
            return bad("no algorithms selected".into());
        }
        for (i, a) in self.algorithms.iter().enumerate() {
            if self.algorithms[..i].contains(a) {
                return bad(format!("algorithm {a} listed twice"));
            }
        }
        if self.kind == ExperimentKind::SparseRecovery && self.n1 < 10 {
            return bad(format!("sparse recovery needs n1 >= 10, got {}", self.n1));
        }
        let obj = self.objective()?;
        for a in &self.algorithms {
            a.check_objective(&obj)?;
        }
        Ok(())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "least_squares" | "lsq" => Ok(ExperimentKind::LeastSquares),
            "sparse_recovery" | "sparse" => Ok(ExperimentKind::SparseRecovery),
            _ => Err(Error::InvalidParameter(format!(
                "unknown experiment kind {s:?}"
            ))),
        }
    }
}

/// A generated problem. `reference` is `A† * B` for least squares and the
/// sparse ground truth for sparse recovery.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub a: Tensor3,
    pub b: Tensor3,
    pub reference: Tensor3,
    /// Noise added to `A * X`.
    pub noise: Tensor3,
}

/// `A = randn`, `B = A * randn(n2, K, n3) + noise_scale randn(n1, K, n3)`,
/// reference `A† * B`.
pub fn gen_least_squares<R: Rng + ?Sized>(spec: &ExperimentSpec, rng: &mut R) -> Result<Instance> {
    let a = randn(spec.a_dims()?, rng);
    let x0 = randn(spec.x_dims()?, rng);
    let noise = randn(spec.b_dims()?, rng).scale(spec.noise_scale);
    let b = a.tprod(&x0)?.add(&noise)?;
    let reference = spectral::pinv_apply(&a, &b, RankTolerance::default())?;
    Ok(Instance {
        a,
        b,
        reference,
        noise,
    })
}

/// Overwrites horizontal slices `n1−10..n1−6` with `n1−5..n1−1`.
pub fn duplicate_trailing_slices(a: &mut Tensor3) -> Result<()> {
    let n1 = a.dims().n1;
    if n1 < 10 {
        return Err(Error::InvalidParameter(format!("need n1 >= 10, got {n1}")));
    }
    for off in 0..5 {
        let src = a.slice(SliceKind::Horizontal, n1 - 5 + off)?;
        a.embed_slice(SliceKind::Horizontal, n1 - 10 + off, &src)?;
    }
    Ok(())
}

/// `randn` with every entry below [`SPARSE_THRESHOLD`] set to zero.
pub fn sparse_ground_truth<R: Rng + ?Sized>(dims: Dims3, rng: &mut R) -> Tensor3 {
    randn(dims, rng).map(|v| if v >= SPARSE_THRESHOLD { v } else { 0.0 })
}

/// Gaussian noise projected onto the kernel of `Aᵀ`: `E − A * (A† * E)`.
///
/// For an orthonormal kernel basis `Z` and Gaussian `E`, `Zᵀ E` is again
/// standard Gaussian, so this has the law of `fold(Z G)` with Gaussian `G`.
pub fn range_orthogonal_noise<R: Rng + ?Sized>(
    a: &Tensor3,
    k: usize,
    rng: &mut R,
) -> Result<Tensor3> {
    let d = a.dims();
    let e = randn(Dims3::new(d.n1, k, d.n3)?, rng);
    let proj = a.tprod(&spectral::pinv_apply(a, &e, RankTolerance::default())?)?;
    e.sub(&proj)
}

/// `A` Gaussian with duplicated trailing slices, `x_s` thresholded Gaussian,
/// `B = A * x_s + noise_scale E` with `Aᵀ * E = 0`.
pub fn gen_sparse_recovery<R: Rng + ?Sized>(
    spec: &ExperimentSpec,
    rng: &mut R,
) -> Result<Instance> {
    let mut a = randn(spec.a_dims()?, rng);
    duplicate_trailing_slices(&mut a)?;
    let rank = spectral::numerical_rank(&a, RankTolerance::default())?;
    let q = spec.n1 * spec.n3 - rank;
    if q == 0 {
        return Err(Error::InvalidParameter(
            "kernel of the transpose is trivial; cannot build range-orthogonal noise".into(),
        ));
    }
    let xs = sparse_ground_truth(spec.x_dims()?, rng);
    let noise = range_orthogonal_noise(&a, spec.k, rng)?.scale(spec.noise_scale);
    let b = a.tprod(&xs)?.add(&noise)?;
    Ok(Instance {
        a,
        b,
        reference: xs,
        noise,
    })
}

/// The instance of `trial`. An instance whose `A` has an all-zero horizontal
/// or lateral slice is discarded and redrawn from the next stream.
pub fn generate_trial(spec: &ExperimentSpec, trial: u64) -> Result<Instance> {
    for attempt in 0..MAX_GENERATION_ATTEMPTS {
        let mut r = rng::substream(spec.seed, rng::trial_stream(trial, attempt));
        let inst = match spec.kind {
            ExperimentKind::LeastSquares => gen_least_squares(spec, &mut r)?,
            ExperimentKind::SparseRecovery => gen_sparse_recovery(spec, &mut r)?,
        };
        match SamplingDist::rows(&inst.a).and_then(|_| SamplingDist::cols(&inst.a)) {
            Ok(_) => return Ok(inst),
            Err(Error::ZeroSlice { kind, index }) => {
                log::warn!("trial {trial}: {kind} slice {index} of A is zero, regenerating");
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::InvalidParameter(format!(
        "trial {trial}: no instance without zero slices in {MAX_GENERATION_ATTEMPTS} attempts"
    )))
}
