//! Agreement of the slice-wise and frequency-domain routines with the dense
//! oracle on random small tensors.

use rand::Rng;

use crate::error::Result;
use crate::oracle::{self, DenseMatrix};
use crate::rng::{self, randn, StreamRng};
use crate::spectral::{self, RankTolerance};
use crate::tensor::{Dims3, SliceKind, Tensor3};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub instances: usize,
    pub max_error: f64,
    pub tolerance: f64,
}

impl CheckResult {
    pub fn pass(&self) -> bool {
        self.max_error <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestReport {
    pub checks: Vec<CheckResult>,
}

impl SelftestReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(CheckResult::pass)
    }
}

/// Extents drawn uniformly from `1..=max_extent`.
fn random_dims(r: &mut StreamRng, max_extent: usize) -> Dims3 {
    let mut e = || r.random_range(1..=max_extent);
    Dims3 {
        n1: e(),
        n2: e(),
        n3: e(),
    }
}

fn rel(err: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        err / scale
    } else {
        err
    }
}

fn dense_sigma_max(m: &DenseMatrix) -> Result<f64> {
    Ok(oracle::dense_svd(m)?
        .singular_values
        .first()
        .copied()
        .unwrap_or(0.0))
}

fn dense_sigma_min_nonzero(m: &DenseMatrix, tol: RankTolerance) -> Result<f64> {
    let s = oracle::dense_svd(m)?.singular_values;
    let cutoff = tol.cutoff(s.first().copied().unwrap_or(0.0));
    Ok(s.into_iter()
        .filter(|&v| v > cutoff)
        .fold(f64::INFINITY, f64::min))
}

fn dense_lambda(a: &Tensor3, kind: SliceKind) -> Result<f64> {
    let extent = if kind == SliceKind::Horizontal {
        a.dims().n1
    } else {
        a.dims().n2
    };
    let mut best: f64 = 0.0;
    for i in 0..extent {
        let s = a.slice(kind, i)?;
        let top = dense_sigma_max(&oracle::bcirc_materialize(&s))?;
        best = best.max(top * top / s.frobenius_norm_sq());
    }
    Ok(best)
}

/// Runs every check on `instances` random tensors with extents up to
/// `max_extent`.
pub fn run_selftest(seed: u64, instances: usize, max_extent: usize) -> Result<SelftestReport> {
    let tol = RankTolerance::default();
    let mut tprod = 0.0f64;
    let mut transpose = 0.0f64;
    let mut adjoint = 0.0f64;
    let mut norm = 0.0f64;
    let mut smin = 0.0f64;
    let mut lambda = 0.0f64;
    let mut pinv = 0.0f64;

    for t in 0..instances {
        let mut r = rng::substream(seed, t as u64);
        let da = random_dims(&mut r, max_extent);
        let k = r.random_range(1..=max_extent);
        let a = randn(da, &mut r);
        let b = randn(
            Dims3 {
                n1: da.n2,
                n2: k,
                n3: da.n3,
            },
            &mut r,
        );
        let c = randn(
            Dims3 {
                n1: da.n1,
                n2: k,
                n3: da.n3,
            },
            &mut r,
        );

        let fast = a.tprod(&b)?;
        let dense = oracle::tprod_dense(&a, &b)?;
        tprod = tprod.max(rel(fast.distance(&dense)?, dense.frobenius_norm()));

        let bt = oracle::bcirc_materialize(&a.transpose());
        let btt = oracle::bcirc_materialize(&a).transpose();
        transpose = transpose.max(bt.sub(&btt)?.frobenius_norm());

        let lhs = fast.inner(&c)?;
        let rhs = b.inner(&a.transpose().tprod(&c)?)?;
        adjoint = adjoint.max((lhs - rhs).abs());

        let bc = oracle::bcirc_materialize(&a);
        let want = dense_sigma_max(&bc)?;
        norm = norm.max(rel((spectral::spectral_norm(&a)? - want).abs(), want));

        let want = dense_sigma_min_nonzero(&bc, tol)?;
        smin = smin.max(rel(
            (spectral::sigma_min_nonzero(&a, tol)? - want).abs(),
            want,
        ));

        for kind in [SliceKind::Horizontal, SliceKind::Lateral] {
            let got = match kind {
                SliceKind::Horizontal => spectral::lambda_row(&a)?,
                _ => spectral::lambda_col(&a)?,
            };
            lambda = lambda.max((got - dense_lambda(&a, kind)?).abs());
        }

        let got = spectral::pinv_apply(&a, &c, tol)?;
        let want_m = oracle::dense_pinv_apply(&bc, &oracle::unfold_matrix(&c), tol)?;
        let want = oracle::fold_matrix(&want_m, got.dims())?;
        pinv = pinv.max(rel(got.distance(&want)?, want.frobenius_norm()));
    }

    let check = |name, max_error, tolerance| CheckResult {
        name,
        instances,
        max_error,
        tolerance,
    };
    Ok(SelftestReport {
        checks: vec![
            check("tprod", tprod, 1e-12),
            check("transpose_bcirc", transpose, 0.0),
            check("adjoint_identity", adjoint, 1e-10),
            check("spectral_norm", norm, 1e-10),
            check("sigma_min_nonzero", smin, 1e-8),
            check("lambda_row_col", lambda, 1e-10),
            check("pinv_apply", pinv, 1e-8),
        ],
    })
}
