//! Step-size defaults and the expected-error rates of the extended schemes.

use rayon::prelude::*;

use super::step::{z_step, KaczmarzSystem};
use crate::error::{Error, Result};
use crate::objectives::Objective;
use crate::rng;
use crate::spectral::{self, RankTolerance};
use crate::tensor::Tensor3;

/// `(1.5/λ_r, 1.5/λ_c)`.
///
/// Both shipped objectives have `γ = 1`, so the objective does not change the
/// result; it is taken so callers do not need to know that.
pub fn default_stepsizes(a: &Tensor3, obj: &Objective) -> Result<(f64, f64)> {
    scaled_stepsizes(a, obj, 1.5)
}

/// `(factor/λ_r, factor/λ_c)`.
pub fn scaled_stepsizes(a: &Tensor3, _obj: &Objective, factor: f64) -> Result<(f64, f64)> {
    if !(factor > 0.0 && factor < 2.0) {
        return Err(Error::InvalidParameter(format!(
            "step factor must lie in (0, 2), got {factor}"
        )));
    }
    Ok((
        factor / spectral::lambda_row(a)?,
        factor / spectral::lambda_col(a)?,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub lambda_r: f64,
    pub lambda_c: f64,
    pub sigma_min: f64,
    /// `‖A‖_F²`
    pub frobenius_sq: f64,
    pub alpha_r: f64,
    pub alpha_c: f64,
    pub gamma: f64,
    /// `1 − (2α_c − α_c²λ_c) σ_min² / ‖A‖_F²`
    pub rho_c: f64,
    /// `1 − (2γα_r − α_r²λ_r) ν / (2γ‖A‖_F²)`; absent without `ν`.
    pub rho_r: Option<f64>,
    pub nu: Option<f64>,
    pub delta: Option<f64>,
    /// `(1 + δ/γ) max(ρ_c, ρ_r)`
    pub combined_rate: Option<f64>,
}

/// Fills a [`RateReport`]. For the Frobenius objective `ν` defaults to
/// `2 σ_min²`; for the elastic net `ρ_r` is only reported when `nu` is given.
/// Step sizes outside the convergent range give rates `≥ 1`, reported as is.
pub fn theoretical_rates(
    a: &Tensor3,
    obj: &Objective,
    alpha_r: f64,
    alpha_c: f64,
    nu: Option<f64>,
    delta: Option<f64>,
) -> Result<RateReport> {
    if let Some(d) = delta {
        if !(d > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "delta must be positive, got {d}"
            )));
        }
    }
    if let Some(n) = nu {
        if !(n > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "nu must be positive, got {n}"
            )));
        }
    }
    let lambda_r = spectral::lambda_row(a)?;
    let lambda_c = spectral::lambda_col(a)?;
    let sigma_min = spectral::sigma_min_nonzero(a, RankTolerance::default())?;
    let frobenius_sq = a.frobenius_norm_sq();
    let gamma = obj.gamma();
    let nu = nu.or_else(|| obj.is_frobenius().then_some(2.0 * sigma_min * sigma_min));

    let rho_c =
        1.0 - (2.0 * alpha_c - alpha_c * alpha_c * lambda_c) * sigma_min * sigma_min / frobenius_sq;
    let rho_r = nu.map(|nu| {
        1.0 - (2.0 * gamma * alpha_r - alpha_r * alpha_r * lambda_r) * nu
            / (2.0 * gamma * frobenius_sq)
    });
    let combined_rate = match (delta, rho_r) {
        (Some(d), Some(r)) => Some((1.0 + d / gamma) * rho_c.max(r)),
        _ => None,
    };
    Ok(RateReport {
        lambda_r,
        lambda_c,
        sigma_min,
        frobenius_sq,
        alpha_r,
        alpha_c,
        gamma,
        rho_c,
        rho_r,
        nu,
        delta,
        combined_rate,
    })
}

impl RateReport {
    /// Bound on `E‖z^k − (B − A*A†*B)‖_F²` given `‖A*A†*B‖_F²`.
    pub fn z_bound(&self, k: usize, range_part_sq: f64) -> f64 {
        self.rho_c.powf(k as f64) * range_part_sq
    }

    /// Bound on `E D(x^k, x̂)`:
    ///
    /// ```text
    /// (δ+γ)/(2δγ) α_r²λ_r/‖A‖_F² ‖AA†B‖² Σ_{i<k} ρ_c^{k−i} ((1+δ/γ)ρ_r)^i
    ///   + ((1+δ/γ)ρ_r)^k D_0
    /// ```
    pub fn bregman_bound(&self, k: usize, delta: f64, range_part_sq: f64, d0: f64) -> Option<f64> {
        let rho_r = self.rho_r?;
        let g = self.gamma;
        let q = (1.0 + delta / g) * rho_r;
        let sum: f64 = (0..k)
            .map(|i| self.rho_c.powf((k - i) as f64) * q.powf(i as f64))
            .sum();
        let lead = (delta + g) / (2.0 * delta * g) * self.alpha_r * self.alpha_r * self.lambda_r
            / self.frobenius_sq
            * range_part_sq;
        Some(lead * sum + q.powf(k as f64) * d0)
    }

    /// Bound on `E‖x^k − x̂‖_F²`, i.e. `(2/γ)` times [`Self::bregman_bound`].
    /// With the Frobenius objective and `D_0 = ½‖x^0 − x̂‖²` this is the
    /// least-squares bound for extended Kaczmarz.
    pub fn squared_error_bound(
        &self,
        k: usize,
        delta: f64,
        range_part_sq: f64,
        d0: f64,
    ) -> Option<f64> {
        self.bregman_bound(k, delta, range_part_sq, d0)
            .map(|b| 2.0 / self.gamma * b)
    }

    /// Single-rate bound `((1+δ/γ)ρ)^k (D_0 + (δ+γ)/(2δ²) α_r²λ_r/‖A‖_F² ‖AA†B‖²)`
    /// with `ρ = max(ρ_c, ρ_r)`.
    pub fn single_rate_bound(
        &self,
        k: usize,
        delta: f64,
        range_part_sq: f64,
        d0: f64,
    ) -> Option<f64> {
        let rho = self.rho_c.max(self.rho_r?);
        let g = self.gamma;
        let rate = (1.0 + delta / g) * rho;
        let extra =
            (delta + g) / (2.0 * delta * delta) * self.alpha_r * self.alpha_r * self.lambda_r
                / self.frobenius_sq
                * range_part_sq;
        Some(rate.powf(k as f64) * (d0 + extra))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZCheckpoint {
    pub k: usize,
    pub mean: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZBoundReport {
    pub rho_c: f64,
    /// `‖A*A†*B‖_F²`
    pub range_part_sq: f64,
    pub checkpoints: Vec<ZCheckpoint>,
}

impl ZBoundReport {
    pub fn all_pass(&self) -> bool {
        self.checkpoints.iter().all(|c| c.pass)
    }
}

/// Runs the `z` recursion alone from `z = B` once per seed and compares the
/// seed-mean of `‖z^k − (B − A*A†*B)‖_F²` with `ρ_c^k ‖A*A†*B‖_F²` at each
/// checkpoint; a checkpoint passes when `mean ≤ bound (1 + slack)`.
///
/// Seed `s` draws from stream [`rng::SOLVER_STREAM_BASE`] of `s`.
pub fn z_error_bound_check(
    a: &Tensor3,
    b: &Tensor3,
    alpha_c: f64,
    seeds: &[u64],
    checkpoints: &[usize],
    slack: f64,
    tol: RankTolerance,
) -> Result<ZBoundReport> {
    if seeds.is_empty() {
        return Err(Error::InvalidParameter("no seeds given".into()));
    }
    let sys = KaczmarzSystem::new(a, b, true)?;
    let range_part = a.tprod(&spectral::pinv_apply(a, b, tol)?)?;
    let limit = b.sub(&range_part)?;
    let range_part_sq = range_part.frobenius_norm_sq();
    let report = theoretical_rates(a, &Objective::Frobenius, 1.0, alpha_c, None, None)?;

    let mut sorted = checkpoints.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let last = sorted.last().copied().unwrap_or(0);

    let per_seed = seeds
        .par_iter()
        .map(|&seed| {
            let mut r = rng::substream(seed, rng::SOLVER_STREAM_BASE);
            let mut z = b.clone();
            let mut errs = Vec::with_capacity(sorted.len());
            let mut next = 0;
            for k in 0..=last {
                if k > 0 {
                    z_step(&mut z, &sys, alpha_c, &mut r)?;
                }
                while next < sorted.len() && sorted[next] == k {
                    errs.push(z.sub(&limit)?.frobenius_norm_sq());
                    next += 1;
                }
            }
            Ok(errs)
        })
        .collect::<Result<Vec<_>>>()?;

    let n = seeds.len() as f64;
    let checkpoints = sorted
        .iter()
        .enumerate()
        .map(|(idx, &k)| {
            let mean = per_seed.iter().map(|e| e[idx]).sum::<f64>() / n;
            let bound = report.z_bound(k, range_part_sq);
            ZCheckpoint {
                k,
                mean,
                bound,
                pass: mean <= bound * (1.0 + slack),
            }
        })
        .collect();
    Ok(ZBoundReport {
        rho_c: report.rho_c,
        range_part_sq,
        checkpoints,
    })
}
