//! Single iterations of the row (Kaczmarz) and row-plus-column (extended
//! Kaczmarz) schemes on a tensor system `A * X = B`.

use rand::Rng;

use super::sampling::SamplingDist;
use crate::error::{Error, Result};
use crate::objectives::Objective;
use crate::tensor::{Dims3, SliceKind, Tensor3};

/// `A`, `B` and the per-slice data the iterations touch, sliced once up front.
#[derive(Debug, Clone)]
pub struct KaczmarzSystem {
    a: Tensor3,
    b: Tensor3,
    /// `A_{i,:,:}` and its transpose, per row.
    rows: Vec<(Tensor3, Tensor3)>,
    b_rows: Vec<Tensor3>,
    row_dist: SamplingDist,
    /// `A_{:,j,:}` and its transpose, per column; only for extended schemes.
    cols: Option<(Vec<(Tensor3, Tensor3)>, SamplingDist)>,
}

impl KaczmarzSystem {
    /// Prepares `a`, `b` for iteration. Column data is only built when
    /// `extended` is set.
    pub fn new(a: &Tensor3, b: &Tensor3, extended: bool) -> Result<Self> {
        let ad = a.dims();
        let bd = b.dims();
        if ad.n1 != bd.n1 || ad.n3 != bd.n3 {
            return Err(Error::DimMismatch {
                op: "KaczmarzSystem",
                left: ad,
                right: bd,
            });
        }
        let row_dist = SamplingDist::rows(a)?;
        let rows = (0..ad.n1)
            .map(|i| {
                let s = a.slice(SliceKind::Horizontal, i)?;
                let t = s.transpose();
                Ok((s, t))
            })
            .collect::<Result<Vec<_>>>()?;
        let b_rows = (0..ad.n1)
            .map(|i| b.slice(SliceKind::Horizontal, i))
            .collect::<Result<Vec<_>>>()?;
        let cols = if extended {
            let dist = SamplingDist::cols(a)?;
            let cols = (0..ad.n2)
                .map(|j| {
                    let s = a.slice(SliceKind::Lateral, j)?;
                    let t = s.transpose();
                    Ok((s, t))
                })
                .collect::<Result<Vec<_>>>()?;
            Some((cols, dist))
        } else {
            None
        };
        Ok(Self {
            a: a.clone(),
            b: b.clone(),
            rows,
            b_rows,
            row_dist,
            cols,
        })
    }

    pub fn a(&self) -> &Tensor3 {
        &self.a
    }

    pub fn b(&self) -> &Tensor3 {
        &self.b
    }

    pub fn row_dist(&self) -> &SamplingDist {
        &self.row_dist
    }

    pub fn col_dist(&self) -> Option<&SamplingDist> {
        self.cols.as_ref().map(|(_, d)| d)
    }

    /// Shape of the unknown `X`.
    pub fn solution_dims(&self) -> Dims3 {
        Dims3 {
            n1: self.a.dims().n2,
            n2: self.b.dims().n2,
            n3: self.a.dims().n3,
        }
    }

    pub fn is_extended(&self) -> bool {
        self.cols.is_some()
    }
}

/// Iterates of the regularized (extended) schemes.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    /// Primal iterate, always `∇f*(y)`.
    pub x: Tensor3,
    /// Dual iterate.
    pub y: Tensor3,
    /// Residual tracker of the extended schemes.
    pub z: Option<Tensor3>,
    pub k: usize,
}

impl SolverState {
    /// `y = 0`, `x = ∇f*(0)`, and `z = B` when the system is extended.
    pub fn initial(sys: &KaczmarzSystem, obj: &Objective) -> Self {
        let y = Tensor3::zeros(sys.solution_dims());
        Self::from_dual(obj, y, sys.is_extended().then(|| sys.b.clone()))
    }

    pub fn from_dual(obj: &Objective, y: Tensor3, z: Option<Tensor3>) -> Self {
        Self {
            x: obj.grad_conjugate(&y),
            y,
            z,
            k: 0,
        }
    }
}

/// Slice indices drawn by one step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepSample {
    pub col: Option<usize>,
    pub row: usize,
}

/// One regularized Kaczmarz step:
///
/// ```text
/// y ← y − α_r (A_i)ᵀ * (A_i * x − B_i) / ‖A_i‖_F²,   x ← ∇f*(y)
/// ```
///
/// With the Frobenius objective this is the tensor randomized Kaczmarz step.
pub fn rrk_step<R: Rng + ?Sized>(
    state: &mut SolverState,
    sys: &KaczmarzSystem,
    obj: &Objective,
    alpha_r: f64,
    rng: &mut R,
) -> Result<StepSample> {
    let row = sys.row_dist.sample(rng);
    row_update(state, sys, obj, alpha_r, row, None)?;
    state.k += 1;
    Ok(StepSample { col: None, row })
}

/// One regularized extended Kaczmarz step. The column update of `z` comes
/// first and the row update reads the already-updated `z`:
///
/// ```text
/// z ← z − α_c A_j * ((A_j)ᵀ * z) / ‖A_j‖_F²
/// y ← y − α_r (A_i)ᵀ * (A_i * x − B_i + z_i) / ‖A_i‖_F²,   x ← ∇f*(y)
/// ```
///
/// Consumes two uniforms, column first.
pub fn rrek_step<R: Rng + ?Sized>(
    state: &mut SolverState,
    sys: &KaczmarzSystem,
    obj: &Objective,
    alpha_r: f64,
    alpha_c: f64,
    rng: &mut R,
) -> Result<StepSample> {
    let (cols, col_dist) = sys.cols.as_ref().ok_or_else(|| {
        Error::InvalidParameter("extended step on a system built without column data".into())
    })?;
    let z = state
        .z
        .as_mut()
        .ok_or_else(|| Error::InvalidParameter("extended step needs a z iterate".into()))?;
    let col = col_dist.sample(rng);
    column_update(z, cols, col_dist, alpha_c, col)?;
    let row = sys.row_dist.sample(rng);
    let z_row = z.slice(SliceKind::Horizontal, row)?;
    row_update(state, sys, obj, alpha_r, row, Some(&z_row))?;
    state.k += 1;
    Ok(StepSample {
        col: Some(col),
        row,
    })
}

/// `z ← z − α_c A_j * ((A_j)ᵀ * z) / ‖A_j‖_F²`, the Kaczmarz step for the
/// consistent system `Aᵀ * z = 0`.
pub(crate) fn column_update(
    z: &mut Tensor3,
    cols: &[(Tensor3, Tensor3)],
    dist: &SamplingDist,
    alpha_c: f64,
    col: usize,
) -> Result<()> {
    let (a_col, a_col_t) = &cols[col];
    let w = a_col_t.tprod(z)?;
    a_col.tprod_add_to(&w, -alpha_c / dist.weights()[col], z)
}

fn row_update(
    state: &mut SolverState,
    sys: &KaczmarzSystem,
    obj: &Objective,
    alpha_r: f64,
    row: usize,
    z_row: Option<&Tensor3>,
) -> Result<()> {
    let (a_row, a_row_t) = &sys.rows[row];
    let mut residual = a_row.tprod(&state.x)?;
    residual.add_scaled(-1.0, &sys.b_rows[row])?;
    if let Some(zr) = z_row {
        residual.add_scaled(1.0, zr)?;
    }
    a_row_t.tprod_add_to(
        &residual,
        -alpha_r / sys.row_dist.weights()[row],
        &mut state.y,
    )?;
    obj.grad_conjugate_into(&state.y, &mut state.x);
    Ok(())
}

/// Runs the `z` recursion alone (one column draw per step).
pub(crate) fn z_step<R: Rng + ?Sized>(
    z: &mut Tensor3,
    sys: &KaczmarzSystem,
    alpha_c: f64,
    rng: &mut R,
) -> Result<usize> {
    let (cols, dist) = sys
        .cols
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("system built without column data".into()))?;
    let col = dist.sample(rng);
    column_update(z, cols, dist, alpha_c, col)?;
    Ok(col)
}
