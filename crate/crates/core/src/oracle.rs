//! Brute-force dense references: the materialized block-circulant matrix,
//! unfold/fold, and SVD-based pseudoinverse and kernel computations.
//!
//! Nothing in the solvers uses this module. It exists so tests can compare
//! the slice-wise and frequency-domain routes against plain linear algebra.

use crate::error::{Error, Result};
use crate::objectives::Objective;
use crate::spectral::{CMatrix, RankTolerance};
use crate::tensor::{Dims3, Tensor3};

/// Sweep cap of the dense Jacobi SVD.
pub const SVD_MAX_SWEEPS: usize = 100;

/// A column pair is rotated while `|⟨w_p, w_q⟩| > tol ‖w_p‖ ‖w_q‖`.
pub const SVD_ORTHOGONALITY_TOL: f64 = 1e-14;

/// Dense real matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.get(i, l);
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.get(l, j);
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if (self.rows, self.cols) != (rhs.rows, rhs.cols) {
            return Err(Error::Shape("matrix shapes differ".into()));
        }
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Columns `start..end` as a new matrix.
    pub fn columns(&self, start: usize, end: usize) -> DenseMatrix {
        DenseMatrix::from_fn(self.rows, end - start, |i, j| self.get(i, start + j))
    }
}

/// `bcirc(A)`, of size `(n1 n3) × (n2 n3)`; block `(r, c)` is frontal slice
/// `(r − c) mod n3`.
pub fn bcirc_materialize(a: &Tensor3) -> DenseMatrix {
    let d = a.dims();
    DenseMatrix::from_fn(d.n1 * d.n3, d.n2 * d.n3, |row, col| {
        let (r, i) = (row / d.n1, row % d.n1);
        let (c, j) = (col / d.n2, col % d.n2);
        a.get(i, j, (r + d.n3 - c) % d.n3)
    })
}

/// Frontal slices stacked vertically, `(n1 n3) × n2`.
pub fn unfold_matrix(a: &Tensor3) -> DenseMatrix {
    let d = a.dims();
    DenseMatrix::from_fn(d.n1 * d.n3, d.n2, |row, j| a.get(row % d.n1, j, row / d.n1))
}

pub fn fold_matrix(m: &DenseMatrix, dims: Dims3) -> Result<Tensor3> {
    if m.rows() != dims.n1 * dims.n3 || m.cols() != dims.n2 {
        return Err(Error::Shape(format!(
            "cannot fold a {}x{} matrix into {dims}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(Tensor3::from_fn(dims, |i, j, k| m.get(k * dims.n1 + i, j)))
}

/// `fold(bcirc(a) · unfold(b))`.
pub fn tprod_dense(a: &Tensor3, b: &Tensor3) -> Result<Tensor3> {
    let (ad, bd) = (a.dims(), b.dims());
    if ad.n2 != bd.n1 || ad.n3 != bd.n3 {
        return Err(Error::DimMismatch {
            op: "tprod_dense",
            left: ad,
            right: bd,
        });
    }
    let m = bcirc_materialize(a).matmul(&unfold_matrix(b))?;
    fold_matrix(&m, Dims3::new(ad.n1, bd.n2, ad.n3)?)
}

/// Real embedding `[[Re M, −Im M], [Im M, Re M]]` of a complex matrix; each
/// singular value of `M` appears twice in it.
pub fn real_embedding(m: &CMatrix) -> DenseMatrix {
    let (r, c) = (m.rows(), m.cols());
    DenseMatrix::from_fn(2 * r, 2 * c, |i, j| {
        let z = m.get(i % r, j % c);
        match (i < r, j < c) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Thin SVD `M = U diag(σ) Vᵀ`, singular values descending.
#[derive(Debug, Clone)]
pub struct DenseSvd {
    pub singular_values: Vec<f64>,
    /// `rows × min(rows, cols)`
    pub u: DenseMatrix,
    /// `cols × min(rows, cols)`
    pub v: DenseMatrix,
}

/// One-sided (Hestenes) Jacobi in real arithmetic; wide matrices go through
/// their transpose.
pub fn dense_svd(m: &DenseMatrix) -> Result<DenseSvd> {
    if m.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "SVD input has non-finite entries".into(),
        ));
    }
    if m.rows() < m.cols() {
        let t = dense_svd(&m.transpose())?;
        return Ok(DenseSvd {
            singular_values: t.singular_values,
            u: t.v,
            v: t.u,
        });
    }
    let (rows, n) = (m.rows(), m.cols());
    let mut w: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..rows).map(|i| m.get(i, j)).collect())
        .collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let rotate = |cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64| {
        let (lo, hi) = cols.split_at_mut(q);
        for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
            let (a, b) = (*x, *y);
            *x = c * a - s * b;
            *y = s * a + c * b;
        }
    };
    // numerically zero columns are left alone, see the complex variant
    let negligible = (rows as f64 * f64::EPSILON).powi(2) * m.frobenius_norm().powi(2);
    let mut converged = false;
    for _ in 0..SVD_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                let gamma = dot(&w[p], &w[q]);
                if gamma == 0.0
                    || gamma.abs() <= SVD_ORTHOGONALITY_TOL * (alpha * beta).sqrt()
                    || alpha.min(beta) <= negligible
                {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut w, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence(SVD_MAX_SWEEPS));
    }
    let sigma: Vec<f64> = w.iter().map(|c| dot(c, c).sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| sigma[y].total_cmp(&sigma[x]));
    let singular_values: Vec<f64> = order.iter().map(|&j| sigma[j]).collect();
    let u = DenseMatrix::from_fn(rows, n, |i, j| {
        let s = sigma[order[j]];
        if s > 0.0 {
            w[order[j]][i] / s
        } else {
            0.0
        }
    });
    let v = DenseMatrix::from_fn(n, n, |i, j| v[order[j]][i]);
    Ok(DenseSvd {
        singular_values,
        u,
        v,
    })
}

/// `pinv(M) · rhs`, dropping singular values at or below the rank cutoff.
pub fn dense_pinv_apply(
    m: &DenseMatrix,
    rhs: &DenseMatrix,
    tol: RankTolerance,
) -> Result<DenseMatrix> {
    if m.rows() != rhs.rows() {
        return Err(Error::Shape(format!(
            "pinv of a {}x{} matrix applied to {} rows",
            m.rows(),
            m.cols(),
            rhs.rows()
        )));
    }
    let svd = dense_svd(m)?;
    let cutoff = tol.cutoff(svd.singular_values.first().copied().unwrap_or(0.0));
    let mut w = svd.u.transpose().matmul(rhs)?;
    for (l, &s) in svd.singular_values.iter().enumerate() {
        let inv = if s > cutoff { 1.0 / s } else { 0.0 };
        for j in 0..w.cols() {
            let v = w.get(l, j) * inv;
            w.set(l, j, v);
        }
    }
    svd.v.matmul(&w)
}

/// Numerical rank under `tol`.
pub fn dense_rank(m: &DenseMatrix, tol: RankTolerance) -> Result<usize> {
    let s = dense_svd(m)?.singular_values;
    let cutoff = tol.cutoff(s.first().copied().unwrap_or(0.0));
    Ok(s.iter().filter(|&&v| v > cutoff).count())
}

/// Orthonormal basis (as columns) of `{v : M v = 0}`, with `cols − rank`
/// columns.
pub fn null_space_basis(m: &DenseMatrix, tol: RankTolerance) -> Result<DenseMatrix> {
    let n = m.cols();
    // zero rows do not change the kernel but make the SVD return a full V
    let padded = if m.rows() < n {
        let mut p = m.as_slice().to_vec();
        p.resize(n * n, 0.0);
        DenseMatrix::from_row_major(n, n, p)?
    } else {
        m.clone()
    };
    let svd = dense_svd(&padded)?;
    let cutoff = tol.cutoff(svd.singular_values.first().copied().unwrap_or(0.0));
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    Ok(svd.v.columns(rank, n))
}

/// `‖BᵀB − I‖_F`.
pub fn orthonormality_defect(basis: &DenseMatrix) -> Result<f64> {
    let g = basis.transpose().matmul(basis)?;
    Ok(g.sub(&DenseMatrix::identity(basis.cols()))?
        .frobenius_norm())
}

/// `f*(y)` by maximizing `y x − f(x)` over the grid `x ∈ [−r, r]` with
/// `steps` intervals, per coordinate, refined by a golden-section search in
/// the best grid cell. Only valid for coordinate-separable objectives.
pub fn conjugate_by_grid(obj: &Objective, y: &Tensor3, radius: f64, steps: usize) -> f64 {
    let scalar = |x: f64| {
        let t = Tensor3::from_vec(
            Dims3 {
                n1: 1,
                n2: 1,
                n3: 1,
            },
            vec![x],
        )
        .expect("1x1x1");
        obj.eval_f(&t)
    };
    y.as_slice()
        .iter()
        .map(|&yv| {
            let g = |x: f64| yv * x - scalar(x);
            let h = 2.0 * radius / steps as f64;
            let (best, _) = (0..=steps)
                .map(|s| -radius + h * s as f64)
                .map(|x| (x, g(x)))
                .fold(
                    (0.0, f64::NEG_INFINITY),
                    |acc, p| if p.1 > acc.1 { p } else { acc },
                );
            let (mut lo, mut hi) = (best - h, best + h);
            let phi = (5f64.sqrt() - 1.0) / 2.0;
            for _ in 0..200 {
                let m1 = hi - phi * (hi - lo);
                let m2 = lo + phi * (hi - lo);
                if g(m1) < g(m2) {
                    lo = m1;
                } else {
                    hi = m2;
                }
            }
            g(0.5 * (lo + hi)).max(g(best))
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circulant_layout() {
        let a = Tensor3::from_vec(Dims3::new(1, 1, 3).unwrap(), vec![1.0, 2.0, 3.0]).unwrap();
        let m = bcirc_materialize(&a);
        assert_eq!(m.as_slice(), &[1.0, 3.0, 2.0, 2.0, 1.0, 3.0, 3.0, 2.0, 1.0]);
    }

    #[test]
    fn unfold_identity() {
        let m = unfold_matrix(&Tensor3::identity(2, 2).unwrap());
        assert_eq!(m.as_slice(), &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        let back = fold_matrix(&m, Dims3::new(2, 2, 2).unwrap()).unwrap();
        assert_eq!(back, Tensor3::identity(2, 2).unwrap());
        assert!(fold_matrix(&m, Dims3::new(2, 2, 3).unwrap()).is_err());
    }

    #[test]
    fn svd_of_diagonal_and_rotation() {
        let d = DenseMatrix::from_row_major(2, 2, vec![2.0, 0.0, 0.0, 5.0]).unwrap();
        assert_eq!(dense_svd(&d).unwrap().singular_values, vec![5.0, 2.0]);
        let (s, c) = 0.3f64.sin_cos();
        let q = DenseMatrix::from_row_major(2, 2, vec![c, -s, s, c]).unwrap();
        for v in dense_svd(&q).unwrap().singular_values {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pinv_of_identity() {
        let id = DenseMatrix::identity(3);
        let rhs = DenseMatrix::from_fn(3, 2, |i, j| (i + 2 * j) as f64);
        let x = dense_pinv_apply(&id, &rhs, RankTolerance::default()).unwrap();
        assert!(x.sub(&rhs).unwrap().frobenius_norm() < 1e-14);
    }

    #[test]
    fn kernels() {
        let full = DenseMatrix::from_row_major(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(
            null_space_basis(&full.transpose(), RankTolerance::default())
                .unwrap()
                .cols(),
            0
        );
        let wide = DenseMatrix::from_row_major(1, 3, vec![1.0, 1.0, 0.0]).unwrap();
        let z = null_space_basis(&wide, RankTolerance::default()).unwrap();
        assert_eq!(z.cols(), 2);
        assert!(wide.matmul(&z).unwrap().frobenius_norm() < 1e-14);
        assert!(orthonormality_defect(&z).unwrap() < 1e-14);
    }

    #[test]
    fn grid_conjugate_of_frobenius() {
        let y = Tensor3::from_vec(Dims3::new(2, 1, 1).unwrap(), vec![1.5, -0.25]).unwrap();
        let v = conjugate_by_grid(&Objective::Frobenius, &y, 5.0, 1000);
        assert!((v - 0.5 * (2.25 + 0.0625)).abs() < 1e-10);
    }
}
