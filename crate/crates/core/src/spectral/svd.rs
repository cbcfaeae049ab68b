//! One-sided (Hestenes) Jacobi SVD for small dense complex matrices.
//!
//! Column pairs are rotated until every pair is numerically orthogonal. A
//! complex pair is first phase-aligned so that its cross inner product is real,
//! after which the usual real Jacobi rotation applies. The accumulated column
//! transformations are unitary, so `A V = U Σ` holds throughout.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Sweep cap before reporting non-convergence.
pub const MAX_SWEEPS: usize = 100;

/// A pair is left alone once `|a_p^H a_q| <= ORTHOGONALITY_TOL * ‖a_p‖ ‖a_q‖`.
pub const ORTHOGONALITY_TOL: f64 = 1e-14;

/// Dense complex matrix, column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i + n * i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Column-major data.
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries for a {rows}x{cols} complex matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
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

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i + self.rows * j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i + self.rows * j] = v;
    }

    pub fn col(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn conj(&self) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v.conj()).collect(),
        }
    }

    pub fn matmul(&self, rhs: &CMatrix) -> Result<CMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for l in 0..rhs.cols {
            for j in 0..self.cols {
                let s = rhs.get(j, l);
                if s == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for i in 0..self.rows {
                    out.data[i + out.rows * l] += self.data[i + self.rows * j] * s;
                }
            }
        }
        Ok(out)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Thin SVD `M = U diag(σ) V^H` with `r = min(rows, cols)` singular triplets.
///
/// Singular vectors that belong to a zero singular value are returned as
/// zero columns of `u`.
#[derive(Debug, Clone)]
pub struct ComplexSvd {
    /// Nonnegative, descending.
    pub singular_values: Vec<f64>,
    pub u: Option<CMatrix>,
    pub v: Option<CMatrix>,
}

pub fn svd_complex(m: &CMatrix, want_factors: bool) -> Result<ComplexSvd> {
    if m.data
        .iter()
        .any(|v| !v.re.is_finite() || !v.im.is_finite())
    {
        return Err(Error::InvalidParameter(
            "SVD input has non-finite entries".into(),
        ));
    }
    if m.rows >= m.cols {
        jacobi_tall(m, want_factors)
    } else {
        // M^H = U' Σ V'^H  =>  M = V' Σ U'^H
        let svd = jacobi_tall(&m.adjoint(), want_factors)?;
        Ok(ComplexSvd {
            singular_values: svd.singular_values,
            u: svd.v,
            v: svd.u,
        })
    }
}

fn jacobi_tall(m: &CMatrix, want_factors: bool) -> Result<ComplexSvd> {
    let rows = m.rows;
    let cols = m.cols;
    let mut a = m.clone();
    let mut v = want_factors.then(|| CMatrix::identity(cols));

    // columns below this norm are numerically zero; rotating them against
    // large columns only reinjects rounding noise and never settles
    let fro_sq: f64 = a.data.iter().map(|x| x.norm_sqr()).sum();
    let negligible = (rows as f64 * f64::EPSILON).powi(2) * fro_sq;
    let mut converged = cols < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..cols - 1 {
            for q in p + 1..cols {
                let (alpha, beta, gamma) = {
                    let cp = a.col(p);
                    let cq = a.col(q);
                    let mut alpha = 0.0;
                    let mut beta = 0.0;
                    let mut gamma = Complex64::new(0.0, 0.0);
                    for (x, y) in cp.iter().zip(cq) {
                        alpha += x.norm_sqr();
                        beta += y.norm_sqr();
                        gamma += x.conj() * y;
                    }
                    (alpha, beta, gamma)
                };
                let g = gamma.norm();
                if g == 0.0
                    || g <= ORTHOGONALITY_TOL * (alpha * beta).sqrt()
                    || alpha.min(beta) <= negligible
                {
                    continue;
                }
                rotated = true;
                let phase = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut a, p, q, phase, c, s);
                if let Some(v) = v.as_mut() {
                    rotate(v, p, q, phase, c, s);
                }
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::NoConvergence(MAX_SWEEPS));
    }

    let norms: Vec<f64> = (0..cols)
        .map(|j| a.col(j).iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]).then(x.cmp(&y)));

    let singular_values = order.iter().map(|&j| norms[j]).collect();
    let (u, v) = if want_factors {
        let v_src = v.expect("factors requested");
        let mut u = CMatrix::zeros(rows, cols);
        let mut v_out = CMatrix::zeros(cols, cols);
        for (dst, &src) in order.iter().enumerate() {
            let sigma = norms[src];
            if sigma > 0.0 {
                for i in 0..rows {
                    u.set(i, dst, a.get(i, src) / sigma);
                }
            }
            for i in 0..cols {
                v_out.set(i, dst, v_src.get(i, src));
            }
        }
        (Some(u), Some(v_out))
    } else {
        (None, None)
    };
    Ok(ComplexSvd {
        singular_values,
        u,
        v,
    })
}

// Columns (p, q) <- (c a_p - s e^{-iφ} a_q, s a_p + c e^{-iφ} a_q).
fn rotate(m: &mut CMatrix, p: usize, q: usize, phase: Complex64, c: f64, s: f64) {
    let rows = m.rows;
    for i in 0..rows {
        let ap = m.data[i + rows * p];
        let aq = phase * m.data[i + rows * q];
        m.data[i + rows * p] = ap * c - aq * s;
        m.data[i + rows * q] = ap * s + aq * c;
    }
}
