//! Frequency-domain view of `bcirc(A)`.
//!
//! A DFT along the third mode block-diagonalizes the block-circulant matrix:
//! `bcirc(A) = (F ⊗ I)^H blockdiag(Â(0), …, Â(n3-1)) (F ⊗ I)` with
//! `Â(ω) = Σ_c A_c exp(-2πi ω c / n3)`. Every quantity of `bcirc(A)` used by
//! the solvers (spectral norm, smallest nonzero singular value, the
//! pseudoinverse) is computed block by block on the `n1 x n2` complex blocks,
//! so the dense `n1·n3 x n2·n3` matrix is never built.
//!
//! The DFT is the direct `O(n3²)` sum. Only blocks `0..=n3/2` are computed;
//! the rest are filled by conjugate symmetry, which makes that symmetry exact.

mod svd;

use std::f64::consts::PI;

use num_complex::Complex64;

pub use svd::{svd_complex, CMatrix, ComplexSvd, MAX_SWEEPS, ORTHOGONALITY_TOL};

use crate::error::{Error, Result};
use crate::tensor::{Dims3, SliceKind, Tensor3};

/// Imaginary parts left by the inverse DFT above this (relative to
/// `max(1, peak magnitude)`) mean the block set was not conjugate symmetric.
pub const IMAGINARY_RESIDUE_TOL: f64 = 1e-10;

/// Relative cutoff that defines a "nonzero" singular value: a singular value
/// counts when it exceeds `rel_tol` times the largest singular value across
/// all frequency blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankTolerance {
    rel_tol: f64,
}

impl RankTolerance {
    pub fn new(rel_tol: f64) -> Result<Self> {
        if !(rel_tol > 0.0) || !rel_tol.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "rank tolerance must be positive, got {rel_tol}"
            )));
        }
        Ok(Self { rel_tol })
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    /// Absolute cutoff for a spectrum whose largest singular value is `sigma_max`.
    pub fn cutoff(&self, sigma_max: f64) -> f64 {
        self.rel_tol * sigma_max
    }
}

impl Default for RankTolerance {
    fn default() -> Self {
        Self { rel_tol: 1e-10 }
    }
}

/// The complex frontal blocks `Â(ω)`, `ω = 0..n3`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyBlocks {
    dims: Dims3,
    blocks: Vec<CMatrix>,
}

impl FrequencyBlocks {
    pub fn dims(&self) -> Dims3 {
        self.dims
    }

    pub fn blocks(&self) -> &[CMatrix] {
        &self.blocks
    }

    pub fn block(&self, omega: usize) -> &CMatrix {
        &self.blocks[omega]
    }

    /// Singular values of every block, each list descending.
    pub fn singular_values(&self) -> Result<Vec<Vec<f64>>> {
        let half = self.dims.n3 / 2;
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(self.dims.n3);
        for omega in 0..self.dims.n3 {
            if omega > half {
                // conjugate blocks share singular values
                out.push(out[self.dims.n3 - omega].clone());
            } else {
                out.push(svd_complex(&self.blocks[omega], false)?.singular_values);
            }
        }
        Ok(out)
    }
}

// exp(-2πi t / n) for t = 0..n
fn twiddles(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|t| {
            if t == 0 {
                Complex64::new(1.0, 0.0)
            } else {
                let (s, c) = (-2.0 * PI * t as f64 / n as f64).sin_cos();
                Complex64::new(c, s)
            }
        })
        .collect()
}

pub fn to_frequency(a: &Tensor3) -> FrequencyBlocks {
    let dims = a.dims();
    let Dims3 { n1, n2, n3 } = dims;
    let tw = twiddles(n3);
    let half = n3 / 2;
    let mut blocks: Vec<CMatrix> = Vec::with_capacity(n3);
    for omega in 0..n3 {
        if omega > half {
            let mirror = blocks[n3 - omega].conj();
            blocks.push(mirror);
            continue;
        }
        let mut data = vec![Complex64::new(0.0, 0.0); n1 * n2];
        for c in 0..n3 {
            let w = tw[(omega * c) % n3];
            for (d, &x) in data.iter_mut().zip(a.frontal(c)) {
                *d += w * x;
            }
        }
        blocks.push(CMatrix::from_col_major(n1, n2, data).expect("block shape"));
    }
    FrequencyBlocks { dims, blocks }
}

/// Inverse DFT back to a real tensor. Fails when the blocks leave an
/// imaginary residue above [`IMAGINARY_RESIDUE_TOL`].
pub fn from_frequency(f: &FrequencyBlocks) -> Result<Tensor3> {
    let Dims3 { n1, n2, n3 } = f.dims;
    let tw = twiddles(n3);
    let scale = 1.0 / n3 as f64;
    let mut out = Vec::with_capacity(n1 * n2 * n3);
    let mut worst_imag: f64 = 0.0;
    let mut peak: f64 = 0.0;
    for c in 0..n3 {
        let mut acc = vec![Complex64::new(0.0, 0.0); n1 * n2];
        for (omega, block) in f.blocks.iter().enumerate() {
            let w = tw[(omega * c) % n3].conj();
            for (d, x) in acc.iter_mut().zip(block.as_slice()) {
                *d += x * w;
            }
        }
        for v in acc {
            let v = v * scale;
            worst_imag = worst_imag.max(v.im.abs());
            peak = peak.max(v.re.abs());
            out.push(v.re);
        }
    }
    if worst_imag > IMAGINARY_RESIDUE_TOL * peak.max(1.0) {
        return Err(Error::ImaginaryResidue(worst_imag));
    }
    Tensor3::from_vec(f.dims, out)
}

/// `‖bcirc(a)‖_2`.
pub fn spectral_norm(a: &Tensor3) -> Result<f64> {
    let sv = to_frequency(a).singular_values()?;
    Ok(sv
        .iter()
        .filter_map(|s| s.first().copied())
        .fold(0.0, f64::max))
}

/// Smallest singular value of `bcirc(a)` above the global rank cutoff.
pub fn sigma_min_nonzero(a: &Tensor3, tol: RankTolerance) -> Result<f64> {
    let sv = to_frequency(a).singular_values()?;
    let sigma_max = sv.iter().flatten().copied().fold(0.0, f64::max);
    if sigma_max == 0.0 {
        return Err(Error::ZeroTensor);
    }
    let cutoff = tol.cutoff(sigma_max);
    Ok(sv
        .iter()
        .flatten()
        .copied()
        .filter(|&s| s > cutoff)
        .fold(f64::INFINITY, f64::min))
}

/// Number of singular values of `bcirc(a)` above the global rank cutoff.
pub fn numerical_rank(a: &Tensor3, tol: RankTolerance) -> Result<usize> {
    let sv = to_frequency(a).singular_values()?;
    let sigma_max = sv.iter().flatten().copied().fold(0.0, f64::max);
    let cutoff = tol.cutoff(sigma_max);
    Ok(sv
        .iter()
        .flatten()
        .filter(|&&s| s > cutoff && s > 0.0)
        .count())
}

/// `max_i ‖A_{i,:,:}‖_2² / ‖A_{i,:,:}‖_F²` over horizontal slices.
pub fn lambda_row(a: &Tensor3) -> Result<f64> {
    slice_lambda(a, SliceKind::Horizontal)
}

/// `max_j ‖A_{:,j,:}‖_2² / ‖A_{:,j,:}‖_F²` over lateral slices.
pub fn lambda_col(a: &Tensor3) -> Result<f64> {
    slice_lambda(a, SliceKind::Lateral)
}

fn slice_lambda(a: &Tensor3, kind: SliceKind) -> Result<f64> {
    let extent = match kind {
        SliceKind::Horizontal => a.dims().n1,
        _ => a.dims().n2,
    };
    let mut best: f64 = 0.0;
    for index in 0..extent {
        let slice = a.slice(kind, index)?;
        let fro_sq = slice.frobenius_norm_sq();
        if fro_sq == 0.0 {
            return Err(Error::ZeroSlice { kind, index });
        }
        best = best.max(vector_slice_spectral_sq(&slice) / fro_sq);
    }
    Ok(best)
}

/// Squared spectral norm of a horizontal or lateral slice. Its frequency
/// blocks are row or column vectors, whose only singular value is the
/// Euclidean norm.
pub(crate) fn vector_slice_spectral_sq(slice: &Tensor3) -> f64 {
    to_frequency(slice)
        .blocks()
        .iter()
        .map(|b| b.as_slice().iter().map(|v| v.norm_sqr()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `A† * B`, applied blockwise as `pinv(Â(ω)) B̂(ω)` with the shared rank cutoff.
pub fn pinv_apply(a: &Tensor3, b: &Tensor3, tol: RankTolerance) -> Result<Tensor3> {
    let ad = a.dims();
    let bd = b.dims();
    if ad.n1 != bd.n1 || ad.n3 != bd.n3 {
        return Err(Error::DimMismatch {
            op: "pinv_apply",
            left: ad,
            right: bd,
        });
    }
    let n3 = ad.n3;
    let half = n3 / 2;
    let fa = to_frequency(a);
    let fb = to_frequency(b);

    let svds = (0..=half)
        .map(|omega| svd_complex(fa.block(omega), true))
        .collect::<Result<Vec<_>>>()?;
    let sigma_max = svds
        .iter()
        .filter_map(|s| s.singular_values.first().copied())
        .fold(0.0, f64::max);
    let cutoff = tol.cutoff(sigma_max);

    let mut blocks: Vec<CMatrix> = Vec::with_capacity(n3);
    for omega in 0..n3 {
        if omega > half {
            let mirror = blocks[n3 - omega].conj();
            blocks.push(mirror);
            continue;
        }
        let svd = &svds[omega];
        let u = svd.u.as_ref().expect("factors requested");
        let v = svd.v.as_ref().expect("factors requested");
        // V Σ⁺ U^H B̂, keeping only triplets above the cutoff
        let rhs = fb.block(omega);
        let mut out = CMatrix::zeros(ad.n2, bd.n2);
        for (r, &sigma) in svd.singular_values.iter().enumerate() {
            if sigma <= cutoff || sigma == 0.0 {
                continue;
            }
            let ur = u.col(r);
            let vr = v.col(r);
            for l in 0..bd.n2 {
                let coeff: Complex64 = ur
                    .iter()
                    .zip(rhs.col(l))
                    .map(|(x, y)| x.conj() * y)
                    .sum::<Complex64>()
                    / sigma;
                for (i, vi) in vr.iter().enumerate() {
                    let cur = out.get(i, l);
                    out.set(i, l, cur + vi * coeff);
                }
            }
        }
        blocks.push(out);
    }
    from_frequency(&FrequencyBlocks {
        dims: Dims3 {
            n1: ad.n2,
            n2: bd.n2,
            n3,
        },
        blocks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims(n1: usize, n2: usize, n3: usize) -> Dims3 {
        Dims3::new(n1, n2, n3).unwrap()
    }

    fn wiggle(d: Dims3, seed: f64) -> Tensor3 {
        Tensor3::from_fn(d, |i, j, k| {
            ((i as f64 + 1.3) * seed + (j as f64) * 0.7 + (k as f64 * 1.9)).sin()
        })
    }

    #[test]
    fn identity_blocks_are_identity() {
        let f = to_frequency(&Tensor3::identity(3, 4).unwrap());
        for block in f.blocks() {
            assert_eq!(block, &CMatrix::identity(3));
        }
    }

    #[test]
    fn single_slice_block_is_the_matrix() {
        let a = wiggle(dims(2, 3, 1), 0.4);
        let f = to_frequency(&a);
        assert_eq!(f.blocks().len(), 1);
        for (x, y) in f.block(0).as_slice().iter().zip(a.as_slice()) {
            assert_eq!(x.re, *y);
            assert_eq!(x.im, 0.0);
        }
    }

    #[test]
    fn round_trip() {
        let a = wiggle(dims(5, 4, 6), 0.9);
        let back = from_frequency(&to_frequency(&a)).unwrap();
        assert!(back.distance(&a).unwrap() < 1e-12 * a.frobenius_norm());
    }

    #[test]
    fn conjugate_symmetry() {
        let f = to_frequency(&wiggle(dims(3, 2, 5), 1.1));
        for omega in 1..5 {
            assert_eq!(f.block(5 - omega), &f.block(omega).conj());
        }
    }

    #[test]
    fn broken_symmetry_is_reported() {
        let mut f = to_frequency(&wiggle(dims(2, 2, 4), 0.3));
        f.blocks[1].set(0, 0, Complex64::new(0.0, 5.0));
        assert!(matches!(
            from_frequency(&f),
            Err(Error::ImaginaryResidue(_))
        ));
    }

    #[test]
    fn identity_spectrum() {
        let id = Tensor3::identity(3, 4).unwrap();
        assert!((spectral_norm(&id).unwrap() - 1.0).abs() < 1e-15);
        assert!((sigma_min_nonzero(&id, RankTolerance::default()).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(lambda_row(&id).unwrap(), 1.0);
    }

    #[test]
    fn zero_tensor() {
        let z = Tensor3::zeros(dims(2, 3, 2));
        assert_eq!(spectral_norm(&z).unwrap(), 0.0);
        assert!(matches!(
            sigma_min_nonzero(&z, RankTolerance::default()),
            Err(Error::ZeroTensor)
        ));
        assert!(matches!(
            lambda_row(&z),
            Err(Error::ZeroSlice { index: 0, .. })
        ));
    }

    #[test]
    fn lambda_is_one_for_single_slice() {
        let a = wiggle(dims(4, 3, 1), 2.3);
        assert_eq!(lambda_row(&a).unwrap(), 1.0);
        assert_eq!(lambda_col(&a).unwrap(), 1.0);
    }

    #[test]
    fn pinv_of_identity() {
        let b = wiggle(dims(3, 2, 4), 0.5);
        let x = pinv_apply(
            &Tensor3::identity(3, 4).unwrap(),
            &b,
            RankTolerance::default(),
        )
        .unwrap();
        assert!(x.distance(&b).unwrap() < 1e-14);
    }

    #[test]
    fn rank_tolerance_must_be_positive() {
        assert!(RankTolerance::new(0.0).is_err());
        assert!(RankTolerance::new(-1.0).is_err());
        assert!(RankTolerance::new(f64::NAN).is_err());
    }
}
