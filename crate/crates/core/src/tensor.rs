//! Dense third-order tensors and the t-product calculus.
//!
//! Entries are stored frontal-slice-major: the frontal index is slowest, then
//! the column, then the row, so entry `(i, j, k)` of an `n1 x n2 x n3` tensor
//! lives at `i + n1 * (j + n2 * k)`. Every frontal slice is therefore a
//! contiguous column-major `n1 x n2` matrix. The layout is also the on-disk
//! payload order of the tensor file format.
//!
//! The t-product is evaluated as a circular convolution of frontal slices,
//!
//! ```text
//! (A * B)_c = sum_{m = 0}^{n3 - 1} A_{(c - m) mod n3} B_m
//! ```
//!
//! which is the block-circulant product `fold(bcirc(A) unfold(B))` without
//! forming `bcirc(A)`. Terms are summed in ascending `m`, so results are
//! reproducible bit for bit.

use std::fmt;

use crate::error::{Error, Result};

/// Extents of a third-order tensor: rows (`n1`), columns (`n2`) and frontal
/// slices (`n3`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims3 {
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
}

impl Dims3 {
    pub fn new(n1: usize, n2: usize, n3: usize) -> Result<Self> {
        if n1 == 0 || n2 == 0 || n3 == 0 {
            return Err(Error::InvalidDims { n1, n2, n3 });
        }
        Ok(Self { n1, n2, n3 })
    }

    /// Total number of entries.
    pub fn len(&self) -> usize {
        self.n1 * self.n2 * self.n3
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Entries per frontal slice.
    pub fn slice_len(&self) -> usize {
        self.n1 * self.n2
    }
}

impl fmt::Display for Dims3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.n1, self.n2, self.n3)
    }
}

/// Which of the three two-dimensional cross-sections a slice is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SliceKind {
    /// Fixed first index; a `1 x n2 x n3` tensor.
    Horizontal,
    /// Fixed second index; an `n1 x 1 x n3` tensor.
    Lateral,
    /// Fixed third index; an `n1 x n2 x 1` tensor (a matrix).
    Frontal,
}

impl fmt::Display for SliceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SliceKind::Horizontal => "horizontal",
            SliceKind::Lateral => "lateral",
            SliceKind::Frontal => "frontal",
        };
        f.write_str(name)
    }
}

/// A dense real third-order tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    dims: Dims3,
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(dims: Dims3) -> Self {
        Self {
            dims,
            data: vec![0.0; dims.len()],
        }
    }

    pub fn from_vec(dims: Dims3, data: Vec<f64>) -> Result<Self> {
        if data.len() != dims.len() {
            return Err(Error::DataLength {
                dims,
                got: data.len(),
                expected: dims.len(),
            });
        }
        Ok(Self { dims, data })
    }

    /// Builds a tensor entry by entry from `f(i, j, k)`.
    pub fn from_fn(dims: Dims3, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dims.len());
        for k in 0..dims.n3 {
            for j in 0..dims.n2 {
                for i in 0..dims.n1 {
                    data.push(f(i, j, k));
                }
            }
        }
        Self { dims, data }
    }

    /// The `n x n x n3` identity: frontal slice 0 is the identity matrix, the
    /// rest are zero.
    pub fn identity(n: usize, n3: usize) -> Result<Self> {
        let dims = Dims3::new(n, n, n3)?;
        let mut t = Self::zeros(dims);
        for i in 0..n {
            t.data[i + n * i] = 1.0;
        }
        Ok(t)
    }

    pub fn dims(&self) -> Dims3 {
        self.dims
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims.n1 * (j + self.dims.n2 * k)
    }

    /// Entry `(i, j, k)`. Panics when out of range.
    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        assert!(i < self.dims.n1 && j < self.dims.n2 && k < self.dims.n3);
        self.data[self.offset(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, value: f64) {
        assert!(i < self.dims.n1 && j < self.dims.n2 && k < self.dims.n3);
        let at = self.offset(i, j, k);
        self.data[at] = value;
    }

    /// Frontal slice `k` as a column-major `n1 x n2` matrix.
    pub fn frontal(&self, k: usize) -> &[f64] {
        let len = self.dims.slice_len();
        &self.data[k * len..(k + 1) * len]
    }

    fn check_same_dims(&self, other: &Tensor3, op: &'static str) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimMismatch {
                op,
                left: self.dims,
                right: other.dims,
            });
        }
        Ok(())
    }

    /// The t-product `self * rhs`.
    pub fn tprod(&self, rhs: &Tensor3) -> Result<Tensor3> {
        let dims = self.tprod_dims(rhs)?;
        let mut out = Tensor3::zeros(dims);
        tprod_accumulate(self, rhs, 1.0, &mut out);
        Ok(out)
    }

    /// `out += alpha * (self * rhs)`.
    pub fn tprod_add_to(&self, rhs: &Tensor3, alpha: f64, out: &mut Tensor3) -> Result<()> {
        let dims = self.tprod_dims(rhs)?;
        if out.dims != dims {
            return Err(Error::DimMismatch {
                op: "tprod_add_to",
                left: dims,
                right: out.dims,
            });
        }
        tprod_accumulate(self, rhs, alpha, out);
        Ok(())
    }

    fn tprod_dims(&self, rhs: &Tensor3) -> Result<Dims3> {
        if self.dims.n2 != rhs.dims.n1 || self.dims.n3 != rhs.dims.n3 {
            return Err(Error::DimMismatch {
                op: "tprod",
                left: self.dims,
                right: rhs.dims,
            });
        }
        Ok(Dims3 {
            n1: self.dims.n1,
            n2: rhs.dims.n2,
            n3: self.dims.n3,
        })
    }

    /// Tensor transpose: slice 0 is transposed in place, slices `1..n3` are
    /// transposed and their order reversed.
    pub fn transpose(&self) -> Tensor3 {
        let Dims3 { n1, n2, n3 } = self.dims;
        let dims = Dims3 { n1: n2, n2: n1, n3 };
        let mut out = Tensor3::zeros(dims);
        for c in 0..n3 {
            let src = self.frontal((n3 - c) % n3);
            let dst = &mut out.data[c * n1 * n2..(c + 1) * n1 * n2];
            for j in 0..n2 {
                for i in 0..n1 {
                    dst[j + n2 * i] = src[i + n1 * j];
                }
            }
        }
        out
    }

    /// Sum of elementwise products.
    pub fn inner(&self, other: &Tensor3) -> Result<f64> {
        self.check_same_dims(other, "inner")?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_norm_sq().sqrt()
    }

    pub fn one_norm(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Extracts a slice as an owned tensor (see [`SliceKind`] for shapes).
    pub fn slice(&self, kind: SliceKind, index: usize) -> Result<Tensor3> {
        let Dims3 { n1, n2, n3 } = self.dims;
        let extent = match kind {
            SliceKind::Horizontal => n1,
            SliceKind::Lateral => n2,
            SliceKind::Frontal => n3,
        };
        if index >= extent {
            return Err(Error::SliceIndex {
                kind,
                index,
                extent,
            });
        }
        Ok(match kind {
            SliceKind::Horizontal => {
                Tensor3::from_fn(Dims3 { n1: 1, n2, n3 }, |_, j, k| self.get(index, j, k))
            }
            SliceKind::Lateral => {
                let dims = Dims3 { n1, n2: 1, n3 };
                let mut data = Vec::with_capacity(dims.len());
                for k in 0..n3 {
                    let start = self.offset(0, index, k);
                    data.extend_from_slice(&self.data[start..start + n1]);
                }
                Tensor3 { dims, data }
            }
            SliceKind::Frontal => Tensor3 {
                dims: Dims3 { n1, n2, n3: 1 },
                data: self.frontal(index).to_vec(),
            },
        })
    }

    /// Writes `slice` back into position `index`; the inverse of [`Tensor3::slice`].
    pub fn embed_slice(&mut self, kind: SliceKind, index: usize, slice: &Tensor3) -> Result<()> {
        let Dims3 { n1, n2, n3 } = self.dims;
        let (extent, expected) = match kind {
            SliceKind::Horizontal => (n1, Dims3 { n1: 1, n2, n3 }),
            SliceKind::Lateral => (n2, Dims3 { n1, n2: 1, n3 }),
            SliceKind::Frontal => (n3, Dims3 { n1, n2, n3: 1 }),
        };
        if index >= extent {
            return Err(Error::SliceIndex {
                kind,
                index,
                extent,
            });
        }
        if slice.dims != expected {
            return Err(Error::DimMismatch {
                op: "embed_slice",
                left: expected,
                right: slice.dims,
            });
        }
        match kind {
            SliceKind::Horizontal => {
                for k in 0..n3 {
                    for j in 0..n2 {
                        let at = self.offset(index, j, k);
                        self.data[at] = slice.data[j + n2 * k];
                    }
                }
            }
            SliceKind::Lateral => {
                for k in 0..n3 {
                    let start = self.offset(0, index, k);
                    self.data[start..start + n1].copy_from_slice(&slice.data[k * n1..(k + 1) * n1]);
                }
            }
            SliceKind::Frontal => {
                let len = n1 * n2;
                self.data[index * len..(index + 1) * len].copy_from_slice(&slice.data);
            }
        }
        Ok(())
    }

    pub fn horizontal_slice(&self, i: usize) -> Result<Tensor3> {
        self.slice(SliceKind::Horizontal, i)
    }

    pub fn lateral_slice(&self, j: usize) -> Result<Tensor3> {
        self.slice(SliceKind::Lateral, j)
    }

    pub fn frontal_slice(&self, k: usize) -> Result<Tensor3> {
        self.slice(SliceKind::Frontal, k)
    }

    /// `alpha * self + other`.
    pub fn axpy(&self, alpha: f64, other: &Tensor3) -> Result<Tensor3> {
        let mut out = other.clone();
        out.add_scaled(alpha, self)?;
        Ok(out)
    }

    /// `self += alpha * other`.
    pub fn add_scaled(&mut self, alpha: f64, other: &Tensor3) -> Result<()> {
        self.check_same_dims(other, "add_scaled")?;
        for (s, o) in self.data.iter_mut().zip(&other.data) {
            *s += alpha * o;
        }
        Ok(())
    }

    pub fn sub(&self, other: &Tensor3) -> Result<Tensor3> {
        self.check_same_dims(other, "sub")?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Tensor3 {
            dims: self.dims,
            data,
        })
    }

    pub fn add(&self, other: &Tensor3) -> Result<Tensor3> {
        self.check_same_dims(other, "add")?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Tensor3 {
            dims: self.dims,
            data,
        })
    }

    pub fn scale(&self, alpha: f64) -> Tensor3 {
        self.map(|v| alpha * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Tensor3 {
        Tensor3 {
            dims: self.dims,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `‖self - other‖_F` without allocating.
    pub fn distance(&self, other: &Tensor3) -> Result<f64> {
        self.check_same_dims(other, "distance")?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

// out_c += alpha * sum_m A_{(c - m) mod n3} B_m, m ascending. Dims are
// checked by the callers.
fn tprod_accumulate(a: &Tensor3, b: &Tensor3, alpha: f64, out: &mut Tensor3) {
    let Dims3 { n1, n2, n3 } = a.dims;
    let k = b.dims.n2;
    let out_len = n1 * k;
    for c in 0..n3 {
        let dst = &mut out.data[c * out_len..(c + 1) * out_len];
        for m in 0..n3 {
            let lhs = a.frontal((c + n3 - m) % n3);
            let rhs = b.frontal(m);
            gemm_acc(alpha, lhs, rhs, dst, n1, n2, k);
        }
    }
}

// dst (n1 x k) += alpha * lhs (n1 x n2) * rhs (n2 x k), all column-major.
#[inline]
fn gemm_acc(alpha: f64, lhs: &[f64], rhs: &[f64], dst: &mut [f64], n1: usize, n2: usize, k: usize) {
    if n1 == 1 {
        // row vector times matrix: one dot product per output entry
        for (l, d) in dst.iter_mut().enumerate().take(k) {
            let col = &rhs[n2 * l..n2 * (l + 1)];
            let dot: f64 = lhs.iter().zip(col).map(|(a, b)| a * b).sum();
            *d += alpha * dot;
        }
        return;
    }
    for l in 0..k {
        let col = &mut dst[l * n1..(l + 1) * n1];
        for j in 0..n2 {
            let s = alpha * rhs[j + n2 * l];
            if s == 0.0 {
                continue;
            }
            let a_col = &lhs[j * n1..(j + 1) * n1];
            for (d, a) in col.iter_mut().zip(a_col) {
                *d += a * s;
            }
        }
    }
}
