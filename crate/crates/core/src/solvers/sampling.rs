use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;
use crate::tensor::{SliceKind, Tensor3};

/// Sampling distribution over slices, proportional to their squared Frobenius
/// norms. Draws use the inverse CDF of one uniform.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingDist {
    weights: Vec<f64>,
    cumulative: Vec<f64>,
    total: f64,
}

impl SamplingDist {
    pub fn from_weights(weights: Vec<f64>, kind: SliceKind) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidParameter(
                "empty sampling distribution".into(),
            ));
        }
        if let Some(index) = weights.iter().position(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::ZeroSlice { kind, index });
        }
        let mut acc = 0.0;
        let cumulative: Vec<f64> = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Ok(Self {
            weights,
            total: acc,
            cumulative,
        })
    }

    /// Horizontal slices of `a`.
    pub fn rows(a: &Tensor3) -> Result<Self> {
        Self::for_slices(a, SliceKind::Horizontal)
    }

    /// Lateral slices of `a`.
    pub fn cols(a: &Tensor3) -> Result<Self> {
        Self::for_slices(a, SliceKind::Lateral)
    }

    fn for_slices(a: &Tensor3, kind: SliceKind) -> Result<Self> {
        let d = a.dims();
        let mut weights = match kind {
            SliceKind::Horizontal => vec![0.0; d.n1],
            _ => vec![0.0; d.n2],
        };
        for k in 0..d.n3 {
            for j in 0..d.n2 {
                for i in 0..d.n1 {
                    let v = a.get(i, j, k);
                    let slot = if kind == SliceKind::Horizontal { i } else { j };
                    weights[slot] += v * v;
                }
            }
        }
        Self::from_weights(weights, kind)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn cumulative(&self) -> &[f64] {
        &self.cumulative
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// The index selected by a uniform `u ∈ [0, 1)`: the first slot whose
    /// cumulative weight exceeds `u · total`.
    pub fn index_for(&self, u: f64) -> usize {
        let target = u * self.total;
        let idx = self.cumulative.partition_point(|&c| c <= target);
        idx.min(self.cumulative.len() - 1)
    }

    /// Draws one index, consuming exactly one uniform.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.index_for(rng::uniform(rng))
    }
}
