//! Strongly convex objectives and the convex-analysis quantities the
//! regularized Kaczmarz iterations need: the conjugate `f*`, its gradient
//! `∇f*`, and Bregman distances.
//!
//! Two objectives are provided, both 1-strongly convex:
//!
//! * [`Objective::Frobenius`], `f(X) = ½‖X‖_F²`, for which `f* = f` and `∇f*`
//!   is the identity. This turns the regularized methods into plain tensor
//!   (extended) Kaczmarz.
//! * [`Objective::ElasticNet`], `f(X) = ½‖X‖_F² + λ‖X‖_1`, with
//!   `∇f* = S_λ` (soft shrinkage) and `f*(Y) = ½‖S_λ(Y)‖_F²`.

use std::fmt;

use crate::error::{Error, Result};
use crate::spectral::{self, RankTolerance};
use crate::tensor::Tensor3;

/// Componentwise soft shrinkage `sgn(x) max(|x| - λ, 0)`, the proximal map of
/// `λ‖·‖_1`.
pub fn soft_shrinkage(x: &Tensor3, lambda: f64) -> Result<Tensor3> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "shrinkage threshold must be nonnegative, got {lambda}"
        )));
    }
    Ok(x.map(|v| shrink(v, lambda)))
}

#[inline]
pub(crate) fn shrink(v: f64, lambda: f64) -> f64 {
    let m = v.abs() - lambda;
    if m > 0.0 {
        m.copysign(v)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Objective {
    /// `½‖X‖_F²`
    Frobenius,
    /// `½‖X‖_F² + λ‖X‖_1`
    ElasticNet { lambda: f64 },
}

impl Objective {
    pub fn frobenius() -> Self {
        Objective::Frobenius
    }

    pub fn elastic_net(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "elastic-net lambda must be positive, got {lambda}"
            )));
        }
        Ok(Objective::ElasticNet { lambda })
    }

    /// Strong-convexity modulus.
    pub fn gamma(&self) -> f64 {
        1.0
    }

    pub fn eval_f(&self, x: &Tensor3) -> f64 {
        match *self {
            Objective::Frobenius => 0.5 * x.frobenius_norm_sq(),
            Objective::ElasticNet { lambda } => 0.5 * x.frobenius_norm_sq() + lambda * x.one_norm(),
        }
    }

    /// The convex conjugate `f*(Y) = sup_X ⟨Y, X⟩ - f(X)`.
    pub fn eval_conjugate(&self, y: &Tensor3) -> f64 {
        match *self {
            Objective::Frobenius => 0.5 * y.frobenius_norm_sq(),
            Objective::ElasticNet { lambda } => {
                0.5 * y
                    .as_slice()
                    .iter()
                    .map(|&v| {
                        let s = shrink(v, lambda);
                        s * s
                    })
                    .sum::<f64>()
            }
        }
    }

    /// `∇f*(Y)`, the unique `X` with `Y ∈ ∂f(X)`.
    pub fn grad_conjugate(&self, y: &Tensor3) -> Tensor3 {
        match *self {
            Objective::Frobenius => y.clone(),
            Objective::ElasticNet { lambda } => y.map(|v| shrink(v, lambda)),
        }
    }

    /// In-place `x = ∇f*(y)`; avoids an allocation per solver step.
    pub(crate) fn grad_conjugate_into(&self, y: &Tensor3, x: &mut Tensor3) {
        match *self {
            Objective::Frobenius => x.as_mut_slice().copy_from_slice(y.as_slice()),
            Objective::ElasticNet { lambda } => {
                for (xv, &yv) in x.as_mut_slice().iter_mut().zip(y.as_slice()) {
                    *xv = shrink(yv, lambda);
                }
            }
        }
    }

    pub fn is_frobenius(&self) -> bool {
        matches!(self, Objective::Frobenius)
    }

    pub fn is_elastic_net(&self) -> bool {
        matches!(self, Objective::ElasticNet { .. })
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Objective::Frobenius => f.write_str("frobenius"),
            Objective::ElasticNet { lambda } => write!(f, "elastic_net(lambda={lambda})"),
        }
    }
}

/// A primal point together with a subgradient certificate `z ∈ ∂f(x)`.
///
/// Only built from a dual point as `(∇f*(y), y)`, which certifies membership.
#[derive(Debug, Clone, PartialEq)]
pub struct BregmanPair {
    x: Tensor3,
    z: Tensor3,
}

impl BregmanPair {
    pub fn from_dual(obj: &Objective, y: &Tensor3) -> Self {
        Self {
            x: obj.grad_conjugate(y),
            z: y.clone(),
        }
    }

    pub fn x(&self) -> &Tensor3 {
        &self.x
    }

    pub fn z(&self) -> &Tensor3 {
        &self.z
    }
}

/// `D_{f,z}(x, target) = f(target) + f*(z) - ⟨z, target⟩`.
pub fn bregman_distance(obj: &Objective, pair: &BregmanPair, target: &Tensor3) -> Result<f64> {
    bregman_from_dual(obj, &pair.z, target)
}

pub(crate) fn bregman_from_dual(obj: &Objective, z: &Tensor3, target: &Tensor3) -> Result<f64> {
    let cross = z.inner(target)?;
    Ok(obj.eval_f(target) + obj.eval_conjugate(z) - cross)
}

/// `ν = 2 σ_min²(bcirc(A))`, the error-bound constant of the least-squares
/// objective. There is no closed form for the elastic net.
pub fn nu_least_squares(a: &Tensor3, tol: RankTolerance) -> Result<f64> {
    let s = spectral::sigma_min_nonzero(a, tol)?;
    Ok(2.0 * s * s)
}
