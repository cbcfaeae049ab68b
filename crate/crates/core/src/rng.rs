//! Random streams.
//!
//! All randomness comes from ChaCha8 seeded with a 64-bit seed. Independent
//! trials and purposes use distinct ChaCha stream numbers under the same seed,
//! so any trial can be replayed on its own. Uniforms are `[0, 1)` doubles with
//! 53 random bits; Gaussians use the Box–Muller transform over those uniforms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::tensor::{Dims3, Tensor3};

pub type StreamRng = ChaCha8Rng;

/// Stream numbers below this are reserved for instance generation (one per
/// regeneration attempt).
pub const SOLVER_STREAM_BASE: u64 = 0x1000;

/// The generator for `stream` under `seed`.
pub fn substream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream number for `purpose` within `trial`.
pub fn trial_stream(trial: u64, purpose: u64) -> u64 {
    (trial << 16) | (purpose & 0xffff)
}

/// One uniform draw in `[0, 1)`.
#[inline]
pub fn uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>()
}

/// Standard normal sampler; Box–Muller produces values in pairs and the second
/// one is cached.
#[derive(Debug, Default, Clone)]
pub struct Gaussian {
    spare: Option<f64>,
}

impl Gaussian {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        if let Some(v) = self.spare.take() {
            return v;
        }
        // 1 - u lies in (0, 1], so the log is finite
        let u1 = 1.0 - uniform(rng);
        let u2 = uniform(rng);
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * std::f64::consts::PI * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }
}

/// A tensor of independent standard normals, filled in storage order.
pub fn randn<R: Rng + ?Sized>(dims: Dims3, rng: &mut R) -> Tensor3 {
    let mut g = Gaussian::new();
    let data = (0..dims.len()).map(|_| g.sample(rng)).collect();
    Tensor3::from_vec(dims, data).expect("length matches dims")
}
