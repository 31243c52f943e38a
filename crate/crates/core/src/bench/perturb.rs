//! Perturbations applied to a sequence before encoding.
//!
//! Noise is reproducible across platforms: a ChaCha8 generator seeded with
//! `ChaCha8Rng::seed_from_u64(seed)` feeds `rand_distr`'s ziggurat standard
//! normal sampler. Samples are drawn for visible coordinates only, in order
//! of frame, object, point index and axis; each coordinate becomes
//! `c + round(sigma * z)` with ties rounded away from zero.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::model::{Frame, Sequence};

/// Keeps frames at positions `0, s+1, 2(s+1), ...` and renumbers them
/// `0, 1, 2, ...`.
pub fn frame_skip(seq: &Sequence, s: usize) -> Sequence {
    if s == 0 {
        return seq.clone();
    }
    let frames = seq
        .frames
        .iter()
        .step_by(s + 1)
        .enumerate()
        .map(|(k, f)| Frame::new(k as u32, f.objects.clone()))
        .collect();
    Sequence::new(seq.profile.clone(), frames)
}

/// Adds rounded zero-mean Gaussian noise of standard deviation `sigma` to
/// every visible coordinate. Results are clamped to the `i32` range.
pub fn add_gaussian_noise(seq: &Sequence, sigma: f64, seed: u64) -> Sequence {
    let mut out = seq.clone();
    if sigma == 0.0 {
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for c in out
        .frames
        .iter_mut()
        .flat_map(|f| &mut f.objects)
        .flat_map(|o| &mut o.points)
        .flatten()
        .flat_map(|p| &mut p.coords)
    {
        let z: f64 = StandardNormal.sample(&mut rng);
        let noisy = *c as f64 + (sigma * z).round();
        *c = noisy.clamp(i32::MIN as f64, i32::MAX as f64) as i32;
    }
    out
}
