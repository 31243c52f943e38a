//! Deterministic synthetic sequences.
//!
//! Every object gets a rest shape built along the profile's traversal tree
//! (each point sits a random bone offset away from its parent) and an anchor
//! position. The kinds differ in how objects move:
//!
//! * `static`: nothing moves.
//! * `constant_velocity`: every point moves by its own fixed velocity each
//!   frame. With [`SynthParams::velocity`] set, all points share it.
//! * `random_walk`: each frame, an object-wide Gaussian step plus a smaller
//!   per-point Gaussian step.
//! * `articulated`: the body translates with a slowly wandering velocity
//!   while each point swings sinusoidally relative to its parent, so swings
//!   propagate down the tree.
//!
//! Occlusion flips each point's visibility with a two-state Markov chain.
//! Churn gives objects random lifetimes with gaps, spreads track ids out and
//! leaves holes in the frame index sequence.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::BenchError;
use crate::model::{traversal_order, Frame, IncidenceProfile, ObjectInstance, Point, Sequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SynthKind {
    Static,
    ConstantVelocity,
    RandomWalk,
    Articulated,
}

impl SynthKind {
    pub const ALL: [SynthKind; 4] = [
        Self::Static,
        Self::ConstantVelocity,
        Self::RandomWalk,
        Self::Articulated,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Static => "static",
            Self::ConstantVelocity => "constant_velocity",
            Self::RandomWalk => "random_walk",
            Self::Articulated => "articulated",
        }
    }
}

impl fmt::Display for SynthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SynthKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| BenchError::Params(format!("unknown synthetic kind '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthParams {
    pub kind: SynthKind,
    pub profile: IncidenceProfile,
    pub objects: usize,
    pub frames: usize,
    /// Gaussian step size in grid units (random walk, articulated).
    pub step_std: f64,
    /// Shared per-frame displacement for `constant_velocity`.
    pub velocity: Option<Vec<i32>>,
    /// Per-frame probability that a visible point becomes hidden.
    pub occlusion: f64,
    pub churn: bool,
    pub seed: u64,
}

impl SynthParams {
    pub fn new(kind: SynthKind, profile: IncidenceProfile, seed: u64) -> Self {
        Self {
            kind,
            profile,
            objects: 3,
            frames: 30,
            step_std: 2.0,
            velocity: None,
            occlusion: 0.0,
            churn: false,
            seed,
        }
    }

    fn check(&self) -> Result<(), BenchError> {
        let bad = |m: &str| Err(BenchError::Params(m.to_string()));
        self.profile
            .validate()
            .map_err(|e| BenchError::Params(e.to_string()))?;
        if !(self.step_std.is_finite() && self.step_std >= 0.0) {
            return bad("step_std must be a finite non-negative number");
        }
        if !(0.0..=1.0).contains(&self.occlusion) {
            return bad("occlusion must lie in [0, 1]");
        }
        if self.objects > 10_000 || self.frames > 100_000 {
            return bad("at most 10000 objects and 100000 frames");
        }
        if let Some(v) = &self.velocity {
            if v.len() != self.profile.d {
                return bad("velocity dimension differs from the profile");
            }
            if v.iter().any(|c| c.unsigned_abs() > 1000) {
                return bad("velocity components must lie in [-1000, 1000]");
            }
        }
        Ok(())
    }
}

/// Probability that a hidden point reappears in the next frame.
const REAPPEAR: f64 = 0.5;
/// Largest anchor coordinate magnitude.
const FIELD: i64 = 2000;
/// Largest bone offset component.
const BONE: i64 = 40;

struct Track {
    id: u32,
    /// Per frame: alive or not.
    alive: Vec<bool>,
    positions: Vec<Vec<Vec<i64>>>,
}

pub fn synth_generate(params: &SynthParams) -> Result<Sequence, BenchError> {
    params.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let (n, t_max) = (params.profile.n, params.frames);
    let order = traversal_order(&params.profile);

    let mut next_id: u32 = if params.churn {
        rng.random_range(0..5)
    } else {
        0
    };
    let mut tracks = Vec::with_capacity(params.objects);
    for _ in 0..params.objects {
        let id = next_id;
        next_id += 1 + if params.churn {
            rng.random_range(0..4)
        } else {
            0
        };
        let alive = lifetime(&mut rng, t_max, params.churn);
        let positions = trajectory(&mut rng, params, &order);
        tracks.push(Track {
            id,
            alive,
            positions,
        });
    }

    // visibility chains run over every frame so they stay independent of churn
    let mut visible = vec![vec![true; n]; tracks.len()];
    let mut frame_index: u32 = 0;
    let mut frames = Vec::with_capacity(t_max);
    for t in 0..t_max {
        let mut objects = Vec::new();
        for (k, track) in tracks.iter().enumerate() {
            if t > 0 && params.occlusion > 0.0 {
                for v in visible[k].iter_mut() {
                    let flip = if *v { params.occlusion } else { REAPPEAR };
                    if rng.random_bool(flip) {
                        *v = !*v;
                    }
                }
            }
            if !track.alive[t] {
                continue;
            }
            let points = (0..n)
                .map(|i| visible[k][i].then(|| to_point(&track.positions[t][i])))
                .collect();
            objects.push(ObjectInstance::new(track.id, points));
        }
        frames.push(Frame::new(frame_index, objects));
        frame_index += 1 + if params.churn && rng.random_bool(0.2) {
            rng.random_range(1..3)
        } else {
            0
        };
    }
    let seq = Sequence::new(params.profile.clone(), frames);
    seq.validate()
        .map_err(|e| BenchError::Params(e.to_string()))?;
    Ok(seq)
}

fn to_point(p: &[i64]) -> Point {
    Point::new(
        p.iter()
            .map(|&c| c.clamp(i32::MIN as i64, i32::MAX as i64) as i32)
            .collect(),
    )
}

fn lifetime(rng: &mut ChaCha8Rng, t_max: usize, churn: bool) -> Vec<bool> {
    if !churn || t_max == 0 {
        return vec![true; t_max];
    }
    let start = rng.random_range(0..=t_max / 2);
    let end = rng.random_range(start + 1..=t_max);
    let mut alive: Vec<bool> = (0..t_max).map(|t| (start..end).contains(&t)).collect();
    if end - start > 4 && rng.random_bool(0.5) {
        let gap = rng.random_range(start + 1..end - 1);
        let len = rng.random_range(1..=3.min(end - 1 - gap));
        alive[gap..gap + len].fill(false);
    }
    alive
}

fn uniform_vec(rng: &mut ChaCha8Rng, d: usize, limit: i64) -> Vec<i64> {
    (0..d).map(|_| rng.random_range(-limit..=limit)).collect()
}

fn gaussian_vec(rng: &mut ChaCha8Rng, d: usize, std: f64) -> Vec<i64> {
    if std == 0.0 {
        return vec![0; d];
    }
    let normal = Normal::new(0.0, std).expect("finite non-negative std");
    (0..d).map(|_| normal.sample(rng).round() as i64).collect()
}

fn add(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Positions of every point of one object over all frames.
fn trajectory(
    rng: &mut ChaCha8Rng,
    params: &SynthParams,
    order: &[(usize, Option<usize>)],
) -> Vec<Vec<Vec<i64>>> {
    let (n, d, t_max) = (params.profile.n, params.profile.d, params.frames);
    let anchor = uniform_vec(rng, d, FIELD);
    let mut rest = vec![vec![0i64; d]; n];
    for &(i, parent) in order {
        let base = parent.map_or_else(|| anchor.clone(), |p| rest[p].clone());
        rest[i] = add(&base, &uniform_vec(rng, d, BONE));
    }
    let mut out = Vec::with_capacity(t_max);
    match params.kind {
        SynthKind::Static => out.resize(t_max, rest),
        SynthKind::ConstantVelocity => {
            let velocity: Vec<Vec<i64>> = match &params.velocity {
                Some(v) => vec![v.iter().map(|&c| c as i64).collect(); n],
                None => {
                    let body = uniform_vec(rng, d, 5);
                    (0..n)
                        .map(|_| add(&body, &uniform_vec(rng, d, 2)))
                        .collect()
                }
            };
            for t in 0..t_max as i64 {
                out.push(
                    rest.iter()
                        .zip(&velocity)
                        .map(|(p, v)| p.iter().zip(v).map(|(a, b)| a + b * t).collect())
                        .collect(),
                );
            }
        }
        SynthKind::RandomWalk => {
            let mut now = rest;
            for t in 0..t_max {
                if t > 0 {
                    let drift = gaussian_vec(rng, d, params.step_std);
                    for p in now.iter_mut() {
                        *p = add(
                            p,
                            &add(&drift, &gaussian_vec(rng, d, params.step_std / 2.0)),
                        );
                    }
                }
                out.push(now.clone());
            }
        }
        SynthKind::Articulated => {
            let swing: Vec<(f64, f64, f64)> = (0..n)
                .map(|_| {
                    let amplitude = rng.random_range(0.0..2.0 * params.step_std.max(0.5));
                    let omega = rng.random_range(0.05..0.3);
                    let phase = rng.random_range(0.0..std::f64::consts::TAU);
                    (amplitude, omega, phase)
                })
                .collect();
            let mut velocity: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
            let mut body = vec![0f64; d];
            let wobble = Normal::new(0.0, params.step_std / 4.0).expect("finite non-negative std");
            for t in 0..t_max {
                if t > 0 {
                    for (b, v) in body.iter_mut().zip(velocity.iter_mut()) {
                        *v += wobble.sample(rng);
                        *b += *v;
                    }
                }
                let mut offset = vec![vec![0f64; d]; n];
                for &(i, parent) in order {
                    let (a, w, phi) = swing[i];
                    let base = parent.map_or_else(|| vec![0f64; d], |p| offset[p].clone());
                    offset[i] = base
                        .iter()
                        .enumerate()
                        .map(|(j, o)| o + a * (w * t as f64 + phi + j as f64).sin())
                        .collect();
                }
                out.push(
                    (0..n)
                        .map(|i| {
                            (0..d)
                                .map(|j| rest[i][j] + (body[j] + offset[i][j]).round() as i64)
                                .collect()
                        })
                        .collect(),
                );
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BuiltinProfile;
    use crate::model::ProfileTopology;
    use crate::predict::{trajectory_predict, PredictionContext};

    fn params(kind: SynthKind, profile: BuiltinProfile, seed: u64) -> SynthParams {
        SynthParams::new(kind, profile.profile(), seed)
    }

    #[test]
    fn static_frames_are_equal() {
        let mut p = params(SynthKind::Static, BuiltinProfile::Skeleton15, 1);
        p.frames = 5;
        let seq = synth_generate(&p).unwrap();
        assert_eq!(seq.frames.len(), 5);
        for f in &seq.frames[1..] {
            assert_eq!(f.objects, seq.frames[0].objects);
        }
    }

    #[test]
    fn constant_velocity_has_zero_trajectory_residuals() {
        let mut p = params(SynthKind::ConstantVelocity, BuiltinProfile::Bbox2d, 3);
        p.velocity = Some(vec![4, 2]);
        let seq = synth_generate(&p).unwrap();
        let topo = ProfileTopology::new(&seq.profile).unwrap();
        for t in 2..seq.frames.len() {
            for (k, obj) in seq.frames[t].objects.iter().enumerate() {
                let ctx = PredictionContext {
                    current: &obj.points,
                    prev1: Some(&seq.frames[t - 1].objects[k].points),
                    prev2: Some(&seq.frames[t - 2].objects[k].points),
                    parents: &topo.parents,
                    motion: None,
                };
                for i in 0..2 {
                    let pred = trajectory_predict(&ctx, i).unwrap();
                    let actual: Vec<i64> = obj
                        .point(i)
                        .unwrap()
                        .coords
                        .iter()
                        .map(|&c| c as i64)
                        .collect();
                    assert_eq!(pred, actual);
                }
                let before = seq.frames[t - 1].objects[k].point(0).unwrap();
                assert_eq!(obj.point(0).unwrap().coords[0] - before.coords[0], 4);
            }
        }
    }

    #[test]
    fn random_walk_skeletons_are_valid() {
        let mut p = params(SynthKind::RandomWalk, BuiltinProfile::Skeleton15, 9);
        p.frames = 50;
        p.step_std = 2.0;
        let seq = synth_generate(&p).unwrap();
        seq.validate().unwrap();
        assert_eq!(seq.frames.len(), 50);
        assert!(seq.frames.iter().all(|f| f.objects.len() == 3));
    }

    #[test]
    fn deterministic_per_seed() {
        for kind in SynthKind::ALL {
            let mut p = params(kind, BuiltinProfile::Face68, 5);
            p.occlusion = 0.1;
            p.churn = true;
            let a = synth_generate(&p).unwrap();
            assert_eq!(a, synth_generate(&p).unwrap());
            p.seed = 6;
            if kind != SynthKind::Static {
                assert_ne!(a, synth_generate(&p).unwrap());
            }
        }
    }

    #[test]
    fn churn_and_occlusion_show_up() {
        let mut p = params(SynthKind::Articulated, BuiltinProfile::Skeleton15, 11);
        p.objects = 8;
        p.frames = 40;
        p.occlusion = 0.2;
        p.churn = true;
        let seq = synth_generate(&p).unwrap();
        let hidden = seq
            .frames
            .iter()
            .flat_map(|f| &f.objects)
            .any(|o| o.visible_count() < 15);
        let counts: Vec<usize> = seq.frames.iter().map(|f| f.objects.len()).collect();
        let gaps = seq.frames.windows(2).any(|w| w[1].index > w[0].index + 1);
        assert!(hidden);
        assert!(counts.iter().min() < counts.iter().max());
        assert!(gaps);
    }

    #[test]
    fn rejects_bad_params() {
        let mut p = params(SynthKind::RandomWalk, BuiltinProfile::Bbox2d, 0);
        p.step_std = -1.0;
        assert!(synth_generate(&p).is_err());
        let mut p = params(SynthKind::ConstantVelocity, BuiltinProfile::Bbox2d, 0);
        p.velocity = Some(vec![1, 2, 3]);
        assert!(synth_generate(&p).is_err());
        assert!("wobbly".parse::<SynthKind>().is_err());
        assert_eq!(
            "random_walk".parse::<SynthKind>().unwrap(),
            SynthKind::RandomWalk
        );
    }
}
