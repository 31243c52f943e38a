//! Decoder-side mode estimation by weighted voting.
//!
//! No mode flag is transmitted. For point `i` the coder looks at up to three
//! reference points that are already reconstructed on both sides: the same
//! point one and two frames back, and `i`'s spatial parent in the current
//! frame. For each candidate mode it asks what each reference would have cost
//! under that mode and picks the mode with the lowest weighted average.

use std::cmp::Ordering;

use thiserror::Error;

use crate::bitio::se_len_unbounded;
use crate::predict::{residual, Mode, PredictionContext};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeWeights {
    pub prev1: u8,
    pub prev2: u8,
    pub spatial: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("mode weights must be positive, got {prev1},{prev2},{spatial}")]
pub struct WeightError {
    pub prev1: u8,
    pub prev2: u8,
    pub spatial: u8,
}

impl ModeWeights {
    pub fn new(prev1: u8, prev2: u8, spatial: u8) -> Result<Self, WeightError> {
        if prev1 == 0 || prev2 == 0 || spatial == 0 {
            return Err(WeightError {
                prev1,
                prev2,
                spatial,
            });
        }
        Ok(Self {
            prev1,
            prev2,
            spatial,
        })
    }
}

impl Default for ModeWeights {
    fn default() -> Self {
        Self {
            prev1: 2,
            prev2: 1,
            spatial: 2,
        }
    }
}

/// Accumulated weighted bit-length of one candidate mode.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ModeScore {
    pub weighted_bits: u64,
    pub weight: u64,
}

impl ModeScore {
    pub fn add(&mut self, weight: u8, bits: u64) {
        self.weighted_bits += weight as u64 * bits;
        self.weight += weight as u64;
    }

    pub fn mean(&self) -> f64 {
        self.weighted_bits as f64 / self.weight as f64
    }

    /// Compares the normalized scores exactly.
    pub fn cmp_mean(&self, other: &Self) -> Ordering {
        (self.weighted_bits as u128 * other.weight as u128)
            .cmp(&(other.weighted_bits as u128 * self.weight as u128))
    }
}

/// Contexts of one object seen from frames `t`, `t-1` and `t-2`.
///
/// `back1`/`back2` are the contexts the object had when its frame `t-1`
/// (resp. `t-2`) was coded, with every point of that frame reconstructed.
#[derive(Debug, Clone, Copy)]
pub struct VoteContext<'a> {
    pub now: PredictionContext<'a>,
    pub back1: Option<PredictionContext<'a>>,
    pub back2: Option<PredictionContext<'a>>,
}

/// Modes point `i` may be coded with, in tie-break priority order.
pub fn candidate_modes(ctx: &PredictionContext, i: usize) -> Vec<Mode> {
    if !ctx.is_available(Mode::Temporal, i) {
        return vec![Mode::Independent];
    }
    [Mode::Temporal, Mode::SpatialTemporal, Mode::Trajectory]
        .into_iter()
        .filter(|&m| ctx.is_available(m, i))
        .collect()
}

/// Bits point `n` would have cost under `mode`, given `n`'s own context;
/// `None` when the mode's preconditions do not hold for `n`.
pub fn reference_bitlength(ctx: &PredictionContext, n: usize, mode: Mode) -> Option<u64> {
    let point = ctx.decoded(n)?;
    if !ctx.is_available(mode, n) {
        return None;
    }
    let r = residual(mode, ctx, n, point).ok()?;
    Some(r.iter().map(|&v| se_len_unbounded(v)).sum())
}

/// Score of every non-independent candidate; `None` when no reference point
/// is available for that mode.
pub fn mode_scores(
    votes: &VoteContext,
    i: usize,
    weights: ModeWeights,
) -> Vec<(Mode, Option<ModeScore>)> {
    let spatial = votes.now.parents.get(i).copied().flatten();
    candidate_modes(&votes.now, i)
        .into_iter()
        .filter(|&m| m != Mode::Independent)
        .map(|m| {
            let mut score = ModeScore::default();
            let refs = [
                (votes.back1.as_ref(), Some(i), weights.prev1),
                (votes.back2.as_ref(), Some(i), weights.prev2),
                (Some(&votes.now), spatial, weights.spatial),
            ];
            for (ctx, n, w) in refs {
                if let (Some(ctx), Some(n)) = (ctx, n) {
                    if let Some(bits) = reference_bitlength(ctx, n, m) {
                        score.add(w, bits);
                    }
                }
            }
            (m, (score.weight > 0).then_some(score))
        })
        .collect()
}

/// Weighted-vote mode for point `i`. Ties, and the case where no candidate
/// has any reference, go to the earliest of Temporal, SpatialTemporal,
/// Trajectory.
pub fn select_mode(votes: &VoteContext, i: usize, weights: ModeWeights) -> Mode {
    let candidates = candidate_modes(&votes.now, i);
    if candidates == [Mode::Independent] {
        return Mode::Independent;
    }
    let mut best: Option<(Mode, ModeScore)> = None;
    for (m, score) in mode_scores(votes, i, weights) {
        let Some(score) = score else { continue };
        match best {
            Some((_, b)) if score.cmp_mean(&b) != Ordering::Less => {}
            _ => best = Some((m, score)),
        }
    }
    best.map(|(m, _)| m).unwrap_or(candidates[0])
}
