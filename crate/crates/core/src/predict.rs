//! Prediction modes.
//!
//! Every mode produces an integer prediction for key point `i` of an object
//! in frame `t`; the coded residual is the actual position minus that
//! prediction, and the decoder adds it back. Predictions only read points that
//! are already reconstructed: the object's points in frames `t-1` and `t-2`,
//! and the points of frame `t` that precede `i` in coding order.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Point, ProfileTopology};

/// Integer vector that may exceed the `i32` coordinate range.
pub type Residual = Vec<i64>;

/// Prediction mode of one coded point. The discriminant is the tag used in
/// logs and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Independent = 0,
    Temporal = 1,
    SpatialTemporal = 2,
    Trajectory = 3,
}

impl Mode {
    pub const ALL: [Mode; 4] = [
        Mode::Independent,
        Mode::Temporal,
        Mode::SpatialTemporal,
        Mode::Trajectory,
    ];

    pub fn tag(self) -> u8 {
        self as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            Mode::Independent => "independent",
            Mode::Temporal => "temporal",
            Mode::SpatialTemporal => "spatial_temporal",
            Mode::Trajectory => "trajectory",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == name)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PredictError {
    #[error("{mode} prediction unavailable for point {point}")]
    ModeUnavailable { mode: Mode, point: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("reconstructed point {point} leaves the 32-bit coordinate range")]
    Overflow { point: usize },
}

/// Everything a mode may look at when predicting one object in one frame.
#[derive(Debug, Clone, Copy)]
pub struct PredictionContext<'a> {
    /// Frame `t`; only points already coded are `Some`.
    pub current: &'a [Option<Point>],
    /// The same object at `t-1`, if it existed.
    pub prev1: Option<&'a [Option<Point>]>,
    /// The same object at `t-2`, if it existed.
    pub prev2: Option<&'a [Option<Point>]>,
    /// BFS parent of each point.
    pub parents: &'a [Option<usize>],
    /// `MV_c` for this object and frame.
    pub motion: Option<&'a [i64]>,
}

fn at(points: Option<&[Option<Point>]>, i: usize) -> Option<&Point> {
    points.and_then(|p| p.get(i)).and_then(Option::as_ref)
}

fn widen(p: &Point) -> Vec<i64> {
    p.coords.iter().map(|&c| c as i64).collect()
}

fn add(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn sub(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

impl<'a> PredictionContext<'a> {
    pub fn decoded(&self, i: usize) -> Option<&'a Point> {
        at(Some(self.current), i)
    }

    pub fn at_prev1(&self, i: usize) -> Option<&'a Point> {
        at(self.prev1, i)
    }

    pub fn at_prev2(&self, i: usize) -> Option<&'a Point> {
        at(self.prev2, i)
    }

    /// Nearest already-decoded visible ancestor of `i` along the BFS tree.
    pub fn independent_reference(&self, i: usize) -> Option<&'a Point> {
        let mut cursor = self.parents.get(i).copied().flatten();
        while let Some(a) = cursor {
            if let Some(p) = self.decoded(a) {
                return Some(p);
            }
            cursor = self.parents.get(a).copied().flatten();
        }
        None
    }

    pub fn is_available(&self, mode: Mode, i: usize) -> bool {
        match mode {
            Mode::Independent => true,
            Mode::Temporal => self.motion.is_some() && self.at_prev1(i).is_some(),
            Mode::SpatialTemporal => {
                self.is_available(Mode::Temporal, i)
                    && self
                        .parents
                        .get(i)
                        .copied()
                        .flatten()
                        .is_some_and(|r| self.decoded(r).is_some() && self.at_prev1(r).is_some())
            }
            Mode::Trajectory => self.at_prev1(i).is_some() && self.at_prev2(i).is_some(),
        }
    }
}

/// `k_i - k_ref`, or `k_i` itself when there is no reference.
pub fn independent_residual(
    point: &Point,
    reference: Option<&Point>,
) -> Result<Residual, PredictError> {
    match reference {
        None => Ok(widen(point)),
        Some(r) if r.dim() != point.dim() => Err(PredictError::DimensionMismatch {
            expected: point.dim(),
            found: r.dim(),
        }),
        Some(r) => Ok(sub(&widen(point), &widen(r))),
    }
}

/// `MV_c = k_c^t - k_c^{t-1}`.
pub fn motion_vector(now: &Point, before: &Point) -> Vec<i64> {
    sub(&widen(now), &widen(before))
}

/// `k_i^{t-1} + MV_c`.
pub fn temporal_predict(ctx: &PredictionContext, i: usize) -> Result<Vec<i64>, PredictError> {
    match (ctx.at_prev1(i), ctx.motion) {
        (Some(prev), Some(mv)) => Ok(add(&widen(prev), mv)),
        _ => Err(PredictError::ModeUnavailable {
            mode: Mode::Temporal,
            point: i,
        }),
    }
}

pub fn temporal_residual(point: &Point, prediction: &[i64]) -> Residual {
    sub(&widen(point), prediction)
}

/// Temporal prediction of `i` shifted by the reconstructed temporal residual
/// of its spatial parent `r(i)`.
pub fn spatial_temporal_predict(
    ctx: &PredictionContext,
    i: usize,
) -> Result<Vec<i64>, PredictError> {
    if !ctx.is_available(Mode::SpatialTemporal, i) {
        return Err(PredictError::ModeUnavailable {
            mode: Mode::SpatialTemporal,
            point: i,
        });
    }
    let r = ctx.parents[i].expect("checked by availability");
    let parent_now = ctx.decoded(r).expect("checked by availability");
    let parent_residual = temporal_residual(parent_now, &temporal_predict(ctx, r)?);
    Ok(add(&temporal_predict(ctx, i)?, &parent_residual))
}

/// `r_i^T - r_{r(i)}^T`.
pub fn spatial_temporal_residual(
    ctx: &PredictionContext,
    i: usize,
    point: &Point,
) -> Result<Residual, PredictError> {
    Ok(sub(&widen(point), &spatial_temporal_predict(ctx, i)?))
}

/// Linear extrapolation `k^{t-1} + (k^{t-1} - k^{t-2})`.
pub fn trajectory_predict(ctx: &PredictionContext, i: usize) -> Result<Vec<i64>, PredictError> {
    match (ctx.at_prev1(i), ctx.at_prev2(i)) {
        (Some(p1), Some(p2)) => {
            let p1 = widen(p1);
            Ok(add(&p1, &sub(&p1, &widen(p2))))
        }
        _ => Err(PredictError::ModeUnavailable {
            mode: Mode::Trajectory,
            point: i,
        }),
    }
}

/// Prediction of point `i` under `mode`. Independent mode predicts the
/// reference point, or the origin when there is none.
pub fn predict(
    mode: Mode,
    ctx: &PredictionContext,
    i: usize,
    d: usize,
) -> Result<Vec<i64>, PredictError> {
    match mode {
        Mode::Independent => Ok(ctx
            .independent_reference(i)
            .map(widen)
            .unwrap_or_else(|| vec![0; d])),
        Mode::Temporal => temporal_predict(ctx, i),
        Mode::SpatialTemporal => spatial_temporal_predict(ctx, i),
        Mode::Trajectory => trajectory_predict(ctx, i),
    }
}

pub fn residual(
    mode: Mode,
    ctx: &PredictionContext,
    i: usize,
    point: &Point,
) -> Result<Residual, PredictError> {
    let prediction = predict(mode, ctx, i, point.dim())?;
    if prediction.len() != point.dim() {
        return Err(PredictError::DimensionMismatch {
            expected: point.dim(),
            found: prediction.len(),
        });
    }
    Ok(sub(&widen(point), &prediction))
}

/// Inverse of [`residual`].
pub fn reconstruct(
    mode: Mode,
    residual: &[i64],
    ctx: &PredictionContext,
    i: usize,
) -> Result<Point, PredictError> {
    let prediction = predict(mode, ctx, i, residual.len())?;
    if prediction.len() != residual.len() {
        return Err(PredictError::DimensionMismatch {
            expected: residual.len(),
            found: prediction.len(),
        });
    }
    prediction
        .iter()
        .zip(residual)
        .map(|(p, r)| i32::try_from(p + r).map_err(|_| PredictError::Overflow { point: i }))
        .collect::<Result<Vec<_>, _>>()
        .map(Point::new)
}

/// Point that carries `MV_c` for an object, given which points are visible
/// now and in the previous frame.
///
/// The profile's central point is used when visible in both frames; otherwise
/// the visible-in-both point of largest out-degree (lowest index on ties).
/// `None` means the object has to be coded without temporal reference.
pub fn frame_center(
    topo: &ProfileTopology,
    visible_now: &[bool],
    visible_before: &[bool],
) -> Option<usize> {
    let both = |i: usize| visible_now.get(i) == Some(&true) && visible_before.get(i) == Some(&true);
    if both(topo.central) {
        return Some(topo.central);
    }
    (0..topo.n)
        .filter(|&i| both(i))
        .fold(None, |best: Option<usize>, i| match best {
            Some(b) if topo.out_degree[b] >= topo.out_degree[i] => Some(b),
            _ => Some(i),
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BuiltinProfile, IncidenceProfile};
    use proptest::prelude::*;

    fn pts(v: &[[i32; 2]]) -> Vec<Option<Point>> {
        v.iter().map(|&c| Some(Point::from(c))).collect()
    }

    /// Two-point chain 0 -> 1.
    struct Fixture {
        current: Vec<Option<Point>>,
        prev1: Vec<Option<Point>>,
        prev2: Vec<Option<Point>>,
        parents: Vec<Option<usize>>,
        motion: Vec<i64>,
    }

    impl Fixture {
        fn ctx(&self) -> PredictionContext<'_> {
            PredictionContext {
                current: &self.current,
                prev1: Some(&self.prev1),
                prev2: Some(&self.prev2),
                parents: &self.parents,
                motion: Some(&self.motion),
            }
        }
    }

    #[test]
    fn independent_examples() {
        assert_eq!(
            independent_residual(&[105, 212].into(), Some(&[100, 210].into())),
            Ok(vec![5, 2])
        );
        assert_eq!(
            independent_residual(&[7, 7].into(), Some(&[7, 7].into())),
            Ok(vec![0, 0])
        );
        assert_eq!(
            independent_residual(&[40, -3].into(), None),
            Ok(vec![40, -3])
        );
        assert!(matches!(
            independent_residual(&[1, 2].into(), Some(&[1, 2, 3].into())),
            Err(PredictError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn temporal_examples() {
        let f = Fixture {
            current: vec![None, None],
            prev1: pts(&[[0, 0], [10, 20]]),
            prev2: vec![None, None],
            parents: vec![None, Some(0)],
            motion: vec![3, -1],
        };
        let p = temporal_predict(&f.ctx(), 1).unwrap();
        assert_eq!(p, vec![13, 19]);
        assert_eq!(temporal_residual(&[13, 19].into(), &p), vec![0, 0]);
        assert_eq!(temporal_residual(&[15, 18].into(), &p), vec![2, -1]);
        assert_eq!(
            reconstruct(Mode::Temporal, &[2, -1], &f.ctx(), 1),
            Ok(Point::from([15, 18]))
        );
        assert!(matches!(
            temporal_predict(
                &PredictionContext {
                    motion: None,
                    ..f.ctx()
                },
                1
            ),
            Err(PredictError::ModeUnavailable {
                mode: Mode::Temporal,
                ..
            })
        ));
    }

    #[test]
    fn center_residual_against_previous_position_is_the_motion_vector() {
        let before = Point::from([50, 60]);
        let now = Point::from([53, 59]);
        let mv = motion_vector(&now, &before);
        assert_eq!(mv, vec![3, -1]);
        assert_eq!(independent_residual(&now, Some(&before)), Ok(mv.clone()));
        let prev1 = vec![Some(before)];
        let ctx = PredictionContext {
            current: &[],
            prev1: Some(&prev1),
            prev2: None,
            parents: &[None],
            motion: Some(&mv),
        };
        assert_eq!(residual(Mode::Temporal, &ctx, 0, &now), Ok(vec![0, 0]));
    }

    #[test]
    fn spatial_temporal_examples() {
        // parent 0 has temporal residual (1,-1), child 1 has (2,-1)
        let f = Fixture {
            current: vec![Some([1 + 3, -1 - 1].into()), None],
            prev1: pts(&[[0, 0], [10, 20]]),
            prev2: vec![None, None],
            parents: vec![None, Some(0)],
            motion: vec![3, -1],
        };
        let child = Point::from([10 + 3 + 2, 20 - 1 - 1]);
        assert_eq!(
            spatial_temporal_residual(&f.ctx(), 1, &child),
            Ok(vec![1, 0])
        );
        assert_eq!(
            reconstruct(Mode::SpatialTemporal, &[1, 0], &f.ctx(), 1),
            Ok(child)
        );

        // both shifted by the same extra (1,1)
        let f = Fixture {
            current: vec![Some([3 + 1, -1 + 1].into()), None],
            ..f
        };
        let child = Point::from([10 + 3 + 1, 20 - 1 + 1]);
        assert_eq!(
            spatial_temporal_residual(&f.ctx(), 1, &child),
            Ok(vec![0, 0])
        );

        // parent not decoded yet
        let f = Fixture {
            current: vec![None, None],
            ..f
        };
        assert!(!f.ctx().is_available(Mode::SpatialTemporal, 1));
    }

    #[test]
    fn trajectory_examples() {
        let case = |p2: [i32; 2], p1: [i32; 2], now: [i32; 2]| {
            let f = Fixture {
                current: vec![None],
                prev1: pts(&[p1]),
                prev2: pts(&[p2]),
                parents: vec![None],
                motion: vec![0, 0],
            };
            let r = residual(Mode::Trajectory, &f.ctx(), 0, &now.into()).unwrap();
            assert_eq!(
                reconstruct(Mode::Trajectory, &r, &f.ctx(), 0),
                Ok(now.into())
            );
            (trajectory_predict(&f.ctx(), 0).unwrap(), r)
        };
        assert_eq!(case([0, 0], [4, 2], [8, 4]), (vec![8, 4], vec![0, 0]));
        assert_eq!(case([10, 10], [10, 10], [10, 12]).1, vec![0, 2]);
        assert_eq!(case([5, 5], [3, 6], [1, 7]).1, vec![0, 0]);

        let ctx = PredictionContext {
            current: &[],
            prev1: None,
            prev2: None,
            parents: &[None],
            motion: None,
        };
        assert!(trajectory_predict(&ctx, 0).is_err());
    }

    #[test]
    fn independent_reconstruction_uses_nearest_visible_ancestor() {
        // chain 0 -> 1 -> 2 with 1 occluded
        let current = vec![Some(Point::from([100, 210])), None, None];
        let parents = vec![None, Some(0), Some(1)];
        let ctx = PredictionContext {
            current: &current,
            prev1: None,
            prev2: None,
            parents: &parents,
            motion: None,
        };
        assert_eq!(
            reconstruct(Mode::Independent, &[5, 2], &ctx, 2),
            Ok(Point::from([105, 212]))
        );
        assert_eq!(
            reconstruct(Mode::Independent, &[40, -3], &ctx, 0),
            Ok(Point::from([40, -3]))
        );
    }

    #[test]
    fn reconstruct_rejects_coordinate_overflow() {
        let ctx = PredictionContext {
            current: &[],
            prev1: None,
            prev2: None,
            parents: &[None],
            motion: None,
        };
        assert_eq!(
            reconstruct(Mode::Independent, &[i32::MAX as i64 + 1, 0], &ctx, 0),
            Err(PredictError::Overflow { point: 0 })
        );
    }

    #[test]
    fn frame_center_fallback() {
        let topo = ProfileTopology::new(&BuiltinProfile::Skeleton15.profile()).unwrap();
        let all = vec![true; 15];
        assert_eq!(frame_center(&topo, &all, &all), Some(1));
        let mut no_neck = all.clone();
        no_neck[1] = false;
        // chest (14) has out-degree 2, the largest left
        assert_eq!(frame_center(&topo, &no_neck, &all), Some(14));
        let mut only_head = vec![false; 15];
        only_head[0] = true;
        assert_eq!(frame_center(&topo, &only_head, &only_head), Some(0));
        assert_eq!(frame_center(&topo, &only_head, &[false; 15]), None);
    }

    fn small_coord() -> impl Strategy<Value = i32> {
        -100_000i32..100_000
    }

    fn point2() -> impl Strategy<Value = Point> {
        (small_coord(), small_coord()).prop_map(|(x, y)| Point::from([x, y]))
    }

    fn star_parents(n: usize) -> Vec<Option<usize>> {
        (0..n)
            .map(|i| if i == 0 { None } else { Some(0) })
            .collect()
    }

    proptest! {
        #[test]
        fn every_mode_inverts(
            now in proptest::collection::vec(point2(), 4),
            p1 in proptest::collection::vec(point2(), 4),
            p2 in proptest::collection::vec(point2(), 4),
            decoded in 0usize..4,
        ) {
            // points before `decoded` (in index order) are already reconstructed
            let current: Vec<Option<Point>> = now
                .iter()
                .enumerate()
                .map(|(k, p)| (k < decoded.max(1)).then(|| p.clone()))
                .collect();
            let prev1: Vec<_> = p1.into_iter().map(Some).collect();
            let prev2: Vec<_> = p2.into_iter().map(Some).collect();
            let parents = star_parents(4);
            let mv = motion_vector(&now[0], prev1[0].as_ref().unwrap());
            let ctx = PredictionContext {
                current: &current,
                prev1: Some(&prev1),
                prev2: Some(&prev2),
                parents: &parents,
                motion: Some(&mv),
            };
            for (i, point) in now.iter().enumerate().skip(1) {
                for mode in Mode::ALL {
                    if !ctx.is_available(mode, i) {
                        continue;
                    }
                    let r = residual(mode, &ctx, i, point).unwrap();
                    prop_assert_eq!(reconstruct(mode, &r, &ctx, i).unwrap(), point.clone());
                }
            }
        }

        #[test]
        fn spatial_temporal_is_difference_of_temporal_residuals(
            now in proptest::collection::vec(point2(), 2),
            p1 in proptest::collection::vec(point2(), 2),
            mv in (small_coord(), small_coord()),
        ) {
            let current = vec![Some(now[0].clone()), None];
            let prev1: Vec<_> = p1.into_iter().map(Some).collect();
            let parents = vec![None, Some(0)];
            let mv = vec![mv.0 as i64, mv.1 as i64];
            let ctx = PredictionContext {
                current: &current,
                prev1: Some(&prev1),
                prev2: None,
                parents: &parents,
                motion: Some(&mv),
            };
            let rt_child = temporal_residual(&now[1], &temporal_predict(&ctx, 1).unwrap());
            let rt_parent = temporal_residual(&now[0], &temporal_predict(&ctx, 0).unwrap());
            let expected: Vec<i64> = rt_child.iter().zip(&rt_parent).map(|(a, b)| a - b).collect();
            prop_assert_eq!(spatial_temporal_residual(&ctx, 1, &now[1]).unwrap(), expected);
        }

        #[test]
        fn zero_motion_and_constant_velocity_give_zero_residuals(
            base in proptest::collection::vec(point2(), 3),
            vel in proptest::collection::vec((-50i32..50, -50i32..50), 3),
        ) {
            let profile = IncidenceProfile::new("chain", 3, 2, vec![(0, 1), (1, 2)]);
            let topo = ProfileTopology::new(&profile).unwrap();
            let shift = |k: i32| -> Vec<Option<Point>> {
                base.iter()
                    .zip(&vel)
                    .map(|(p, v)| Some(Point::from([p.coords[0] + k * v.0, p.coords[1] + k * v.1])))
                    .collect()
            };
            // identical consecutive frames
            let still = shift(0);
            let mv = vec![0i64, 0];
            let ctx = PredictionContext {
                current: &still,
                prev1: Some(&still),
                prev2: None,
                parents: &topo.parents,
                motion: Some(&mv),
            };
            for (i, p) in still.iter().enumerate() {
                let p = p.as_ref().unwrap();
                prop_assert_eq!(residual(Mode::Temporal, &ctx, i, p).unwrap(), vec![0, 0]);
                prop_assert_eq!(residual(Mode::SpatialTemporal, &ctx, i, p).ok().unwrap_or(vec![0, 0]), vec![0, 0]);
            }
            // per-point constant velocity
            let (f0, f1, f2) = (shift(0), shift(1), shift(2));
            let ctx = PredictionContext {
                current: &f2,
                prev1: Some(&f1),
                prev2: Some(&f0),
                parents: &topo.parents,
                motion: None,
            };
            for (i, p) in f2.iter().enumerate() {
                prop_assert_eq!(
                    residual(Mode::Trajectory, &ctx, i, p.as_ref().unwrap()).unwrap(),
                    vec![0, 0]
                );
            }
        }
    }
}
