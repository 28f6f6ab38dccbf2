//! Per-level point sets and the secants they induce.

use rayon::prelude::*;

use super::ScaleSchedule;
use crate::error::Result;
use crate::expr::Function;
use crate::geometry::distance;
use crate::sampling::{cube_to_ball, cube_to_sphere, LowDiscrepancy};

/// Secants shorter than this fraction of the level radius are discarded.
pub(crate) const MIN_SEPARATION: f64 = 5e-10;
/// Partner separations are drawn log-uniformly from `[1e-9·r, r]`.
const SEPARATION_DECADES: f64 = 9.0;
/// Relative round-off allowed in a secant slope.
const ROUNDOFF_BUDGET: f64 = 1e-6;
/// A level with more than this fraction of discarded pairs is unreliable.
pub(crate) const UNRELIABLE_FRACTION: f64 = 0.9;

/// Points sampled inside the ball of radius `radius` around the base point.
/// `points[0]` is always the base point itself.
#[derive(Debug, Clone)]
pub(crate) struct Level {
    pub radius: f64,
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub(crate) struct PairStats {
    pub total: usize,
    pub degenerate: usize,
}

impl PairStats {
    pub fn unreliable(&self) -> bool {
        self.total == 0 || self.degenerate as f64 > UNRELIABLE_FRACTION * self.total as f64
    }
}

/// Samples every level of the schedule around `a`. Levels are independent
/// and computed in parallel; the result is in level order.
pub(crate) fn sample_levels(f: &Function, a: &[f64], sched: &ScaleSchedule) -> Result<Vec<Level>> {
    let fa = f.eval(a)?;
    (1..=sched.levels).into_par_iter().map(|k| sample_level(f, a, fa, sched, k)).collect()
}

pub(crate) fn sample_level(f: &Function, a: &[f64], fa: f64, sched: &ScaleSchedule, k: usize) -> Result<Level> {
    let n = a.len();
    let r = sched.radius(k);
    let mut gen = LowDiscrepancy::new(2 * n + 1, sched.seed, k as u64);
    let mut u = vec![0.0; 2 * n + 1];
    let mut ball = vec![0.0; n];
    let mut dir = vec![0.0; n];
    let mut points = vec![a.to_vec()];
    let mut values = vec![fa];
    let pairs = (sched.samples_per_level / 2).max(1);
    for i in 0..pairs {
        gen.next_point(&mut u);
        let anchor = if i % 4 == 0 {
            a.to_vec()
        } else {
            cube_to_ball(&u[..n], &mut ball);
            let mut p: Vec<f64> = a.iter().zip(&ball).map(|(c, b)| c + r * b).collect();
            f.domain.clamp(&mut p);
            p
        };
        cube_to_sphere(&u[n..2 * n], &mut dir);
        let sep = r * 10f64.powf(-SEPARATION_DECADES * u[2 * n]);
        let mut partner: Vec<f64> = anchor.iter().zip(&dir).map(|(c, d)| c + sep * d).collect();
        if distance(&partner, a) > r {
            partner = anchor.iter().zip(&dir).map(|(c, d)| c - sep * d).collect();
            let out = distance(&partner, a);
            if out > r {
                partner.iter_mut().zip(a).for_each(|(p, c)| *p = c + (*p - c) * (r / out));
            }
        }
        f.domain.clamp(&mut partner);
        if i % 4 != 0 {
            values.push(f.eval(&anchor)?);
            points.push(anchor);
        }
        values.push(f.eval(&partner)?);
        points.push(partner);
    }
    Ok(Level { radius: r, points, values })
}

/// Graph-space secant between two samples, or `None` when the pair is
/// degenerate (too short, or its slope is dominated by round-off).
#[inline]
pub(crate) fn secant(level: &Level, i: usize, j: usize, out: &mut [f64]) -> Option<f64> {
    let (p, q) = (&level.points[i], &level.points[j]);
    let n = p.len();
    let mut d2 = 0.0;
    for t in 0..n {
        out[t] = p[t] - q[t];
        d2 += out[t] * out[t];
    }
    let d = d2.sqrt();
    if d < MIN_SEPARATION * level.radius {
        return None;
    }
    let df = level.values[i] - level.values[j];
    let roundoff = 4.0 * f64::EPSILON * (level.values[i].abs() + level.values[j].abs()) / d;
    if roundoff > ROUNDOFF_BUDGET * (df.abs() / d).max(1.0) {
        return None;
    }
    out[n] = df;
    Some(d)
}

/// Visits every non-degenerate secant of a level: all pairs when
/// `two_ended`, otherwise only those anchored at the base point.
pub(crate) fn for_each_secant(level: &Level, two_ended: bool, mut visit: impl FnMut(&[f64], f64)) -> PairStats {
    let m = level.points.len();
    let n = level.points[0].len();
    let mut buf = vec![0.0; n + 1];
    let mut stats = PairStats::default();
    let firsts = if two_ended { m } else { 1 };
    for i in 0..firsts {
        for j in (i + 1)..m {
            stats.total += 1;
            match secant(level, j, i, &mut buf) {
                Some(d) => visit(&buf, d),
                None => stats.degenerate += 1,
            }
        }
    }
    stats
}
