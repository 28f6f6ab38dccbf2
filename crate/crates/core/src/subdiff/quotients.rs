//! Difference quotients sampled on shrinking balls.

use rayon::prelude::*;

use crate::cones::ScaleSchedule;
use crate::error::Result;
use crate::expr::Function;
use crate::geometry::dot;
use crate::sampling::{cube_to_ball, cube_to_sphere, splitmix64, LowDiscrepancy};

const STEP_DECADES: f64 = 9.0;
const ROUNDOFF_BUDGET: f64 = 1e-6;

#[derive(Debug, Clone)]
pub(crate) struct QuotientLevel {
    pub quotients: Vec<f64>,
}

impl QuotientLevel {
    pub fn max(&self) -> Option<f64> {
        self.quotients.iter().copied().reduce(f64::max)
    }

    pub fn min(&self) -> Option<f64> {
        self.quotients.iter().copied().reduce(f64::min)
    }
}

fn stream_for(tag: u64, v: &[f64], k: usize) -> u64 {
    let mut h = splitmix64(tag);
    for x in v {
        h = splitmix64(h ^ x.to_bits());
    }
    splitmix64(h ^ k as u64)
}

fn roundoff_dominated(fx: f64, fy: f64, step: f64, q: f64) -> bool {
    4.0 * f64::EPSILON * (fx.abs() + fy.abs()) / step > ROUNDOFF_BUDGET * q.abs().max(1.0)
}

/// Per level `k`: quotients `(f(x + t·v) − f(x)) / t` with `‖x − a‖ ≤ r_k`
/// and `t` log-uniform in `[1e-9·r_k, r_k]`. A quarter of the segments start
/// at `a` and a quarter straddle it.
/// Samples whose far end leaves the domain are discarded.
pub(crate) fn directional_quotients(
    f: &Function,
    a: &[f64],
    v: &[f64],
    sched: &ScaleSchedule,
) -> Result<Vec<QuotientLevel>> {
    (1..=sched.levels)
        .into_par_iter()
        .map(|k| {
            let n = a.len();
            let r = sched.radius(k);
            let mut gen = LowDiscrepancy::new(n + 2, sched.seed, stream_for(0xC1A2, v, k));
            let mut u = vec![0.0; n + 2];
            let mut ball = vec![0.0; n];
            let mut quotients = Vec::with_capacity(sched.samples_per_level);
            for i in 0..sched.samples_per_level {
                gen.next_point(&mut u);
                let t = r * 10f64.powf(-STEP_DECADES * u[n]);
                let mut x = a.to_vec();
                match i % 4 {
                    0 => {}
                    1 => x.iter_mut().zip(v).for_each(|(p, d)| *p -= u[n + 1] * t * d),
                    _ => {
                        cube_to_ball(&u[..n], &mut ball);
                        x.iter_mut().zip(&ball).for_each(|(p, b)| *p += r * b);
                    }
                }
                f.domain.clamp(&mut x);
                let y: Vec<f64> = x.iter().zip(v).map(|(p, d)| p + t * d).collect();
                if !f.domain.contains(&y) {
                    continue;
                }
                let (fx, fy) = (f.eval(&x)?, f.eval(&y)?);
                let q = (fy - fx) / t;
                if !roundoff_dominated(fx, fy, t, q) {
                    quotients.push(q);
                }
            }
            Ok(QuotientLevel { quotients })
        })
        .collect()
}

/// Per level `k`: Fréchet quotients `(f(y) − f(x) − ⟨v, y − x⟩) / ‖y − x‖`
/// with `‖y − x‖` log-uniform in `[1e-3·r_k, r_k]`.
pub(crate) fn frechet_quotients(
    f: &Function,
    x: &[f64],
    v: &[f64],
    sched: &ScaleSchedule,
) -> Result<Vec<QuotientLevel>> {
    let fx = f.eval(x)?;
    (1..=sched.levels)
        .map(|k| {
            let n = x.len();
            let r = sched.radius(k);
            let mut gen = LowDiscrepancy::new(n + 1, sched.seed, stream_for(0xF4EC, x, k));
            let mut u = vec![0.0; n + 1];
            let mut dir = vec![0.0; n];
            let mut quotients = Vec::with_capacity(sched.samples_per_level);
            for _ in 0..sched.samples_per_level {
                gen.next_point(&mut u);
                cube_to_sphere(&u[..n], &mut dir);
                let rho = r * 10f64.powf(-3.0 * u[n]);
                let y: Vec<f64> = x.iter().zip(&dir).map(|(p, d)| p + rho * d).collect();
                if !f.domain.contains(&y) {
                    continue;
                }
                let fy = f.eval(&y)?;
                let q = (fy - fx - rho * dot(v, &dir)) / rho;
                if !roundoff_dominated(fx, fy, rho, q) {
                    quotients.push(q);
                }
            }
            Ok(QuotientLevel { quotients })
        })
        .collect()
}
