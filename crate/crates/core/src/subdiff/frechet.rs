use serde::{Deserialize, Serialize};

use super::clarke::check_point;
use super::quotients::frechet_quotients;
use crate::cones::{ScaleSchedule, PERSISTENCE_LEVELS};
use crate::error::{Error, Result};
use crate::expr::Function;
use crate::geometry::distance;
use crate::sampling::{cube_to_ball, splitmix64, LowDiscrepancy};

/// Points `x'` tried per level by the limiting test, besides `x` itself.
const LIMIT_POINTS: usize = 8;
/// Perturbed candidates `v'` tried per point, besides `v` itself.
const LIMIT_VECTORS: usize = 4;
const INNER_LEVELS: usize = 6;
const INNER_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrechetTest {
    pub member: bool,
    /// Envelope of the per-level minima of the Fréchet quotient.
    pub estimate: f64,
}

fn frechet_estimate(f: &Function, x: &[f64], v: &[f64], sched: &ScaleSchedule) -> Result<f64> {
    let levels = frechet_quotients(f, x, v, sched)?;
    let k = levels.len();
    levels[k - PERSISTENCE_LEVELS.min(k)..]
        .iter()
        .map(|l| l.min())
        .try_fold(f64::INFINITY, |acc, m| m.map(|m| acc.min(m)))
        .ok_or_else(|| Error::InvalidInput(format!("no neighbours of {x:?} inside the domain")))
}

/// `v` is a Fréchet subgradient at `x` iff
/// `liminf_{y→x} (f(y) − f(x) − ⟨v, y − x⟩) / ‖y − x‖ ≥ −tol`, the liminf
/// estimated by the smallest per-level minimum over the trailing levels.
pub fn frechet_member(f: &Function, x: &[f64], v: &[f64], sched: &ScaleSchedule, tol: f64) -> Result<FrechetTest> {
    sched.validate()?;
    check_point(f, x)?;
    if v.len() != x.len() {
        return Err(Error::InvalidInput(format!("candidate has {} coordinates, point has {}", v.len(), x.len())));
    }
    let estimate = frechet_estimate(f, x, v, sched)?;
    Ok(FrechetTest { member: estimate >= -tol, estimate })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitingResult {
    pub accepted: Vec<Vec<f64>>,
    pub rejected: Vec<Vec<f64>>,
}

impl LimitingResult {
    pub fn accepts(&self, v: &[f64], tol: f64) -> bool {
        self.accepted.iter().any(|a| distance(a, v) <= tol)
    }
}

/// Whether some Fréchet subgradient `v'` at some `x'` with
/// `‖x' − x‖ ≤ r_k`, `‖v' − v‖ ≤ r_k` exists at every level `k`.
fn limiting_accepts(f: &Function, x: &[f64], v: &[f64], sched: &ScaleSchedule, tol: f64) -> Result<bool> {
    let n = x.len();
    for k in 1..=sched.levels {
        let r = sched.radius(k);
        let mut gen = LowDiscrepancy::new(n, sched.seed, splitmix64(0x11A1 ^ k as u64));
        let mut u = vec![0.0; n];
        let mut off = vec![0.0; n];
        let mut points = vec![x.to_vec()];
        for _ in 0..LIMIT_POINTS {
            gen.next_point(&mut u);
            cube_to_ball(&u, &mut off);
            let p: Vec<f64> = x.iter().zip(&off).map(|(a, b)| a + r * b).collect();
            if f.domain.contains(&p) {
                points.push(p);
            }
        }
        let mut vectors = vec![v.to_vec()];
        for _ in 0..LIMIT_VECTORS {
            gen.next_point(&mut u);
            cube_to_ball(&u, &mut off);
            vectors.push(v.iter().zip(&off).map(|(a, b)| a + r * b).collect());
        }
        let mut found = false;
        'search: for p in &points {
            let d = distance(p, x);
            let inner = ScaleSchedule {
                r0: if d > 0.0 { d / 4.0 } else { r },
                rho: 0.5,
                levels: INNER_LEVELS,
                samples_per_level: INNER_SAMPLES,
                seed: sched.seed,
            };
            for w in &vectors {
                if frechet_estimate(f, p, w, &inner)? >= -tol {
                    found = true;
                    break 'search;
                }
            }
        }
        if !found {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Splits `candidates` into limiting subgradients at `x` and the rest.
pub fn limiting_subdifferential(
    f: &Function,
    x: &[f64],
    candidates: &[Vec<f64>],
    sched: &ScaleSchedule,
    tol: f64,
) -> Result<LimitingResult> {
    sched.validate()?;
    check_point(f, x)?;
    let mut out = LimitingResult { accepted: Vec::new(), rejected: Vec::new() };
    for v in candidates {
        if v.len() != x.len() {
            return Err(Error::InvalidInput(format!("candidate has {} coordinates, point has {}", v.len(), x.len())));
        }
        if limiting_accepts(f, x, v, sched, tol)? {
            out.accepted.push(v.clone());
        } else {
            out.rejected.push(v.clone());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn line(src: &str) -> Function {
        Function::unbounded(parse(src).unwrap())
    }

    #[test]
    fn frechet_examples() {
        let s = ScaleSchedule::default();
        let abs = line("abs(x0)");
        // Oracle: (|y| − v·y)/|y| = 1 − v·sign(y).
        for (v, want) in [(0.5, true), (1.5, false), (-1.0, true), (1.0, true), (-1.2, false)] {
            let t = frechet_member(&abs, &[0.0], &[v], &s, 0.05).unwrap();
            assert_eq!(t.member, want, "v = {v}");
            assert!((t.estimate - (1.0 - v.abs())).abs() < 1e-9);
        }
        let t = frechet_member(&line("-abs(x0)"), &[0.0], &[0.0], &s, 0.05).unwrap();
        assert!(!t.member);
        assert!((t.estimate + 1.0).abs() < 1e-9);
    }

    #[test]
    fn limiting_examples() {
        let s = ScaleSchedule::default();
        let cands = |xs: &[f64]| xs.iter().map(|&v| vec![v]).collect::<Vec<_>>();
        let out = limiting_subdifferential(&line("-abs(x0)"), &[0.0], &cands(&[-1.0, 0.0, 1.0]), &s, 0.05).unwrap();
        assert_eq!(out.accepted, cands(&[-1.0, 1.0]));
        let all = cands(&[-1.0, -0.5, 0.0, 0.5, 1.0]);
        let out = limiting_subdifferential(&line("abs(x0)"), &[0.0], &all, &s, 0.05).unwrap();
        assert_eq!(out.accepted, all);
        let out = limiting_subdifferential(&line("x0^2"), &[0.0], &cands(&[-0.5, 0.0, 0.5]), &s, 0.05).unwrap();
        assert_eq!(out.accepted, cands(&[0.0]));
    }
}
