use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::quotients::directional_quotients;
use crate::cones::{ScaleSchedule, PERSISTENCE_LEVELS};
use crate::error::{Error, Result};
use crate::expr::{lipschitz_estimate, DomainBox, Function};
use crate::geometry::{dot, halfplane_polygon, norm, sphere_grid};

/// Growth allowed in the sampled Lipschitz constant when the box shrinks.
const GATE_RATIO: f64 = 1.25;
/// Upper bound on lattice points per gate box.
const GATE_POINTS: usize = 1500;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LipschitzGate {
    /// Sampled constant on the radius-`r0` box.
    pub coarse: f64,
    /// Sampled constant on the radius-`r0/4` box.
    pub fine: f64,
}

impl LipschitzGate {
    pub fn constant(&self) -> f64 {
        self.coarse.max(self.fine)
    }
}

fn gate_box(f: &Function, a: &[f64], radius: f64) -> Result<DomainBox> {
    DomainBox::around(a, radius)
        .intersect(&f.domain.bounding_box())
        .ok_or_else(|| Error::InvalidInput(format!("point {a:?} lies outside the domain")))
}

/// Refuses functions whose sampled Lipschitz constant grows by more than
/// 25% when the box around `a` shrinks from radius `r0` to `r0/4` — the
/// signature of an unbounded difference quotient at `a`.
pub fn lipschitz_gate(f: &Function, a: &[f64], sched: &ScaleSchedule) -> Result<LipschitzGate> {
    let n = a.len().max(1);
    let grid = if n == 1 { 101 } else { ((GATE_POINTS as f64).powf(1.0 / n as f64) as usize).max(3) };
    let coarse = lipschitz_estimate(f, &gate_box(f, a, sched.r0)?, grid)?.value;
    let fine = lipschitz_estimate(f, &gate_box(f, a, sched.r0 / 4.0)?, grid)?.value;
    if fine > GATE_RATIO * coarse + 1e-12 {
        return Err(Error::NotLipschitz { coarse, fine });
    }
    Ok(LipschitzGate { coarse, fine })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionalEstimate {
    pub value: f64,
    pub stabilized: bool,
    /// Per-level maxima of the last levels, coarse to fine.
    pub tail: [f64; PERSISTENCE_LEVELS],
}

/// `f°(a; v)` without the Lipschitz gate: the largest of the per-level
/// maxima of `(f(x + tv) − f(x)) / t` over the trailing levels.
pub(crate) fn clarke_directional_ungated(
    f: &Function,
    a: &[f64],
    v: &[f64],
    sched: &ScaleSchedule,
    tol: f64,
) -> Result<DirectionalEstimate> {
    let levels = directional_quotients(f, a, v, sched)?;
    let k = levels.len();
    let mut tail = [0.0; PERSISTENCE_LEVELS];
    for (slot, level) in tail.iter_mut().zip(&levels[k - PERSISTENCE_LEVELS..]) {
        *slot = level
            .max()
            .ok_or_else(|| Error::InvalidInput(format!("no room to move from {a:?} along {v:?} inside the domain")))?;
    }
    // Balls are nested, so the envelope sup over the ball of radius r_j is the
    // running maximum from the finest level outwards.
    let mut env = tail;
    for j in (0..PERSISTENCE_LEVELS - 1).rev() {
        env[j] = env[j].max(env[j + 1]);
    }
    let value = env[0];
    let stabilized = env.windows(2).all(|w| w[0] - w[1] <= tol / 2.0);
    Ok(DirectionalEstimate { value, stabilized, tail })
}

fn unit(v: &[f64]) -> Result<Vec<f64>> {
    let n = norm(v);
    if n == 0.0 || !n.is_finite() {
        return Err(Error::InvalidInput("direction must be a nonzero vector".into()));
    }
    Ok(v.iter().map(|x| x / n).collect())
}

/// Clarke's generalized directional derivative
/// `f°(a; v) = limsup_{x→a, t→0⁺} (f(x + tv) − f(x)) / t` for unit `v`.
pub fn clarke_directional(f: &Function, a: &[f64], v: &[f64], sched: &ScaleSchedule) -> Result<DirectionalEstimate> {
    sched.validate()?;
    check_point(f, a)?;
    lipschitz_gate(f, a, sched)?;
    clarke_directional_ungated(f, a, &unit(v)?, sched, super::DEFAULT_TOL)
}

pub(crate) fn check_point(f: &Function, a: &[f64]) -> Result<()> {
    if a.len() != f.dim() {
        return Err(Error::InvalidInput(format!("point has {} coordinates, function takes {}", a.len(), f.dim())));
    }
    if !f.domain.contains(a) {
        return Err(Error::InvalidInput(format!("point {a:?} lies outside the domain")));
    }
    Ok(())
}

/// A convex set known through support values `h_j ≈ f°(a; v_j)` on a grid of
/// unit directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexSetApprox {
    pub directions: Vec<Vec<f64>>,
    pub support: Vec<f64>,
    pub tol: f64,
    pub stabilized: bool,
    /// Sampled Lipschitz constant near the base point.
    pub lipschitz: f64,
}

impl ConvexSetApprox {
    pub fn dim(&self) -> usize {
        self.directions.first().map_or(0, Vec::len)
    }

    /// Largest `⟨ξ, v_j⟩ − h_j`; `ξ` is a member iff this is `≤ tol`.
    pub fn violation(&self, xi: &[f64]) -> f64 {
        self.directions.iter().zip(&self.support).map(|(v, h)| dot(xi, v) - h).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn contains(&self, xi: &[f64]) -> bool {
        self.violation(xi) <= self.tol
    }

    /// `[−f°(a;−1), f°(a;+1)]` for a one-variable set.
    pub fn interval(&self) -> Option<(f64, f64)> {
        if self.dim() != 1 {
            return None;
        }
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for (v, h) in self.directions.iter().zip(&self.support) {
            if v[0] > 0.0 {
                hi = hi.min(h / v[0]);
            } else {
                lo = lo.max(h / v[0]);
            }
        }
        Some((lo, hi))
    }

    /// Vertices of the planar polygon `{ξ : ⟨ξ, v_j⟩ ≤ h_j + slack}`.
    pub fn polygon(&self, slack: f64) -> Option<Vec<[f64; 2]>> {
        if self.dim() != 2 {
            return None;
        }
        let normals: Vec<[f64; 2]> = self.directions.iter().map(|v| [v[0], v[1]]).collect();
        let offsets: Vec<f64> = self.support.iter().map(|h| h + slack).collect();
        let extent = 4.0 * self.support.iter().fold(1.0_f64, |m, h| m.max(h.abs()));
        Some(halfplane_polygon(&normals, &offsets, extent))
    }

    /// Support values of the Minkowski sum with a set on the same grid.
    pub fn minkowski_sum(&self, other: &ConvexSetApprox) -> Option<ConvexSetApprox> {
        (self.directions == other.directions).then(|| ConvexSetApprox {
            directions: self.directions.clone(),
            support: self.support.iter().zip(&other.support).map(|(a, b)| a + b).collect(),
            tol: self.tol.max(other.tol),
            stabilized: self.stabilized && other.stabilized,
            lipschitz: self.lipschitz + other.lipschitz,
        })
    }
}

/// Direction grid used for support-function sets: `{−1, +1}` in one
/// variable, `count` points of the sphere otherwise.
pub fn clarke_grid(dim: usize, count: usize) -> Vec<Vec<f64>> {
    sphere_grid(dim, count)
}

/// Clarke's generalized gradient as support values on `clarke_grid(n, grid)`.
pub fn clarke_subdifferential(
    f: &Function,
    a: &[f64],
    grid: usize,
    sched: &ScaleSchedule,
    tol: f64,
) -> Result<ConvexSetApprox> {
    sched.validate()?;
    check_point(f, a)?;
    let gate = lipschitz_gate(f, a, sched)?;
    let directions = clarke_grid(a.len(), grid);
    let estimates: Vec<DirectionalEstimate> =
        directions.par_iter().map(|v| clarke_directional_ungated(f, a, v, sched, tol)).collect::<Result<_>>()?;
    if let Some((v, _)) = directions.iter().zip(&estimates).find(|(_, e)| !e.stabilized) {
        return Err(Error::UnstableEstimate(format!("f°({a:?}; {v:?}) still moving across the last levels")));
    }
    Ok(ConvexSetApprox {
        support: estimates.iter().map(|e| e.value).collect(),
        directions,
        tol,
        stabilized: true,
        lipschitz: gate.constant(),
    })
}
