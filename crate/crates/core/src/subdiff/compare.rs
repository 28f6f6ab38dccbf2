use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::btc::{btc_directional_slopes, btc_subdifferential_1d, SubdiffEstimate1D};
use super::clarke::{clarke_subdifferential, ConvexSetApprox};
use super::DEFAULT_GRID;
use crate::cones::{hyperplane_membership_in, ConeSampling, HyperplaneMembership, ScaleSchedule};
use crate::error::Result;
use crate::expr::Function;
use crate::geometry::{convex_hausdorff_2d, halfplane_polygon, interval_hausdorff, LinearFunctional};

const FINITE_GRID_NOTE: &str = "the BTC side is checked on a finite direction grid only; \
membership of (x, <L, x>) for every x in R^n is not verified";

/// Directional BTC slope range `[lo, hi]` along one grid direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionalRange {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClarkeBtcComparison {
    pub dim: usize,
    pub clarke: ConvexSetApprox,
    /// One-variable BTC estimate.
    pub btc: Option<SubdiffEstimate1D>,
    /// Multi-variable BTC slope ranges along the Clarke grid directions.
    pub btc_ranges: Option<Vec<DirectionalRange>>,
    /// Membership of the Clarke polygon's vertices in the BTC.
    pub vertex_membership: Option<HyperplaneMembership>,
    pub hausdorff: f64,
    pub tol: f64,
    pub pass: bool,
    pub note: Option<String>,
}

/// Compares Clarke's generalized gradient with the BTC subdifferential.
/// Fails with `NotLipschitz` when the Lipschitz gate refuses `f` at `a`.
pub fn compare_clarke_btc(f: &Function, a: &[f64], sched: &ScaleSchedule, tol: f64) -> Result<ClarkeBtcComparison> {
    let n = a.len();
    let clarke = clarke_subdifferential(f, a, DEFAULT_GRID, sched, tol)?;
    if n == 1 {
        let btc = btc_subdifferential_1d(f, a[0], sched)?;
        let (lo, hi) = clarke.interval().expect("one-variable set");
        let hausdorff = if btc.infinity { f64::INFINITY } else { interval_hausdorff(&[(lo, hi)], &btc.intervals) };
        return Ok(ClarkeBtcComparison {
            dim: 1,
            clarke,
            btc: Some(btc),
            btc_ranges: None,
            vertex_membership: None,
            hausdorff,
            tol,
            pass: hausdorff <= tol,
            note: None,
        });
    }

    let ranges: Vec<DirectionalRange> = clarke
        .directions
        .par_iter()
        .map(|v| {
            let set = btc_directional_slopes(f, a, v, sched)?;
            let (lo, hi) = match (set.min(), set.max()) {
                (Some(lo), Some(hi)) if !set.infinity => (lo, hi),
                _ => (f64::NEG_INFINITY, f64::INFINITY),
            };
            Ok(DirectionalRange { lo, hi })
        })
        .collect::<Result<_>>()?;

    let slack = tol / 10.0;
    let (hausdorff, vertex_membership) = if n == 2 {
        let clarke_poly = clarke.polygon(slack).expect("planar set");
        let mut normals = Vec::new();
        let mut offsets = Vec::new();
        for (v, r) in clarke.directions.iter().zip(&ranges) {
            normals.push([v[0], v[1]]);
            offsets.push(r.hi + slack);
            normals.push([-v[0], -v[1]]);
            offsets.push(-r.lo + slack);
        }
        let extent = 4.0 * clarke.lipschitz.max(1.0);
        let btc_poly = halfplane_polygon(&normals, &offsets, extent);
        let hausdorff = convex_hausdorff_2d(&clarke_poly, &btc_poly, 4 * DEFAULT_GRID);
        let sampling = ConeSampling::new(f, a, sched, true)?;
        let grid = clarke.directions.clone();
        let mut worst: Option<HyperplaneMembership> = None;
        for vertex in &clarke_poly {
            let m = hyperplane_membership_in(&sampling, &LinearFunctional::new(vertex.to_vec()), &grid, tol)?;
            if worst.as_ref().is_none_or(|w| m.worst() > w.worst()) {
                worst = Some(m);
            }
        }
        (hausdorff, worst)
    } else {
        let gap = clarke.support.iter().zip(&ranges).map(|(h, r)| (h - r.hi).abs()).fold(0.0, f64::max);
        (gap, None)
    };
    let members = vertex_membership.as_ref().is_none_or(|m| m.member);
    Ok(ClarkeBtcComparison {
        dim: n,
        clarke,
        btc: None,
        btc_ranges: Some(ranges),
        vertex_membership,
        hausdorff,
        tol,
        pass: hausdorff <= tol && members,
        note: Some(FINITE_GRID_NOTE.to_string()),
    })
}
