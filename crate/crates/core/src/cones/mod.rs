//! Multi-scale secant estimators for the Peano tangent cone and the
//! bisequential (paratingent) tangent cone of a graph, plus normal-cone and
//! distance-realization checks.

mod cloud;
pub(crate) mod sampler;
mod schedule;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub(crate) use cloud::DirectionCloud;
pub use schedule::ScaleSchedule;

use crate::error::{Error, Result};
use crate::expr::{Domain, Function};
use crate::geometry::{angle, arc, distance, norm, LinearFunctional};
use sampler::{for_each_secant, sample_levels, Level, PairStats};

/// Number of trailing levels that must agree for an estimate to count as
/// stabilized, and in which a direction must appear to be reported.
pub const PERSISTENCE_LEVELS: usize = 3;

/// Unit graph-space directions with their persistence across levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionSet {
    pub directions: Vec<Vec<f64>>,
    /// Number of levels at which each direction was present.
    pub persistence: Vec<usize>,
    /// Radius of the finest level at which each direction was present.
    pub witnessed_radius: Vec<f64>,
    /// `true` for a full (BTC) cone: closed under negation.
    pub symmetric: bool,
}

impl DirectionSet {
    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Smallest arc from `w` (any nonzero vector) to a stored direction.
    pub fn distance_to(&self, w: &[f64]) -> f64 {
        let n = norm(w);
        if n == 0.0 {
            return f64::INFINITY;
        }
        let w: Vec<f64> = w.iter().map(|x| x / n).collect();
        self.directions.iter().map(|d| arc(d, &w, false)).fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeEstimate {
    #[serde(flatten)]
    pub directions: DirectionSet,
    pub stabilized: bool,
    pub finest_radius: f64,
    pub angular_tol: f64,
    /// Levels (1-based) with more than 90% degenerate pairs.
    pub unreliable_levels: Vec<usize>,
}

/// Per-level direction clouds shared by the cone and subdifferential
/// estimators.
pub(crate) struct ConeSampling {
    pub levels: Vec<Level>,
    pub clouds: Vec<DirectionCloud>,
    pub stats: Vec<PairStats>,
    pub tol: f64,
    pub projective: bool,
}

fn check_point(f: &Function, a: &[f64]) -> Result<()> {
    if a.len() != f.dim() {
        return Err(Error::InvalidInput(format!("point has {} coordinates, function takes {}", a.len(), f.dim())));
    }
    if !f.domain.contains(a) {
        return Err(Error::InvalidInput(format!("point {a:?} lies outside the domain")));
    }
    Ok(())
}

impl ConeSampling {
    pub fn new(f: &Function, a: &[f64], sched: &ScaleSchedule, two_ended: bool) -> Result<Self> {
        sched.validate()?;
        check_point(f, a)?;
        let tol = sched.angular_tol();
        let levels = sample_levels(f, a, sched)?;
        let dim = a.len() + 1;
        let built: Vec<(DirectionCloud, PairStats)> = levels
            .par_iter()
            .map(|level| {
                let mut cloud = DirectionCloud::new(dim, two_ended, tol / 4.0, tol);
                let mut unit = vec![0.0; dim];
                let stats = for_each_secant(level, two_ended, |s, _| {
                    let n = norm(s);
                    unit.iter_mut().zip(s).for_each(|(u, x)| *u = x / n);
                    cloud.insert(&unit);
                });
                (cloud, stats)
            })
            .collect();
        if built.iter().all(|(c, _)| c.is_empty()) {
            return Err(Error::EmptyCone);
        }
        let (clouds, stats) = built.into_iter().unzip();
        Ok(ConeSampling { levels, clouds, stats, tol, projective: two_ended })
    }

    pub fn finest(&self) -> usize {
        self.levels.len() - 1
    }

    /// Indices of the trailing levels used for persistence.
    pub fn tail(&self) -> std::ops::Range<usize> {
        self.levels.len().saturating_sub(PERSISTENCE_LEVELS)..self.levels.len()
    }

    pub fn unreliable_levels(&self) -> Vec<usize> {
        self.stats.iter().enumerate().filter(|(_, s)| s.unreliable()).map(|(k, _)| k + 1).collect()
    }

    pub fn present_in_tail(&self, w: &[f64]) -> bool {
        self.tail().all(|k| self.clouds[k].contains_near(w))
    }

    /// Hausdorff agreement (within the angular tolerance) of the trailing
    /// levels, none of which may be unreliable.
    pub fn stabilized(&self) -> bool {
        let tail: Vec<usize> = self.tail().collect();
        if tail.iter().any(|&k| self.stats[k].unreliable() || self.clouds[k].is_empty()) {
            return false;
        }
        tail.iter().all(|&i| tail.iter().all(|&j| i == j || self.clouds[i].covered_by(&self.clouds[j])))
    }

    /// Smallest arc from `w` to the cloud at level index `k`, unbounded.
    pub fn arc_to_level(&self, k: usize, w: &[f64]) -> f64 {
        let cloud = &self.clouds[k];
        cloud
            .nearest_within(w)
            .unwrap_or_else(|| cloud.iter().map(|d| arc(d, w, self.projective)).fold(f64::INFINITY, f64::min))
    }

    pub fn estimate(&self) -> ConeEstimate {
        let dim = self.levels[0].points[0].len() + 1;
        let mut out = DirectionCloud::new(dim, self.projective, self.tol / 2.0, self.tol);
        let mut directions = DirectionSet {
            directions: Vec::new(),
            persistence: Vec::new(),
            witnessed_radius: Vec::new(),
            symmetric: self.projective,
        };
        let finest = &self.clouds[self.finest()];
        for w in finest.iter() {
            if !self.present_in_tail(w) || !out.insert(w) {
                continue;
            }
            let persistence = self.clouds.iter().filter(|c| c.contains_near(w)).count();
            let signs: &[f64] = if self.projective { &[1.0, -1.0] } else { &[1.0] };
            for s in signs {
                directions.directions.push(w.iter().map(|x| s * x).collect());
                directions.persistence.push(persistence);
                directions.witnessed_radius.push(self.levels[self.finest()].radius);
            }
        }
        ConeEstimate {
            directions,
            stabilized: self.stabilized(),
            finest_radius: self.levels[self.finest()].radius,
            angular_tol: self.tol,
            unreliable_levels: self.unreliable_levels(),
        }
    }
}

/// Peano tangent cone of the graph of `f` at `(a, f(a))`: one-ended secant
/// directions `(s − a, f(s) − f(a))`, oriented.
pub fn estimate_peano_cone(f: &Function, a: &[f64], sched: &ScaleSchedule) -> Result<ConeEstimate> {
    Ok(ConeSampling::new(f, a, sched, false)?.estimate())
}

/// Bisequential tangent cone of the graph of `f` at `(a, f(a))`: two-ended
/// secant directions `(p − q, f(p) − f(q))` with both ends near `a`,
/// symmetrized.
pub fn estimate_btc_cone(f: &Function, a: &[f64], sched: &ScaleSchedule) -> Result<ConeEstimate> {
    Ok(ConeSampling::new(f, a, sched, true)?.estimate())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperplaneMembership {
    pub member: bool,
    /// For each grid direction `x`, the largest (over the trailing levels)
    /// arc from `(x, L.x)` to the sampled BTC directions.
    pub residuals: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
    pub tol: f64,
}

impl HyperplaneMembership {
    pub fn worst(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

pub(crate) fn hyperplane_membership_in(
    sampling: &ConeSampling,
    l: &LinearFunctional,
    dirs: &[Vec<f64>],
    tol: f64,
) -> Result<HyperplaneMembership> {
    let mut residuals = Vec::with_capacity(dirs.len());
    for x in dirs {
        if x.len() != l.dim() {
            return Err(Error::InvalidInput(format!("grid direction has {} coordinates, L has {}", x.len(), l.dim())));
        }
        let w = l.graph_direction(x).ok_or(crate::geometry::GeometryError::ZeroVector)?;
        residuals.push(sampling.tail().map(|k| sampling.arc_to_level(k, &w)).fold(0.0, f64::max));
    }
    Ok(HyperplaneMembership { member: residuals.iter().all(|&r| r <= tol), residuals, directions: dirs.to_vec(), tol })
}

/// Whether the graph hyperplane of `L` lies in the BTC at `a`, checked on the
/// directions `dirs` of `ℝⁿ`.
pub fn btc_hyperplane_membership(
    f: &Function,
    a: &[f64],
    l: &LinearFunctional,
    dirs: &[Vec<f64>],
    sched: &ScaleSchedule,
    tol: f64,
) -> Result<HyperplaneMembership> {
    if dirs.is_empty() {
        return Err(Error::InvalidInput("direction grid is empty".into()));
    }
    if l.dim() != f.dim() {
        return Err(Error::InvalidInput(format!("L has {} coefficients, function takes {}", l.dim(), f.dim())));
    }
    let sampling = ConeSampling::new(f, a, sched, true)?;
    if !sampling.stabilized() {
        return Err(Error::UnstableEstimate(format!(
            "BTC directions at {a:?} disagree across the last {PERSISTENCE_LEVELS} levels"
        )));
    }
    hyperplane_membership_in(&sampling, l, dirs, tol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalMembership {
    pub member: bool,
    /// Largest `angle(v, w)` over the tangent directions `w`.
    pub worst_violation: f64,
    pub worst_direction: Option<Vec<f64>>,
}

/// `v ∈ N` iff `angle(v, w) ≤ tol` for every sampled tangent direction.
pub fn normal_cone_member(v: &[f64], tangent: &ConeEstimate, tol: f64) -> NormalMembership {
    if v.iter().all(|x| *x == 0.0) {
        return NormalMembership { member: true, worst_violation: 0.0, worst_direction: None };
    }
    let mut worst = f64::NEG_INFINITY;
    let mut worst_direction = None;
    for w in &tangent.directions.directions {
        if let Ok(c) = angle(v, w) {
            if c > worst {
                worst = c;
                worst_direction = Some(w.clone());
            }
        }
    }
    if worst_direction.is_none() {
        worst = f64::NEG_INFINITY;
    }
    NormalMembership { member: worst <= tol, worst_violation: worst, worst_direction }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceRealization {
    pub realized: bool,
    pub distance_at_a: f64,
    pub min_distance: f64,
    pub argmin: Vec<f64>,
}

/// Whether the distance from the graph-space point `x` to the graph of `f`
/// over `k` is realized at `(a, f(a))`, against a `grid`-per-axis lattice.
/// Near-ties in the minimum prefer the lexicographically larger node.
pub fn distance_realization_check(
    f: &Function,
    k: &Domain,
    x: &[f64],
    a: &[f64],
    grid: usize,
) -> Result<DistanceRealization> {
    let n = f.dim();
    if x.len() != n + 1 {
        return Err(Error::InvalidInput(format!("graph point needs {} coordinates, got {}", n + 1, x.len())));
    }
    if a.len() != n || !k.contains(a) {
        return Err(Error::InvalidInput(format!("foot point {a:?} is not in the domain")));
    }
    let graph_distance = |y: &[f64]| -> Result<f64> {
        let mut p = y.to_vec();
        p.push(f.eval(y)?);
        Ok(distance(&p, x))
    };
    let distance_at_a = graph_distance(a)?;
    let mut best = (f64::INFINITY, a.to_vec());
    for y in k.grid(grid.max(2) - 1) {
        let d = graph_distance(&y)?;
        let tie = (d - best.0).abs() <= 1e-12 * best.0.max(1.0);
        if (d < best.0 && !tie)
            || (tie
                && y.iter().zip(&best.1).map(|(p, q)| p.total_cmp(q)).find(|o| o.is_ne())
                    == Some(std::cmp::Ordering::Greater))
        {
            best = (d.min(best.0), y);
        }
    }
    let min_distance = best.0.min(distance_at_a);
    Ok(DistanceRealization { realized: distance_at_a <= best.0 + 1e-9, distance_at_a, min_distance, argmin: best.1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn line(src: &str) -> Function {
        Function::unbounded(parse(src).unwrap())
    }

    fn has(set: &DirectionSet, w: &[f64], tol: f64) -> bool {
        set.distance_to(w) <= tol
    }

    #[test]
    fn peano_cone_of_identity_is_the_line() {
        let est = estimate_peano_cone(&line("x0"), &[0.0], &ScaleSchedule::default()).unwrap();
        assert!(est.stabilized);
        assert!(!est.directions.symmetric);
        assert!(has(&est.directions, &[1.0, 1.0], 1e-3));
        assert!(has(&est.directions, &[-1.0, -1.0], 1e-3));
        assert!(est.directions.directions.iter().all(|d| (norm(d) - 1.0).abs() < 1e-12));
        assert!(est.directions.directions.iter().all(|d| (d[0] - d[1]).abs() < 1e-9));
    }

    #[test]
    fn peano_cone_of_abs_has_two_rays() {
        let est = estimate_peano_cone(&line("abs(x0)"), &[0.0], &ScaleSchedule::default()).unwrap();
        assert!(has(&est.directions, &[1.0, 1.0], 1e-3));
        assert!(has(&est.directions, &[-1.0, 1.0], 1e-3));
        assert!(!has(&est.directions, &[1.0, 0.0], 0.5));
        // Oracle: every one-sided secant of |x| on ±[1e-8, 1e-2] is
        // witnessed by the estimate.
        for k in 0..=60 {
            let s = 10f64.powf(-8.0 + k as f64 / 10.0);
            for t in [s, -s] {
                assert!(has(&est.directions, &[t, t.abs()], 1e-3), "secant at {t}");
            }
        }
    }

    #[test]
    fn btc_of_constant_is_horizontal() {
        let est = estimate_btc_cone(&line("3 + 0*x0"), &[0.5], &ScaleSchedule::default()).unwrap();
        assert!(est.stabilized);
        assert!(est.directions.symmetric);
        assert!(est.directions.directions.iter().all(|d| d[1] == 0.0));
        assert!(has(&est.directions, &[-1.0, 0.0], 1e-12));
    }

    #[test]
    fn btc_is_closed_under_negation() {
        let est = estimate_btc_cone(&line("abs(x0)"), &[0.0], &ScaleSchedule::default()).unwrap();
        for d in &est.directions.directions {
            let neg: Vec<f64> = d.iter().map(|x| -x).collect();
            assert!(has(&est.directions, &neg, 1e-12));
        }
    }

    #[test]
    fn isolated_point_has_empty_cone() {
        let f = Function::on_box(parse("x0").unwrap(), vec![(0.0, 0.0)]).unwrap();
        assert_eq!(estimate_btc_cone(&f, &[0.0], &ScaleSchedule::default()), Err(Error::EmptyCone));
        assert_eq!(estimate_peano_cone(&f, &[0.0], &ScaleSchedule::default()), Err(Error::EmptyCone));
    }

    #[test]
    fn outside_point_is_rejected() {
        let f = Function::on_box(parse("x0").unwrap(), vec![(0.0, 1.0)]).unwrap();
        assert!(matches!(estimate_btc_cone(&f, &[2.0], &ScaleSchedule::default()), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn estimates_are_deterministic() {
        let s = ScaleSchedule::default().with_seed(11);
        let a = estimate_btc_cone(&line("abs(x0) + x0^2"), &[0.0], &s).unwrap();
        let b = estimate_btc_cone(&line("abs(x0) + x0^2"), &[0.0], &s).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn hyperplane_membership_examples() {
        let s = ScaleSchedule::default();
        let lin = Function::unbounded(parse("2*x0 - x1").unwrap());
        let grid = crate::geometry::sphere_grid(2, 16);
        let m = btc_hyperplane_membership(&lin, &[0.3, 0.1], &LinearFunctional::new(vec![2.0, -1.0]), &grid, &s, 0.05)
            .unwrap();
        assert!(m.member, "{:?}", m.residuals);
        let bowl = Function::unbounded(parse("x0^2 + x1^2").unwrap());
        let m = btc_hyperplane_membership(&bowl, &[0.0, 0.0], &LinearFunctional::zero(2), &grid, &s, 0.05).unwrap();
        assert!(m.member, "{:?}", m.residuals);
        let m = btc_hyperplane_membership(&bowl, &[0.0, 0.0], &LinearFunctional::new(vec![1.0, 0.0]), &grid, &s, 0.05)
            .unwrap();
        assert!(!m.member);
        let l1 = Function::unbounded(parse("abs(x0) + abs(x1)").unwrap());
        let m = btc_hyperplane_membership(&l1, &[0.0, 0.0], &LinearFunctional::new(vec![0.5, 0.5]), &grid, &s, 0.05)
            .unwrap();
        assert!(m.member, "{:?}", m.residuals);
    }

    #[test]
    fn one_dimensional_membership_is_a_slope_test() {
        let s = ScaleSchedule::default();
        let f = line("abs(x0)");
        let dirs = vec![vec![1.0]];
        for (l, want) in [(0.0, true), (0.9, true), (-1.0, true), (1.5, false), (-3.0, false)] {
            let m = btc_hyperplane_membership(&f, &[0.0], &LinearFunctional::new(vec![l]), &dirs, &s, 0.05).unwrap();
            assert_eq!(m.member, want, "L = {l}: {:?}", m.residuals);
        }
    }

    #[test]
    fn normal_cone_examples() {
        let s = ScaleSchedule::default();
        let cone = estimate_peano_cone(&line("x0"), &[0.0], &s).unwrap();
        assert!(normal_cone_member(&[-FRAC_1_SQRT_2, FRAC_1_SQRT_2], &cone, 0.05).member);
        let out = normal_cone_member(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2], &cone, 0.05);
        assert!(!out.member);
        assert!((out.worst_violation - 1.0).abs() < 1e-9);
        assert!(normal_cone_member(&[0.0, 0.0], &cone, 0.0).member);
        let kink = estimate_peano_cone(&line("abs(abs(x0) - 1)"), &[0.0], &s).unwrap();
        let out = normal_cone_member(&[0.0, 6.0], &kink, 0.05);
        assert!(out.member);
        assert!((out.worst_violation + FRAC_1_SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn distance_realization_examples() {
        let kink = Function::on_box(parse("abs(abs(x0) - 1)").unwrap(), vec![(-6.0, 6.0)]).unwrap();
        let out = distance_realization_check(&kink, &kink.domain, &[0.0, 7.0], &[0.0], 1201).unwrap();
        assert!(!out.realized);
        assert!((out.argmin[0] - 4.0).abs() < 0.05, "{:?}", out.argmin);
        assert!((out.min_distance - 32f64.sqrt()).abs() < 1e-6);
        assert!((out.distance_at_a - 6.0).abs() < 1e-12);
        // Brute-force oracle on a finer grid.
        let brute = (0..=120_000)
            .map(|i| -6.0 + i as f64 * 1e-4)
            .map(|y: f64| (y * y + ((y.abs() - 1.0).abs() - 7.0).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min);
        assert!((brute - out.min_distance).abs() < 1e-6);

        let zero = Function::on_box(parse("0*x0").unwrap(), vec![(-1.0, 1.0)]).unwrap();
        assert!(distance_realization_check(&zero, &zero.domain, &[0.0, 1.0], &[0.0], 201).unwrap().realized);
        let id = Function::on_box(parse("x0").unwrap(), vec![(-1.0, 1.0)]).unwrap();
        assert!(distance_realization_check(&id, &id.domain, &[-0.5, 0.5], &[0.0], 201).unwrap().realized);
    }
}
