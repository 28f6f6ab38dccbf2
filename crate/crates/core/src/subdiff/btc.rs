use serde::{Deserialize, Serialize};

use super::quotients::directional_quotients;
use crate::cones::sampler::for_each_secant;
use crate::cones::{ConeSampling, ScaleSchedule};
use crate::error::{Error, Result};
use crate::expr::Function;
use crate::geometry::{norm, slope_union, ProjectiveSlope, SlopeSet};

/// Extreme finite secant slopes seen at one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelSlopes {
    pub level: usize,
    pub radius: f64,
    pub min_slope: f64,
    pub max_slope: f64,
}

/// One-variable BTC subdifferential: a union of slope intervals plus the
/// flag for the vertical direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubdiffEstimate1D {
    pub intervals: Vec<(f64, f64)>,
    pub infinity: bool,
    pub stabilized: bool,
    pub finest_radius: f64,
    /// Largest |slope| among the persistent finest-level samples.
    pub max_abs_slope: f64,
    pub levels: Vec<LevelSlopes>,
    pub unreliable_levels: Vec<usize>,
}

impl SubdiffEstimate1D {
    pub fn slope_set(&self) -> SlopeSet {
        SlopeSet { intervals: self.intervals.clone(), infinity: self.infinity }
    }

    pub fn contains(&self, s: f64, tol: f64) -> bool {
        self.slope_set().contains(s, tol)
    }

    pub fn distance_to(&self, s: f64) -> f64 {
        self.slope_set().distance_to(s)
    }

    pub fn width(&self) -> f64 {
        self.slope_set().width()
    }
}

/// Slope `rise/run` counts as vertical when `|rise/run| > 1/θ_tol`.
fn is_vertical(run: f64, rise: f64, tol: f64) -> bool {
    rise.abs() * tol > run.abs()
}

/// Limits of two-ended secant slopes `(f(p) − f(q)) / (p − q)` with
/// `p, q → a`: finest-level slopes that persist through the two previous
/// levels, merged with a gap tolerance of twice the angular resolution.
pub fn btc_subdifferential_1d(f: &Function, a: f64, sched: &ScaleSchedule) -> Result<SubdiffEstimate1D> {
    if f.dim() != 1 {
        return Err(Error::InvalidInput(format!("one-variable estimator given a function of {} variables", f.dim())));
    }
    let sampling = ConeSampling::new(f, &[a], sched, true)?;
    let tol = sampling.tol;
    let levels = sampling
        .levels
        .iter()
        .enumerate()
        .map(|(k, level)| {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for_each_secant(level, true, |s, _| {
                if !is_vertical(s[0], s[1], tol) {
                    let m = s[1] / s[0];
                    lo = lo.min(m);
                    hi = hi.max(m);
                }
            });
            LevelSlopes { level: k + 1, radius: level.radius, min_slope: lo, max_slope: hi }
        })
        .collect();

    let finest = &sampling.levels[sampling.finest()];
    let mut kept = Vec::new();
    let mut infinity = false;
    let mut max_abs_slope = 0.0_f64;
    let mut unit = [0.0; 2];
    for_each_secant(finest, true, |s, _| {
        let n = norm(s);
        unit = [s[0] / n, s[1] / n];
        if sampling.present_in_tail(&unit) {
            kept.push(ProjectiveSlope::from_secant(s[0], s[1]));
            infinity |= is_vertical(s[0], s[1], tol);
            let m = (s[1] / s[0]).abs();
            if m.is_finite() {
                max_abs_slope = max_abs_slope.max(m);
            }
        }
    });
    let mut set = slope_union(&kept, 2.0 * tol);
    set.infinity = infinity;
    Ok(SubdiffEstimate1D {
        intervals: set.intervals,
        infinity,
        stabilized: sampling.stabilized(),
        finest_radius: finest.radius,
        max_abs_slope,
        levels,
        unreliable_levels: sampling.unreliable_levels(),
    })
}

/// BTC slopes along the unit direction `v`: limits of
/// `(f(x + t·v) − f(x)) / t` with `x → a`, `t → 0⁺`, kept when they persist
/// through the two previous levels.
pub fn btc_directional_slopes(f: &Function, a: &[f64], v: &[f64], sched: &ScaleSchedule) -> Result<SlopeSet> {
    sched.validate()?;
    let tol = sched.angular_tol();
    let levels = directional_quotients(f, a, v, sched)?;
    let k = levels.len();
    let sorted: Vec<Vec<f64>> = levels[k - 3..k - 1]
        .iter()
        .map(|l| {
            let mut t: Vec<f64> = l.quotients.iter().map(|&q| ProjectiveSlope::from_slope(q).theta()).collect();
            t.sort_by(f64::total_cmp);
            t
        })
        .collect();
    let near = |thetas: &[f64], t: f64| -> bool {
        let i = thetas.partition_point(|&x| x < t);
        let gap = |j: usize| ProjectiveSlope::from_theta(thetas[j]).gap(ProjectiveSlope::from_theta(t));
        let n = thetas.len();
        n > 0 && [i % n, (i + n - 1) % n, 0, n - 1].iter().any(|&j| gap(j) <= tol)
    };
    let kept: Vec<ProjectiveSlope> = levels[k - 1]
        .quotients
        .iter()
        .map(|&q| ProjectiveSlope::from_slope(q))
        .filter(|s| sorted.iter().all(|t| near(t, s.theta())))
        .collect();
    Ok(slope_union(&kept, 2.0 * tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn line(src: &str) -> Function {
        Function::unbounded(parse(src).unwrap())
    }

    fn assert_interval(est: &SubdiffEstimate1D, lo: f64, hi: f64, tol: f64) {
        assert_eq!(est.intervals.len(), 1, "{:?}", est.intervals);
        let (a, b) = est.intervals[0];
        assert!((a - lo).abs() <= tol && (b - hi).abs() <= tol, "{:?} vs [{lo}, {hi}]", est.intervals);
    }

    #[test]
    fn abs_at_zero() {
        let est = btc_subdifferential_1d(&line("abs(x0)"), 0.0, &ScaleSchedule::default()).unwrap();
        assert_interval(&est, -1.0, 1.0, 0.02);
        assert!(!est.infinity);
        assert!(est.stabilized);
    }

    #[test]
    fn oscillating_example_at_zero() {
        let f = line("piecewise(x0 == 0, 0, x0^2 * sin(1/x0))");
        let est = btc_subdifferential_1d(&f, 0.0, &ScaleSchedule::default()).unwrap();
        assert_interval(&est, -1.0, 1.0, 0.05);
        assert!(!est.infinity);
    }

    #[test]
    fn square_at_zero_is_a_point() {
        let s = ScaleSchedule::default();
        let est = btc_subdifferential_1d(&line("x0^2"), 0.0, &s).unwrap();
        let eps = est.intervals.iter().map(|(lo, hi)| lo.abs().max(hi.abs())).fold(0.0, f64::max);
        assert!(eps <= 2.0 * s.finest_radius(), "{:?}", est.intervals);
        assert!(est.width() <= 0.01);
        assert!(est.contains(0.0, 1e-12));
    }

    #[test]
    fn two_thirds_power_has_vertical_slopes() {
        let est = btc_subdifferential_1d(&line("sabs_pow(x0, 2/3)"), 0.0, &ScaleSchedule::default()).unwrap();
        assert!(est.infinity);
        assert!(est.max_abs_slope > 1e3);
        assert!(est.contains(-1e3, 0.0) && est.contains(1e3, 0.0) && est.contains(0.0, 0.0), "{:?}", est.intervals);
    }

    #[test]
    fn constant_is_zero() {
        let est = btc_subdifferential_1d(&line("0*x0 + 4"), 1.0, &ScaleSchedule::default()).unwrap();
        assert_eq!(est.intervals, vec![(0.0, 0.0)]);
    }

    #[test]
    fn per_level_extremes_converge_for_abs() {
        let est = btc_subdifferential_1d(&line("abs(x0)"), 0.0, &ScaleSchedule::default()).unwrap();
        assert_eq!(est.levels.len(), 14);
        for l in &est.levels {
            assert!(l.min_slope >= -1.0 - 1e-9 && l.max_slope <= 1.0 + 1e-9);
            assert!(l.min_slope < -0.98 && l.max_slope > 0.98);
        }
    }

    #[test]
    fn wrong_arity_is_rejected() {
        let f = line("x0 + x1");
        assert!(matches!(btc_subdifferential_1d(&f, 0.0, &ScaleSchedule::default()), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn directional_slopes_of_l1_norm() {
        let f = line("abs(x0) + abs(x1)");
        let set = btc_directional_slopes(&f, &[0.0, 0.0], &[1.0, 0.0], &ScaleSchedule::default()).unwrap();
        assert_eq!(set.intervals.len(), 1);
        assert!((set.min().unwrap() + 1.0).abs() < 0.02 && (set.max().unwrap() - 1.0).abs() < 0.02, "{set:?}");
        let d = std::f64::consts::FRAC_1_SQRT_2;
        let set = btc_directional_slopes(&f, &[0.0, 0.0], &[d, d], &ScaleSchedule::default()).unwrap();
        assert!((set.max().unwrap() - 2f64.sqrt()).abs() < 0.03, "{set:?}");
    }
}
