//! Vectors, the cosine-valued angle, projections, projective slopes and
//! the small amount of convex geometry the estimators need.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("basis is not orthonormal (Gram entry ({i},{j}) off by {error:e})")]
    NotOrthonormal { i: usize, j: usize, error: f64 },
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `v / ‖v‖`, or `None` for the zero vector.
pub fn normalized(v: &[f64]) -> Option<Vec<f64>> {
    let n = norm(v);
    (n > 0.0 && n.is_finite()).then(|| v.iter().map(|x| x / n).collect())
}

/// `⟨x,y⟩ / (‖x‖‖y‖)`, clamped to `[−1, 1]`.
pub fn angle(x: &[f64], y: &[f64]) -> Result<f64, GeometryError> {
    if x.len() != y.len() {
        return Err(GeometryError::DimensionMismatch(x.len(), y.len()));
    }
    let (nx, ny) = (norm(x), norm(y));
    if nx == 0.0 || ny == 0.0 {
        return Err(GeometryError::ZeroVector);
    }
    Ok((dot(x, y) / (nx * ny)).clamp(-1.0, 1.0))
}

/// Arc length between unit vectors; `projective` identifies `v` with `−v`.
pub(crate) fn arc(u: &[f64], v: &[f64], projective: bool) -> f64 {
    let c = dot(u, v).clamp(-1.0, 1.0);
    if projective {
        c.abs().acos()
    } else {
        c.acos()
    }
}

/// Orthogonal projection of `v` onto the span of an orthonormal `basis`.
pub fn project(v: &[f64], basis: &[Vec<f64>]) -> Result<Vec<f64>, GeometryError> {
    for (i, b) in basis.iter().enumerate() {
        if b.len() != v.len() {
            return Err(GeometryError::DimensionMismatch(b.len(), v.len()));
        }
        for (j, c) in basis.iter().enumerate().skip(i) {
            let want = if i == j { 1.0 } else { 0.0 };
            let error = (dot(b, c) - want).abs();
            if error > 1e-10 {
                return Err(GeometryError::NotOrthonormal { i, j, error });
            }
        }
    }
    let mut out = vec![0.0; v.len()];
    for b in basis {
        let c = dot(v, b);
        for (o, x) in out.iter_mut().zip(b) {
            *o += c * x;
        }
    }
    Ok(out)
}

/// `v − project(v, basis)`.
pub fn project_complement(v: &[f64], basis: &[Vec<f64>]) -> Result<Vec<f64>, GeometryError> {
    let p = project(v, basis)?;
    Ok(v.iter().zip(&p).map(|(a, b)| a - b).collect())
}

/// `L.x = Σ αᵢ xᵢ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LinearFunctional {
    pub coeffs: Vec<f64>,
}

impl LinearFunctional {
    pub fn new(coeffs: Vec<f64>) -> Self {
        debug_assert!(coeffs.iter().all(|c| c.is_finite()));
        LinearFunctional { coeffs }
    }

    pub fn zero(dim: usize) -> Self {
        LinearFunctional { coeffs: vec![0.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn apply(&self, x: &[f64]) -> f64 {
        dot(&self.coeffs, x)
    }

    /// Unit direction of the graph line `{(x, L.x)}` over `x`.
    pub fn graph_direction(&self, x: &[f64]) -> Option<Vec<f64>> {
        let mut w = x.to_vec();
        w.push(self.apply(x));
        normalized(&w)
    }

    /// Unit normal of the graph hyperplane `Γ_L` in `ℝⁿ⁺¹`; it spans `(Γ_L)^⊥`.
    pub fn graph_normal(&self) -> Vec<f64> {
        let mut w: Vec<f64> = self.coeffs.iter().map(|c| -c).collect();
        w.push(1.0);
        normalized(&w).expect("normal has last coordinate 1")
    }
}

/// An unoriented line direction in the graph plane, `θ ∈ [0, π)`.
/// Slope `s` has `θ = atan(s) mod π`; `θ = π/2` is the vertical line.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct ProjectiveSlope {
    theta: f64,
}

impl ProjectiveSlope {
    pub fn from_theta(theta: f64) -> Self {
        let t = theta.rem_euclid(PI);
        ProjectiveSlope { theta: if t >= PI { 0.0 } else { t } }
    }

    pub fn from_slope(s: f64) -> Self {
        ProjectiveSlope::from_theta(s.atan())
    }

    /// From a run/rise pair; `(0, r)` is vertical.
    pub fn from_secant(run: f64, rise: f64) -> Self {
        ProjectiveSlope::from_theta(rise.atan2(run))
    }

    pub fn vertical() -> Self {
        ProjectiveSlope { theta: FRAC_PI_2 }
    }

    pub fn theta(self) -> f64 {
        self.theta
    }

    /// `None` for the vertical direction.
    pub fn slope(self) -> Option<f64> {
        (self.theta != FRAC_PI_2).then(|| self.theta.tan())
    }

    /// Distance on the circle `ℝ/πℤ`.
    pub fn gap(self, other: ProjectiveSlope) -> f64 {
        let d = (self.theta - other.theta).abs();
        d.min(PI - d)
    }
}

/// A union of closed slope intervals plus a flag for vertical directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlopeSet {
    pub intervals: Vec<(f64, f64)>,
    pub infinity: bool,
}

impl SlopeSet {
    pub fn empty() -> Self {
        SlopeSet { intervals: Vec::new(), infinity: false }
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty() && !self.infinity
    }

    pub fn contains(&self, s: f64, tol: f64) -> bool {
        self.intervals.iter().any(|&(lo, hi)| s >= lo - tol && s <= hi + tol)
    }

    /// Distance from `s` to the nearest interval (∞ when there are none).
    pub fn distance_to(&self, s: f64) -> f64 {
        self.intervals
            .iter()
            .map(|&(lo, hi)| {
                if s < lo {
                    lo - s
                } else if s > hi {
                    s - hi
                } else {
                    0.0
                }
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min(&self) -> Option<f64> {
        self.intervals.first().map(|i| i.0)
    }

    pub fn max(&self) -> Option<f64> {
        self.intervals.last().map(|i| i.1)
    }

    /// Total length of the finite intervals.
    pub fn width(&self) -> f64 {
        match (self.min(), self.max()) {
            (Some(lo), Some(hi)) => hi - lo,
            _ => 0.0,
        }
    }

    /// Sorts and merges overlapping intervals.
    pub fn normalize(&mut self) {
        self.intervals.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(self.intervals.len());
        for &(lo, hi) in &self.intervals {
            match merged.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        self.intervals = merged;
    }
}

/// Merges slope samples into maximal closed intervals.
///
/// Consecutive samples (in `θ` order, including the wrap from `θ → π` back
/// to `0`) are bridged when they are at most `gap_tol` apart. An arc that
/// runs through `π/2` becomes `[lo, largest sample] ∪ [smallest sample, hi]`.
/// The infinity flag is set iff some sample lies within `gap_tol` of vertical.
pub fn slope_union(samples: &[ProjectiveSlope], gap_tol: f64) -> SlopeSet {
    if samples.is_empty() {
        return SlopeSet::empty();
    }
    let mut thetas: Vec<f64> = samples.iter().map(|s| s.theta).collect();
    thetas.sort_by(f64::total_cmp);
    thetas.dedup();
    let infinity = thetas.iter().any(|&t| (t - FRAC_PI_2).abs() <= gap_tol);

    // Split the sorted circle into arcs at gaps larger than the tolerance.
    let n = thetas.len();
    let gaps: Vec<usize> = (0..n)
        .filter(|&i| {
            let next = if i + 1 < n { thetas[i + 1] } else { thetas[0] + PI };
            next - thetas[i] > gap_tol
        })
        .collect();

    // Each arc as a list of thetas in circular order, unwrapped past π.
    let mut arcs: Vec<Vec<f64>> = Vec::new();
    if gaps.is_empty() {
        arcs.push(thetas.clone());
    } else {
        for (k, &g) in gaps.iter().enumerate() {
            let end = gaps[(k + 1) % gaps.len()];
            let mut arc = Vec::new();
            let mut i = (g + 1) % n;
            let mut offset = if g + 1 >= n { PI } else { 0.0 };
            loop {
                arc.push(thetas[i] + offset);
                if i == end {
                    break;
                }
                i += 1;
                if i == n {
                    i = 0;
                    offset = PI;
                }
            }
            arcs.push(arc);
        }
    }

    let full_circle = gaps.is_empty();
    let mut out = SlopeSet { intervals: Vec::new(), infinity };
    let slope_of = |t: f64| ProjectiveSlope::from_theta(t).slope();
    for arc in arcs {
        let finite: Vec<f64> = arc.iter().filter_map(|&t| slope_of(t)).collect();
        if finite.is_empty() {
            continue;
        }
        let smallest = finite.iter().copied().fold(f64::INFINITY, f64::min);
        let largest = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if full_circle {
            out.intervals.push((smallest, largest));
            continue;
        }
        // Arc in unwrapped θ; it crosses vertical iff it spans π/2 or 3π/2.
        let (start, end) = (arc[0], *arc.last().unwrap());
        let crosses = |c: f64| start < c && end > c;
        if crosses(FRAC_PI_2) || crosses(3.0 * FRAC_PI_2) {
            let mut before: Vec<f64> = Vec::new();
            let mut after: Vec<f64> = Vec::new();
            let pivot = if crosses(FRAC_PI_2) { FRAC_PI_2 } else { 3.0 * FRAC_PI_2 };
            for &t in &arc {
                if let Some(s) = slope_of(t) {
                    if t < pivot {
                        before.push(s);
                    } else {
                        after.push(s);
                    }
                }
            }
            if !before.is_empty() {
                out.intervals.push((before.iter().copied().fold(f64::INFINITY, f64::min), largest));
            }
            if !after.is_empty() {
                out.intervals.push((smallest, after.iter().copied().fold(f64::NEG_INFINITY, f64::max)));
            }
        } else {
            out.intervals.push((smallest, largest));
        }
    }
    out.normalize();
    out
}

/// Hausdorff distance between two finite unions of closed intervals.
pub fn interval_hausdorff(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.is_empty() && b.is_empty() { 0.0 } else { f64::INFINITY };
    }
    fn dist_to(set: &[(f64, f64)], x: f64) -> f64 {
        set.iter()
            .map(|&(lo, hi)| {
                if x < lo {
                    lo - x
                } else if x > hi {
                    x - hi
                } else {
                    0.0
                }
            })
            .fold(f64::INFINITY, f64::min)
    }
    // sup over `from` of the distance to `to`: attained at endpoints of `from`
    // or at midpoints of gaps of `to` that fall inside `from`.
    fn directed(from: &[(f64, f64)], to: &[(f64, f64)]) -> f64 {
        let mut probes: Vec<f64> = from.iter().flat_map(|&(l, h)| [l, h]).collect();
        let mut sorted = to.to_vec();
        sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
        for w in sorted.windows(2) {
            let mid = 0.5 * (w[0].1 + w[1].0);
            if from.iter().any(|&(l, h)| l <= mid && mid <= h) {
                probes.push(mid);
            }
        }
        probes.into_iter().map(|x| dist_to(to, x)).fold(0.0, f64::max)
    }
    directed(a, b).max(directed(b, a))
}

/// Convex polygon `{ξ : ⟨ξ, nⱼ⟩ ≤ hⱼ}` in the plane, by clipping a large
/// square. Returns the vertices in order, or an empty list if infeasible.
pub fn halfplane_polygon(normals: &[[f64; 2]], offsets: &[f64], extent: f64) -> Vec<[f64; 2]> {
    let mut poly = vec![[-extent, -extent], [extent, -extent], [extent, extent], [-extent, extent]];
    for (n, &h) in normals.iter().zip(offsets) {
        if poly.is_empty() {
            break;
        }
        let side = |p: &[f64; 2]| n[0] * p[0] + n[1] * p[1] - h;
        let mut next = Vec::with_capacity(poly.len() + 1);
        for i in 0..poly.len() {
            let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
            let (sp, sq) = (side(&p), side(&q));
            if sp <= 0.0 {
                next.push(p);
            }
            if (sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0) {
                let t = sp / (sp - sq);
                next.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
            }
        }
        poly = next;
    }
    poly
}

/// Support function of a finite point set.
pub fn support(points: &[[f64; 2]], v: [f64; 2]) -> f64 {
    points.iter().map(|p| p[0] * v[0] + p[1] * v[1]).fold(f64::NEG_INFINITY, f64::max)
}

/// Hausdorff distance between the convex hulls of two planar point sets,
/// as the largest support-function gap over `directions` unit vectors.
pub fn convex_hausdorff_2d(a: &[[f64; 2]], b: &[[f64; 2]], directions: usize) -> f64 {
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    (0..directions)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / directions as f64;
            let v = [t.cos(), t.sin()];
            (support(a, v) - support(b, v)).abs()
        })
        .fold(0.0, f64::max)
}

/// `count` unit vectors spread over the sphere `S^(dim−1)`: equally spaced
/// angles in 2-D (closed under negation for even counts), `±1` in 1-D and a
/// Fibonacci lattice, symmetrized, above.
pub fn sphere_grid(dim: usize, count: usize) -> Vec<Vec<f64>> {
    match dim {
        0 => Vec::new(),
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count.max(4))
            .map(|k| {
                let t = 2.0 * PI * k as f64 / count.max(4) as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        _ => {
            let half = count.max(8) / 2;
            let golden = PI * (3.0 - 5f64.sqrt());
            let mut out = Vec::with_capacity(2 * half);
            for k in 0..half {
                // Points on the upper hemisphere of the last two coordinates'
                // Fibonacci spiral, lifted into `dim` by cycling axes.
                let z = 1.0 - (k as f64 + 0.5) / half as f64;
                let r = (1.0 - z * z).sqrt();
                let phi = golden * k as f64;
                let mut v = vec![0.0; dim];
                v[0] = r * phi.cos();
                v[1] = r * phi.sin();
                v[2 + k % (dim - 2)] = z;
                let v = normalized(&v).unwrap();
                out.push(v.iter().map(|x| -x).collect());
                out.push(v);
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn angle_examples() {
        assert_eq!(angle(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((angle(&[3.0, -4.0], &[3.0, -4.0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(angle(&[1.0, 1.0], &[1.0, -1.0]).unwrap(), 0.0);
        assert_eq!(angle(&[0.0, 0.0], &[1.0, 0.0]), Err(GeometryError::ZeroVector));
    }

    #[test]
    fn projection_examples() {
        let b = vec![vec![1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt()]];
        let p = project(&[1.0, 0.0], &b).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
        let q = project_complement(&[1.0, 0.0], &b).unwrap();
        assert!((q[0] - 0.5).abs() < 1e-15 && (q[1] + 0.5).abs() < 1e-15);
        assert_eq!(project(&[0.0, 0.0], &b).unwrap(), vec![0.0, 0.0]);
        assert!(matches!(project(&[1.0, 0.0], &[vec![1.0, 1.0]]), Err(GeometryError::NotOrthonormal { .. })));
    }

    #[test]
    fn slope_union_examples() {
        let steps: Vec<ProjectiveSlope> = (-10..=10).map(|k| ProjectiveSlope::from_slope(k as f64 / 10.0)).collect();
        let u = slope_union(&steps, 0.2);
        assert!(!u.infinity);
        assert_eq!(u.intervals.len(), 1);
        assert!((u.intervals[0].0 + 1.0).abs() < 1e-12 && (u.intervals[0].1 - 1.0).abs() < 1e-12);

        let zero = slope_union(&[ProjectiveSlope::from_slope(0.0)], 0.1);
        assert_eq!(zero.intervals, vec![(0.0, 0.0)]);
        assert!(!zero.infinity);

        let near_vertical = slope_union(&[ProjectiveSlope::from_theta(FRAC_PI_2 - 1e-9)], 0.1);
        assert!(near_vertical.infinity);
    }

    #[test]
    fn slope_union_splits_at_vertical_and_keeps_components_apart() {
        // Steep slopes on both sides of vertical form one arc through π/2.
        let s: Vec<_> = [5.0, 20.0, 1e4, -1e4, -20.0, -5.0].iter().map(|&x| ProjectiveSlope::from_slope(x)).collect();
        let u = slope_union(&s, 0.2);
        assert!(u.infinity);
        assert_eq!(u.intervals.len(), 2);
        let close = |got: (f64, f64), want: (f64, f64)| {
            (got.0 - want.0).abs() <= 1e-9 * want.0.abs() && (got.1 - want.1).abs() <= 1e-9 * want.1.abs()
        };
        assert!(close(u.intervals[0], (-1e4, -5.0)), "{:?}", u.intervals);
        assert!(close(u.intervals[1], (5.0, 1e4)), "{:?}", u.intervals);

        // Two clusters far apart stay two intervals; wrap through zero merges.
        let s: Vec<_> = [-0.05, 0.0, 0.05, 2.0, 2.1].iter().map(|&x| ProjectiveSlope::from_slope(x)).collect();
        let u = slope_union(&s, 0.1);
        assert_eq!(u.intervals.len(), 2);
        assert!(close(u.intervals[0], (-0.05, 0.05)), "{:?}", u.intervals);
    }

    #[test]
    fn hausdorff_of_interval_unions() {
        assert_eq!(interval_hausdorff(&[(-1.0, 1.0)], &[(-1.0, 1.0)]), 0.0);
        assert!((interval_hausdorff(&[(-1.0, 1.0)], &[(-0.9, 1.05)]) - 0.1).abs() < 1e-12);
        // The hole in the middle of b is seen from a.
        assert!((interval_hausdorff(&[(-1.0, 1.0)], &[(-1.0, -0.5), (0.5, 1.0)]) - 0.5).abs() < 1e-12);
        assert_eq!(interval_hausdorff(&[], &[(0.0, 0.0)]), f64::INFINITY);
    }

    #[test]
    fn polygon_from_halfplanes() {
        let normals: Vec<[f64; 2]> = sphere_grid(2, 8).iter().map(|v| [v[0], v[1]]).collect();
        let offsets: Vec<f64> = normals.iter().map(|n| n[0].abs() + n[1].abs()).collect();
        let poly = halfplane_polygon(&normals, &offsets, 10.0);
        let square = [[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]];
        assert!(convex_hausdorff_2d(&poly, &square, 360) < 1e-9);
        let infeasible = halfplane_polygon(&[[1.0, 0.0], [-1.0, 0.0]], &[-1.0, -1.0], 10.0);
        assert!(infeasible.is_empty());
    }

    #[test]
    fn graph_normal_is_perpendicular_to_graph() {
        let l = LinearFunctional::new(vec![2.0, -1.0]);
        let n = l.graph_normal();
        for x in [[1.0, 0.0], [0.3, 0.7]] {
            let w = l.graph_direction(&x).unwrap();
            assert!(dot(&n, &w).abs() < 1e-15);
        }
    }

    #[test]
    fn sphere_grids_are_unit_and_symmetric() {
        for dim in 1..5 {
            let g = sphere_grid(dim, 64);
            for v in &g {
                assert!((norm(v) - 1.0).abs() < 1e-12);
                let neg: Vec<f64> = v.iter().map(|x| -x).collect();
                assert!(g.iter().any(|w| distance(w, &neg) < 1e-12), "dim {dim}");
            }
        }
    }

    proptest! {
        #[test]
        fn angle_is_symmetric_scale_invariant_and_bounded(
            x in prop::collection::vec(-10.0f64..10.0, 3),
            y in prop::collection::vec(-10.0f64..10.0, 3),
            a in 0.01f64..100.0,
            b in 0.01f64..100.0,
        ) {
            prop_assume!(norm(&x) > 1e-6 && norm(&y) > 1e-6);
            let g = angle(&x, &y).unwrap();
            prop_assert!(g.abs() <= 1.0);
            prop_assert!((g - angle(&y, &x).unwrap()).abs() < 1e-12);
            let ax: Vec<f64> = x.iter().map(|v| a * v).collect();
            let by: Vec<f64> = y.iter().map(|v| b * v).collect();
            prop_assert!((angle(&ax, &by).unwrap() - g).abs() < 1e-12);
            let neg: Vec<f64> = by.iter().map(|v| -v).collect();
            prop_assert!((angle(&ax, &neg).unwrap() + g).abs() < 1e-12);
        }

        #[test]
        fn projection_is_idempotent_and_contracting(
            v in prop::collection::vec(-10.0f64..10.0, 3),
            t in 0.0f64..std::f64::consts::TAU,
        ) {
            let basis = vec![vec![t.cos(), t.sin(), 0.0], vec![0.0, 0.0, 1.0]];
            let p = project(&v, &basis).unwrap();
            let pp = project(&p, &basis).unwrap();
            prop_assert!(distance(&p, &pp) < 1e-12);
            prop_assert!(norm(&p) <= norm(&v) + 1e-12);
        }

        #[test]
        fn projective_slope_round_trip(s in -1e6f64..1e6) {
            let back = ProjectiveSlope::from_slope(s).slope().unwrap();
            // tan is ill-conditioned near vertical: the error grows like s².
            prop_assert!((back - s).abs() <= 1e-12 * (s * s).max(1.0));
        }
    }
}
