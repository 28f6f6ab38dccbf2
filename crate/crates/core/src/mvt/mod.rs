//! Certifying searches for the Rolle, Lagrange, normal-cone Lagrange and
//! Lebourg mean-value theorems, plus the non-compact counterexample.

mod search;

use serde::{Deserialize, Serialize};

use crate::cones::{btc_hyperplane_membership, estimate_peano_cone, normal_cone_member, ScaleSchedule};
use crate::error::{Error, Result};
use crate::expr::{Domain, DomainBox, Expression, Function};
use crate::geometry::{dot, norm, sphere_grid, LinearFunctional};
use crate::subdiff::{btc_subdifferential_1d, clarke_directional_ungated, lipschitz_gate};
use search::{rank, TieBreak, ZoomSearch};

/// Cells per axis of the coarse interior grid.
pub const DEFAULT_SEARCH_CELLS: usize = 64;
/// Boundary samples per box-face axis, and on a circle.
pub const BOUNDARY_PER_FACE: usize = 201;
pub const BOUNDARY_CIRCLE: usize = 720;
const KEEP: usize = 5;
const WINDOW_POINTS: usize = 9;
const LINE_DIRECTIONS: usize = 8;
const MEMBERSHIP_DIRECTIONS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    Rolle,
    Lagrange,
    NormalLagrange,
    Lebourg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecantWitness {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    /// Slope of `f` from `q` to `p`.
    pub slope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Short secants through the mean point whose slopes approach the target.
    Secants { pairs: Vec<SecantWitness> },
    /// Maximizer of `‖P_(Γ_L)^⊥((x, f(x) − C))‖` and the normal vector there.
    Projection { maximizer: Vec<f64>, value: f64, vector: Vec<f64>, affine_case: bool, perpendicularity: f64 },
    /// `{⟨ξ, y − x⟩ : ξ ∈ ∂f(c)}` and the increment `f(y) − f(x)`.
    Clarke { interval: (f64, f64), increment: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanValueCertificate {
    pub theorem: Theorem,
    pub point: Vec<f64>,
    /// `L` for Rolle/Lagrange (zero for Rolle), the normal vector `v`, or the
    /// increment `f(y) − f(x)` for Lebourg.
    pub target: Vec<f64>,
    pub residual: f64,
    pub boundary_residual: f64,
    pub tol: f64,
    pub valid: bool,
    pub witness: Witness,
}

fn require_compact(k: &Domain) -> Result<()> {
    if !k.is_compact() || !k.has_interior() {
        return Err(Error::InvalidInput("K must be compact with nonempty interior".into()));
    }
    Ok(())
}

fn check_functional(f: &Function, l: &LinearFunctional) -> Result<()> {
    if l.dim() != f.dim() {
        return Err(Error::InvalidInput(format!("L has {} coefficients, function takes {}", l.dim(), f.dim())));
    }
    Ok(())
}

/// `max |f(x) − L.x − C|` over sampled boundary points of `k`.
pub fn check_boundary_affine(f: &Function, k: &Domain, l: &LinearFunctional, c: f64, grid: usize) -> Result<f64> {
    require_compact(k)?;
    check_functional(f, l)?;
    let mut worst = 0.0_f64;
    for p in k.boundary_points(grid, BOUNDARY_CIRCLE) {
        worst = worst.max((f.expr.eval(&p)? - l.apply(&p) - c).abs());
    }
    Ok(worst)
}

/// `f` restricted to `K`, so secants and windows never leave `K`.
fn restricted(f: &Function, k: &Domain) -> Result<Function> {
    Ok(Function::new(f.expr.clone(), k.clone())?)
}

/// `[lo, hi]` of all pairwise slopes of `g` on `WINDOW_POINTS` points of the
/// segment `c + s·v`, `|s| ≤ h/2`, inside the domain.
fn window_slopes(g: &Function, c: &[f64], v: &[f64], h: f64) -> Result<Option<(f64, f64)>> {
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(WINDOW_POINTS);
    for i in 0..WINDOW_POINTS {
        let s = h * (i as f64 / (WINDOW_POINTS - 1) as f64 - 0.5);
        let x: Vec<f64> = c.iter().zip(v).map(|(a, d)| a + s * d).collect();
        if g.domain.contains(&x) {
            pts.push((s, g.expr.eval(&x)?));
        }
    }
    let mut hull: Option<(f64, f64)> = None;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let m = (pts[j].1 - pts[i].1) / (pts[j].0 - pts[i].0);
            hull = Some(hull.map_or((m, m), |(lo, hi)| (lo.min(m), hi.max(m))));
        }
    }
    Ok(hull)
}

fn distance_to_interval(s: f64, (lo, hi): (f64, f64)) -> f64 {
    if s < lo {
        lo - s
    } else if s > hi {
        s - hi
    } else {
        0.0
    }
}

fn line_directions(n: usize) -> Vec<Vec<f64>> {
    if n == 1 {
        vec![vec![1.0]]
    } else {
        sphere_grid(n, LINE_DIRECTIONS)
    }
}

/// Residual of `0 ∈ B̂_c(g)` at the full schedule.
fn btc_zero_residual(g: &Function, c: &[f64], sched: &ScaleSchedule, tol: f64) -> Result<f64> {
    if c.len() == 1 {
        return Ok(btc_subdifferential_1d(g, c[0], sched)?.distance_to(0.0));
    }
    let dirs = sphere_grid(c.len(), MEMBERSHIP_DIRECTIONS);
    match btc_hyperplane_membership(g, c, &LinearFunctional::zero(c.len()), &dirs, sched, tol) {
        Ok(m) => Ok(m.worst()),
        Err(Error::UnstableEstimate(_)) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

/// Along each axis through `c`, the secant of `f` within the finest radius
/// whose slope is closest to `L_i`.
fn secant_witness(f: &Function, c: &[f64], l: &LinearFunctional, radius: f64) -> Result<Vec<SecantWitness>> {
    let mut out = Vec::new();
    for axis in 0..c.len() {
        let mut pts: Vec<(Vec<f64>, f64)> = Vec::new();
        for i in 0..33 {
            let mut p = c.to_vec();
            p[axis] += radius * (i as f64 / 16.0 - 1.0);
            if f.domain.contains(&p) {
                let v = f.eval(&p)?;
                pts.push((p, v));
            }
        }
        let mut best: Option<(f64, SecantWitness)> = None;
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                let slope = (pts[j].1 - pts[i].1) / (pts[j].0[axis] - pts[i].0[axis]);
                let gap = (slope - l.coeffs[axis]).abs();
                if best.as_ref().is_none_or(|(g, _)| gap < *g) {
                    best = Some((gap, SecantWitness { p: pts[j].0.clone(), q: pts[i].0.clone(), slope }));
                }
            }
        }
        out.extend(best.map(|(_, w)| w));
    }
    Ok(out)
}

fn zoom<'a>(k: &'a Domain, sched: &ScaleSchedule, tie: TieBreak) -> ZoomSearch<'a> {
    ZoomSearch {
        domain: k,
        cells: DEFAULT_SEARCH_CELLS,
        zoom_nodes: if k.dim() == 1 { 65 } else { 17 },
        keep: KEEP,
        spacing: 0.5 * sched.finest_radius(),
        tie,
    }
}

/// Mean point `c ∈ int K` with `L ∈ B̂_c(f)`, given `f = L.x + C` on `∂K`.
pub fn lagrange_search(
    f: &Function,
    k: &Domain,
    l: &LinearFunctional,
    c: f64,
    sched: &ScaleSchedule,
    tol: f64,
) -> Result<MeanValueCertificate> {
    sched.validate()?;
    let boundary_residual = check_boundary_affine(f, k, l, c, BOUNDARY_PER_FACE)?;
    if boundary_residual > tol {
        return Err(Error::BoundaryHypothesisFailed { residual: boundary_residual, tol });
    }
    let f = restricted(f, k)?;
    let g = f.with_expr(f.expr.sub(&Expression::affine(&l.coeffs, 0.0)));
    let lines = line_directions(f.dim());
    let search = zoom(k, sched, TieBreak::Lexicographic);
    let candidates = search.run(|x, h| {
        let mut worst = 0.0_f64;
        for v in &lines {
            worst =
                worst.max(window_slopes(&g, x, v, h)?.map_or(f64::INFINITY, |hull| distance_to_interval(0.0, hull)));
        }
        Ok(worst)
    })?;
    let mut finals = candidates
        .into_iter()
        .map(|(x, _)| btc_zero_residual(&g, &x, sched, tol).map(|r| (x, r)))
        .collect::<Result<Vec<_>>>()?;
    finals.sort_by(|a, b| rank(&TieBreak::Lexicographic, a, b));
    let (point, residual) = finals
        .into_iter()
        .next()
        .ok_or_else(|| Error::NoCertificate { best_residual: f64::INFINITY, best_point: Vec::new() })?;
    if residual > tol {
        return Err(Error::NoCertificate { best_residual: residual, best_point: point });
    }
    let pairs = secant_witness(&f, &point, l, sched.finest_radius())?;
    Ok(MeanValueCertificate {
        theorem: Theorem::Lagrange,
        point,
        target: l.coeffs.clone(),
        residual,
        boundary_residual,
        tol,
        valid: true,
        witness: Witness::Secants { pairs },
    })
}

/// Mean point `c ∈ int K` with `0 ∈ B̂_c(f)`, given `f = C` on `∂K`.
pub fn rolle_search(f: &Function, k: &Domain, c: f64, sched: &ScaleSchedule, tol: f64) -> Result<MeanValueCertificate> {
    let mut cert = lagrange_search(f, k, &LinearFunctional::zero(f.dim()), c, sched, tol)?;
    cert.theorem = Theorem::Rolle;
    Ok(cert)
}

/// Maximizes `g(x) = ‖P_(Γ_L)^⊥((x, f(x) − C))‖` over `int K`, sets
/// `v = P_(Γ_L)^⊥((c, f(c) − C))` at the maximizer and checks `v ∈ N_c(f)`
/// against the Peano cone.
pub fn normal_lagrange_search(
    f: &Function,
    k: &Domain,
    l: &LinearFunctional,
    c: f64,
    sched: &ScaleSchedule,
    tol: f64,
) -> Result<MeanValueCertificate> {
    sched.validate()?;
    let boundary_residual = check_boundary_affine(f, k, l, c, BOUNDARY_PER_FACE)?;
    if boundary_residual > tol {
        return Err(Error::BoundaryHypothesisFailed { residual: boundary_residual, tol });
    }
    let f = restricted(f, k)?;
    let nu = l.graph_normal();
    let offset = |x: &[f64]| -> Result<f64> {
        let mut p = x.to_vec();
        p.push(f.eval(x)? - c);
        Ok(dot(&p, &nu))
    };
    let search = zoom(k, sched, TieBreak::Lexicographic);
    let best = search.run(|x, _| Ok(-offset(x)?.abs()))?;
    let (maximizer, neg) =
        best.into_iter().next().ok_or_else(|| Error::InvalidInput("K has no interior grid nodes".into()))?;
    let value = -neg;
    let affine_case = value <= tol;
    let (point, vector) = if affine_case {
        (k.center(), nu.clone())
    } else {
        let o = offset(&maximizer)?;
        (maximizer.clone(), nu.iter().map(|x| o * x).collect::<Vec<f64>>())
    };
    let perpendicularity = (0..l.dim())
        .map(|i| {
            let mut e = vec![0.0; l.dim() + 1];
            e[i] = 1.0;
            e[l.dim()] = l.coeffs[i];
            dot(&vector, &e).abs() / norm(&e)
        })
        .fold(0.0, f64::max);
    let cone = estimate_peano_cone(&f, &point, sched)?;
    let membership = normal_cone_member(&vector, &cone, tol);
    if !membership.member {
        return Err(Error::NormalMembershipFailed {
            vector,
            violation: membership.worst_violation,
            direction: membership.worst_direction.unwrap_or_default(),
        });
    }
    Ok(MeanValueCertificate {
        theorem: Theorem::NormalLagrange,
        point,
        target: vector.clone(),
        residual: membership.worst_violation.max(0.0),
        boundary_residual,
        tol,
        valid: true,
        witness: Witness::Projection { maximizer, value, vector, affine_case, perpendicularity },
    })
}

/// Mean point `c ∈ (x, y)` with `f(y) − f(x) ∈ ⟨∂f(c), y − x⟩`. Ties go to
/// the point closest to the midpoint of the segment.
pub fn lebourg_certify(
    f: &Function,
    x: &[f64],
    y: &[f64],
    sched: &ScaleSchedule,
    tol: f64,
) -> Result<MeanValueCertificate> {
    sched.validate()?;
    if x.len() != f.dim() || y.len() != f.dim() {
        return Err(Error::InvalidInput(format!("endpoints must have {} coordinates", f.dim())));
    }
    if !f.domain.contains(x) || !f.domain.contains(y) {
        return Err(Error::InvalidInput("segment endpoints must lie in the domain".into()));
    }
    let d: Vec<f64> = y.iter().zip(x).map(|(b, a)| b - a).collect();
    let len = norm(&d);
    if len == 0.0 {
        return Err(Error::InvalidInput("segment endpoints coincide".into()));
    }
    let u: Vec<f64> = d.iter().map(|t| t / len).collect();
    let neg_u: Vec<f64> = u.iter().map(|t| -t).collect();
    let at = |tau: f64| -> Vec<f64> { x.iter().zip(&d).map(|(a, t)| a + tau * t).collect() };
    let mid = at(0.5);
    for p in [x, y, &mid[..]] {
        lipschitz_gate(f, p, sched)?;
    }
    let increment = f.eval(y)? - f.eval(x)?;

    // Search over τ ∈ (0, 1); slopes along the segment are per unit length.
    let param = Domain::Box(DomainBox::new(vec![(0.0, 1.0)])?);
    let along = Function::on_box(Expression::affine(&[0.0], 0.0), vec![(0.0, 1.0)])?;
    let slope_window = |tau: f64, h: f64| -> Result<Option<(f64, f64)>> {
        let mut pts = Vec::with_capacity(WINDOW_POINTS);
        for i in 0..WINDOW_POINTS {
            let t = tau + h * (i as f64 / (WINDOW_POINTS - 1) as f64 - 0.5);
            if along.domain.contains(&[t]) {
                pts.push((t, f.eval(&at(t))?));
            }
        }
        let mut hull: Option<(f64, f64)> = None;
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                let m = (pts[j].1 - pts[i].1) / (pts[j].0 - pts[i].0);
                hull = Some(hull.map_or((m, m), |(lo, hi)| (lo.min(m), hi.max(m))));
            }
        }
        Ok(hull)
    };
    let tie = TieBreak::NearestTo(vec![0.5]);
    let search = ZoomSearch {
        domain: &param,
        cells: DEFAULT_SEARCH_CELLS,
        zoom_nodes: 65,
        keep: KEEP,
        spacing: 0.5 * sched.finest_radius() / len,
        tie: tie.clone(),
    };
    let candidates = search
        .run(|t, h| Ok(slope_window(t[0], h)?.map_or(f64::INFINITY, |hull| distance_to_interval(increment, hull))))?;
    let mut finals = Vec::new();
    for (t, _) in candidates {
        let c = at(t[0]);
        let hi = clarke_directional_ungated(f, &c, &u, sched, tol)?.value * len;
        let lo = -clarke_directional_ungated(f, &c, &neg_u, sched, tol)?.value * len;
        finals.push((t, distance_to_interval(increment, (lo, hi)), (lo, hi)));
    }
    finals.sort_by(|a, b| rank(&tie, &(a.0.clone(), a.1), &(b.0.clone(), b.1)));
    let (t, residual, interval) = finals.into_iter().next().expect("search keeps at least one candidate");
    let point = at(t[0]);
    if residual > tol {
        return Err(Error::NoCertificate { best_residual: residual, best_point: point });
    }
    lipschitz_gate(f, &point, sched)?;
    Ok(MeanValueCertificate {
        theorem: Theorem::Lebourg,
        point,
        target: vec![increment],
        residual,
        boundary_residual: 0.0,
        tol,
        valid: true,
        witness: Witness::Clarke { interval, increment },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoncompactReport {
    pub function: String,
    pub target: Vec<f64>,
    /// `min ‖∇f − L‖` over the interior grid.
    pub margin: f64,
    pub grid: (usize, usize),
    pub refined_margin: f64,
    pub refined_grid: (usize, usize),
    pub margin_stable: bool,
    /// Whether the Lagrange search on the compact truncation `[−1,1]²` refuses
    /// with a failed boundary hypothesis.
    pub truncated_refused: bool,
    pub truncated_message: String,
}

fn gradient_margin(grad: &[Expression], target: &[f64], nx: usize, ny: usize) -> Result<f64> {
    let mut margin = f64::INFINITY;
    for i in 0..nx {
        let x = -0.9 + 1.8 * i as f64 / (nx - 1) as f64;
        for j in 0..ny {
            let y = -10.0 + 20.0 * j as f64 / (ny - 1) as f64;
            let g: Vec<f64> = grad.iter().map(|e| e.eval(&[x, y])).collect::<std::result::Result<_, _>>()?;
            let d = ((g[0] - target[0]).powi(2) + (g[1] - target[1]).powi(2)).sqrt();
            margin = margin.min(d);
        }
    }
    Ok(margin)
}

/// `f(x, y) = x²y` on the strip `|x| ≤ 1` is affine (`= y`) on `x = ±1` yet
/// `∇f = (2xy, x²)` never reaches `L = (0, 1)` inside: the Lagrange
/// conclusion fails without compactness.
pub fn noncompact_counterexample_report() -> Result<NoncompactReport> {
    let expr = Expression::parse("x0^2 * x1").expect("built-in expression parses");
    let grad = expr.gradient()?;
    let target = vec![0.0, 1.0];
    let margin = gradient_margin(&grad, &target, 101, 101)?;
    let refined_margin = gradient_margin(&grad, &target, 201, 201)?;
    let square = Domain::Box(DomainBox::cube(2, -1.0, 1.0)?);
    let f = Function::new(expr.clone(), square.clone())?;
    let refusal =
        lagrange_search(&f, &square, &LinearFunctional::new(target.clone()), 0.0, &ScaleSchedule::default(), 0.05);
    let (truncated_refused, truncated_message) = match refusal {
        Err(e @ Error::BoundaryHypothesisFailed { .. }) => (true, e.to_string()),
        Err(e) => (false, e.to_string()),
        Ok(cert) => (false, format!("unexpected certificate at {:?}", cert.point)),
    };
    Ok(NoncompactReport {
        function: expr.to_string(),
        target,
        margin,
        grid: (101, 101),
        refined_margin,
        refined_grid: (201, 201),
        margin_stable: (margin - refined_margin).abs() < 5e-4,
        truncated_refused,
        truncated_message,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Disk};

    fn on(src: &str, bounds: Vec<(f64, f64)>) -> (Function, Domain) {
        let f = Function::on_box(parse(src).unwrap(), bounds).unwrap();
        let k = f.domain.clone();
        (f, k)
    }

    #[test]
    fn boundary_residuals() {
        let (f, k) = on("x0^2", vec![(0.0, 1.0)]);
        assert_eq!(check_boundary_affine(&f, &k, &LinearFunctional::new(vec![1.0]), 0.0, 10).unwrap(), 0.0);
        assert_eq!(check_boundary_affine(&f, &k, &LinearFunctional::new(vec![0.0]), 0.0, 10).unwrap(), 1.0);
        let (g, k) = on("abs(x0)", vec![(-1.0, 1.0)]);
        assert_eq!(check_boundary_affine(&g, &k, &LinearFunctional::new(vec![0.0]), 1.0, 10).unwrap(), 0.0);
    }

    #[test]
    fn rolle_examples() {
        let s = ScaleSchedule::default();
        let (f, k) = on("abs(x0)", vec![(-1.0, 1.0)]);
        let cert = rolle_search(&f, &k, 1.0, &s, 0.05).unwrap();
        assert!(cert.point[0].abs() < 1e-3 && cert.valid);
        let (f, k) = on("x0^2", vec![(-1.0, 1.0)]);
        assert!(rolle_search(&f, &k, 1.0, &s, 0.05).unwrap().point[0].abs() < 1e-3);
        let (f, k) = on("x0^3 - x0", vec![(-1.0, 1.0)]);
        let cert = rolle_search(&f, &k, 0.0, &s, 0.05).unwrap();
        assert!((cert.point[0] + 1.0 / 3f64.sqrt()).abs() < 1e-3, "{:?}", cert.point);
    }

    #[test]
    fn lagrange_examples() {
        let s = ScaleSchedule::default();
        let (f, k) = on("x0^2", vec![(0.0, 1.0)]);
        let cert = lagrange_search(&f, &k, &LinearFunctional::new(vec![1.0]), 0.0, &s, 0.05).unwrap();
        assert!((cert.point[0] - 0.5).abs() < 1e-3);
        let Witness::Secants { pairs } = &cert.witness else { panic!("secant witness expected") };
        assert!((pairs[0].slope - 1.0).abs() < 1e-4);
        let disk = Domain::Disk(Disk::new(vec![0.0, 0.0], 1.0).unwrap());
        let bowl = Function::new(parse("x0^2 + x1^2").unwrap(), disk.clone()).unwrap();
        let cert = lagrange_search(&bowl, &disk, &LinearFunctional::zero(2), 1.0, &s, 0.05).unwrap();
        assert!(cert.point.iter().all(|x| x.abs() < 1e-3), "{:?}", cert.point);
    }

    #[test]
    fn boundary_hypothesis_is_enforced() {
        let (f, k) = on("x0^2", vec![(0.0, 1.0)]);
        let err =
            lagrange_search(&f, &k, &LinearFunctional::zero(1), 0.0, &ScaleSchedule::default(), 0.05).unwrap_err();
        assert!(matches!(err, Error::BoundaryHypothesisFailed { residual, .. } if (residual - 1.0).abs() < 1e-12));
    }

    #[test]
    fn normal_lagrange_examples() {
        let s = ScaleSchedule::default();
        let (f, k) = on("x0^2", vec![(0.0, 1.0)]);
        let cert = normal_lagrange_search(&f, &k, &LinearFunctional::new(vec![1.0]), 0.0, &s, 0.05).unwrap();
        assert!((cert.point[0] - 0.5).abs() < 1e-3);
        assert!((cert.target[0] - 0.125).abs() < 1e-6 && (cert.target[1] + 0.125).abs() < 1e-6, "{:?}", cert.target);
        assert!(dot(&cert.target, &[1.0, 1.0]).abs() < 1e-9);
        assert!(cert.residual <= 0.05);

        let (f, k) = on("abs(x0)", vec![(-1.0, 1.0)]);
        let cert = normal_lagrange_search(&f, &k, &LinearFunctional::zero(1), 1.0, &s, 0.05).unwrap();
        assert!(cert.point[0].abs() < 1e-3);
        assert!(cert.target[0].abs() < 1e-12 && (cert.target[1] + 1.0).abs() < 1e-9);

        let (f, k) = on("2*x0", vec![(0.0, 1.0)]);
        let cert = normal_lagrange_search(&f, &k, &LinearFunctional::new(vec![2.0]), 0.0, &s, 0.05).unwrap();
        let Witness::Projection { affine_case, .. } = cert.witness else { panic!("projection witness expected") };
        assert!(affine_case);
        let want = [-2.0 / 5f64.sqrt(), 1.0 / 5f64.sqrt()];
        assert!((cert.target[0] - want[0]).abs() < 1e-12 && (cert.target[1] - want[1]).abs() < 1e-12);
    }

    #[test]
    fn lebourg_examples() {
        let s = ScaleSchedule::default();
        let sq = Function::unbounded(parse("x0^2").unwrap());
        let cert = lebourg_certify(&sq, &[0.0], &[1.0], &s, 0.05).unwrap();
        assert!((cert.point[0] - 0.5).abs() < 1e-3);
        let abs = Function::unbounded(parse("abs(x0)").unwrap());
        let cert = lebourg_certify(&abs, &[-1.0], &[2.0], &s, 0.05).unwrap();
        assert!(cert.point[0].abs() < 1e-3, "{:?}", cert.point);
        let Witness::Clarke { interval, .. } = cert.witness else { panic!("clarke witness expected") };
        assert!((interval.0 + 3.0).abs() < 0.06 && (interval.1 - 3.0).abs() < 0.06);
        let cert = lebourg_certify(&abs, &[1.0], &[2.0], &s, 0.05).unwrap();
        assert_eq!(cert.point, vec![1.5]);
        let root = Function::unbounded(parse("sabs_pow(x0, 2/3)").unwrap());
        assert!(matches!(lebourg_certify(&root, &[-1.0], &[1.0], &s, 0.05), Err(Error::NotLipschitz { .. })));
    }

    #[test]
    fn noncompact_report() {
        let r = noncompact_counterexample_report().unwrap();
        assert!(r.margin >= 0.19 - 1e-12 && (r.margin - 0.19).abs() < 1e-9, "{}", r.margin);
        assert!(r.margin_stable);
        assert!(r.truncated_refused, "{}", r.truncated_message);
    }
}
