use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{EvalError, Expression};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("interval {index} has lo {lo} > hi {hi}")]
    Inverted { index: usize, lo: f64, hi: f64 },
    #[error("bound {0} is NaN")]
    NotANumber(usize),
    #[error("disk radius must be finite and non-negative, got {0}")]
    BadRadius(f64),
    #[error("domain has dimension {domain}, function arity is {arity}")]
    DimensionMismatch { domain: usize, arity: usize },
}

/// Axis-aligned product of closed intervals. Infinite bounds are allowed
/// and describe unbounded directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainBox {
    bounds: Vec<(f64, f64)>,
}

impl DomainBox {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self, DomainError> {
        for (index, &(lo, hi)) in bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() {
                return Err(DomainError::NotANumber(index));
            }
            if lo > hi {
                return Err(DomainError::Inverted { index, lo, hi });
            }
        }
        Ok(DomainBox { bounds })
    }

    /// `[lo, hi]ⁿ`.
    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self, DomainError> {
        DomainBox::new(vec![(lo, hi); dim])
    }

    pub fn unbounded(dim: usize) -> Self {
        DomainBox { bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); dim] }
    }

    /// The box `center ± radius` in every coordinate.
    pub fn around(center: &[f64], radius: f64) -> Self {
        DomainBox { bounds: center.iter().map(|&c| (c - radius, c + radius)).collect() }
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn is_compact(&self) -> bool {
        self.bounds.iter().all(|(lo, hi)| lo.is_finite() && hi.is_finite())
    }

    pub fn has_interior(&self) -> bool {
        self.bounds.iter().all(|(lo, hi)| lo < hi)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(&self.bounds).all(|(v, (lo, hi))| lo <= v && v <= hi)
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for (v, &(lo, hi)) in x.iter_mut().zip(&self.bounds) {
            *v = v.clamp(lo, hi);
        }
    }

    pub fn intersect(&self, other: &DomainBox) -> Option<DomainBox> {
        let bounds: Vec<_> = self.bounds.iter().zip(&other.bounds).map(|(a, b)| (a.0.max(b.0), a.1.min(b.1))).collect();
        if bounds.iter().any(|(lo, hi)| lo > hi) {
            None
        } else {
            Some(DomainBox { bounds })
        }
    }

    pub fn center(&self) -> Vec<f64> {
        self.bounds.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect()
    }
}

/// A closed disk (ball in any dimension, but only 2-D is used by the theorems).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self, DomainError> {
        if !(radius.is_finite() && radius >= 0.0) {
            return Err(DomainError::BadRadius(radius));
        }
        if let Some(i) = center.iter().position(|c| !c.is_finite()) {
            return Err(DomainError::NotANumber(i));
        }
        Ok(Disk { center, radius })
    }

    fn offset_norm(&self, x: &[f64]) -> f64 {
        x.iter().zip(&self.center).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Box(DomainBox),
    Disk(Disk),
}

impl Domain {
    pub fn dim(&self) -> usize {
        match self {
            Domain::Box(b) => b.dim(),
            Domain::Disk(d) => d.center.len(),
        }
    }

    pub fn is_compact(&self) -> bool {
        match self {
            Domain::Box(b) => b.is_compact(),
            Domain::Disk(_) => true,
        }
    }

    pub fn has_interior(&self) -> bool {
        match self {
            Domain::Box(b) => b.has_interior(),
            Domain::Disk(d) => d.radius > 0.0,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Domain::Box(b) => b.contains(x),
            Domain::Disk(d) => x.len() == d.center.len() && d.offset_norm(x) <= d.radius,
        }
    }

    /// Moves `x` to the nearest point of the domain.
    pub fn clamp(&self, x: &mut [f64]) {
        match self {
            Domain::Box(b) => b.clamp(x),
            Domain::Disk(d) => {
                let n = d.offset_norm(x);
                if n > d.radius {
                    let s = d.radius / n;
                    for (v, c) in x.iter_mut().zip(&d.center) {
                        *v = c + (*v - c) * s;
                    }
                }
            }
        }
    }

    pub fn bounding_box(&self) -> DomainBox {
        match self {
            Domain::Box(b) => b.clone(),
            Domain::Disk(d) => DomainBox::around(&d.center, d.radius),
        }
    }

    pub fn center(&self) -> Vec<f64> {
        match self {
            Domain::Box(b) => b.center(),
            Domain::Disk(d) => d.center.clone(),
        }
    }

    /// The domain shrunk inward by `margin` (boxes per side, disks radially).
    pub fn shrunk(&self, margin: f64) -> Domain {
        match self {
            Domain::Box(b) => Domain::Box(DomainBox {
                bounds: b
                    .bounds
                    .iter()
                    .map(|&(lo, hi)| {
                        let (l, h) = (lo + margin, hi - margin);
                        if l <= h {
                            (l, h)
                        } else {
                            let m = 0.5 * (lo + hi);
                            (m, m)
                        }
                    })
                    .collect(),
            }),
            Domain::Disk(d) => Domain::Disk(Disk { center: d.center.clone(), radius: (d.radius - margin).max(0.0) }),
        }
    }

    /// Deterministic sample of the topological boundary: `per_face` points per
    /// edge of every box face (grid on (n−1)-faces), or `circle_points`
    /// equally spaced points on a disk.
    pub fn boundary_points(&self, per_face: usize, circle_points: usize) -> Vec<Vec<f64>> {
        match self {
            Domain::Disk(d) => {
                let n = d.center.len();
                if n == 1 {
                    return vec![vec![d.center[0] - d.radius], vec![d.center[0] + d.radius]];
                }
                // Circle in the first two coordinates; higher-dimensional disks are
                // sampled on their great circles through coordinate pairs.
                let mut out = Vec::new();
                for a in 0..n {
                    for b in (a + 1)..n {
                        for k in 0..circle_points {
                            let t = 2.0 * std::f64::consts::PI * k as f64 / circle_points as f64;
                            let mut p = d.center.clone();
                            p[a] += d.radius * t.cos();
                            p[b] += d.radius * t.sin();
                            out.push(p);
                        }
                    }
                }
                out
            }
            Domain::Box(b) => {
                let n = b.dim();
                let per_face = per_face.max(2);
                let mut out = Vec::new();
                for fixed in 0..n {
                    for &side in &[b.bounds[fixed].0, b.bounds[fixed].1] {
                        let free: Vec<usize> = (0..n).filter(|&i| i != fixed).collect();
                        let total = per_face.pow(free.len() as u32);
                        for idx in 0..total {
                            let mut p = vec![0.0; n];
                            p[fixed] = side;
                            let mut rem = idx;
                            for &i in &free {
                                let k = rem % per_face;
                                rem /= per_face;
                                let (lo, hi) = b.bounds[i];
                                p[i] = lo + (hi - lo) * k as f64 / (per_face - 1) as f64;
                            }
                            out.push(p);
                        }
                    }
                }
                out.dedup();
                out
            }
        }
    }

    /// Nodes `lo + i·(hi−lo)/cells`, `i = 0..=cells`, per axis of the bounding
    /// box, kept when inside the domain. Row-major, first axis slowest.
    pub fn grid(&self, cells: usize) -> Vec<Vec<f64>> {
        grid_nodes(&self.bounding_box(), cells).into_iter().filter(|p| self.contains(p)).collect()
    }
}

pub(crate) fn grid_nodes(b: &DomainBox, cells: usize) -> Vec<Vec<f64>> {
    let cells = cells.max(1);
    let axes: Vec<Vec<f64>> =
        b.bounds()
            .iter()
            .map(|&(lo, hi)| {
                if lo == hi {
                    vec![lo]
                } else {
                    (0..=cells).map(|i| lo + (hi - lo) * i as f64 / cells as f64).collect()
                }
            })
            .collect();
    let mut out: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in &axes {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for prefix in &out {
            for &v in axis {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// An expression restricted to a domain. All estimators take one of these.
#[derive(Debug, Clone, PartialEq)]
pub struct Function {
    pub expr: Expression,
    pub domain: Domain,
}

impl Function {
    pub fn new(expr: Expression, domain: Domain) -> Result<Self, DomainError> {
        if domain.dim() != expr.arity() {
            return Err(DomainError::DimensionMismatch { domain: domain.dim(), arity: expr.arity() });
        }
        Ok(Function { expr, domain })
    }

    /// The expression on all of ℝⁿ.
    pub fn unbounded(expr: Expression) -> Self {
        let n = expr.arity();
        Function { expr, domain: Domain::Box(DomainBox::unbounded(n)) }
    }

    pub fn on_box(expr: Expression, bounds: Vec<(f64, f64)>) -> Result<Self, DomainError> {
        Function::new(expr, Domain::Box(DomainBox::new(bounds)?))
    }

    pub fn dim(&self) -> usize {
        self.expr.arity()
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        if !self.domain.contains(x) {
            return Err(EvalError::OutsideDomain);
        }
        self.expr.eval(x)
    }

    pub fn with_expr(&self, expr: Expression) -> Function {
        Function { expr, domain: self.domain.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_invariants() {
        assert!(DomainBox::new(vec![(1.0, 0.0)]).is_err());
        assert!(DomainBox::new(vec![(f64::NAN, 0.0)]).is_err());
        let b = DomainBox::new(vec![(0.0, 0.0)]).unwrap();
        assert!(!b.has_interior());
        assert!(DomainBox::unbounded(2).contains(&[1e300, -1e300]));
    }

    #[test]
    fn disk_clamp_projects_radially() {
        let d = Domain::Disk(Disk::new(vec![0.0, 0.0], 1.0).unwrap());
        let mut p = [3.0, 4.0];
        d.clamp(&mut p);
        assert!((p[0] - 0.6).abs() < 1e-15 && (p[1] - 0.8).abs() < 1e-15);
        assert_eq!(d.boundary_points(0, 720).len(), 720);
    }

    #[test]
    fn box_boundary_covers_faces() {
        let d = Domain::Box(DomainBox::cube(2, 0.0, 1.0).unwrap());
        let pts = d.boundary_points(5, 0);
        assert!(pts.iter().all(|p| p.iter().any(|&v| v == 0.0 || v == 1.0)));
        assert!(pts.contains(&vec![1.0, 0.5]));
        let line = Domain::Box(DomainBox::new(vec![(-1.0, 1.0)]).unwrap());
        assert_eq!(line.boundary_points(64, 0), vec![vec![-1.0], vec![1.0]]);
    }

    #[test]
    fn grid_contains_midpoint_for_even_cells() {
        let d = Domain::Box(DomainBox::new(vec![(-1.0, 1.0)]).unwrap());
        assert!(d.grid(64).contains(&vec![0.0]));
        let disk = Domain::Disk(Disk::new(vec![0.0, 0.0], 1.0).unwrap());
        assert!(disk.grid(8).iter().all(|p| p[0] * p[0] + p[1] * p[1] <= 1.0));
    }

    #[test]
    fn function_checks_membership() {
        let f = Function::on_box(crate::expr::parse("x0").unwrap(), vec![(0.0, 1.0)]).unwrap();
        assert_eq!(f.eval(&[2.0]), Err(EvalError::OutsideDomain));
        assert!(Function::on_box(crate::expr::parse("x1").unwrap(), vec![(0.0, 1.0)]).is_err());
    }
}
