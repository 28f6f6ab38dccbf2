//! Deterministic multiresolution grid search over the interior of a domain.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::error::Result;
use crate::expr::Domain;
use crate::geometry::distance;

/// Objective values closer than this are ties.
const TIE_RESOLUTION: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum TieBreak {
    /// Smallest point in lexicographic order.
    Lexicographic,
    /// Closest to the given point, then lexicographic.
    NearestTo(Vec<f64>),
}

impl TieBreak {
    pub fn compare(&self, p: &[f64], q: &[f64]) -> Ordering {
        let lex = || p.iter().zip(q).map(|(a, b)| a.total_cmp(b)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal);
        match self {
            TieBreak::Lexicographic => lex(),
            TieBreak::NearestTo(m) => distance(p, m).total_cmp(&distance(q, m)).then_with(lex),
        }
    }
}

fn quantized(v: f64) -> f64 {
    if v.is_finite() {
        (v / TIE_RESOLUTION).round()
    } else {
        v
    }
}

/// Orders `(point, objective)` pairs: smaller objective first (up to the tie
/// resolution), then by the tie-break rule.
pub(crate) fn rank(tie: &TieBreak, a: &(Vec<f64>, f64), b: &(Vec<f64>, f64)) -> Ordering {
    quantized(a.1).total_cmp(&quantized(b.1)).then_with(|| tie.compare(&a.0, &b.0))
}

pub(crate) struct ZoomSearch<'a> {
    pub domain: &'a Domain,
    /// Cells per axis of the coarse grid.
    pub cells: usize,
    /// Nodes per axis of each local refinement grid (odd).
    pub zoom_nodes: usize,
    /// Candidates carried between refinements.
    pub keep: usize,
    /// Stop once the grid spacing is at most this.
    pub spacing: f64,
    pub tie: TieBreak,
}

impl ZoomSearch<'_> {
    pub fn coarse_spacing(&self) -> f64 {
        let b = self.domain.bounding_box();
        b.bounds().iter().map(|(lo, hi)| (hi - lo) / self.cells as f64).fold(0.0, f64::max)
    }

    /// Interior of the domain: shrunk by half a coarse cell, so coarse
    /// boundary nodes are never candidates.
    pub fn interior(&self) -> Domain {
        self.domain.shrunk(0.5 * self.coarse_spacing())
    }

    /// Runs the search; `objective(c, h)` is evaluated at grid spacing `h`.
    /// Returns the best candidates of the finest refinement, best first.
    pub fn run<F>(&self, objective: F) -> Result<Vec<(Vec<f64>, f64)>>
    where
        F: Fn(&[f64], f64) -> Result<f64> + Sync,
    {
        let interior = self.interior();
        let mut h = self.coarse_spacing();
        let nodes: Vec<Vec<f64>> = self.domain.grid(self.cells).into_iter().filter(|p| interior.contains(p)).collect();
        let mut best = self.evaluate(nodes, h, &objective)?;
        let m = self.zoom_nodes.max(3) | 1;
        while h > self.spacing {
            let next_h = 2.0 * h / (m - 1) as f64;
            let mut nodes: Vec<Vec<f64>> = Vec::new();
            for (c, _) in &best {
                let n = c.len();
                for idx in 0..m.pow(n as u32) {
                    let mut rem = idx;
                    let p: Vec<f64> = c
                        .iter()
                        .map(|&x| {
                            let i = rem % m;
                            rem /= m;
                            x + h * (2.0 * i as f64 / (m - 1) as f64 - 1.0)
                        })
                        .collect();
                    if interior.contains(&p) {
                        nodes.push(p);
                    }
                }
            }
            nodes.sort_by(|p, q| TieBreak::Lexicographic.compare(p, q));
            nodes.dedup();
            h = next_h;
            best = self.evaluate(nodes, h, &objective)?;
        }
        Ok(best)
    }

    fn evaluate<F>(&self, nodes: Vec<Vec<f64>>, h: f64, objective: &F) -> Result<Vec<(Vec<f64>, f64)>>
    where
        F: Fn(&[f64], f64) -> Result<f64> + Sync,
    {
        let mut scored: Vec<(Vec<f64>, f64)> =
            nodes.into_par_iter().map(|p| objective(&p, h).map(|v| (p, v))).collect::<Result<_>>()?;
        scored.sort_by(|a, b| rank(&self.tie, a, b));
        scored.truncate(self.keep);
        Ok(scored)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::DomainBox;

    #[test]
    fn finds_a_minimum_to_the_requested_spacing() {
        let d = Domain::Box(DomainBox::new(vec![(-1.0, 1.0)]).unwrap());
        let s =
            ZoomSearch { domain: &d, cells: 64, zoom_nodes: 65, keep: 5, spacing: 1e-7, tie: TieBreak::Lexicographic };
        let best = s.run(|c, _| Ok((c[0] - 0.123456789).abs())).unwrap();
        assert!((best[0].0[0] - 0.123456789).abs() < 1e-7);
    }

    #[test]
    fn ties_break_lexicographically_or_by_distance() {
        let d = Domain::Box(DomainBox::new(vec![(-1.0, 1.0)]).unwrap());
        let s =
            ZoomSearch { domain: &d, cells: 64, zoom_nodes: 65, keep: 5, spacing: 1.0, tie: TieBreak::Lexicographic };
        let best = s.run(|_, _| Ok(0.0)).unwrap();
        assert_eq!(best[0].0, vec![-1.0 + 2.0 / 64.0]);
        let s = ZoomSearch { tie: TieBreak::NearestTo(vec![0.3]), ..s };
        let best = s.run(|_, _| Ok(0.0)).unwrap();
        assert!((best[0].0[0] - 0.3).abs() <= 1.0 / 64.0);
    }

    #[test]
    fn boundary_nodes_are_excluded() {
        let d = Domain::Box(DomainBox::new(vec![(0.0, 1.0), (0.0, 1.0)]).unwrap());
        let s =
            ZoomSearch { domain: &d, cells: 8, zoom_nodes: 5, keep: 5, spacing: 1e-3, tie: TieBreak::Lexicographic };
        let best = s.run(|c, _| Ok(c[0] + c[1])).unwrap();
        assert!(best.iter().all(|(c, _)| c.iter().all(|x| *x > 0.0 && *x < 1.0)));
        assert!((best[0].0[0] - 1.0 / 16.0).abs() < 1e-3);
    }
}
