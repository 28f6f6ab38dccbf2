//! Thinned sets of unit directions with fast angular-neighbourhood queries.

use std::collections::{HashMap, HashSet};

use crate::geometry::arc;
use crate::sampling::splitmix64;

/// Above this dimension the neighbour-cell enumeration (3^d cells) costs more
/// than a linear scan.
const MAX_HASHED_DIM: usize = 5;

fn cell_key(v: &[f64], cell: f64, offset: Option<&[i64]>) -> u64 {
    let mut h = 0x243F_6A88_85A3_08D3u64;
    for (i, x) in v.iter().enumerate() {
        let mut q = (x / cell).floor() as i64;
        if let Some(o) = offset {
            q += o[i];
        }
        h = splitmix64(h ^ q as u64);
    }
    h
}

/// Unit vectors kept at most one per thinning cell, indexed by a coarser
/// search grid whose cell size equals the query tolerance.
#[derive(Debug, Clone)]
pub(crate) struct DirectionCloud {
    dim: usize,
    projective: bool,
    thin_cell: f64,
    search_cell: f64,
    seen: HashSet<u64>,
    reps: Vec<f64>,
    index: HashMap<u64, Vec<u32>>,
}

impl DirectionCloud {
    pub fn new(dim: usize, projective: bool, thin_cell: f64, search_tol: f64) -> Self {
        DirectionCloud {
            dim,
            projective,
            thin_cell,
            search_cell: search_tol,
            seen: HashSet::new(),
            reps: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.reps.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.reps[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.reps.chunks_exact(self.dim)
    }

    /// Inserts a unit vector unless its thinning cell is already occupied.
    /// Projective clouds store one canonical sign per line.
    pub fn insert(&mut self, v: &[f64]) -> bool {
        let flip = self.projective && v.iter().find(|x| **x != 0.0).is_some_and(|x| *x < 0.0);
        let canon: Vec<f64> = if flip { v.iter().map(|x| -x).collect() } else { v.to_vec() };
        if !self.seen.insert(cell_key(&canon, self.thin_cell, None)) {
            return false;
        }
        let id = self.len() as u32;
        self.index.entry(cell_key(&canon, self.search_cell, None)).or_default().push(id);
        self.reps.extend_from_slice(&canon);
        true
    }

    /// Smallest arc from `w` to a stored direction, if one lies within the
    /// search tolerance.
    pub fn nearest_within(&self, w: &[f64]) -> Option<f64> {
        let tol = self.search_cell;
        let mut best: Option<f64> = None;
        let mut consider = |id: usize| {
            let d = arc(self.get(id), w, self.projective);
            if d <= tol && best.is_none_or(|b| d < b) {
                best = Some(d);
            }
        };
        if self.dim > MAX_HASHED_DIM {
            (0..self.len()).for_each(&mut consider);
            return best;
        }
        let signs: &[f64] = if self.projective { &[1.0, -1.0] } else { &[1.0] };
        let mut offset = vec![0i64; self.dim];
        let cells = 3usize.pow(self.dim as u32);
        for &s in signs {
            let q: Vec<f64> = w.iter().map(|x| s * x).collect();
            for c in 0..cells {
                let mut rem = c;
                for o in offset.iter_mut() {
                    *o = (rem % 3) as i64 - 1;
                    rem /= 3;
                }
                if let Some(ids) = self.index.get(&cell_key(&q, self.search_cell, Some(&offset))) {
                    ids.iter().for_each(|&id| consider(id as usize));
                }
            }
        }
        best
    }

    pub fn contains_near(&self, w: &[f64]) -> bool {
        self.nearest_within(w).is_some()
    }

    /// Every stored direction of `self` has a neighbour in `other`.
    pub fn covered_by(&self, other: &DirectionCloud) -> bool {
        self.iter().all(|v| other.contains_near(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(theta: f64) -> [f64; 2] {
        [theta.cos(), theta.sin()]
    }

    #[test]
    fn thinning_keeps_one_per_cell() {
        let mut c = DirectionCloud::new(2, false, 0.01, 0.05);
        assert!(c.insert(&unit(0.3)));
        assert!(!c.insert(&unit(0.3 + 1e-6)));
        assert!(c.insert(&unit(1.0)));
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn neighbourhood_queries_match_brute_force() {
        let mut c = DirectionCloud::new(2, false, 0.004, 0.07);
        for i in 0..300 {
            c.insert(&unit(i as f64 * 0.0213));
        }
        for j in 0..500 {
            let w = unit(j as f64 * 0.0137 - 1.0);
            let brute = c.iter().map(|v| arc(v, &w, false)).fold(f64::INFINITY, f64::min);
            assert_eq!(c.contains_near(&w), brute <= 0.07, "query {j}");
        }
    }

    #[test]
    fn projective_queries_ignore_sign() {
        let mut c = DirectionCloud::new(2, true, 0.01, 0.05);
        c.insert(&unit(2.0));
        assert_eq!(c.len(), 1);
        assert!(c.contains_near(&unit(2.0 - std::f64::consts::PI)));
        assert!(!c.insert(&unit(2.0 + std::f64::consts::PI)));
        let mut oriented = DirectionCloud::new(2, false, 0.01, 0.05);
        oriented.insert(&unit(2.0));
        assert!(!oriented.contains_near(&unit(2.0 - std::f64::consts::PI)));
    }

    #[test]
    fn high_dimension_falls_back_to_scan() {
        let mut c = DirectionCloud::new(7, false, 0.01, 0.05);
        let mut v = vec![0.0; 7];
        v[3] = 1.0;
        c.insert(&v);
        assert!(c.contains_near(&v));
        v[3] = -1.0;
        assert!(!c.contains_near(&v));
    }
}
