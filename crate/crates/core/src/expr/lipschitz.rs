use serde::Serialize;

use super::domain::grid_nodes;
use super::{DomainBox, EvalError, Function};

/// Largest sampled difference quotient. Always a lower bound on the true
/// Lipschitz constant over the box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LipschitzEstimate {
    pub value: f64,
    pub points: usize,
    pub is_lower_bound: bool,
}

/// Max of `|f(x) − f(y)| / ‖x − y‖` over all pairs of a `grid`-per-axis
/// lattice on `k` (restricted to the function's domain).
///
/// Refining `grid` from `g` to `2g − 1` keeps every old node, so the
/// estimate can only grow under that refinement.
pub fn lipschitz_estimate(f: &Function, k: &DomainBox, grid: usize) -> Result<LipschitzEstimate, EvalError> {
    let grid = grid.max(2);
    let nodes: Vec<Vec<f64>> = grid_nodes(k, grid - 1).into_iter().filter(|p| f.domain.contains(p)).collect();
    let values = nodes.iter().map(|p| f.eval(p)).collect::<Result<Vec<f64>, _>>()?;
    let mut best = 0.0_f64;
    for i in 0..nodes.len() {
        for j in (i + 1)..nodes.len() {
            let d = nodes[i].iter().zip(&nodes[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            if d > 0.0 {
                best = best.max((values[i] - values[j]).abs() / d);
            }
        }
    }
    Ok(LipschitzEstimate { value: best, points: nodes.len(), is_lower_bound: true })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn unit_line(src: &str) -> (Function, DomainBox) {
        let f = Function::unbounded(parse(src).unwrap());
        (f, DomainBox::new(vec![(-1.0, 1.0)]).unwrap())
    }

    // Independent oracle: adjacent-pair maximum on a uniform grid equals the
    // all-pairs maximum for functions whose secant slopes are bounded by the
    // local ones (convex/concave or piecewise linear).
    fn adjacent_max(f: impl Fn(f64) -> f64, n: usize) -> f64 {
        let xs: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect();
        xs.windows(2).map(|w| (f(w[1]) - f(w[0])).abs() / (w[1] - w[0])).fold(0.0, f64::max)
    }

    #[test]
    fn abs_on_unit_interval() {
        let (f, k) = unit_line("abs(x0)");
        let est = lipschitz_estimate(&f, &k, 201).unwrap();
        assert!((est.value - 1.0).abs() < 1e-9);
        assert!((est.value - adjacent_max(f64::abs, 201)).abs() < 1e-12);
    }

    #[test]
    fn square_on_unit_interval() {
        let (f, k) = unit_line("x0^2");
        let est = lipschitz_estimate(&f, &k, 201).unwrap();
        let oracle = adjacent_max(|x| x * x, 201);
        assert!((est.value - oracle).abs() < 1e-12);
        assert!((est.value - 2.0).abs() < 0.02, "{}", est.value);
    }

    #[test]
    fn constant_is_zero() {
        let f =
            Function::unbounded(crate::expr::Expression::with_arity(parse("3").unwrap().root().clone(), 2).unwrap());
        let k = DomainBox::cube(2, -5.0, 5.0).unwrap();
        assert_eq!(lipschitz_estimate(&f, &k, 7).unwrap().value, 0.0);
    }

    #[test]
    fn nested_refinement_is_monotone() {
        let (f, k) = unit_line("sin(3*x0) + abs(x0 - 0.3)");
        let mut last = 0.0;
        for g in [3, 5, 9, 17, 33, 65] {
            let v = lipschitz_estimate(&f, &k, g).unwrap().value;
            assert!(v >= last, "grid {g}: {v} < {last}");
            last = v;
        }
    }

    #[test]
    fn evaluation_errors_propagate() {
        let (f, k) = unit_line("1/x0");
        assert!(lipschitz_estimate(&f, &k, 3).is_err());
    }
}
