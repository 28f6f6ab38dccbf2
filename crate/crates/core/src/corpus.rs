//! The built-in self-test corpus: the worked examples, remarks and
//! counterexamples the estimators are expected to reproduce.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cones::{
    btc_hyperplane_membership, distance_realization_check, estimate_btc_cone, estimate_peano_cone, ScaleSchedule,
};
use crate::error::{Error, Result};
use crate::expr::{parse, parse_with_arity, Function};
use crate::geometry::{dot, LinearFunctional};
use crate::mvt::{
    lagrange_search, lebourg_certify, noncompact_counterexample_report, normal_lagrange_search, rolle_search,
};
use crate::subdiff::{
    btc_subdifferential_1d, clarke_subdifferential, compare_clarke_btc, frechet_member, limiting_subdifferential,
    lipschitz_gate, DEFAULT_GRID, DEFAULT_TOL,
};

/// Outcome of one corpus check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// An estimate did not stabilize across the trailing levels.
    Unstable,
    /// The Lipschitz gate refused the function where the check needs it.
    NotLipschitz,
    Error,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Unstable => "UNSTABLE",
            Status::NotLipschitz => "NOT_LIPSCHITZ",
            Status::Error => "ERROR",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemOutcome {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

pub struct CorpusItem {
    pub name: &'static str,
    pub summary: &'static str,
    check: fn(&ScaleSchedule) -> Result<(bool, String)>,
}

impl CorpusItem {
    pub fn run(&self, sched: &ScaleSchedule) -> ItemOutcome {
        let (status, detail) = match (self.check)(sched) {
            Ok((true, d)) => (Status::Pass, d),
            Ok((false, d)) => (Status::Fail, d),
            Err(e @ Error::UnstableEstimate(_)) => (Status::Unstable, e.to_string()),
            Err(e @ Error::NotLipschitz { .. }) => (Status::NotLipschitz, e.to_string()),
            Err(e) => (Status::Error, e.to_string()),
        };
        ItemOutcome { name: self.name.to_string(), status, detail }
    }
}

/// Runs every item (concurrently); outcomes come back in corpus order.
pub fn run_corpus(sched: &ScaleSchedule) -> Vec<ItemOutcome> {
    corpus().par_iter().map(|item| item.run(sched)).collect()
}

/// One line per outcome plus a summary; deterministic for a fixed schedule.
pub fn render(outcomes: &[ItemOutcome], sched: &ScaleSchedule) -> String {
    let mut s = format!(
        "conewright selftest: seed {}, {} levels, {} samples per level\n",
        sched.seed, sched.levels, sched.samples_per_level
    );
    let width = outcomes.iter().map(|o| o.name.len()).max().unwrap_or(0);
    for o in outcomes {
        let _ = writeln!(s, "{:<13} {:<width$}  {}", o.status.label(), o.name, o.detail);
    }
    let passed = outcomes.iter().filter(|o| o.status == Status::Pass).count();
    let _ = writeln!(s, "{passed}/{} passed", outcomes.len());
    s
}

const TOL: f64 = DEFAULT_TOL;

fn line(src: &str) -> Result<Function> {
    Ok(Function::unbounded(parse_with_arity(src, 1).map_err(|e| Error::InvalidInput(e.to_string()))?))
}

fn func(src: &str) -> Result<Function> {
    Ok(Function::unbounded(parse(src).map_err(|e| Error::InvalidInput(e.to_string()))?))
}

fn on_box(src: &str, bounds: Vec<(f64, f64)>) -> Result<Function> {
    Ok(Function::on_box(parse(src).map_err(|e| Error::InvalidInput(e.to_string()))?, bounds)?)
}

fn fmt_intervals(iv: &[(f64, f64)]) -> String {
    let mut s = String::new();
    for (i, (lo, hi)) in iv.iter().enumerate() {
        if i > 0 {
            s.push_str(" ∪ ");
        }
        let _ = write!(s, "[{lo:.4}, {hi:.4}]");
    }
    if s.is_empty() {
        s.push('∅');
    }
    s
}

fn close_interval(iv: &[(f64, f64)], lo: f64, hi: f64, tol: f64) -> bool {
    iv.len() == 1 && (iv[0].0 - lo).abs() <= tol && (iv[0].1 - hi).abs() <= tol
}

fn oscillating() -> Result<Function> {
    line("piecewise(x0 == 0, 0, x0^2 * sin(1/x0))")
}

/// The ten Lipschitz functions on which Clarke and BTC are compared, with the
/// point at which they are compared.
pub const LIPSCHITZ_CORPUS: [(&str, &str, &[f64]); 10] = [
    ("abs", "abs(x0)", &[0.0]),
    ("square", "x0^2", &[0.0]),
    ("oscillating", "piecewise(x0 == 0, 0, x0^2 * sin(1/x0))", &[0.0]),
    ("relu", "max(x0, 0)", &[0.0]),
    ("neg_abs", "min(x0, -x0)", &[0.0]),
    ("abs_plus_square", "abs(x0) + x0^2", &[0.0]),
    ("sin_abs", "sin(abs(x0))", &[0.0]),
    ("cubic", "x0^3 - x0", &[0.0]),
    ("l1_norm", "abs(x0) + abs(x1)", &[0.0, 0.0]),
    ("max2", "max(x0, x1)", &[0.0, 0.0]),
];

fn inkluzja(index: usize, sched: &ScaleSchedule) -> Result<(bool, String)> {
    let (_, src, a) = LIPSCHITZ_CORPUS[index];
    let out = compare_clarke_btc(&func(src)?, a, sched, TOL)?;
    Ok((out.pass, format!("{src} at {a:?}: Hausdorff {:.4}", out.hausdorff)))
}

macro_rules! inkluzja_item {
    ($i:expr, $name:expr) => {
        CorpusItem {
            name: $name,
            summary: "Clarke generalized gradient equals the BTC subdifferential",
            check: |s| inkluzja($i, s),
        }
    };
}

pub fn corpus() -> Vec<CorpusItem> {
    vec![
        CorpusItem {
            name: "example1_constant",
            summary: "constant function: BTC is the horizontal line, B̂ = {0}",
            check: |s| {
                let f = line("3")?;
                let cone = estimate_btc_cone(&f, &[0.2], s)?;
                let est = btc_subdifferential_1d(&f, 0.2, s)?;
                let horizontal = cone.directions.directions.iter().all(|d| d[1].abs() < 1e-9);
                Ok((
                    horizontal && close_interval(&est.intervals, 0.0, 0.0, 1e-9) && !est.infinity,
                    format!("{} BTC directions, B̂ = {}", cone.directions.len(), fmt_intervals(&est.intervals)),
                ))
            },
        },
        CorpusItem {
            name: "example2_linear",
            summary: "linear function: B̂ is its slope",
            check: |s| {
                let est = btc_subdifferential_1d(&line("2*x0 + 1")?, -0.4, s)?;
                Ok((close_interval(&est.intervals, 2.0, 2.0, 1e-6), format!("B̂ = {}", fmt_intervals(&est.intervals))))
            },
        },
        CorpusItem {
            name: "example3_restriction",
            summary: "restricting the domain shrinks the BTC",
            check: |s| {
                let small = estimate_btc_cone(&on_box("abs(x0)", vec![(0.0, 1.0)])?, &[0.0], s)?;
                let large = estimate_btc_cone(&on_box("abs(x0)", vec![(-1.0, 1.0)])?, &[0.0], s)?;
                let worst =
                    small.directions.directions.iter().map(|w| large.directions.distance_to(w)).fold(0.0, f64::max);
                Ok((
                    worst <= large.angular_tol,
                    format!(
                        "{} ⊂ {} directions, worst gap {worst:.2e}",
                        small.directions.len(),
                        large.directions.len()
                    ),
                ))
            },
        },
        CorpusItem {
            name: "example4_gradient",
            summary: "the gradient of a C¹ function lies in B̂",
            check: |s| {
                let f = func("x0^2 + x0*x1")?;
                let l = LinearFunctional::new(vec![4.0, 1.0]);
                let m = btc_hyperplane_membership(&f, &[1.0, 2.0], &l, &crate::geometry::sphere_grid(2, 16), s, TOL)?;
                Ok((m.member, format!("∇f(1,2) = (4, 1), worst residual {:.2e}", m.worst())))
            },
        },
        CorpusItem {
            name: "example5_abs",
            summary: "|x| at 0: B̂ = [−1, 1]",
            check: |s| {
                let est = btc_subdifferential_1d(&line("abs(x0)")?, 0.0, s)?;
                Ok((
                    close_interval(&est.intervals, -1.0, 1.0, 0.02) && !est.infinity,
                    format!("B̂ = {}", fmt_intervals(&est.intervals)),
                ))
            },
        },
        CorpusItem {
            name: "example6_two_thirds_power",
            summary: "|x|^(2/3) at 0: B̂ = ℝ ∪ {∞}; not Lipschitz",
            check: |s| {
                let f = line("sabs_pow(x0, 2/3)")?;
                let est = btc_subdifferential_1d(&f, 0.0, s)?;
                let refused = matches!(lipschitz_gate(&f, &[0.0], s), Err(Error::NotLipschitz { .. }));
                Ok((
                    est.infinity && est.max_abs_slope > 1e3 && refused,
                    format!("∞ flag {}, max |slope| {:.3e}, gate refuses: {refused}", est.infinity, est.max_abs_slope),
                ))
            },
        },
        CorpusItem {
            name: "remark_oscillating",
            summary: "x² sin(1/x) at 0: B̂ = [−1, 1]",
            check: |s| {
                let est = btc_subdifferential_1d(&oscillating()?, 0.0, s)?;
                if !est.stabilized {
                    return Err(Error::UnstableEstimate(format!(
                        "slopes at 0 still move at finest radius {:.2e}: {}",
                        est.finest_radius,
                        fmt_intervals(&est.intervals)
                    )));
                }
                Ok((close_interval(&est.intervals, -1.0, 1.0, 0.05), format!("B̂ = {}", fmt_intervals(&est.intervals))))
            },
        },
        CorpusItem {
            name: "sum_rule",
            summary: "B̂(f + g) = B̂(f) + g′ for C¹ g",
            check: |s| {
                let est = btc_subdifferential_1d(&line("abs(x0) + x0^2")?, 0.0, s)?;
                Ok((
                    close_interval(&est.intervals, -1.0, 1.0, TOL),
                    format!("B̂(|x| + x²) = {}", fmt_intervals(&est.intervals)),
                ))
            },
        },
        CorpusItem {
            name: "sum_rule_counterexample",
            summary: "|x| + (−|x|): B̂ = {0} ∌ 2 although 1 + 1 = 2",
            check: |s| {
                let est = btc_subdifferential_1d(&line("abs(x0) + -abs(x0)")?, 0.0, s)?;
                Ok((
                    close_interval(&est.intervals, 0.0, 0.0, TOL) && !est.contains(2.0, TOL),
                    format!("B̂ = {}", fmt_intervals(&est.intervals)),
                ))
            },
        },
        CorpusItem {
            name: "distance_remark",
            summary: "||x| − 1| and (0, 7): distance not realized at a = 0",
            check: |_| {
                let f = on_box("abs(abs(x0) - 1)", vec![(-6.0, 6.0)])?;
                let r = distance_realization_check(&f, &f.domain, &[0.0, 7.0], &[0.0], 12001)?;
                Ok((
                    !r.realized && (r.argmin[0] - 4.0).abs() <= 0.05,
                    format!("dist at a {:.4}, min {:.4} at x = {:.4}", r.distance_at_a, r.min_distance, r.argmin[0]),
                ))
            },
        },
        CorpusItem {
            name: "noncompact_remark",
            summary: "x²y on the strip: Lagrange fails without compactness",
            check: |_| {
                let r = noncompact_counterexample_report()?;
                Ok((
                    r.margin >= 0.19 - 1e-12 && r.margin_stable && r.truncated_refused,
                    format!(
                        "margin {:.4} (refined {:.4}), truncation refused: {}",
                        r.margin, r.refined_margin, r.truncated_refused
                    ),
                ))
            },
        },
        CorpusItem {
            name: "rolle_abs",
            summary: "Rolle for |x| on [−1, 1]: c = 0",
            check: |s| {
                let f = on_box("abs(x0)", vec![(-1.0, 1.0)])?;
                let cert = rolle_search(&f, &f.domain, 1.0, s, TOL)?;
                Ok((cert.point[0].abs() <= 1e-3, format!("c = {:.6}, residual {:.2e}", cert.point[0], cert.residual)))
            },
        },
        CorpusItem {
            name: "rolle_cubic",
            summary: "Rolle for x³ − x on [−1, 1]: c = −1/√3",
            check: |s| {
                let f = on_box("x0^3 - x0", vec![(-1.0, 1.0)])?;
                let cert = rolle_search(&f, &f.domain, 0.0, s, TOL)?;
                let want = -1.0 / 3f64.sqrt();
                Ok((
                    (cert.point[0] - want).abs() <= 1e-3,
                    format!("c = {:.6}, residual {:.2e}", cert.point[0], cert.residual),
                ))
            },
        },
        CorpusItem {
            name: "lagrange_square",
            summary: "Lagrange for x² on [0, 1] with L = 1: c = 1/2",
            check: |s| {
                let f = on_box("x0^2", vec![(0.0, 1.0)])?;
                let cert = lagrange_search(&f, &f.domain, &LinearFunctional::new(vec![1.0]), 0.0, s, TOL)?;
                Ok((
                    (cert.point[0] - 0.5).abs() <= 1e-3,
                    format!("c = {:.6}, residual {:.2e}", cert.point[0], cert.residual),
                ))
            },
        },
        CorpusItem {
            name: "normal_lagrange_square",
            summary: "normal-cone Lagrange for x² on [0, 1] with L = 1: c = 1/2, v ⊥ (1, 1)",
            check: |s| {
                let f = on_box("x0^2", vec![(0.0, 1.0)])?;
                let cert = normal_lagrange_search(&f, &f.domain, &LinearFunctional::new(vec![1.0]), 0.0, s, TOL)?;
                let perp = dot(&cert.target, &[1.0, 1.0]).abs();
                Ok((
                    (cert.point[0] - 0.5).abs() <= 1e-3 && perp <= 1e-9 && cert.residual <= TOL,
                    format!(
                        "c = {:.6}, v = ({:.4}, {:.4}), |⟨v, (1,1)⟩| = {perp:.1e}",
                        cert.point[0], cert.target[0], cert.target[1]
                    ),
                ))
            },
        },
        CorpusItem {
            name: "lebourg_abs",
            summary: "Lebourg for |x| on [−1, 2]: c = 0",
            check: |s| {
                let cert = lebourg_certify(&line("abs(x0)")?, &[-1.0], &[2.0], s, TOL)?;
                Ok((cert.point[0].abs() <= 1e-3, format!("c = {:.6}, residual {:.2e}", cert.point[0], cert.residual)))
            },
        },
        inkluzja_item!(0, "inkluzja_abs"),
        inkluzja_item!(1, "inkluzja_square"),
        inkluzja_item!(2, "inkluzja_oscillating"),
        inkluzja_item!(3, "inkluzja_relu"),
        inkluzja_item!(4, "inkluzja_neg_abs"),
        inkluzja_item!(5, "inkluzja_abs_plus_square"),
        inkluzja_item!(6, "inkluzja_sin_abs"),
        inkluzja_item!(7, "inkluzja_cubic"),
        inkluzja_item!(8, "inkluzja_l1_norm"),
        inkluzja_item!(9, "inkluzja_max2"),
        CorpusItem {
            name: "inkluzja_two_thirds_out_of_scope",
            summary: "|x|^(2/3): the comparison is refused, not failed",
            check: |s| match compare_clarke_btc(&line("sabs_pow(x0, 2/3)")?, &[0.0], s, TOL) {
                Err(Error::NotLipschitz { coarse, fine }) => {
                    Ok((true, format!("refused: sampled constant {coarse:.3} → {fine:.3}")))
                }
                Err(e) => Err(e),
                Ok(out) => Ok((false, format!("unexpectedly compared, Hausdorff {:.4}", out.hausdorff))),
            },
        },
        CorpusItem {
            name: "clarke_scaling",
            summary: "∂(λf) = λ∂f for λ ∈ {−2, 1/2}",
            check: |s| {
                let base =
                    clarke_subdifferential(&line("abs(x0) + x0")?, &[0.0], DEFAULT_GRID, s, TOL)?.interval().unwrap();
                let mut worst = 0.0_f64;
                for (lambda, src) in [(-2.0, "-2*(abs(x0) + x0)"), (0.5, "0.5*(abs(x0) + x0)")] {
                    let (lo, hi) =
                        clarke_subdifferential(&line(src)?, &[0.0], DEFAULT_GRID, s, TOL)?.interval().unwrap();
                    let (a, b) = (lambda * base.0, lambda * base.1);
                    worst = worst.max((lo - a.min(b)).abs()).max((hi - a.max(b)).abs());
                }
                Ok((worst <= 2.0 * TOL, format!("∂f(0) = {}, worst endpoint gap {worst:.4}", fmt_intervals(&[base]))))
            },
        },
        CorpusItem {
            name: "clarke_extremum",
            summary: "0 ∈ ∂f at local extrema",
            check: |s| {
                let mut detail = String::new();
                let mut ok = true;
                for (src, a) in [("abs(x0)", 0.0), ("min(x0, -x0)", 0.0), ("x0^3 - x0", -1.0 / 3f64.sqrt())] {
                    let set = clarke_subdifferential(&line(src)?, &[a], DEFAULT_GRID, s, TOL)?;
                    ok &= set.contains(&[0.0]);
                    let _ = write!(detail, "{src}: violation {:.3}; ", set.violation(&[0.0]));
                }
                Ok((ok, detail.trim_end_matches("; ").to_string()))
            },
        },
        CorpusItem {
            name: "clarke_sum_inclusion",
            summary: "∂(f + g) ⊂ ∂f + ∂g",
            check: |s| {
                let a = [0.0, 0.0];
                let f = clarke_subdifferential(&func("abs(x0) + 0*x1")?, &a, DEFAULT_GRID, s, TOL)?;
                let g = clarke_subdifferential(&func("-abs(x0 - x1)")?, &a, DEFAULT_GRID, s, TOL)?;
                let fg = clarke_subdifferential(&func("abs(x0) - abs(x0 - x1)")?, &a, DEFAULT_GRID, s, TOL)?;
                let sum = f.minkowski_sum(&g).expect("same grid");
                let worst = fg.support.iter().zip(&sum.support).map(|(h, k)| h - k).fold(f64::NEG_INFINITY, f64::max);
                Ok((worst <= TOL, format!("largest support excess {worst:.4}")))
            },
        },
        CorpusItem {
            name: "nesting_neg_abs",
            summary: "−|x| at 0: Fréchet ∅ ⊂ limiting {−1, 1} ⊂ Clarke [−1, 1]",
            check: |s| {
                let f = line("-abs(x0)")?;
                let candidates: Vec<Vec<f64>> = [-1.0, -0.5, 0.0, 0.5, 1.0].iter().map(|v| vec![*v]).collect();
                let mut frechet = Vec::new();
                for v in &candidates {
                    if frechet_member(&f, &[0.0], v, s, TOL)?.member {
                        frechet.push(v[0]);
                    }
                }
                let limiting = limiting_subdifferential(&f, &[0.0], &candidates, s, TOL)?;
                let clarke = clarke_subdifferential(&f, &[0.0], DEFAULT_GRID, s, TOL)?;
                let lim: Vec<f64> = limiting.accepted.iter().map(|v| v[0]).collect();
                let chain = frechet.iter().all(|v| limiting.accepts(&[*v], 1e-12))
                    && limiting.accepted.iter().all(|v| clarke.contains(v));
                Ok((
                    frechet.is_empty() && lim == vec![-1.0, 1.0] && chain,
                    format!(
                        "Fréchet {frechet:?}, limiting {lim:?}, Clarke {}",
                        fmt_intervals(&[clarke.interval().unwrap()])
                    ),
                ))
            },
        },
        CorpusItem {
            name: "peano_abs",
            summary: "Peano cone of |x| at 0 is the two rays (±1, 1)/√2",
            check: |s| {
                let cone = estimate_peano_cone(&line("abs(x0)")?, &[0.0], s)?;
                let r = std::f64::consts::FRAC_1_SQRT_2;
                let gap = cone.directions.distance_to(&[r, r]).max(cone.directions.distance_to(&[-r, r]));
                Ok((
                    cone.stabilized && gap <= cone.angular_tol,
                    format!("{} directions, ray gap {gap:.2e}", cone.directions.len()),
                ))
            },
        },
    ]
}
