use proptest::prelude::*;

use conewright::cones::{btc_hyperplane_membership, estimate_btc_cone, estimate_peano_cone, ScaleSchedule};
use conewright::expr::{parse, Function};
use conewright::geometry::LinearFunctional;
use conewright::subdiff::{btc_subdifferential_1d, clarke_directional, clarke_subdifferential, DEFAULT_TOL};

fn config() -> ProptestConfig {
    ProptestConfig { cases: 6, ..ProptestConfig::default() }
}

/// Coefficients printed with two decimals, so the source text is exact.
fn coeff() -> impl Strategy<Value = f64> {
    (-300i32..=300).prop_map(|n| n as f64 / 100.0)
}

/// `p` to the right of zero, `q` to the left.
fn kink(p: f64, q: f64) -> String {
    format!("{p}*max(x0, 0) + {q}*min(x0, 0)")
}

fn line(src: &str) -> Function {
    Function::unbounded(parse(src).unwrap())
}

fn flipped(d: &[f64]) -> Vec<f64> {
    d.iter().map(|x| -x).collect()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn peano_directions_lie_in_the_btc(p in coeff(), q in coeff()) {
        let f = line(&kink(p, q));
        let s = ScaleSchedule::default();
        let peano = estimate_peano_cone(&f, &[0.0], &s).unwrap();
        let btc = estimate_btc_cone(&f, &[0.0], &s).unwrap();
        for d in &peano.directions.directions {
            let gap = btc.directions.distance_to(d).min(btc.directions.distance_to(&flipped(d)));
            prop_assert!(gap <= 2.0 * s.angular_tol(), "{d:?} is {gap} away from the BTC");
        }
    }

    #[test]
    fn restricting_the_domain_shrinks_the_peano_cone(p in coeff(), q in coeff()) {
        let src = kink(p, q);
        let s = ScaleSchedule::default();
        let full = estimate_peano_cone(&line(&src), &[0.0], &s).unwrap();
        let half = Function::on_box(parse(&src).unwrap(), vec![(0.0, 1.0)]).unwrap();
        let restricted = estimate_peano_cone(&half, &[0.0], &s).unwrap();
        prop_assert!(restricted.directions.len() <= full.directions.len());
        for d in &restricted.directions.directions {
            prop_assert!(d[0] >= -1e-12, "{d:?} points out of [0, 1]");
            prop_assert!(full.directions.distance_to(d) <= 2.0 * s.angular_tol());
        }
    }

    #[test]
    fn estimates_are_reproducible(p in coeff(), q in coeff(), seed in any::<u64>()) {
        let f = line(&kink(p, q));
        let s = ScaleSchedule::default().with_seed(seed);
        prop_assert_eq!(estimate_btc_cone(&f, &[0.0], &s).unwrap(), estimate_btc_cone(&f, &[0.0], &s).unwrap());
        prop_assert_eq!(btc_subdifferential_1d(&f, 0.0, &s).unwrap(), btc_subdifferential_1d(&f, 0.0, &s).unwrap());
    }

    #[test]
    fn kink_slopes_span_the_btc_subdifferential(p in coeff(), q in coeff()) {
        let s = ScaleSchedule::default();
        let est = btc_subdifferential_1d(&line(&kink(p, q)), 0.0, &s).unwrap();
        let (lo, hi) = (p.min(q), p.max(q));
        prop_assert!(est.contains(lo, DEFAULT_TOL) && est.contains(hi, DEFAULT_TOL), "{est:?}");
        prop_assert!(est.contains((lo + hi) / 2.0, DEFAULT_TOL));
        prop_assert!(!est.contains(hi + 0.5, DEFAULT_TOL) && !est.contains(lo - 0.5, DEFAULT_TOL));
    }

    #[test]
    fn subgradients_give_hyperplanes_in_the_btc(p in coeff(), q in coeff(), t in 0.0f64..=1.0) {
        let s = ScaleSchedule::default();
        let xi = p.min(q) + t * (p - q).abs();
        let l = LinearFunctional::new(vec![xi]);
        let m = btc_hyperplane_membership(&line(&kink(p, q)), &[0.0], &l, &[vec![1.0]], &s, 2.0 * s.angular_tol())
            .unwrap();
        prop_assert!(m.member, "slope {xi}: residual {}", m.worst());
    }

    #[test]
    fn smooth_functions_have_their_derivative_and_nothing_else(
        c in prop::collection::vec(coeff(), 4),
        a in -0.75f64..0.75,
    ) {
        let src = format!("{} + {}*x0 + {}*x0^2 + {}*sin(x0)", c[0], c[1], c[2], c[3]);
        let slope = c[1] + 2.0 * c[2] * a + c[3] * a.cos();
        let f = line(&src);
        let s = ScaleSchedule::default();
        let btc = btc_subdifferential_1d(&f, a, &s).unwrap();
        prop_assert!(btc.contains(slope, DEFAULT_TOL), "{slope} not in {:?}", btc.intervals);
        prop_assert!(btc.width() <= DEFAULT_TOL, "{:?} does not shrink to a point", btc.intervals);
        let (lo, hi) = clarke_subdifferential(&f, &[a], 2, &s, DEFAULT_TOL).unwrap().interval().unwrap();
        prop_assert!(lo - DEFAULT_TOL <= slope && slope <= hi + DEFAULT_TOL, "{slope} not in [{lo}, {hi}]");
    }

    #[test]
    fn support_values_are_consistent_and_bounded(p in coeff(), q in coeff(), r in coeff()) {
        let f = Function::unbounded(parse(&format!("{p}*abs(x0) + {q}*max(x0, x1) + {r}*x1")).unwrap());
        let set = clarke_subdifferential(&f, &[0.0, 0.0], 16, &ScaleSchedule::default(), DEFAULT_TOL).unwrap();
        let m = set.lipschitz;
        for (v, h) in set.directions.iter().zip(&set.support) {
            let opposite = set.directions.iter().position(|w| w.iter().zip(v).all(|(a, b)| (a + b).abs() < 1e-12));
            if let Some(j) = opposite {
                prop_assert!(*h >= -set.support[j] - 2.0 * set.tol, "h({v:?}) = {h}, h(-v) = {}", set.support[j]);
            }
            prop_assert!(h.abs() <= m * (1.0 + set.tol), "|h({v:?})| = {} exceeds {m}", h.abs());
        }
    }

    #[test]
    fn directional_derivatives_scale_with_the_function(p in coeff(), q in coeff(), c in 1u32..20) {
        let c = c as f64 / 4.0;
        let s = ScaleSchedule::default();
        let base = clarke_directional(&line(&kink(p, q)), &[0.0], &[1.0], &s).unwrap().value;
        let scaled = clarke_directional(&line(&format!("{c}*({})", kink(p, q))), &[0.0], &[1.0], &s).unwrap().value;
        prop_assert!((scaled - c * base).abs() <= 1e-6 * (1.0 + c * base.abs()), "{scaled} vs {c} * {base}");
    }
}
