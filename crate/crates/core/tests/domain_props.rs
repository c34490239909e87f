mod common;

use gauge_measure::domain::{is_delta_fine, refine_to_delta_fine, riemann_sum};
use gauge_measure::{Gauge, Integrand, Interval, MeasurableSet, ScalarMeasure, SetOp};
use proptest::prelude::*;

fn interval() -> impl Strategy<Value = Interval<f64>> {
    (-5.0..5.0f64, 0.0..3.0f64, any::<bool>(), any::<bool>()).prop_map(|(lo, w, cl, ch)| {
        let w = if w < 0.05 { 0.0 } else { w };
        Interval::new(lo, lo + w, cl || w == 0.0, ch || w == 0.0).unwrap()
    })
}

fn set() -> impl Strategy<Value = MeasurableSet<f64>> {
    prop::collection::vec(interval(), 0..5).prop_map(MeasurableSet::from_intervals)
}

fn gauge() -> impl Strategy<Value = Gauge<f64>> {
    (0.01..0.5f64, 0.0..3.0f64).prop_map(|(h, k)| Gauge::new(move |x: f64| h * (1.0 + (k * x).sin().abs())))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn set_algebra_is_canonical(a in set(), b in set()) {
        for op in [SetOp::Union, SetOp::Intersect, SetOp::Diff] {
            let c = a.apply(&b, op);
            prop_assert_eq!(MeasurableSet::from_intervals(c.parts().to_vec()), c.clone());
            prop_assert!(c.parts().windows(2).all(|w| w[0].hi <= w[1].lo));
        }
    }

    #[test]
    fn set_algebra_matches_pointwise_logic(a in set(), b in set(), t in -6.0..9.0f64) {
        prop_assert_eq!(a.union(&b).contains(t), a.contains(t) || b.contains(t));
        prop_assert_eq!(a.intersect(&b).contains(t), a.contains(t) && b.contains(t));
        prop_assert_eq!(a.difference(&b).contains(t), a.contains(t) && !b.contains(t));
    }

    #[test]
    fn refinement_is_delta_fine_and_exact(a in set(), g in gauge()) {
        let p = refine_to_delta_fine(&a, &g).unwrap();
        prop_assert!(is_delta_fine(&p, &g));
        prop_assert!(p.is_partition_of(&a));
        let covered: f64 = p.items().iter().map(|(c, _)| c.width()).sum();
        prop_assert!((covered - a.length()).abs() <= 1e-12 * (1.0 + a.length()));
    }

    #[test]
    fn riemann_sum_is_additive_over_concatenation(lo in -2.0..0.0f64, mid in 0.0..1.0f64, hi in 1.0..3.0f64, h in 0.01..0.3f64) {
        let a = MeasurableSet::from_interval(Interval::right_open(lo, mid).unwrap());
        let b = MeasurableSet::closed(mid, hi).unwrap();
        let g = Gauge::constant(h);
        let (pa, pb) = (refine_to_delta_fine(&a, &g).unwrap(), refine_to_delta_fine(&b, &g).unwrap());
        let f = Integrand::new(|t: f64| t.cos() + t * t);
        let m = ScalarMeasure::lebesgue();
        let joint = riemann_sum(&f, &pa.concat(&pb).unwrap(), &m).unwrap();
        let sep = riemann_sum(&f, &pa, &m).unwrap() + riemann_sum(&f, &pb, &m).unwrap();
        prop_assert!((joint - sep).abs() <= 1e-12 * (1.0 + joint.abs()));
    }
}

#[test]
fn riemann_sums_converge_as_gauge_shrinks() {
    let f = Integrand::new(|t: f64| t.exp());
    let truth = std::f64::consts::E - 1.0;
    let m = ScalarMeasure::lebesgue();
    let mut prev = f64::INFINITY;
    for k in 4..=12 {
        let g = Gauge::constant(0.5f64.powi(k));
        let p = refine_to_delta_fine(&common::unit(), &g).unwrap();
        let err = (riemann_sum(&f, &p, &m).unwrap() - truth).abs();
        assert!(err <= 2.0 * prev, "k={k}: {err} vs {prev}");
        prev = err;
    }
    assert!(prev < 1e-3, "{prev}");
}
