use std::sync::Arc;

use gauge_measure::{DirectionGrid, Generator, SpaceNorm, SupportSet};
use proptest::prelude::*;

fn grid(n: usize) -> Arc<DirectionGrid> {
    Arc::new(DirectionGrid::new(2, SpaceNorm::Euclidean, n).unwrap())
}

fn generator() -> impl Strategy<Value = Generator> {
    let c = prop::collection::vec(-3.0..3.0f64, 2);
    prop_oneof![
        (c.clone(), prop::collection::vec(0.0..2.0f64, 2)).prop_map(|(center, radii)| Generator::Box { center, radii }),
        (c.clone(), 0.0..2.0f64).prop_map(|(center, radius)| Generator::Ball { center, radius }),
        (c, prop::collection::vec(prop::collection::vec(-1.5..1.5f64, 2), 1..4))
            .prop_map(|(center, generators)| Generator::Zonotope { center, generators }),
    ]
}

fn vertices(g: &Generator) -> Option<Vec<Vec<f64>>> {
    let (c, gens): (&[f64], Vec<Vec<f64>>) = match g {
        Generator::Box { center, radii } => (
            center,
            radii.iter().enumerate().map(|(i, r)| (0..2).map(|j| if i == j { *r } else { 0.0 }).collect()).collect(),
        ),
        Generator::Zonotope { center, generators } => (center, generators.clone()),
        Generator::Ball { .. } => return None,
    };
    let k = gens.len();
    Some(
        (0..1usize << k)
            .map(|mask| {
                let mut v = c.to_vec();
                for (j, g) in gens.iter().enumerate() {
                    let s = if mask >> j & 1 == 1 { 1.0 } else { -1.0 };
                    v[0] += s * g[0];
                    v[1] += s * g[1];
                }
                v
            })
            .collect(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn hausdorff_is_a_pseudometric(a in generator(), b in generator(), c in generator()) {
        let g = grid(64);
        let [a, b, c] = [a, b, c].map(|x| SupportSet::from_generator(x, g.clone()).unwrap());
        let ab = a.hausdorff(&b).unwrap();
        prop_assert_eq!(ab, b.hausdorff(&a).unwrap());
        prop_assert_eq!(a.hausdorff(&a).unwrap(), 0.0);
        prop_assert!(ab >= 0.0);
        prop_assert!(a.hausdorff(&c).unwrap() <= ab + b.hausdorff(&c).unwrap() + 1e-12);
    }

    #[test]
    fn support_matches_vertex_enumeration(g in generator()) {
        let s = SupportSet::from_generator(g.clone(), grid(64)).unwrap();
        for (u, h) in s.grid().iter().zip(s.values()) {
            let want = match (&g, vertices(&g)) {
                (_, Some(vs)) => vs.iter().map(|v| u[0] * v[0] + u[1] * v[1]).fold(f64::NEG_INFINITY, f64::max),
                (Generator::Ball { center, radius }, None) => u[0] * center[0] + u[1] * center[1] + radius * u[0].hypot(u[1]),
                _ => unreachable!(),
            };
            prop_assert!((h - want).abs() <= 1e-12 * (1.0 + want.abs()), "{h} vs {want}");
        }
    }

    #[test]
    fn minkowski_sum_and_scale_are_pointwise(a in generator(), b in generator(), lambda in 0.0..4.0f64) {
        let g = grid(32);
        let (sa, sb) = (SupportSet::from_generator(a.clone(), g.clone()).unwrap(), SupportSet::from_generator(b, g).unwrap());
        let sum = sa.minkowski_sum(&sb).unwrap();
        for ((s, x), y) in sum.values().iter().zip(sa.values()).zip(sb.values()) {
            prop_assert_eq!(*s, x + y);
        }
        let scaled = sa.scale(lambda).unwrap();
        for (s, x) in scaled.values().iter().zip(sa.values()) {
            prop_assert_eq!(*s, lambda * x);
        }
        prop_assert!(sa.scale(-lambda - 1e-3).is_err());
    }

    #[test]
    fn refined_grids_never_shrink_hausdorff(a in generator(), b in generator()) {
        let mut prev = 0.0;
        for n in [8, 16, 32, 64, 128] {
            let g = grid(n);
            let d = SupportSet::from_generator(a.clone(), g.clone()).unwrap().hausdorff(&SupportSet::from_generator(b.clone(), g).unwrap()).unwrap();
            prop_assert!(d >= prev);
            prev = d;
        }
    }

    #[test]
    fn generated_sets_pass_the_convexity_check(g in generator()) {
        for n in [16, 64] {
            let s = SupportSet::from_generator(g.clone(), grid(n)).unwrap();
            prop_assert!(s.check_convexity().convex);
        }
        let g3 = Arc::new(DirectionGrid::default_for(3, SpaceNorm::Euclidean).unwrap());
        let lifted = Generator::Ball { center: vec![g.center()[0], g.center()[1], 0.5], radius: 1.0 };
        prop_assert!(SupportSet::from_generator(lifted, g3).unwrap().check_convexity().convex);
    }
}

#[test]
fn box_hausdorff_benchmark() {
    let g = grid(64);
    let unit = SupportSet::from_generator(Generator::Box { center: vec![0.5, 0.5], radii: vec![0.5, 0.5] }, g.clone()).unwrap();
    let double = SupportSet::from_generator(Generator::Box { center: vec![1.0, 1.0], radii: vec![1.0, 1.0] }, g).unwrap();
    assert!((unit.hausdorff(&double).unwrap() - 2f64.sqrt()).abs() <= 1e-3);
}
