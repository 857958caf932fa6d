use std::sync::Arc;

use intrinsic_sections::carnot::{GroupPoint, Splitting, Step2Group};
use intrinsic_sections::metric::seeded_rng;
use intrinsic_sections::sections::{GraphSection, GridTable, Height};
use proptest::prelude::*;

fn group(seed: u64) -> Arc<Step2Group> {
    let mut rng = seeded_rng(seed);
    Arc::new(Step2Group::random_integer(3, 2, 2, &mut rng).unwrap())
}

fn point() -> impl Strategy<Value = GroupPoint> {
    (prop::collection::vec(-3.0..3.0f64, 3), prop::collection::vec(-3.0..3.0f64, 2))
        .prop_map(|(a, b)| GroupPoint::new(a, b))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn group_axioms(seed in 0u64..16, p in point(), q in point(), r in point()) {
        let g = group(seed);
        let lhs = g.multiply(&g.multiply(&p, &q).unwrap(), &r).unwrap();
        let rhs = g.multiply(&p, &g.multiply(&q, &r).unwrap()).unwrap();
        prop_assert!(lhs.sup_diff(&rhs) <= 1e-11);
        let e = g.multiply(&p, &g.invert(&p)).unwrap();
        prop_assert!(e.sup_diff(&g.identity()) <= 1e-12);
        prop_assert!(g.multiply(&p, &g.identity()).unwrap().sup_diff(&p) == 0.0);
    }

    #[test]
    fn dilation_is_a_homomorphism(seed in 0u64..16, l in 0.1..5.0f64, p in point(), q in point()) {
        let g = group(seed);
        let a = g.dilate(l, &g.multiply(&p, &q).unwrap());
        let b = g.multiply(&g.dilate(l, &p), &g.dilate(l, &q)).unwrap();
        prop_assert!(a.sup_diff(&b) <= 1e-10 * l.max(1.0).powi(2));
        let d = g.distance(&g.dilate(l, &p), &g.dilate(l, &q)).unwrap();
        prop_assert!((d - l * g.distance(&p, &q).unwrap()).abs() <= 1e-10 * l.max(1.0));
    }

    #[test]
    fn projection_is_constant_on_fibers(seed in 0u64..16, p in point(), t in -4.0..4.0f64) {
        let s = Splitting::new(group(seed));
        let a = s.project_n(&p).unwrap();
        let b = s.project_n(&s.group().multiply(&p, &s.h(t)).unwrap()).unwrap();
        prop_assert!(a.sup_diff(&b) <= 1e-11);
        prop_assert!(s.in_n(&a));
        prop_assert!(s.project_n(&a).unwrap().sup_diff(&a) <= 1e-12);
    }

    #[test]
    fn graph_lands_in_its_fiber(seed in 0u64..16, y in prop::collection::vec(-2.0..2.0f64, 4), c in -3.0..3.0f64) {
        let s = Splitting::new(group(seed));
        let phi = GraphSection::new("lin", s.clone(), Height::linear(4, 1, c)).unwrap();
        let p = phi.point(&y).unwrap();
        prop_assert!(s.n_coords(&s.project_n(&p).unwrap())
            .iter().zip(&y).all(|(a, b)| (a - b).abs() <= 1e-12));
    }

    #[test]
    fn grid_interpolation_reproduces_affine(a in -2.0..2.0f64, b in -2.0..2.0f64, c in -2.0..2.0f64,
                                            x in -1.0..1.0f64, t in -1.0..1.0f64) {
        let values = [-1.0, 0.0, 1.0].iter().flat_map(|u| [-1.0, 1.0].map(|v| a + b * u + c * v)).collect();
        let grid = Height::Grid(GridTable { lower: vec![-1.0, -1.0], upper: vec![1.0, 1.0], shape: vec![3, 2], values });
        prop_assert!((grid.eval(&[x, t]).unwrap() - (a + b * x + c * t)).abs() <= 1e-12);
    }
}
