//! Values pinned by an independent computation: brute-force scans, exact
//! rational expansion, or closed forms worked by hand.
use std::sync::Arc;

use intrinsic_sections::carnot::{CosetQuotient, GroupPoint, Splitting, Step2Group};
use intrinsic_sections::heisenberg::make_heisenberg;
use intrinsic_sections::metric::*;
use intrinsic_sections::sections::*;
use intrinsic_sections::symbolic::SymbolicGroup;
use intrinsic_sections::Error;

fn h1_sampler(seed: u64) -> Sampler {
    Sampler::random(BoxDomain::cube(2, -1.0, 1.0).unwrap(), seed)
}

#[test]
fn flat_dilated_by_three() {
    let h = make_heisenberg(1, 1).unwrap();
    let flat = GraphSection::flat(h.splitting().unwrap());
    let r = dilate_section(&flat, 3.0, &h1_sampler(1), 500, 2, 1e-9).unwrap().report;
    assert!((r.chain_estimate - 3.0 * r.original.estimate).abs() <= 1e-9);
    assert!(r.passed && r.invariance_passed);
}

#[test]
fn tilted_dilated_by_two_matches_pair_by_pair() {
    let h = make_heisenberg(1, 1).unwrap();
    let phi = GraphSection::on_heisenberg(&h, "x2", Height::linear(2, 0, 1.0)).unwrap();
    let sampler = h1_sampler(3);
    let r = dilate_section(&phi, 2.0, &sampler, 500, 4, 1e-9).unwrap();
    // independent recomputation of the chain ratios from group arithmetic
    let g = h.group();
    let base = phi.to_section(sampler.clone()).unwrap();
    for (a, b) in sample_pairs(&sampler.domain, 50, 5) {
        let (pa, pb) = (phi.point(&a).unwrap(), phi.point(&b).unwrap());
        let num = g.distance(&g.dilate(2.0, &pa), &g.dilate(2.0, &pb)).unwrap();
        let den = base.quotient().fiber_distance(&pa.coords(), &b).unwrap();
        let ratio = g.distance(&pa, &pb).unwrap() / den;
        assert!((num / den - 2.0 * ratio).abs() <= 1e-9);
    }
    assert!(r.report.max_chain_ratio_defect <= 1e-9);
}

#[test]
fn fiber_distance_matches_dense_scan() {
    let mut rng = seeded_rng(6);
    let g = Arc::new(Step2Group::random_integer(3, 2, 2, &mut rng).unwrap());
    let split = Splitting::new(Arc::clone(&g));
    let q = CosetQuotient::new(split.clone());
    for _ in 0..10 {
        let x = g.random_point(1.0, &mut rng);
        let mut y = g.random_point(1.0, &mut rng);
        y.p1[0] = 0.0;
        let fast = q.fiber_distance(&x.coords(), &split.n_coords(&y)).unwrap();
        let brute = (-40_000..=40_000)
            .map(|i| {
                let t = i as f64 * 1e-4;
                g.distance(&x, &g.multiply(&y, &split.h(t)).unwrap()).unwrap()
            })
            .fold(f64::INFINITY, f64::min);
        assert!(fast <= brute + 1e-12, "{fast} vs {brute}");
        assert!(brute - fast <= 1e-3, "{fast} vs {brute}");
    }
}

#[test]
fn oracle_matches_numeric_defects_on_random_points() {
    let h = make_heisenberg(1, 1).unwrap();
    let oracle = DefectOracle::new(h.group()).unwrap();
    let mut rng = seeded_rng(7);
    for _ in 0..500 {
        let p = h.group().random_point(2.0, &mut rng);
        let q = h.group().random_point(2.0, &mut rng);
        let num = compatibility_values(h.group(), &p, &q).unwrap();
        let exact = oracle.eval(&p.coords(), &q.coords());
        assert!((num[0].defect - exact[0].0).abs() <= 1e-12);
        assert!((num[0].printed_defect - exact[0].1).abs() <= 1e-12);
    }
}

#[test]
fn residual_is_half_the_defect_in_a_random_group() {
    let mut rng = seeded_rng(8);
    let g = Arc::new(Step2Group::random_integer(4, 3, 3, &mut rng).unwrap());
    let split = Splitting::new(Arc::clone(&g));
    let s = SymbolicGroup::from_group(&g).unwrap();
    let res = s.homomorphism_residual();
    let half = num_rational::BigRational::new(1.into(), 2.into());
    for (l, c) in s.compatibility().iter().enumerate() {
        assert_eq!(res[4 + l], c.defect().scale(&half));
    }
    // numerical side of the same identity
    for _ in 0..200 {
        let p = g.random_point(1.0, &mut rng);
        let q = g.random_point(1.0, &mut rng);
        let a = split.project_formula(&g.multiply(&p, &q).unwrap()).unwrap();
        let b = projected_product_formula(&split, &p, &q).unwrap();
        assert!(a.sup_diff(&b) <= 1e-12);
    }
}

#[test]
fn generic_pair_rejected_with_witness() {
    let h = make_heisenberg(1, 1).unwrap();
    let mut rng = seeded_rng(9);
    let phi = GraphSection::on_heisenberg(&h, "a", random_quadratic_height(2, &mut rng)).unwrap();
    let psi = GraphSection::on_heisenberg(&h, "b", random_quadratic_height(2, &mut rng)).unwrap();
    match sum_sections_step2(&phi, &psi, &h1_sampler(10), 200, 11) {
        Err(Error::CompatibilityViolated { a, b, defects }) => {
            let row = compatibility_defect(&phi, &psi, &a, &b).unwrap();
            assert_eq!(row.layers[0].defect, defects[0]);
            // 2·p₁·q₂ by hand
            assert!((defects[0] - 2.0 * row.p[0] * row.q[1]).abs() <= 1e-12);
        }
        other => panic!("expected rejection, got {other:?}"),
    }
}

#[test]
fn flat_sum_is_doubled_flat() {
    let h = make_heisenberg(2, 1).unwrap();
    let flat = GraphSection::flat(h.splitting().unwrap());
    let sampler = Sampler::random(BoxDomain::cube(4, -1.0, 1.0).unwrap(), 12);
    let sum = sum_sections_step2(&flat, &flat, &sampler, 100, 13).unwrap();
    for y in sampler.points(20) {
        let doubled: Vec<f64> = std::iter::once(0.0).chain(y.iter().map(|v| 2.0 * v)).collect();
        assert_eq!(sum.section.evaluate(&y).unwrap(), doubled);
    }
    assert_eq!(sum.report.max_homomorphism_residual, 0.0);
}

#[test]
fn classification_witness_for_generic_pair() {
    let h = make_heisenberg(1, 1).unwrap();
    let mut rng = seeded_rng(14);
    let g = GraphSection::on_heisenberg(&h, "g", random_quadratic_height(2, &mut rng)).unwrap();
    let dom = BoxDomain::cube(2, -1.0, 1.0).unwrap();
    let c = heisenberg_compatibility_classify(&h, &g, &dom, &g, &dom, 200, 15).unwrap();
    assert_eq!(c.branch, Branch::Neither);
    assert!(!c.defect_vanishes);
    let (a, b) = c.compatibility.witness.clone().unwrap();
    let row = compatibility_defect(&g, &g, &a, &b).unwrap();
    assert_eq!(row.max_defect, c.compatibility.max_defect);
}

#[test]
fn grid_height_reproduces_affine_height() {
    // f = 1 + 2x₂ − t on a 3×4 grid is reproduced exactly by interpolation
    let h = make_heisenberg(1, 1).unwrap();
    let (xs, ts) = ([-1.0, 0.0, 1.0], [-1.0, -1.0 / 3.0, 1.0 / 3.0, 1.0]);
    let values = xs.iter().flat_map(|x| ts.iter().map(move |t| 1.0 + 2.0 * x - t)).collect();
    let grid = Height::Grid(GridTable {
        lower: vec![-1.0, -1.0],
        upper: vec![1.0, 1.0],
        shape: vec![3, 4],
        values,
    });
    let phi = GraphSection::on_heisenberg(&h, "grid", grid).unwrap();
    let mut rng = seeded_rng(16);
    let dom = BoxDomain::cube(2, -1.0, 1.0).unwrap();
    for _ in 0..100 {
        let y = dom.sample(&mut rng);
        assert!((phi.height_at(&y).unwrap() - (1.0 + 2.0 * y[0] - y[1])).abs() <= 1e-14);
    }
    let s = phi.to_section(Sampler::random(dom, 17)).unwrap();
    assert!(verify_section(&s, 200, 1e-12).unwrap().passed);
}

#[test]
fn dyadic_distances_are_exact() {
    // on dyadic points with integer matrices the group law is exact, so
    // d(p, p) = 0 and d(p, q) = d(q, p) hold bit for bit
    let mut rng = seeded_rng(18);
    let g = Step2Group::random_integer(4, 2, 3, &mut rng).unwrap();
    for _ in 0..500 {
        let p: GroupPoint = g.random_dyadic_point(4, &mut rng);
        let q = g.random_dyadic_point(4, &mut rng);
        assert_eq!(g.distance(&p, &p).unwrap(), 0.0);
        assert_eq!(g.distance(&p, &q).unwrap(), g.distance(&q, &p).unwrap());
    }
}
