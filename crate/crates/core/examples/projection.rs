//! The quotient map onto N: closed form against the coset normal form, and
//! commutation with dilations.
use intrinsic_sections::carnot::{Splitting, Step2Group};
use intrinsic_sections::heisenberg::{check_dilation_commute, make_heisenberg};
use intrinsic_sections::metric::seeded_rng;
use std::sync::Arc;

fn main() -> intrinsic_sections::Result<()> {
    let h1 = make_heisenberg(1, 1)?;
    let p = h1.point(&[2.0, 3.0, 1.0]);
    println!("pi_N(2,3,1) = {:?}", h1.project_n(&p)?.coords());

    let h2 = make_heisenberg(2, 2)?;
    let r = check_dilation_commute(&h2, 10_000, 1)?;
    println!("H^2, k=2: max commutation defect {:e} over {} samples", r.max_defect, r.n_samples);

    let mut rng = seeded_rng(2);
    let g = Arc::new(Step2Group::random_integer(4, 2, 2, &mut rng)?);
    let split = Splitting::new(Arc::clone(&g));
    let mut gap = 0.0f64;
    for _ in 0..1000 {
        let p = g.random_point(1.0, &mut rng);
        gap = gap.max(split.project_formula(&p)?.sup_diff(&split.coset_normal_form(&p)?));
    }
    println!("random (4,2) group: formula vs coset form gap {gap:e}");
    Ok(())
}
