//! Intrinsic slope of a graph section on H^1 over shrinking balls.
use intrinsic_sections::heisenberg::make_heisenberg;
use intrinsic_sections::metric::{intrinsic_slope, BoxDomain, Sampler, SlopeParams};
use intrinsic_sections::sections::{GraphSection, Height, Monomial};

fn main() -> intrinsic_sections::Result<()> {
    let h = make_heisenberg(1, 1)?;
    let f = Height::Polynomial {
        terms: vec![Monomial { coef: 0.5, powers: vec![2, 0] }, Monomial { coef: 1.0, powers: vec![0, 1] }],
    };
    let phi = GraphSection::on_heisenberg(&h, "f", f)?;
    let s = phi.to_section(Sampler::random(BoxDomain::cube(2, -1.0, 1.0)?, 0))?;
    let est = intrinsic_slope(&s, &[0.1, 0.2], &SlopeParams::default())?;
    for (r, sup) in est.radii.iter().zip(&est.sup_ratios) {
        println!("r = {r:<10.6} sup ratio = {sup:.6}");
    }
    println!("slope estimate: {}", est.extrapolated);
    Ok(())
}
