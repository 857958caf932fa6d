//! delta_lambda of a graph section against the dilated quotient.
use intrinsic_sections::heisenberg::make_heisenberg;
use intrinsic_sections::metric::{BoxDomain, Sampler};
use intrinsic_sections::sections::{dilate_section, GraphSection, Height};

fn main() -> intrinsic_sections::Result<()> {
    let h = make_heisenberg(1, 1)?;
    let phi = GraphSection::on_heisenberg(&h, "x2", Height::linear(2, 0, 1.0))?;
    let sampler = Sampler::random(BoxDomain::cube(2, -1.0, 1.0)?, 1);
    for lambda in [0.5, 2.0, 5.0] {
        let r = dilate_section(&phi, lambda, &sampler, 1000, 2, 1e-9)?.report;
        println!(
            "lambda {lambda}: L(phi) = {:.6}, chain max = {:.6} (= lambda L within {:e}), intrinsic ratios moved by {:e}",
            r.original.estimate, r.chain_estimate, r.estimate_defect, r.max_intrinsic_ratio_defect
        );
    }
    Ok(())
}
