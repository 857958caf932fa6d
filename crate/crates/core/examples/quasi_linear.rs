//! Scaling and summing sections of a weakly linear quotient, on
//! pi(x1, x2) = x1.
use std::sync::Arc;

use intrinsic_sections::instances::LinearQuotient;
use intrinsic_sections::metric::{BoxDomain, Quotient, Sampler, Section, SlopeParams};
use intrinsic_sections::quasi_linear::*;

fn main() -> intrinsic_sections::Result<()> {
    let base: Arc<dyn Quotient> = Arc::new(LinearQuotient::first_coordinate(2));
    let q = QuasiLinearQuotient::new(Arc::clone(&base), 1.0)?.declare_fibers_in_lines();
    let sampler = Sampler::random(BoxDomain::interval(-1.0, 1.0)?, 5);
    let phi = Section::new("phi", Arc::clone(&base), sampler.clone(), |y| Ok(vec![y[0], y[0] * y[0]]))?;
    let psi = Section::new("psi", Arc::clone(&base), sampler, |y| Ok(vec![y[0], (3.0 * y[0]).sin()]))?;

    let params = CheckParams::default();
    println!("quasi-linearity defect: {:e}", check_quasi_linearity(&q, 200, 1)?.max_defect);
    let scaled = scale_section(&q, &phi, 2.5, 500, 1, params)?;
    println!("scale by 2.5: max ratio change {:e}", scaled.max_ratio_defect);
    let comb = combine_sections(&q, &phi, &psi, 0.3, 1.7, params)?;
    println!("0.3 phi + 1.7 psi is a section of {} pi: {}", comb.factor, comb.check.passed);
    let fs = fiber_scaling_check(&q, 3.0, &[0.2], &[-0.4])?;
    println!("fiber scaling: {} vs {} (defect {:e})", fs.lhs, fs.rhs, fs.defect);
    let sum = sum_sections(&q, &phi, &psi, 500, 1, params)?;
    println!("L-hat(phi + psi) = {}", sum.lipschitz.estimate);
    let lb = leibniz_bound_check(
        &q,
        &phi,
        &psi,
        &[0.1],
        ConstantSource::Estimated { n_pairs: 500, seed: 1 },
        &SlopeParams::default(),
        params,
    )?;
    println!("slope bound at 0.1: {} <= {} ({})", lb.lhs, lb.rhs, lb.satisfied);
    Ok(())
}
