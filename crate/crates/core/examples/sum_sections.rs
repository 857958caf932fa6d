//! Sum of a compatible pair of graph sections on a step-2 group.
use std::sync::Arc;

use intrinsic_sections::carnot::{Splitting, Step2Group};
use intrinsic_sections::metric::{BoxDomain, Sampler};
use intrinsic_sections::sections::{sum_sections_step2, GraphSection, Height};

fn main() -> intrinsic_sections::Result<()> {
    // m = 3, n = 2 with [e1, e2] = f1 and [e2, e3] = f2
    let b1 = vec![0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0];
    let b2 = vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, -1.0, 0.0];
    let split = Splitting::new(Arc::new(Step2Group::new(3, 2, vec![b1, b2])?));
    let flat = GraphSection::flat(split.clone());
    let other = GraphSection::new("x3", split, Height::linear(4, 1, 0.7))?;
    let sampler = Sampler::random(BoxDomain::cube(4, -1.0, 1.0)?, 3);
    for (phi, psi) in [(&flat, &flat), (&flat, &other), (&other, &flat)] {
        match sum_sections_step2(phi, psi, &sampler, 300, 4) {
            Ok(s) => println!(
                "{} + {}: max defect {:e}, residual {:e}, section {}, L-hat {:.4}",
                phi.name(),
                psi.name(),
                s.report.compatibility.max_defect,
                s.report.max_homomorphism_residual,
                s.report.check.passed,
                s.report.lipschitz.estimate
            ),
            Err(e) => println!("{} + {}: rejected: {e}", phi.name(), psi.name()),
        }
    }
    Ok(())
}
