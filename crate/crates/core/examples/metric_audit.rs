//! Triangle inequality and symmetry of the distances on the sample spaces.
use std::sync::Arc;

use intrinsic_sections::carnot::{CosetQuotient, Splitting, Step2Group};
use intrinsic_sections::instances::LinearQuotient;
use intrinsic_sections::metric::{metric_axiom_audit, seeded_rng, Quotient};

fn main() -> intrinsic_sections::Result<()> {
    let mut rng = seeded_rng(8);
    let spaces: Vec<Box<dyn Quotient>> = vec![
        Box::new(LinearQuotient::first_coordinate(3)),
        Box::new(CosetQuotient::new(Splitting::new(Arc::new(
            intrinsic_sections::heisenberg::make_heisenberg(2, 1)?.group().clone(),
        )))),
        Box::new(CosetQuotient::new(Splitting::new(Arc::new(Step2Group::random_integer(4, 2, 1, &mut rng)?)))),
    ];
    for q in &spaces {
        let a = metric_axiom_audit(q.as_ref(), 5000, 1)?;
        println!("{}: triangle defect {:e}, asymmetry {:e}", q.name(), a.max_triangle_defect, a.max_asymmetry);
    }
    Ok(())
}
