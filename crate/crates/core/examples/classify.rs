//! Which of the two vanishing branches make a pair of graph sections on H^n
//! compatible.
use intrinsic_sections::heisenberg::make_heisenberg;
use intrinsic_sections::metric::{seeded_rng, BoxDomain};
use intrinsic_sections::sections::{heisenberg_compatibility_classify, random_quadratic_height, GraphSection, Height};

fn main() -> intrinsic_sections::Result<()> {
    for n in [1, 2] {
        let h = make_heisenberg(n, 1)?;
        let d = 2 * n;
        let mut rng = seeded_rng(n as u64);
        let flat = GraphSection::on_heisenberg(&h, "flat", Height::zero())?;
        let g = GraphSection::on_heisenberg(&h, "g", random_quadratic_height(d, &mut rng))?;
        let full = BoxDomain::cube(d, -1.0, 1.0)?;
        // x_{n+1} pinned to zero, so psi_{n+1} vanishes
        let mut lo = vec![-1.0; d];
        let mut hi = vec![1.0; d];
        lo[n - 1] = 0.0;
        hi[n - 1] = 0.0;
        let pinned = BoxDomain::new(lo, hi)?;
        for (label, phi, pd, psi, qd) in [
            ("phi_1 = 0", &flat, &full, &g, &full),
            ("psi_n+1 = 0", &g, &full, &g, &pinned),
            ("generic", &g, &full, &g, &full),
        ] {
            let c = heisenberg_compatibility_classify(&h, phi, pd, psi, qd, 1000, 9)?;
            println!(
                "H^{n} {label:<12} branch {:?}, defect vanishes {}, printed-sign defect vanishes {}, oracle agrees {}",
                c.branch, c.defect_vanishes, c.printed_defect_vanishes, c.internally_consistent
            );
        }
    }
    Ok(())
}
