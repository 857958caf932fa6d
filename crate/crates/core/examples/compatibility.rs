//! The compatibility expressions as exact polynomials, and their numeric
//! values on a pair of graph sections.
use intrinsic_sections::heisenberg::make_heisenberg;
use intrinsic_sections::sections::{compatibility_defect, GraphSection, Height};
use intrinsic_sections::symbolic::SymbolicGroup;

fn main() -> intrinsic_sections::Result<()> {
    let h = make_heisenberg(1, 1)?;
    let s = SymbolicGroup::from_group(h.group())?;
    let names = s.var_names();
    for (l, c) in s.compatibility().iter().enumerate() {
        println!("layer {l}: A1 = {}", c.a1.display_with(&names));
        println!("         A2 = {}", c.a2.display_with(&names));
        println!("     A1-A2 = {}", c.defect().display_with(&names));
        println!("  A1-A2 (printed signs) = {}", c.printed_defect().display_with(&names));
    }
    let res = s.homomorphism_residual();
    println!("pi(pq) - pi(p)pi(q), centre: {}", res[2].display_with(&names));

    let phi = GraphSection::on_heisenberg(&h, "tilt", Height::linear(2, 0, 1.0))?;
    let psi = GraphSection::flat(h.splitting()?);
    let row = compatibility_defect(&phi, &psi, &[0.5, 0.1], &[0.7, -0.2])?;
    println!("p = {:?}, q = {:?}, defect = {}", row.p, row.q, row.layers[0].defect);
    Ok(())
}
