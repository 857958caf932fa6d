//! pi(x) = 1/x with the section phi(y) = 1/y: every intrinsic ratio is 1.
use intrinsic_sections::instances::reciprocal_section;
use intrinsic_sections::metric::{lipschitz_estimate, verify_section};

fn main() -> intrinsic_sections::Result<()> {
    let phi = reciprocal_section(1.0, 10.0, 4)?;
    let check = verify_section(&phi, 1000, 1e-12)?;
    let lip = lipschitz_estimate(&phi, 1000, 4)?;
    println!("section check passed: {} (max residual {:e})", check.passed, check.max_residual);
    println!("L-hat = {} over {} pairs, witness {:?}", lip.estimate, lip.n_pairs, lip.witness);
    Ok(())
}
