//! Group law, inverses, dilations and the max gauge on H^1.
use intrinsic_sections::heisenberg::make_heisenberg;
use intrinsic_sections::metric::seeded_rng;

fn main() -> intrinsic_sections::Result<()> {
    let h = make_heisenberg(1, 1)?;
    let g = h.group();
    let p = h.point(&[1.0, 2.0, 3.0]);
    let q = h.point(&[4.0, 5.0, 6.0]);
    println!("p*q        = {:?}", g.multiply(&p, &q)?.coords());
    println!("p^-1       = {:?}", g.invert(&p).coords());
    println!("delta_2(p) = {:?}", g.dilate(2.0, &p).coords());
    println!("|p|        = {}", g.gauge_norm(&p));
    println!("d(p, q)    = {}", g.distance(&p, &q)?);

    let mut rng = seeded_rng(0);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let (a, b, c) = (g.random_point(1.0, &mut rng), g.random_point(1.0, &mut rng), g.random_point(1.0, &mut rng));
        let left = g.multiply(&g.multiply(&a, &b)?, &c)?;
        let right = g.multiply(&a, &g.multiply(&b, &c)?)?;
        worst = worst.max(left.sup_diff(&right));
    }
    println!("associativity defect over 1000 triples: {worst:e}");
    Ok(())
}
