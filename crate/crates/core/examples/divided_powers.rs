//! Divided-power polynomials: γ_q, exp/log series and filtered division.

use periodring::dpring::{DPPoly, DpRing};
use periodring::exactnum::RingParams;

fn main() {
    let pr = RingParams::new(2, 3).expect("2 is prime");
    let ring = DpRing::new(pr, &["Z", "W"]).unwrap();
    let z = DPPoly::var(&ring, 0, 1);
    let w = DPPoly::var(&ring, 1, 1);

    println!("Z·Z = {}", z.mul(&z).render_named());
    let x = &z + &w.scale(2);
    println!("γ_3(Z + 2W) = {}", x.dp_power(3).unwrap().render_named());

    let one = DPPoly::one(&ring);
    let log = (&one - &z).log_unit().unwrap();
    println!("log(1 − Z) = {}", log.render_named());
    println!("(1 − Z)^-1 = {}", (&one - &z).invert_unit().unwrap().render_named());

    let num = z.mul(&(&one + &w));
    let den = &one + &w;
    let q = DPPoly::divide_filtered(&num, &den, 6).unwrap();
    println!("Z(1+W) / (1+W) = {} (exact: {})", q.quotient.render_named(), q.exact);
}
