//! Residues with valuations, and p-adic exponents, over `Z/p^n`.

use periodring::exactnum::{binomial_mod, nilpotency_index, vp_factorial, PadicExponent, RingParams, ValUnit};

fn main() {
    let pr = RingParams::new(3, 2).expect("3 is prime");
    println!("Z/{}: 6·7 = {}, 7^-1 = {}", pr.modulus(), pr.mul(6, 7), pr.inv(7).unwrap());
    println!("v_3(−6) = {:?}, v_3(18) = {:?}", pr.valuation(pr.reduce_i64(-6)), pr.valuation(pr.reduce_i64(18)));
    println!("v_3(10!) = {}, nilpotency index K = {}", vp_factorial(10, 3), nilpotency_index(&pr));
    println!("C(9, 3) mod 9 = {}", binomial_mod(9, 3, &pr));

    let k = ValUnit::factorial(7, &pr);
    println!("7! = 3^{}·unit", k.val());

    let alpha = PadicExponent::new(5, 2, 3);
    let beta = PadicExponent::integer(2, 3);
    let sum = alpha.checked_add(&beta).unwrap();
    println!("{alpha} + {beta} = {sum}, v_3 = {:?}", sum.vp());
}
