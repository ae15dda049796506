//! Smith normal form over `Z/p^n` and linear solving.

use periodring::exactnum::RingParams;
use periodring::linalg::{snf_local, solve, Matrix};

fn main() {
    let pr = RingParams::new(2, 3).expect("2 is prime");
    let a = Matrix::from_rows(&[vec![2, 4, 6], vec![1, 3, 5], vec![4, 0, 4]], pr);
    let snf = snf_local(&a);
    println!("elementary divisor exponents: {:?}", snf.exponents);
    println!("rank {}, |ker| = 2^{}, |im| = 2^{}", snf.rank(), snf.kernel_log_size(), snf.image_log_size());
    let diag = snf.u.mul(&a).mul(&snf.v);
    println!("U·A·V = diag: {}", diag == snf.diagonal());
    for k in snf.kernel_generators() {
        println!("kernel generator {k:?} ↦ {:?}", a.mul_vec(&k));
    }
    let b = a.mul_vec(&[1, 2, 3]);
    println!("solve A x = {b:?}: {:?}", solve(&a, &b));
}
