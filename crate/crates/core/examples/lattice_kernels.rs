//! Kernel lattices `L` and the semistable normal form of exponents.

use periodring::exactnum::PadicExponent;
use periodring::lattice::{kernel_l, ChartKind, CMode, ExponentVec, LatticeMap, MonoidChart};

fn main() {
    let p = 2;
    let q = MonoidChart::new(ChartKind::PadicNonneg, 1, 4, p);
    let z = MonoidChart::new(ChartKind::FreeNonneg, 1, 0, p);
    let map = LatticeMap::from_charts(&[q, z], &q, vec![vec![1, 1]]).unwrap();
    for v in kernel_l(&map).unwrap() {
        println!("ker(Q ⊕ Z → Q) vector: {:?}", v.iter().map(|c| c.to_string()).collect::<Vec<_>>());
    }

    let r = 2;
    let qr = MonoidChart::new(ChartKind::PadicNonneg, r, 4, p);
    let zr = MonoidChart::new(ChartKind::FreeNonneg, r, 0, p);
    let matrix = vec![vec![1, 0, 1, 0], vec![0, 1, 0, 1]];
    let basis = kernel_l(&LatticeMap::from_charts(&[qr, zr], &qr, matrix).unwrap()).unwrap();
    for v in &basis {
        println!("ker(Q² ⊕ Z² → Q²) vector: {:?}", v.iter().map(|c| c.to_string()).collect::<Vec<_>>());
    }

    let e = ExponentVec::t_power(2, 1, PadicExponent::new(3, 1, p)).with_t(2, PadicExponent::new(1, 1, p));
    println!("[T_1]^(3/2)[T_2]^(1/2) normalized: {}", e.normalize(CMode::Pi, 2).unwrap());
}
