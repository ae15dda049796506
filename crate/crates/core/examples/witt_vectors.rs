//! Truncated Witt vectors: ring operations, ghost components and `F∘V = p`.

use periodring::witt::{PolyQuotient, WittRing, ZmodRing};

fn main() {
    let base = ZmodRing::new(9);
    let w = WittRing::new(base, 3, 3).expect("valid Witt ring");
    let a = w.vector(vec![1, 4, 2]).unwrap();
    let b = w.teichmuller(&5);
    let sum = w.add(&a, &b).unwrap();
    let prod = w.mul(&a, &b).unwrap();
    println!("a + [5] = {:?}", sum.components());
    println!("a·[5] = {:?}", prod.components());
    println!("ghost(a) = {:?}", w.ghost(&a).unwrap());

    let longer = w.with_len(4).unwrap();
    let fv = longer.frobenius_poly(&w.verschiebung_ext(&a).unwrap()).unwrap();
    println!("F(V(a)) = {:?}, 3a = {:?}", fv.components(), w.mul_int(&a, 3).unwrap().components());

    let f4 = WittRing::new(PolyQuotient::gf4(), 2, 2).unwrap();
    let s = PolyQuotient::gf4().generator();
    let t = f4.teichmuller(&s);
    println!("[s]^3 in W_2(F_4) = {:?}", f4.pow(&t, 3).unwrap().components());
}
