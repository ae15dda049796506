//! Constructive t-primitives: f with (σ_i − 1)f = t·μ.

use periodring::exactnum::PadicExponent;
use periodring::galois::Galois;
use periodring::lattice::CMode;
use periodring::periods::{Model, PeriodModelDesc};

fn main() {
    let p = 2;
    let model = Model::build(PeriodModelDesc::with_defaults(p, 2, 1, 1, 1, CMode::Pi)).unwrap();
    let galois = Galois::new(&model);
    let cases = [
        ("1", model.one()),
        ("[T_2]", model.t_symbol(2, PadicExponent::integer(1, p)).unwrap()),
        ("[T_2]^(1/2)", model.t_symbol(2, PadicExponent::new(1, 1, p)).unwrap()),
    ];
    for (name, mu) in cases {
        let f = galois.t_primitive(&mu, 2).unwrap();
        println!("μ = {name}: f has {} lattice terms, f = {f}", f.term_count());
    }
}
