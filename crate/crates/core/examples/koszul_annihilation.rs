//! Truncated modules, Koszul cohomology and the t^d-annihilation check.

use periodring::galois::{standard_blocks, t_annihilation_suite, Galois, ModuleCaps, TruncatedModule};
use periodring::lattice::CMode;
use periodring::periods::{Model, PeriodModelDesc};

fn main() {
    let model = Model::build(PeriodModelDesc::with_defaults(3, 3, 1, 2, 2, CMode::Pi)).unwrap();
    let galois = Galois::new(&model);
    let blocks = standard_blocks(&model);
    let module = TruncatedModule::build(&model, &blocks[..2], ModuleCaps::from_model(&model)).unwrap();
    println!("module rank {} over Z/27 in {} blocks", module.dim(), module.blocks.len());
    let complex = module.koszul().unwrap();
    for j in 0..=complex.top_degree() {
        let h = complex.cohomology(j).unwrap();
        println!("H^{j}: |H| = 3^{}, {} cyclic factors", h.log_size, h.invariants.len());
    }
    for e in t_annihilation_suite(&galois, &module).unwrap() {
        println!("{} {}: {}", e.claim_id, e.parameters["degree"], e.witness["outcomes"]);
    }
}
