//! The Galois action on A_model and its eigenspace decomposition.

use periodring::lattice::CMode;
use periodring::periods::{Model, PeriodModelDesc};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let model = Model::build(PeriodModelDesc::with_defaults(2, 2, 1, 2, 2, CMode::Pi)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x = model.random_a_element(&mut rng, 3);
    println!("x = {x}");
    for i in model.directions() {
        let parts = model.decompose_eigen(&x, i).unwrap();
        for (alpha, part) in &parts {
            let eigen = model.sigma(i, part).unwrap() == part.mul_coeff(&model.q_power(alpha).unwrap());
            println!("σ_{i}: component at α = {alpha} is an eigenvector: {eigen}");
        }
    }
}
