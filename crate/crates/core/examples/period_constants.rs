//! The base model: the factorization of `q^α − 1` and the `t`-cofactors.

use periodring::exactnum::PadicExponent;
use periodring::periods::{verify_constants, BaseModel, ConstantsConfig};
use periodring::exactnum::RingParams;

fn main() {
    let (p, n, m) = (3, 2, 1);
    let base = BaseModel::new(RingParams::new(p, n).unwrap(), m).unwrap();
    println!("t = {}", base.t().render_named());
    println!("u_2 = {}", base.unit_u_alpha(2).render_named());
    let beta = PadicExponent::new(1, 1, p);
    println!("t/(q^(1/3) − 1) = {}", base.t_cofactor(&beta).unwrap().render_named());

    let entries = verify_constants(&base, &ConstantsConfig::standard(p, m)).unwrap();
    let passed = entries.iter().filter(|e| e.passed()).count();
    println!("constants: {passed}/{} claims verified", entries.len());
}
