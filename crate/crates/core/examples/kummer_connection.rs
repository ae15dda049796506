//! The logarithmic connection and the Kummer comparison for the chart units.

use periodring::galois::{kummer_check, Galois};
use periodring::lattice::CMode;
use periodring::periods::{Model, PeriodModelDesc};

fn main() {
    for mode in [CMode::Pi, CMode::One] {
        let model = Model::build(PeriodModelDesc::with_defaults(3, 2, 1, 2, 1, mode)).unwrap();
        let galois = Galois::new(&model);
        let t2 = model.chart_coordinate(2).unwrap();
        for (k, c) in galois.nabla(&t2).iter().enumerate() {
            println!("c = {mode}: ∇(T_2) component {k} = {c}");
        }
        let entries = kummer_check(&galois).unwrap();
        println!("c = {mode}: {} of {} Kummer checks pass", entries.iter().filter(|e| e.passed()).count(), entries.len());
    }
}
