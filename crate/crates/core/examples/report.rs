//! Running verification suites programmatically and printing the JSON report.

use periodring::cli::{run, RunConfig, Suite};

fn main() {
    let mut config = RunConfig::new(vec![Suite::Constants, Suite::Kummer, Suite::LatticeL]);
    config.seed = 7;
    let report = run(&config).expect("valid configuration");
    println!("{}", report.to_json_pretty());
    eprintln!("{} entries, {} failed", report.summary.entries, report.summary.failed);
}
