//! Run a JSON experiment config from code. Pass a path, or run the bundled
//! Heisenberg config.
use intrinsic_sections::config::{run_config, ExperimentConfig};

fn main() {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/heisenberg_flat.json").into());
    let config = ExperimentConfig::load(path.as_ref()).unwrap_or_else(|e| panic!("{e}"));
    let report = run_config(config, None).unwrap_or_else(|e| panic!("{e}"));
    for t in &report.body.tasks {
        println!("{:>2} {:<20} {}", t.index, t.task, if t.passed { "pass" } else { "FAIL" });
    }
    println!("all passed: {}", report.body.passed);
}
