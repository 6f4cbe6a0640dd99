//! Run a config file into a fresh directory, then audit the directory.

use std::path::Path;

use tamechain::lab::{cmd_experiment, cmd_report, RunOptions};

fn main() {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/minimal.toml");
    let out = std::env::temp_dir().join("tamechain-example-run");
    let opts = RunOptions { out: Some(out.clone()), ..Default::default() };
    let summary = cmd_experiment(&config, &opts).expect("run");
    for line in summary.lines() {
        println!("{line}");
    }
    let audit = cmd_report(&out).expect("manifest present");
    print!("{}", audit.table);
    println!("resolved config:\n{}", summary.manifest.config.to_toml());
}
