//! Drift and failure probability of the simple random walk on F2, compared with the exact radial law.

use tamechain::experiments::{run_experiment, ExperimentConfig, ExperimentKind, Tolerance};

fn main() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::LinearProgress, "free:2", "srw:uniform", vec![50, 100, 200], 20_000)
        .with_tolerance("drift", Tolerance::band(0.5, 0.02));
    cfg.cutoff = Some(50.0);
    cfg.seed = Some(1);
    let report = run_experiment(&cfg, 1.0).expect("experiment runs");
    for (name, f) in &report.fitted {
        println!("fitted {name} = {:.5} (residual {:.5})", f.value, f.residual);
    }
    for c in &report.checks {
        println!("{} {} = {:.6}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value);
    }
    for n in &report.notes {
        println!("note: {n}");
    }
}
