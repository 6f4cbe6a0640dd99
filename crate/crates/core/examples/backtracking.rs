//! How far a walk from p backtracks along the cosets between o and p.

use tamechain::experiments::{run_experiment, ExperimentConfig, ExperimentKind, Tolerance};

fn main() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Backtracking, "free:2", "srw:uniform", vec![100, 500], 5_000)
        .with_tolerance("tail_at_20", Tolerance::at_most(0.01));
    cfg.germ = Some("a".into());
    cfg.threshold = Some(3);
    cfg.target = Some("aaaaabbbbbaaaaa".into());
    cfg.seed = Some(6);
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
