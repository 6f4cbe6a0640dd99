//! How soon a fixed word shows up as an increment of the path.

use tamechain::experiments::{run_experiment, ExperimentConfig, ExperimentKind, Tolerance};

fn main() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Subword, "free:2", "srw:uniform", vec![10, 100, 1000], 500)
        .with_tolerance("occurrence", Tolerance::at_least(0.99));
    cfg.word = Some("ab".into());
    cfg.germ = Some("a".into());
    cfg.threshold = Some(3);
    cfg.seed = Some(5);
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
