//! Exponential moments of the projection sum along walks from p.

use tamechain::experiments::{run_experiment, ExperimentConfig, ExperimentKind, Tolerance};

fn main() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::MomentContraction, "free:2", "srw:uniform", vec![25, 50, 100, 200], 500)
        .with_tolerance("epsilon", Tolerance::at_least(0.05));
    cfg.germ = Some("a".into());
    cfg.threshold = Some(3);
    cfg.pairs = Some(10);
    cfg.seed = Some(7);
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
