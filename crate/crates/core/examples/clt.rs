//! Central limit theorem for |w_n| with a reference standardisation and the exact law.

use tamechain::experiments::{run_experiment, ExperimentConfig, ExperimentKind, Tolerance};

fn main() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Clt, "free:2", "srw:uniform", vec![2000], 5_000)
        .with_tolerance("ks_reference", Tolerance::at_most(0.03));
    cfg.reference_drift = Some(0.5);
    cfg.reference_variance = Some(0.75);
    cfg.seed = Some(4);
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
