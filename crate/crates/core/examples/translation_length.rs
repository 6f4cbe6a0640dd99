//! Translation length of w_n and the Gromov product that controls it.

use tamechain::experiments::{run_experiment, ExperimentConfig, ExperimentKind, Tolerance};

fn main() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::TranslationLength, "freeproduct:Z2,Z", "srw:uniform", vec![50, 100, 200], 5_000)
        .with_tolerance("loxodromic_fraction", Tolerance::at_least(0.99));
    cfg.seed = Some(2);
    let mut gromov = ExperimentConfig::new(ExperimentKind::GromovTail, "free:2", "srw:uniform", vec![100, 200], 5_000);
    gromov.seed = Some(2);
    let g = run_experiment(&gromov, 1.0).expect("gromov tail runs");
    println!("Gromov tail on F2: {}", g.statistics["per_n"]);
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
