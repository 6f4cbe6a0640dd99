//! Distance from w_k to the geodesic [o, w_n], coupled with a push-forward chain.

use tamechain::experiments::{run_experiment, ExperimentConfig, ExperimentKind, Tolerance};

fn main() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Deviation, "free:2", "srw:uniform", vec![400], 20_000)
        .with_tolerance("tail_ratio", Tolerance { min: Some(0.25), max: Some(0.45), ..Default::default() });
    cfg.ratios = Some(vec![0.5, 0.1]);
    cfg.compare_kernel = Some("pushforward:suffix_swap:srw:uniform".into());
    cfg.seed = Some(3);
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
