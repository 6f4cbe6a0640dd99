//! Drift, failure tails and the CLT for `d_X(o·x₀, w_n·x₀)`.

use serde_json::json;

use crate::markov::{radial_exact_rank, Walker};
use crate::stats::{ks_statistic, ks_statistic_with, normal_cdf, proportion_se, tail_fit, Moments, TailPoint, MIN_TAIL_HITS};

use super::{frac, par_samples, radial_oracle_rank, ExperimentConfig, ExperimentError, Judge, Outcome, Setup, Table, Tolerance};

/// Distances from the start at each grid time, one row per trajectory.
fn distances_on_grid(cfg: &ExperimentConfig, s: &Setup, label: &str) -> Vec<Vec<u64>> {
    let grid = &cfg.n_grid;
    let last = *grid.last().expect("validated grid");
    par_samples(cfg.seed(), label, cfg.trajectories, |rng| {
        let mut w = Walker::new(&s.kernel, &s.start);
        let mut out = Vec::with_capacity(grid.len());
        let mut next = 0;
        for step in 0..=last {
            if step > 0 {
                w.step(rng);
            }
            if grid[next] == step {
                out.push(s.model.orbit_distance(&s.start, w.state()));
                next += 1;
                if next == grid.len() {
                    break;
                }
            }
        }
        out
    })
}

/// Number of standard errors separating an estimate from an exact value.
fn z_score(estimate: f64, exact: f64, se: f64) -> f64 {
    if se > 0.0 {
        (estimate - exact).abs() / se
    } else if estimate == exact {
        0.0
    } else {
        f64::INFINITY
    }
}

pub(super) fn linear_progress(cfg: &ExperimentConfig, s: &Setup, judge: &mut Judge) -> Result<Outcome, ExperimentError> {
    let label = format!("{}:paths", cfg.id());
    let rows = distances_on_grid(cfg, s, &label);
    let n_traj = cfg.trajectories;
    let oracle = radial_oracle_rank(&s.kernel);
    let last = cfg.n_grid.len() - 1;

    let column = |j: usize| -> Vec<f64> { rows.iter().map(|r| r[j] as f64).collect() };
    let final_m = Moments::of(&column(last));
    let n_last = cfg.n_grid[last] as f64;
    let drift = final_m.mean / n_last;
    let drift_se = final_m.standard_error() / n_last;
    judge.fit("drift", drift, drift_se, "mean distance over n at the largest n; residual is the standard error");
    judge.configured("drift", drift);

    let mut per_n = Vec::new();
    let mut tail = Table::new(&["n", "failure_probability", "failures", "below_cutoff_probability"]);
    let mut failure_points = Vec::new();
    let mut worst_mean_z: f64 = 0.0;
    let mut worst_cutoff_z: f64 = 0.0;
    for (j, &n) in cfg.n_grid.iter().enumerate() {
        let col = column(j);
        let m = Moments::of(&col);
        let half = drift * n as f64 / 2.0;
        let failures = col.iter().filter(|d| **d < half).count();
        let p_fail = frac(failures, n_traj);
        failure_points.push(TailPoint { x: n as f64, probability: p_fail, hits: failures as u64 });
        let below = cfg.cutoff.map(|c| col.iter().filter(|d| **d < c).count());
        let p_below = below.map(|b| frac(b, n_traj));
        tail.push(vec![n as f64, p_fail, failures as f64, p_below.unwrap_or(f64::NAN)]);
        let mut row = json!({
            "n": n,
            "mean_distance": m.mean,
            "variance": m.variance,
            "drift": m.mean / n as f64,
            "drift_standard_error": m.standard_error() / n as f64,
            "failure_probability": p_fail,
            "failures": failures,
        });
        if let (Some(c), Some(p)) = (cfg.cutoff, p_below) {
            row["cutoff"] = json!(c);
            row["below_cutoff_probability"] = json!(p);
        }
        if let Some(rank) = oracle {
            let law = radial_exact_rank(rank, n);
            let z = z_score(m.mean, law.mean(), m.standard_error());
            worst_mean_z = worst_mean_z.max(z);
            row["exact_mean"] = json!(law.mean());
            row["mean_z"] = json!(z);
            if let (Some(c), Some(p)) = (cfg.cutoff, p_below) {
                let exact = law.prob_below(c);
                let se = proportion_se(exact, n_traj).max(1.0 / n_traj as f64);
                let zc = z_score(p, exact, se);
                worst_cutoff_z = worst_cutoff_z.max(zc);
                row["exact_below_cutoff"] = json!(exact);
                row["below_cutoff_z"] = json!(zc);
                if j == last {
                    judge.configured("exact_below_cutoff", exact);
                }
            }
        }
        per_n.push(row);
    }
    if oracle.is_some() {
        judge.note("distances have the law of the radial birth-death chain; every estimate is compared with its exact value");
        judge.always("oracle_mean_z", worst_mean_z, Tolerance::at_most(3.0));
        if cfg.cutoff.is_some() {
            judge.always("oracle_cutoff_z", worst_cutoff_z, Tolerance::at_most(3.0));
            let j = last;
            let p = tail.rows[j][3];
            judge.configured("below_cutoff", p);
        }
    }
    match tail_fit(&failure_points, MIN_TAIL_HITS) {
        Ok(f) => {
            judge.fit("decay_constant", 1.0 / f.rate, f.residual, "1/rate of the exponential fit of P[d < drift·n/2] over n");
            judge.note(format!("failure-tail fit used {}", f.rule));
        }
        Err(e) => judge.note(format!("failure-tail fit declined: {e}")),
    }
    let statistics = json!({ "per_n": per_n, "drift": drift, "drift_standard_error": drift_se });
    Ok(Outcome { statistics, tail: Some(tail), hist: None })
}

pub(super) fn clt(cfg: &ExperimentConfig, s: &Setup, judge: &mut Judge) -> Result<Outcome, ExperimentError> {
    let label = format!("{}:paths", cfg.id());
    let n = *cfg.n_grid.last().expect("validated grid");
    let mut single = cfg.clone();
    single.n_grid = vec![n];
    let xs: Vec<f64> = distances_on_grid(&single, s, &label).into_iter().map(|r| r[0] as f64).collect();
    let m = Moments::of(&xs);
    let nf = n as f64;
    let drift = m.mean / nf;
    let variance = m.variance / nf;
    judge.fit("drift", drift, m.standard_error() / nf, "sample mean over n; residual is the standard error");
    // standard error of a sample variance: σ²·√(2/(N−1)) plus the excess-kurtosis term
    let var_se = variance * ((2.0 + m.excess_kurtosis.max(-2.0)) / (xs.len().max(2) - 1) as f64).sqrt();
    judge.fit("variance", variance, var_se, "sample variance over n; residual is its standard error");
    judge.configured("variance", variance);
    judge.note("distances are standardised by sigma*sqrt(n); a sigma^2*sqrt(n) denominator would not give a unit-variance limit");

    let degenerate = m.variance == 0.0;
    let mut hist = Table::new(&["bin_center", "density", "normal_density"]);
    let mut stats = json!({
        "n": n,
        "samples": xs.len(),
        "mean": m.mean,
        "variance": m.variance,
        "skewness": m.skewness,
        "excess_kurtosis": m.excess_kurtosis,
        "degenerate": degenerate,
    });
    if degenerate {
        judge.note("variance is zero: the distance is deterministic and no CLT applies");
        judge.always("non_degenerate", 0.0, Tolerance::at_least(1.0));
        return Ok(Outcome { statistics: stats, tail: None, hist: None });
    }
    let sd = (variance * nf).sqrt();
    let z: Vec<f64> = xs.iter().map(|x| (x - drift * nf) / sd).collect();
    let ks = ks_statistic(&z, normal_cdf);
    stats["ks_fitted"] = json!(ks);
    judge.fit("ks_fitted", ks, 0.0, "KS distance to N(0,1) after standardising with fitted drift and variance");
    judge.configured("ks_fitted", ks);
    if let (Some(l), Some(v)) = (cfg.reference_drift, cfg.reference_variance) {
        let sd_ref = (v * nf).sqrt();
        let zr: Vec<f64> = xs.iter().map(|x| (x - l * nf) / sd_ref).collect();
        let ks_ref = ks_statistic(&zr, normal_cdf);
        stats["ks_reference"] = json!(ks_ref);
        judge.configured("ks_reference", ks_ref);
    }
    if let Some(rank) = radial_oracle_rank(&s.kernel) {
        let law = radial_exact_rank(rank, n);
        let zm = z_score(m.mean, law.mean(), m.standard_error());
        judge.always("oracle_mean_z", zm, Tolerance::at_most(3.0));
        // Monte Carlo KS against the exact law, and the exact law's own distance to the normal
        let cdf = |x: f64| law.cdf(x);
        let left = |x: f64| law.prob_below(x);
        let ks_exact = ks_statistic_with(&xs, cdf, left);
        stats["ks_to_exact_law"] = json!(ks_exact);
        let (mu, sdl) = (law.mean(), law.variance().sqrt());
        let mut lattice: f64 = 0.0;
        let mut below = 0.0;
        for (i, p) in law.probs.iter().enumerate() {
            let phi = normal_cdf(((i + law.offset) as f64 - mu) / sdl);
            lattice = lattice.max((below - phi).abs()).max((below + p - phi).abs());
            below += p;
        }
        stats["ks_exact_law_vs_normal"] = json!(lattice);
        stats["exact_variance_over_n"] = json!(law.variance() / nf);
        judge.note("exact radial law available: ks_exact_law_vs_normal is the discreteness floor of the KS distance");
        // Kolmogorov 0.999 quantile 1.95/√N bounds the Monte Carlo KS against the exact law
        judge.always("oracle_ks", ks_exact, Tolerance::at_most(1.95 / (xs.len() as f64).sqrt()));
    }
    let bins = 40;
    let (lo, hi) = (-4.0, 4.0);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for v in &z {
        if *v >= lo && *v < hi {
            counts[((v - lo) / width) as usize] += 1;
        }
    }
    for (i, c) in counts.iter().enumerate() {
        let mid = lo + (i as f64 + 0.5) * width;
        let normal = (-mid * mid / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
        hist.push(vec![mid, *c as f64 / (xs.len() as f64 * width), normal]);
    }
    Ok(Outcome { statistics: stats, tail: None, hist: Some(hist) })
}
