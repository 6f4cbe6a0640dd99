//! Translation lengths, Gromov-product tails and deviation from geodesics.

use serde_json::json;

use crate::group::Element;
use crate::markov::{Body, Kernel, Walker};
use crate::stats::{tail_fit, Moments, TailPoint, MIN_TAIL_HITS};
use crate::tree::TreeModel;

use super::{frac, par_samples, ExperimentConfig, ExperimentError, Judge, Outcome, Setup, Table, Tolerance};

/// Bound on how far a `(D, D)`-quasi-geodesic in a tree strays from the
/// geodesic between its endpoints.
///
/// If `q_s` lies in a branch hanging off the geodesic at `π`, the path enters
/// and leaves that branch through points within `2D` of `π`; these are at
/// most `5D²` indices apart, so `d(q_s, π) ≤ D·5D² + D + 2D`.
pub fn morse_constant(d: u64) -> u64 {
    5 * d * d * d + 3 * d
}

/// States of a trajectory at the grid times.
fn states_on_grid(kernel: &Kernel, start: &Element, grid: &[usize], rng: &mut rand_chacha::ChaCha8Rng) -> Vec<Element> {
    let last = *grid.last().expect("non-empty grid");
    let mut w = Walker::new(kernel, start);
    let mut out = Vec::with_capacity(grid.len());
    let mut next = 0;
    for step in 0..=last {
        if step > 0 {
            w.step(rng);
        }
        while next < grid.len() && grid[next] == step {
            out.push(w.state().clone());
            next += 1;
        }
    }
    out
}

/// `(x₀, g²x₀)_{g x₀}` and `d(x₀, g x₀)`.
fn square_product(model: &TreeModel, g: &Element) -> (u64, u64) {
    let group = model.group();
    let one = group.identity();
    let d = model.orbit_distance(&one, g);
    let d2 = model.orbit_distance(&one, &group.mul(g, g));
    ((2 * d - d2) / 2, d)
}

pub(super) fn translation_length(cfg: &ExperimentConfig, s: &Setup, judge: &mut Judge) -> Result<Outcome, ExperimentError> {
    let label = format!("{}:paths", cfg.id());
    // per trajectory and grid time: (τ, d, Gromov product)
    let rows: Vec<Vec<(u64, u64, u64)>> = par_samples(cfg.seed(), &label, cfg.trajectories, |rng| {
        states_on_grid(&s.kernel, &s.start, &cfg.n_grid, rng)
            .iter()
            .map(|g| {
                let (gp, d) = square_product(&s.model, g);
                (s.model.translation_length(g), d, gp)
            })
            .collect()
    });
    let total = cfg.trajectories;
    let mut per_n = Vec::new();
    let mut tail = Table::new(&["n", "below_quarter_probability", "count"]);
    let mut points = Vec::new();
    let mut above_violations = 0usize;
    let mut inequality_violations = 0usize;
    let mut min_slack = i64::MAX;
    for (j, &n) in cfg.n_grid.iter().enumerate() {
        let col: Vec<(u64, u64, u64)> = rows.iter().map(|r| r[j]).collect();
        let quarter = n as f64 / 4.0;
        let above = col.iter().filter(|(t, _, _)| *t as f64 > quarter).count();
        let lox = col.iter().filter(|(t, _, _)| *t >= 1).count();
        above_violations += col.iter().filter(|(t, d, _)| t > d).count();
        for &(t, d, gp) in &col {
            let slack = t as i64 - (d as i64 - 2 * gp as i64);
            min_slack = min_slack.min(slack);
            if slack < 0 {
                inequality_violations += 1;
            }
        }
        let ratios: Vec<f64> = col.iter().map(|(t, _, _)| *t as f64 / n.max(1) as f64).collect();
        let m = Moments::of(&ratios);
        let mut sorted = ratios.clone();
        sorted.sort_by(f64::total_cmp);
        let low = sorted[(sorted.len() - 1) / 100];
        let below = total - above;
        tail.push(vec![n as f64, frac(below, total), below as f64]);
        points.push(TailPoint { x: n as f64, probability: frac(below, total), hits: below as u64 });
        per_n.push(json!({
            "n": n,
            "mean_tau_over_n": m.mean,
            "tau_over_n_first_percentile": low,
            "fraction_above_quarter": frac(above, total),
            "loxodromic_fraction": frac(lox, total),
        }));
        if j == cfg.n_grid.len() - 1 {
            judge.fit("tau_rate", m.mean, m.standard_error(), "mean of tau(w_n)/n at the largest n; residual is the standard error");
            judge.configured("fraction_above", frac(above, total));
            judge.configured("loxodromic_fraction", frac(lox, total));
        }
    }
    judge.always("tau_exceeds_distance", above_violations as f64, Tolerance::at_most(0.0));
    judge.always("square_product_inequality_violations", inequality_violations as f64, Tolerance::at_most(0.0));
    judge.note(format!(
        "tau(g) >= d(x0, g x0) - 2 (x0, g^2 x0)_(g x0) checked on every sample with zero slack constant (trees); smallest slack {min_slack}"
    ));
    match tail_fit(&points, MIN_TAIL_HITS) {
        Ok(f) => judge.fit("decay_constant", 1.0 / f.rate, f.residual, "1/rate of the fit of P[tau <= n/4] over n"),
        Err(e) => judge.note(format!("failure-tail fit declined: {e}")),
    }
    let last = cfg.n_grid.len() - 1;
    let n_last = cfg.n_grid[last].max(1) as f64;
    let mut hist = Table::new(&["tau_over_n", "fraction"]);
    let bins = 100;
    let mut counts = vec![0usize; bins + 1];
    for r in &rows {
        let x = r[last].0 as f64 / n_last;
        counts[((x * bins as f64) as usize).min(bins)] += 1;
    }
    for (i, c) in counts.iter().enumerate() {
        hist.push(vec![i as f64 / bins as f64, frac(*c, total)]);
    }
    let statistics = json!({ "per_n": per_n, "smallest_slack": min_slack });
    Ok(Outcome { statistics, tail: Some(tail), hist: Some(hist) })
}

pub(super) fn gromov_tail(cfg: &ExperimentConfig, s: &Setup, judge: &mut Judge) -> Result<Outcome, ExperimentError> {
    let label = format!("{}:paths", cfg.id());
    let eps = cfg.epsilon_grid.clone().unwrap_or_else(|| vec![0.05, 0.1, 0.2]);
    let rows: Vec<Vec<(u64, u64, u64)>> = par_samples(cfg.seed(), &label, cfg.trajectories, |rng| {
        states_on_grid(&s.kernel, &s.start, &cfg.n_grid, rng)
            .iter()
            .map(|g| {
                let (gp, d) = square_product(&s.model, g);
                (gp, d, s.model.translation_length(g))
            })
            .collect()
    });
    let total = cfg.trajectories;
    let mut per_n = Vec::new();
    let mut violations = 0usize;
    for (j, &n) in cfg.n_grid.iter().enumerate() {
        let col: Vec<(u64, u64, u64)> = rows.iter().map(|r| r[j]).collect();
        violations += col.iter().filter(|(gp, d, t)| (*t as i64) < *d as i64 - 2 * *gp as i64).count();
        let probs: Vec<f64> = eps
            .iter()
            .map(|e| frac(col.iter().filter(|(gp, _, _)| *gp as f64 >= e * n as f64).count(), total))
            .collect();
        let m = Moments::of(&col.iter().map(|(gp, _, _)| *gp as f64).collect::<Vec<_>>());
        per_n.push(json!({ "n": n, "epsilon": eps, "tail_probability": probs, "mean_product": m.mean }));
        if j == cfg.n_grid.len() - 1 {
            judge.configured("tail", probs[0]);
        }
    }
    judge.always("square_product_inequality_violations", violations as f64, Tolerance::at_most(0.0));

    // tail of the product itself at the largest n
    let last = cfg.n_grid.len() - 1;
    let values: Vec<u64> = rows.iter().map(|r| r[last].0).collect();
    let max = values.iter().copied().max().unwrap_or(0);
    let mut tail = Table::new(&["t", "probability", "hits"]);
    let mut points = Vec::new();
    for t in 0..=max {
        let hits = values.iter().filter(|v| **v >= t).count();
        tail.push(vec![t as f64, frac(hits, total), hits as f64]);
        points.push(TailPoint { x: t as f64, probability: frac(hits, total), hits: hits as u64 });
    }
    match tail_fit(&points, MIN_TAIL_HITS) {
        Ok(f) => {
            judge.fit("tail_rate", f.rate, f.residual, "exponential fit of P[product >= t] at the largest n");
            judge.note(format!("tail fit used {}", f.rule));
        }
        Err(e) => judge.note(format!("tail fit declined: {e}")),
    }
    let statistics = json!({ "per_n": per_n });
    Ok(Outcome { statistics, tail: Some(tail), hist: None })
}

/// Distance from `w_k` to the geodesic `[o, w_n]` in the tree.
fn deviation_at(model: &TreeModel, o: &Element, wk: &Element, wn: &Element) -> u64 {
    let a = model.orbit_distance(wk, o);
    let b = model.orbit_distance(wk, wn);
    let c = model.orbit_distance(o, wn);
    (a + b - c) / 2
}

fn tail_of(values: &[u64], l_max: u64) -> Vec<(u64, f64, u64)> {
    (0..=l_max)
        .map(|l| {
            let hits = values.iter().filter(|v| **v >= l).count();
            (l, frac(hits, values.len()), hits as u64)
        })
        .collect()
}

pub(super) fn deviation(cfg: &ExperimentConfig, s: &Setup, judge: &mut Judge) -> Result<Outcome, ExperimentError> {
    let n = *cfg.n_grid.last().expect("validated grid");
    let ratios = cfg.ratios.clone().unwrap_or_else(|| vec![0.5]);
    let ks: Vec<usize> = ratios.iter().map(|r| (r * n as f64).round() as usize).collect();
    let l_max = cfg.l_max.unwrap_or(15);
    let [fit_lo, fit_hi] = cfg.fit_range.unwrap_or([2, 10]);
    let qc = cfg.quasi_constant.unwrap_or(2);

    let compare = match &cfg.compare_kernel {
        None => None,
        Some(d) => {
            let k = Kernel::from_descriptor(&s.group, d)?;
            let start = match &k.body {
                Body::Pushforward { map, base } if base.descriptor() == s.kernel.descriptor() => map.forward(&s.start),
                _ => {
                    return Err(ExperimentError::Config(format!(
                        "compare_kernel must push forward {} to be coupled with it",
                        s.kernel.descriptor()
                    )))
                }
            };
            Some((k, start))
        }
    };

    let mut grid: Vec<usize> = ks.clone();
    grid.push(n);
    grid.sort_unstable();
    grid.dedup();
    let label = format!("{}:paths", cfg.id());
    let deviations = |kernel: &Kernel, start: &Element, rng: &mut rand_chacha::ChaCha8Rng| -> Vec<u64> {
        let states = states_on_grid(kernel, start, &grid, rng);
        let wn = states.last().expect("n is on the grid");
        ks.iter()
            .map(|k| deviation_at(&s.model, start, &states[grid.binary_search(k).expect("k on grid")], wn))
            .collect()
    };
    let rows: Vec<(Vec<u64>, Option<Vec<u64>>)> = par_samples(cfg.seed(), &label, cfg.trajectories, |rng| {
        // the coupled chain replays the same draws
        let replay = compare.as_ref().map(|_| rng.clone());
        let base = deviations(&s.kernel, &s.start, rng);
        let other = compare.as_ref().zip(replay).map(|((k, start), mut r)| deviations(k, start, &mut r));
        (base, other)
    });

    let mut tail = Table::new(&["ratio", "l", "probability", "hits", "coupled_probability"]);
    let mut per_ratio = Vec::new();
    let mut monotone_violations = 0usize;
    let mut endpoint_nonzero = 0usize;
    let mut sandwich_violations = 0usize;
    for (i, (&ratio, &k)) in ratios.iter().zip(&ks).enumerate() {
        let vals: Vec<u64> = rows.iter().map(|r| r.0[i]).collect();
        if k == 0 || k == n {
            endpoint_nonzero += vals.iter().filter(|v| **v != 0).count();
        }
        let t = tail_of(&vals, l_max);
        monotone_violations += t.windows(2).filter(|w| w[1].1 > w[0].1).count();
        let coupled: Option<Vec<u64>> = compare.as_ref().map(|_| rows.iter().map(|r| r.1.as_ref().expect("coupled")[i]).collect());
        let ct = coupled.as_ref().map(|c| tail_of(c, l_max));
        for (l, (_, p, hits)) in t.iter().enumerate() {
            let cp = ct.as_ref().map(|c| c[l].1).unwrap_or(f64::NAN);
            tail.push(vec![ratio, l as f64, *p, *hits as f64, cp]);
        }
        let mut entry = json!({
            "ratio": ratio,
            "k": k,
            "mean": Moments::of(&vals.iter().map(|v| *v as f64).collect::<Vec<_>>()).mean,
            "tail": t.iter().map(|x| x.1).collect::<Vec<_>>(),
        });
        if let (Some(c), Some(ct)) = (&coupled, &ct) {
            // P[D ≥ l+1] ≤ P[D' ≥ l] ≤ P[D ≥ l−1]
            for l in 1..t.len() {
                let upper = t[l - 1].1;
                let lower = if l + 1 < t.len() { t[l + 1].1 } else { 0.0 };
                if ct[l].1 > upper || ct[l].1 < lower {
                    sandwich_violations += 1;
                }
            }
            let diffs: Vec<u64> = vals.iter().zip(c).map(|(a, b)| a.abs_diff(*b)).collect();
            entry["coupled_tail"] = json!(ct.iter().map(|x| x.1).collect::<Vec<_>>());
            entry["coupled_max_difference"] = json!(diffs.iter().max().copied().unwrap_or(0));
            entry["coupled_fraction_within_one"] = json!(frac(diffs.iter().filter(|d| **d <= 1).count(), diffs.len()));
        }
        if i == 0 {
            let points: Vec<TailPoint> = t
                .iter()
                .filter(|(l, _, _)| (fit_lo..=fit_hi).contains(l))
                .map(|(l, p, h)| TailPoint { x: *l as f64, probability: *p, hits: *h })
                .collect();
            match tail_fit(&points, MIN_TAIL_HITS) {
                Ok(f) => {
                    judge.fit("tail_ratio", f.ratio, f.residual, &format!("per-unit ratio of P[D >= l] over l in [{fit_lo}, {fit_hi}]"));
                    judge.configured("tail_ratio", f.ratio);
                    judge.configured("tail_residual", f.residual);
                    entry["fit"] = json!(f);
                }
                Err(e) => {
                    judge.note(format!("deviation tail fit declined: {e}"));
                    judge.configured("tail_ratio", f64::NAN);
                }
            }
        }
        per_ratio.push(entry);
    }
    judge.always("tail_monotonicity_violations", monotone_violations as f64, Tolerance::at_most(0.0));
    judge.always("endpoint_nonzero", endpoint_nonzero as f64, Tolerance::at_most(0.0));
    if compare.is_some() {
        judge.always("coupled_sandwich_violations", sandwich_violations as f64, Tolerance::at_most(0.0));
        judge.note("the coupled chain is the push-forward of the same trajectories; its tail must lie between the base tail shifted by one unit either way");
    }
    let m = morse_constant(qc);
    judge.note(format!(
        "distances are measured to the tree geodesic; the supremum over ({qc},{qc})-quasi-geodesics exceeds them by at most {m}"
    ));
    let statistics = json!({ "n": n, "per_ratio": per_ratio, "morse_constant": m, "quasi_constant": qc });
    Ok(Outcome { statistics, tail: Some(tail), hist: None })
}
