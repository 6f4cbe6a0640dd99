//! Randomised property suites behind `verify`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::group::{Element, Group};
use crate::markov::{exact_distribution, tameness_probe, Kernel, ProbeCaps, QiBijection, Walker};
use crate::projection::{checks, ProjectionSystem};
use crate::rng::{random_element, substream};
use crate::stats::total_variation;
use crate::tree::TreeModel;

use super::{exit, LabError};

const WITNESSES: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Geometry,
    Projections,
    Kernels,
    All,
}

impl FromStr for Suite {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self, LabError> {
        match s {
            "geometry" => Ok(Suite::Geometry),
            "projections" => Ok(Suite::Projections),
            "kernels" => Ok(Suite::Kernels),
            "all" => Ok(Suite::All),
            _ => Err(LabError::Config(format!("unknown suite `{s}` (expected geometry, projections, kernels or all)"))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Geometry => "geometry",
            Suite::Projections => "projections",
            Suite::Kernels => "kernels",
            Suite::All => "all",
        })
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Trials per check.
    pub samples: usize,
    /// Behrstock constant for the projection suite; calibrated when absent.
    pub behrstock: Option<i64>,
    pub threshold: Option<i64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { seed: 0, samples: 10_000, behrstock: None, threshold: None }
    }
}

/// Outcome of one property check.
#[derive(Clone, Debug, Serialize)]
pub struct VerifyLine {
    pub suite: String,
    pub name: String,
    pub trials: usize,
    pub violations: usize,
    pub witnesses: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured: Option<f64>,
}

impl VerifyLine {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

impl fmt::Display for VerifyLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{verdict} [{}] {}: {} violations in {} trials", self.suite, self.name, self.violations, self.trials)?;
        if let Some(m) = self.measured {
            write!(f, " (measured {m:.4})")?;
        }
        for w in &self.witnesses {
            write!(f, "\n    witness: {w}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyOutcome {
    pub lines: Vec<VerifyLine>,
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        self.lines.iter().all(VerifyLine::passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            exit::SUCCESS
        } else {
            exit::TOLERANCE
        }
    }
}

pub fn cmd_verify(suite: Suite, opts: &VerifyOptions) -> Result<VerifyOutcome, LabError> {
    if opts.samples == 0 {
        return Err(LabError::Config("--samples must be at least 1".into()));
    }
    let behrstock = match opts.behrstock {
        Some(b) if b < 0 => return Err(LabError::Config(format!("behrstock constant must be >= 0, got {b}"))),
        b => b.map(|b| b as u64),
    };
    let threshold = match opts.threshold {
        Some(t) if t < 0 => return Err(LabError::Config(format!("threshold must be >= 0, got {t}"))),
        t => t.map(|t| t as u64),
    };
    let mut lines = Vec::new();
    if matches!(suite, Suite::Geometry | Suite::All) {
        lines.extend(geometry(opts));
    }
    if matches!(suite, Suite::Projections | Suite::All) {
        lines.extend(projections(opts, behrstock, threshold)?);
    }
    if matches!(suite, Suite::Kernels | Suite::All) {
        lines.extend(kernels(opts)?);
    }
    Ok(VerifyOutcome { lines })
}

fn collect(suite: &str, name: String, results: Vec<Result<(), String>>) -> VerifyLine {
    let trials = results.len();
    let failures: Vec<String> = results.into_iter().filter_map(Result::err).collect();
    VerifyLine {
        suite: suite.into(),
        name,
        trials,
        violations: failures.len(),
        witnesses: failures.into_iter().take(WITNESSES).collect(),
        measured: None,
    }
}

fn trials<F>(opts: &VerifyOptions, label: &str, f: F) -> Vec<Result<(), String>>
where
    F: Fn(&mut ChaCha8Rng) -> Result<(), String> + Sync,
{
    (0..opts.samples).into_par_iter().map(|i| f(&mut substream(opts.seed, label, i as u64))).collect()
}

const GEOMETRY_GROUPS: [&str; 4] = ["free:2", "free:3", "freeproduct:Z2,Z", "freeproduct:Z/2,Z/3"];

fn geometry(opts: &VerifyOptions) -> Vec<VerifyLine> {
    let mut out = Vec::new();
    for desc in GEOMETRY_GROUPS {
        let group: Group = desc.parse().expect("catalog group");
        let tree = TreeModel::new(group.clone());
        let g = &group;
        let t = &tree;
        let el = |rng: &mut ChaCha8Rng| random_element(g, rng, 12);

        out.push(collect("geometry", format!("{desc}: group axioms and normal forms"), trials(opts, &format!("axioms:{desc}"), |rng| {
            let (x, y, z) = (el(rng), el(rng), el(rng));
            let fx = g.format(&x);
            if g.mul(&g.mul(&x, &y), &z) != g.mul(&x, &g.mul(&y, &z)) {
                return Err(format!("associativity fails for {fx}, {}, {}", g.format(&y), g.format(&z)));
            }
            if !g.mul(&x, &g.invert(&x)).is_identity() {
                return Err(format!("{fx} times its inverse is not 1"));
            }
            if g.parse_element(&fx).as_ref() != Ok(&x) {
                return Err(format!("{fx} does not parse back to itself"));
            }
            Ok(())
        })));

        out.push(collect("geometry", format!("{desc}: tree metric"), trials(opts, &format!("metric:{desc}"), |rng| {
            let (x, y, z, h) = (el(rng), el(rng), el(rng), el(rng));
            let (a, b, c) = (t.orbit_point(&x), t.orbit_point(&y), t.orbit_point(&z));
            let (dab, dbc, dac) = (t.distance(&a, &b), t.distance(&b, &c), t.distance(&a, &c));
            let show = || format!("{}, {}, {}", g.format(&x), g.format(&y), g.format(&z));
            if dab != t.distance(&b, &a) || dac > dab + dbc {
                return Err(format!("symmetry or triangle inequality fails at {}", show()));
            }
            if t.distance(&t.act(&h, &a), &t.act(&h, &b)) != dab {
                return Err(format!("translation by {} is not an isometry at {}", g.format(&h), show()));
            }
            let path = t.geodesic(&a, &b);
            if path.len() as u64 != dab + 1 || path.windows(2).any(|w| t.distance(&w[0], &w[1]) != 1) {
                return Err(format!("geodesic between {} and {} is not a unit-step path of length d", g.format(&x), g.format(&y)));
            }
            // four-point condition with δ = 0
            let w = t.orbit_point(&h);
            let (p_ab, p_ac, p_bc) = (t.gromov_product(&a, &b, &w), t.gromov_product(&a, &c, &w), t.gromov_product(&b, &c, &w));
            if p_ab < p_ac.min(p_bc) {
                return Err(format!("four-point condition fails at {} with base {}", show(), g.format(&h)));
            }
            Ok(())
        })));

        out.push(collect("geometry", format!("{desc}: translation lengths"), trials(opts, &format!("translation:{desc}"), |rng| {
            let (x, h) = (el(rng), el(rng));
            let tau = t.translation_length(&x);
            let conj = g.mul(&g.mul(&h, &x), &g.invert(&h));
            let x2 = g.mul(&x, &x);
            let d = t.orbit_distance(&g.identity(), &x);
            let base = t.basepoint();
            let prod = t.gromov_product(&base, &t.orbit_point(&x2), &t.orbit_point(&x));
            let fx = g.format(&x);
            if t.translation_length(&conj) != tau {
                return Err(format!("translation length of {fx} changes under conjugation by {}", g.format(&h)));
            }
            if t.translation_length(&x2) != 2 * tau {
                return Err(format!("translation length of the square of {fx} is not twice that of {fx}"));
            }
            if tau > d || tau + 2 * prod < d {
                return Err(format!("{fx}: tau = {tau}, d = {d}, product = {prod} break tau <= d <= tau + 2 product"));
            }
            Ok(())
        })));
    }
    out
}

/// The three catalog systems. Without an explicit threshold each uses the
/// default threshold for its Behrstock constant.
fn projection_systems(behrstock: Option<u64>, threshold: Option<u64>) -> Result<Vec<(String, ProjectionSystem)>, LabError> {
    let config = |e: crate::projection::ProjectionError| LabError::Config(e.to_string());
    let mut out = Vec::new();
    for (desc, germ) in [("free:2", "a"), ("free:2", "ab"), ("freeproduct:Z2,Z", "xt")] {
        let group: Group = desc.parse().expect("catalog group");
        let germ_el = group.parse_element(germ).expect("catalog germ");
        let model = TreeModel::new(group);
        let loose = match behrstock {
            Some(b) => ProjectionSystem::with_behrstock(model, &germ_el, b, u64::MAX / 2),
            None => ProjectionSystem::new(model, &germ_el, u64::MAX / 2),
        }
        .map_err(config)?;
        let b = loose.behrstock();
        let t = threshold.unwrap_or(ProjectionSystem::default_threshold(b));
        let sys = loose.with_constants(b, t).map_err(config)?;
        out.push((format!("{desc} <{germ}> B={b} T={t}"), sys));
    }
    Ok(out)
}

fn projections(opts: &VerifyOptions, behrstock: Option<u64>, threshold: Option<u64>) -> Result<Vec<VerifyLine>, LabError> {
    let mut out = Vec::new();
    for (label, sys) in projection_systems(behrstock, threshold)? {
        let n = opts.samples;
        let s = opts.seed;
        for c in [
            checks::behrstock_violations(&sys, n, s),
            checks::order_violations(&sys, n, s),
            checks::distance_bound_violations(&sys, n, s),
            checks::middle_coset_violations(&sys, n, s),
            checks::lipschitz_violations(&sys, n, s, 10.0),
        ] {
            out.push(VerifyLine {
                suite: "projections".into(),
                name: format!("{label}: {}", c.name),
                trials: c.trials,
                violations: c.violations,
                witnesses: c.witnesses,
                measured: c.measured,
            });
        }
    }
    Ok(out)
}

const KERNELS: [(&str, &str); 6] = [
    ("free:2", "srw:uniform"),
    ("free:2", "srw:a=0.3,b=0.3,AB=0.4"),
    ("free:2", "parity:0.4,0.2,0.2,0.2|0.1,0.3,0.3,0.3"),
    ("free:2", "pushforward:suffix_swap:srw:uniform"),
    ("free:2", "pushforward:depth_relabel:7:srw:uniform"),
    ("freeproduct:Z2,Z", "srw:uniform"),
];

fn kernels(opts: &VerifyOptions) -> Result<Vec<VerifyLine>, LabError> {
    let mut out = Vec::new();
    for (gdesc, kdesc) in KERNELS {
        let group: Group = gdesc.parse().expect("catalog group");
        let kernel = Kernel::from_descriptor(&group, kdesc).map_err(|e| LabError::Config(e.to_string()))?;
        let (g, k) = (&group, &kernel);
        let name = |what: &str| format!("{gdesc} {kdesc}: {what}");

        let per_state = (opts.samples / 10).max(1);
        let results = (0..per_state)
            .into_par_iter()
            .map(|i| {
                let x = random_element(g, &mut substream(opts.seed, &format!("rows:{kdesc}"), i as u64), 12);
                let row = k.transitions(&x);
                let total: f64 = row.iter().map(|(_, p)| p).sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(format!("row of {} sums to {total}", g.format(&x)));
                }
                if let Some((y, _)) = row.iter().find(|(y, _)| g.distance(&x, y) > k.support_bound()) {
                    return Err(format!("{} jumps to {} beyond K = {}", g.format(&x), g.format(y), k.support_bound()));
                }
                Ok(())
            })
            .collect();
        out.push(collect("kernels", name("rows are distributions within the jump bound"), results));

        let report = tameness_probe(k, &[g.identity(), g.parse_element(if g.is_free() { "abA" } else { "xt" }).expect("word")], ProbeCaps::default());
        out.push(VerifyLine {
            suite: "kernels".into(),
            name: name("tameness probe"),
            trials: 1,
            violations: usize::from(!report.verdicts.tame),
            witnesses: report.failures.iter().take(WITNESSES).cloned().collect(),
            measured: Some(report.fit.rho),
        });

        out.push(exact_vs_sampled(opts, g, k, &name("exact law at n = 4 vs sampled paths")));

        if gdesc == "free:2" && kdesc == "srw:uniform" {
            let id = Kernel::pushforward(QiBijection::Identity, k.clone()).map_err(|e| LabError::Config(e.to_string()))?;
            let ball = g.ball(4).expect("small ball");
            let results = ball
                .iter()
                .map(|x| {
                    let mut a = k.transitions(x);
                    let mut b = id.transitions(x);
                    a.sort_by(|p, q| g.canonical_cmp(&p.0, &q.0));
                    b.sort_by(|p, q| g.canonical_cmp(&p.0, &q.0));
                    if a.len() != b.len() || a.iter().zip(&b).any(|(p, q)| p.0 != q.0 || (p.1 - q.1).abs() > 1e-12) {
                        return Err(format!("identity push-forward differs from the base at {}", g.format(x)));
                    }
                    Ok(())
                })
                .collect();
            out.push(collect("kernels", name("identity push-forward equals the base on ball(4)"), results));
        }
    }
    Ok(out)
}

/// Total variation between the exact law of `w_4` and the empirical law of
/// `samples` paths, against `√(support/N)`, about 2.5 times its expected size.
fn exact_vs_sampled(opts: &VerifyOptions, g: &Group, k: &Kernel, name: &str) -> VerifyLine {
    const N: usize = 4;
    let o = g.identity();
    let exact = exact_distribution(k, &o, N).expect("small n is under the cap");
    let ends: Vec<Element> = (0..opts.samples)
        .into_par_iter()
        .map(|i| {
            let rng = &mut substream(opts.seed, &format!("exact:{}", k.descriptor()), i as u64);
            let mut w = Walker::new(k, &o);
            for _ in 0..N {
                w.step(rng);
            }
            w.state().clone()
        })
        .collect();
    let mut empirical: HashMap<Element, f64> = HashMap::new();
    for e in ends {
        *empirical.entry(e).or_default() += 1.0 / opts.samples as f64;
    }
    let tv = total_variation(&exact, &empirical);
    let bound = (exact.len() as f64 / opts.samples as f64).sqrt();
    VerifyLine {
        suite: "kernels".into(),
        name: format!("{name} (bound {bound:.4})"),
        trials: 1,
        violations: usize::from(tv > bound),
        witnesses: if tv > bound { vec![format!("total variation {tv:.4}")] } else { Vec::new() },
        measured: Some(tv),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> VerifyOptions {
        VerifyOptions { seed, samples: 300, ..Default::default() }
    }

    #[test]
    fn suites_pass_at_small_sizes() {
        for s in [Suite::Geometry, Suite::Projections, Suite::Kernels] {
            let out = cmd_verify(s, &small(1)).unwrap();
            for l in &out.lines {
                assert!(l.passed(), "{l}");
            }
        }
    }

    #[test]
    fn negative_behrstock_is_a_config_error() {
        let opts = VerifyOptions { behrstock: Some(-1), ..small(1) };
        let err = cmd_verify(Suite::Projections, &opts).unwrap_err();
        assert_eq!(err.exit_code(), exit::CONFIG);
        assert!("everything".parse::<Suite>().is_err());
    }
}
