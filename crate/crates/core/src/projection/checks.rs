//! Randomised checks of the projection properties.
//!
//! Each check draws sample `i` from its own substream, so counts do not depend
//! on the number of worker threads.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::group::Element;
use crate::rng::{random_element, substream};

use super::{CosetMarking, ProjectionSystem};

const MAX_WITNESSES: usize = 5;

/// Result of one randomised check.
#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub trials: usize,
    pub violations: usize,
    pub witnesses: Vec<String>,
    /// Measured constant, for checks that estimate one.
    pub measured: Option<f64>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    fn collect(name: &str, results: Vec<Result<(), String>>, measured: Option<f64>) -> Self {
        let trials = results.len();
        let failures: Vec<String> = results.into_iter().filter_map(Result::err).collect();
        CheckOutcome {
            name: name.to_string(),
            trials,
            violations: failures.len(),
            witnesses: failures.into_iter().take(MAX_WITNESSES).collect(),
            measured,
        }
    }
}

/// A pair `(o, p)` whose geodesic runs along several translates of the axis:
/// `p = o · x₁ g₀^{k₁} x₂ g₀^{k₂} …` with `|k_i|` large enough to exceed `T`.
pub fn sample_rich_pair(sys: &ProjectionSystem, rng: &mut ChaCha8Rng) -> (Element, Element) {
    let group = sys.group();
    let o = random_element(group, rng, 6);
    let per_power = sys.base_axis().period.max(1);
    let need = sys.threshold().div_ceil(per_power) as i64;
    let mut middle = group.identity();
    for _ in 0..rng.random_range(1..=3) {
        group.mul_in_place(&mut middle, &random_element(group, rng, 4));
        let k = need + rng.random_range(0..=1);
        let k = if rng.random_bool(0.5) { k } else { -k };
        group.mul_in_place(&mut middle, &group.power(sys.root(), k));
    }
    group.mul_in_place(&mut middle, &random_element(group, rng, 4));
    let p = group.mul(&o, &middle);
    (o, p)
}

/// A point near the geodesic `[o, p]`: a random prefix of `o⁻¹p` plus noise.
fn sample_near(sys: &ProjectionSystem, rng: &mut ChaCha8Rng, o: &Element, p: &Element) -> Element {
    let group = sys.group();
    let word = group.spell(&group.difference(o, p));
    let cut = rng.random_range(0..=word.len());
    let mut x = group.mul(o, &group.from_generators(&word[..cut]));
    group.mul_in_place(&mut x, &random_element(group, rng, 5));
    x
}

fn run<F>(samples: usize, seed: u64, label: &str, f: F) -> Vec<Result<(), String>>
where
    F: Fn(&mut ChaCha8Rng) -> Result<(), String> + Sync,
{
    (0..samples)
        .into_par_iter()
        .map(|i| f(&mut substream(seed, label, i as u64)))
        .collect()
}

/// Strong Behrstock inequality: `d_{hγ}(x, h'γ) > B ⇒ π_{h'γ}(x) ∈ π_{h'γ}(hγ)`.
pub fn behrstock_violations(sys: &ProjectionSystem, samples: usize, seed: u64) -> CheckOutcome {
    let group = sys.group();
    let b = sys.behrstock();
    let results = run(samples, seed, "behrstock", |rng| {
        let h = random_element(group, rng, 6);
        let mut h2 = group.mul(&h, &random_element(group, rng, 6));
        if rng.random_bool(0.5) {
            h2 = group.mul(&h2, &group.power(sys.root(), rng.random_range(-2..=2)));
        }
        let (a, a2) = (sys.marking(&h), sys.marking(&h2));
        if a == a2 {
            return Ok(());
        }
        let x = group.mul(&h, &random_element(group, rng, 10));
        if sys.point_coset_distance(&a, &x, &a2) > b {
            let i = sys.coset_index(&a2, &x);
            let iv = sys.coset_interval(&a2, &a);
            if !iv.contains(i) {
                return Err(format!(
                    "x={} h={} h'={} index {} outside [{}, {}]",
                    group.format(&x),
                    group.format(&a.rep),
                    group.format(&a2.rep),
                    i,
                    iv.lo,
                    iv.hi
                ));
            }
        }
        Ok(())
    });
    CheckOutcome::collect("strong Behrstock inequality", results, Some(b as f64))
}

/// The four order conditions for `first ≺ second`.
fn order_conditions(
    sys: &ProjectionSystem,
    o: &Element,
    p: &Element,
    first: &CosetMarking,
    second: &CosetMarking,
) -> [bool; 4] {
    let b = sys.behrstock();
    [
        sys.point_coset_distance(first, o, second) > b,
        sys.coset_interval(second, first).contains(sys.coset_index(second, o)),
        sys.point_coset_distance(second, p, first) > b,
        sys.coset_interval(first, second).contains(sys.coset_index(first, p)),
    ]
}

/// Consecutive members of `H_T(o, p)` satisfy all four order conditions, and
/// the reversed pair satisfies none.
pub fn order_violations(sys: &ProjectionSystem, samples: usize, seed: u64) -> CheckOutcome {
    let group = sys.group();
    let results = run(samples, seed, "order", |rng| {
        let (o, p) = sample_rich_pair(sys, rng);
        let ht = sys.compute_ht(&o, &p);
        for pair in ht.entries.windows(2) {
            let (a, b) = (&pair[0].marking, &pair[1].marking);
            let fwd = order_conditions(sys, &o, &p, a, b);
            let rev = order_conditions(sys, &o, &p, b, a);
            if fwd != [true; 4] || rev != [false; 4] {
                return Err(format!(
                    "o={} p={} between {} and {}: forward {:?} reversed {:?}",
                    group.format(&o),
                    group.format(&p),
                    group.format(&a.rep),
                    group.format(&b.rep),
                    fwd,
                    rev
                ));
            }
        }
        Ok(())
    });
    CheckOutcome::collect("linear order on H_T", results, None)
}

/// `d_X(o·x₀, p·x₀) ≥ ½ Σ_{H_T(o,p)}[o, p]`.
pub fn distance_bound_violations(sys: &ProjectionSystem, samples: usize, seed: u64) -> CheckOutcome {
    let group = sys.group();
    let tree = sys.model();
    let results = run(samples, seed, "distance-bound", |rng| {
        let (o, p) = if rng.random_bool(0.5) {
            sample_rich_pair(sys, rng)
        } else {
            (random_element(group, rng, 10), random_element(group, rng, 20))
        };
        let ht = sys.compute_ht(&o, &p);
        let sum = sys.distance_formula_sum(&ht, &o, &p);
        let d = tree.orbit_distance(&o, &p);
        if 2 * d < sum {
            return Err(format!("o={} p={} d={d} sum={sum}", group.format(&o), group.format(&p)));
        }
        Ok(())
    });
    CheckOutcome::collect("distance lower bound", results, None)
}

/// At most two members of `H_T(o, p)` see `a` away from both `o` and `p`.
pub fn middle_coset_violations(sys: &ProjectionSystem, samples: usize, seed: u64) -> CheckOutcome {
    let group = sys.group();
    let results = run(samples, seed, "two-cosets", |rng| {
        let (o, p) = sample_rich_pair(sys, rng);
        let a = if rng.random_bool(0.7) {
            sample_near(sys, rng, &o, &p)
        } else {
            random_element(group, rng, 20)
        };
        let ht = sys.compute_ht(&o, &p);
        let middle = ht
            .entries
            .iter()
            .filter(|e| {
                let i = sys.coset_index(&e.marking, &a);
                i != sys.coset_index(&e.marking, &o) && i != sys.coset_index(&e.marking, &p)
            })
            .count();
        if middle > 2 {
            return Err(format!(
                "o={} p={} a={} has {middle} middle cosets",
                group.format(&o),
                group.format(&p),
                group.format(&a)
            ));
        }
        Ok(())
    });
    CheckOutcome::collect("at most two middle cosets", results, None)
}

/// `Σ_{H_T(o,p)}[a, b] ≤ L·d_X(a·x₀, b·x₀) + L`; reports the smallest `L`
/// consistent with every sample and counts samples exceeding `max_l`.
pub fn lipschitz_violations(sys: &ProjectionSystem, samples: usize, seed: u64, max_l: f64) -> CheckOutcome {
    let group = sys.group();
    let tree = sys.model();
    let per_sample: Vec<(f64, Result<(), String>)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let rng = &mut substream(seed, "lipschitz", i as u64);
            let (o, p) = sample_rich_pair(sys, rng);
            let a = sample_near(sys, rng, &o, &p);
            let b = if rng.random_bool(0.5) {
                sample_near(sys, rng, &o, &p)
            } else {
                group.mul(&a, &random_element(group, rng, 8))
            };
            let ht = sys.compute_ht(&o, &p);
            let sum = sys.distance_formula_sum(&ht, &a, &b) as f64;
            let d = tree.orbit_distance(&a, &b) as f64;
            let needed = sum / (d + 1.0);
            let verdict = if sum <= max_l * d + max_l {
                Ok(())
            } else {
                Err(format!("a={} b={} sum={sum} d={d}", group.format(&a), group.format(&b)))
            };
            (needed, verdict)
        })
        .collect();
    let l = per_sample.iter().map(|(x, _)| *x).fold(0.0, f64::max);
    let results = per_sample.into_iter().map(|(_, r)| r).collect();
    CheckOutcome::collect("coarse Lipschitz sum", results, Some(l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::TreeModel;

    fn system(desc: &str, germ: &str, t: u64) -> ProjectionSystem {
        let model = TreeModel::new(desc.parse().unwrap());
        let g = model.group().parse_element(germ).unwrap();
        ProjectionSystem::new(model, &g, t).unwrap()
    }

    #[test]
    fn small_runs_pass_on_free_group() {
        let s = system("free:2", "ab", 10);
        assert!(behrstock_violations(&s, 300, 1).passed());
        assert!(order_violations(&s, 300, 1).passed());
        assert!(distance_bound_violations(&s, 300, 1).passed());
        assert!(middle_coset_violations(&s, 300, 1).passed());
        let l = lipschitz_violations(&s, 300, 1, 10.0);
        assert!(l.passed());
        assert!(l.measured.unwrap() <= 10.0);
    }

    #[test]
    fn zero_constant_fails_where_axes_overlap() {
        let s = system("freeproduct:Z2,Z", "xt", 20);
        assert!(behrstock_violations(&s, 300, 2).passed());
        let strict = s.with_constants(0, 20).unwrap();
        assert!(!behrstock_violations(&strict, 2000, 2).passed());
    }

    #[test]
    fn counts_do_not_depend_on_thread_count() {
        let s = system("free:2", "a", 3);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let a = one.install(|| order_violations(&s, 200, 9));
        let b = order_violations(&s, 200, 9);
        assert_eq!(a.trials, b.trials);
        assert_eq!(a.violations, b.violations);
    }
}
