//! Occurrence of a fixed word as an increment `w_i⁻¹ w_j` of the sample path.

use std::collections::HashSet;

use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::group::{Element, Group};
use crate::markov::Walker;

use super::{frac, par_samples, ExperimentConfig, ExperimentError, Judge, Outcome, Setup, Table, Tolerance};

const MOD: u64 = (1 << 61) - 1;
const BASES: [u64; 2] = [0x1f3d_5b79_a2c4_e681 % MOD, 0x2b7e_1516_28ae_d2a7 % MOD];

fn mul_mod(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % MOD as u128) as u64
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hash codes of the letters or syllables of an element.
fn unit_codes(x: &Element, from: usize) -> Vec<u64> {
    match x {
        Element::Word(w) => w[from..].iter().map(|l| l.rank() as u64 + 1).collect(),
        Element::Syllables(s) => s[from..]
            .iter()
            .map(|syl| {
                let mut h = mix(syl.block as u64 + 1);
                for v in &syl.value {
                    h = mix(h ^ (*v as u64));
                }
                h % MOD
            })
            .collect(),
    }
}

type Key = (usize, u64, u64);

/// Polynomial prefix hashes of the normal form of a moving state.
struct PrefixHashes {
    h: Vec<[u64; 2]>,
}

impl PrefixHashes {
    fn new() -> Self {
        PrefixHashes { h: vec![[0, 0]] }
    }

    fn extend(mut acc: [u64; 2], codes: &[u64]) -> [u64; 2] {
        for c in codes {
            for (a, b) in acc.iter_mut().zip(BASES) {
                *a = (mul_mod(*a, b) + c) % MOD;
            }
        }
        acc
    }

    /// Resynchronise after the first `low` units were kept.
    fn update(&mut self, x: &Element, low: usize) {
        self.h.truncate(low + 1);
        let mut acc = self.h[low];
        for c in unit_codes(x, low) {
            acc = Self::extend(acc, &[c]);
            self.h.push(acc);
        }
    }

    fn key(&self) -> Key {
        let h = self.h[self.h.len() - 1];
        (self.h.len() - 1, h[0], h[1])
    }

    /// Key of `x · y` where `x` is the hashed state and `y` has `units` units.
    fn key_times(&self, group: &Group, x: &Element, y: &Element) -> Key {
        let len = x.len();
        let m = len.min(y.len());
        let tail = x.suffix(len - m);
        let r = group.mul(&tail, y);
        let acc = Self::extend(self.h[len - m], &unit_codes(&r, 0));
        (len - m + r.len(), acc[0], acc[1])
    }
}

/// First `j ≤ n` at which some `i ≤ j` has `w_i⁻¹ w_j = y` or `w_j⁻¹ w_i = y`.
pub(crate) fn first_occurrence(s: &Setup, y: &Element, n: usize, rng: &mut ChaCha8Rng) -> Option<usize> {
    let group = &s.group;
    let y_inv = group.invert(y);
    let mut w = Walker::new(&s.kernel, &s.start);
    let mut hashes = PrefixHashes::new();
    hashes.update(w.state(), 0);
    let mut seen: HashSet<Key> = HashSet::new();
    for j in 0..=n {
        if j > 0 {
            let low = w.step(rng);
            hashes.update(w.state(), low);
        }
        seen.insert(hashes.key());
        let x = w.state();
        if seen.contains(&hashes.key_times(group, x, &y_inv)) || seen.contains(&hashes.key_times(group, x, y)) {
            return Some(j);
        }
    }
    None
}

/// A reduced word of length `len` alternating between two generators.
fn alternating_word(group: &Group, len: usize) -> Element {
    let gens = group.generators();
    let first = &gens[0];
    let second = gens
        .iter()
        .position(|g| g.element != first.element && g.element != gens[first.inverse].element)
        .unwrap_or(0);
    let idx: Vec<usize> = (0..len).map(|i| if i % 2 == 0 { 0 } else { second }).collect();
    group.from_generators(&idx)
}

pub(super) fn subword(cfg: &ExperimentConfig, s: &Setup, judge: &mut Judge) -> Result<Outcome, ExperimentError> {
    let y = s.group.parse_element(cfg.word.as_deref().expect("validated"))?;
    let n_max = *cfg.n_grid.last().expect("validated grid");
    let total = cfg.trajectories;
    let firsts = par_samples(cfg.seed(), &format!("{}:fixed", cfg.id()), total, |rng| first_occurrence(s, &y, n_max, rng));
    let mut tail = Table::new(&["n", "occurrence_probability", "word_length", "curve_probability"]);
    let mut per_n = Vec::new();
    let mut curve = Vec::new();
    let mut u_hat: Option<f64> = None;
    for &n in &cfg.n_grid {
        let p = frac(firsts.iter().filter(|t| t.is_some_and(|t| t <= n)).count(), total);
        // a word of length 2·log₃ n, freshly sampled paths for each n
        let len = ((2.0 * (n.max(1) as f64).ln() / 3f64.ln()).floor() as usize).max(1);
        let yn = alternating_word(&s.group, len);
        let hits = par_samples(cfg.seed(), &format!("{}:curve:{n}", cfg.id()), total, |rng| first_occurrence(s, &yn, n, rng))
            .iter()
            .filter(|t| t.is_some())
            .count();
        let pc = frac(hits, total);
        if pc < 1.0 && pc > 0.0 {
            let u = (n as f64).sqrt() / -(1.0 - pc).ln();
            u_hat = Some(u_hat.map_or(u, |v: f64| v.max(u)));
        }
        tail.push(vec![n as f64, p, len as f64, pc]);
        per_n.push(json!({ "n": n, "occurrence_probability": p }));
        curve.push(json!({ "n": n, "word": s.group.format(&yn), "word_length": len, "occurrence_probability": pc }));
    }
    let p_last = frac(firsts.iter().filter(|t| t.is_some()).count(), total);
    judge.configured("occurrence", p_last);
    if y.is_identity() {
        judge.always("identity_occurrence", p_last, Tolerance::at_least(1.0));
    }
    match u_hat {
        Some(u) => judge.fit("u", u, 0.0, "smallest U with P >= 1 - exp(-sqrt(n)/U) on the log-length curve"),
        None => judge.note("log-length curve reached probability 1 at every n: U is not constrained"),
    }
    let mut statistics = json!({ "word": s.group.format(&y), "per_n": per_n, "log_length_curve": curve });

    if cfg.germ.is_some() {
        let sys = cfg.projection_system(&s.model)?;
        let mut proj = Vec::new();
        let mut eta: Option<f64> = None;
        let mut maxima_by_n = Vec::new();
        for &n in &cfg.n_grid {
            let maxima: Vec<u64> = par_samples(cfg.seed(), &format!("{}:projection:{n}", cfg.id()), total, |rng| {
                let mut w = Walker::new(&s.kernel, &s.start);
                for _ in 0..n {
                    w.step(rng);
                }
                sys.compute_ht(&s.start, w.state()).entries.iter().map(|e| e.distance).max().unwrap_or(0)
            });
            let mut sorted = maxima.clone();
            sorted.sort_unstable();
            let decile = sorted[sorted.len() / 10] as f64;
            let ln = (n.max(2) as f64).ln();
            eta = Some(eta.map_or(decile / ln, |e: f64| e.min(decile / ln)));
            maxima_by_n.push((n, maxima));
        }
        let eta = eta.unwrap_or(0.0);
        for (n, maxima) in &maxima_by_n {
            let ln = (n.max(&2).to_owned() as f64).ln();
            let p = frac(maxima.iter().filter(|m| **m as f64 >= eta * ln).count(), total);
            proj.push(json!({ "n": n, "probability_reaching_eta_log_n": p }));
        }
        judge.fit("eta", eta, 0.0, "smallest lower-decile of max projection distance over log n across the grid");
        statistics["projection"] = json!({ "threshold": sys.threshold(), "per_n": proj });
    }
    Ok(Outcome { statistics, tail: Some(tail), hist: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Group;
    use crate::markov::Kernel;
    use crate::rng::substream;
    use crate::tree::TreeModel;

    fn setup(desc: &str) -> Setup {
        let group: Group = desc.parse().unwrap();
        Setup { model: TreeModel::new(group.clone()), kernel: Kernel::simple_random_walk(&group), start: group.identity(), group }
    }

    /// Direct search over all pairs of stored states.
    fn brute(s: &Setup, y: &Element, n: usize, rng: &mut ChaCha8Rng) -> Option<usize> {
        let mut w = Walker::new(&s.kernel, &s.start);
        let mut states = vec![w.state().clone()];
        for j in 0..=n {
            if j > 0 {
                w.step(rng);
                states.push(w.state().clone());
            }
            let x = &states[j];
            for z in &states {
                if s.group.difference(z, x) == *y || s.group.difference(x, z) == *y {
                    return Some(j);
                }
            }
        }
        None
    }

    #[test]
    fn hashed_search_agrees_with_pairwise_search() {
        for (desc, words) in [("free:2", ["ab", "aBa", "1"]), ("freeproduct:Z2,Z", ["xt", "x2Ty", "t2"])] {
            let s = setup(desc);
            for w in words {
                let y = s.group.parse_element(w).unwrap();
                for i in 0..60 {
                    let a = first_occurrence(&s, &y, 80, &mut substream(1, w, i));
                    let b = brute(&s, &y, 80, &mut substream(1, w, i));
                    assert_eq!(a, b, "{desc} {w} sample {i}");
                }
            }
        }
    }

    #[test]
    fn alternating_words_are_reduced() {
        let s = setup("free:2");
        assert_eq!(s.group.format(&alternating_word(&s.group, 5)), "ababa");
        let z = setup("freeproduct:Z/3,Z");
        assert_eq!(z.group.word_length(&alternating_word(&z.group, 6)), 6);
    }
}
