//! Brute-force reference for the high-projection family in the free group on `a, b`.
#![allow(dead_code)]

use rand::Rng;
use tamechain::group::{Element, Group};
use tamechain::projection::ProjectionSystem;
use tamechain::rng::{random_product, substream};

/// A germ written as `conj · core · conj⁻¹` with `core` cyclically reduced and primitive.
pub struct Germ {
    pub word: &'static str,
    conj: &'static str,
    core: &'static str,
}

pub const GERMS: [Germ; 3] = [
    Germ { word: "a", conj: "1", core: "a" },
    Germ { word: "ab", conj: "1", core: "ab" },
    Germ { word: "baB", conj: "b", core: "a" },
];

pub struct Oracle<'g> {
    g: &'g Group,
    conj: Element,
    core: Element,
    root: Element,
    /// `core` read one letter at a time
    prefixes: Vec<Element>,
}

impl<'g> Oracle<'g> {
    pub fn new(g: &'g Group, germ: &Germ) -> Self {
        let conj = g.parse_element(germ.conj).unwrap();
        let core = g.parse_element(germ.core).unwrap();
        let root = g.mul(&g.mul(&conj, &core), &g.invert(&conj));
        let letters: Vec<String> = germ.core.chars().map(|c| c.to_string()).collect();
        let prefixes = (0..letters.len()).map(|j| g.reduce(&letters[..j]).unwrap()).collect();
        Oracle { g, conj, core, root, prefixes }
    }

    fn period(&self) -> i64 {
        self.prefixes.len() as i64
    }

    /// `h₁⟨root⟩ = h₂⟨root⟩`, by looking for `h₁⁻¹h₂` among the powers of the root.
    pub fn same_coset(&self, h1: &Element, h2: &Element) -> bool {
        let q = self.g.mul(&self.g.invert(h1), h2);
        let bound = self.g.word_length(&q) as i64 / self.period() + 2;
        (-bound..=bound).any(|k| self.g.power(&self.root, k) == q)
    }

    /// Index of the nearest axis vertex `h·conj·core^k·prefix_j` to `x`, found by scanning a window.
    pub fn index(&self, h: &Element, x: &Element) -> i64 {
        let g = self.g;
        let reach = (g.word_length(h) + g.word_length(x) + g.word_length(&self.conj)) as i64 / self.period() + 3;
        let mut best = (u64::MAX, 0i64);
        for k in -reach..=reach {
            let base = g.mul(&g.mul(h, &self.conj), &g.power(&self.core, k));
            for (j, pre) in self.prefixes.iter().enumerate() {
                let d = g.distance(&g.mul(&base, pre), x);
                if d < best.0 {
                    best = (d, k * self.period() + j as i64);
                }
            }
        }
        best.1
    }

    /// Every coset whose projections of `o` and `p` are at least one apart, with that distance.
    /// Such a coset's axis shares an edge with the geodesic, so it passes through a geodesic vertex.
    pub fn family(&self, o: &Element, p: &Element) -> Vec<(Element, u64)> {
        let g = self.g;
        let path = g.spell(&g.mul(&g.invert(o), p));
        let conj_inv = g.invert(&self.conj);
        let mut out: Vec<(Element, u64)> = Vec::new();
        for i in 0..=path.len() {
            let v = g.mul(o, &g.reduce(&g.symbols(&path[..i])).unwrap());
            for pre in &self.prefixes {
                let h = g.mul(&g.mul(&v, &g.invert(pre)), &conj_inv);
                if out.iter().any(|(k, _)| self.same_coset(k, &h)) {
                    continue;
                }
                let d = self.index(&h, o).abs_diff(self.index(&h, p));
                if d > 0 {
                    out.push((h, d));
                }
            }
        }
        out
    }
}

/// Compares `compute_ht` with the oracle on one pair; returns a description of the first mismatch.
pub fn compare(sys: &ProjectionSystem, oracle: &Oracle, o: &Element, p: &Element) -> Option<String> {
    let g = sys.group();
    let ht = sys.compute_ht(o, p);
    let want: Vec<_> = oracle.family(o, p).into_iter().filter(|(_, d)| *d >= sys.threshold()).collect();
    let show = |x: &Element| g.format(x);
    for e in &ht.entries {
        match want.iter().find(|(h, _)| oracle.same_coset(h, &e.marking.rep)) {
            None => return Some(format!("extra coset {} for ({}, {})", show(&e.marking.rep), show(o), show(p))),
            Some((_, d)) if *d != e.distance => {
                return Some(format!("coset {} distance {} vs oracle {d} for ({}, {})", show(&e.marking.rep), e.distance, show(o), show(p)))
            }
            _ => {}
        }
    }
    if want.len() != ht.entries.len() {
        return Some(format!("{} cosets vs oracle {} for ({}, {})", ht.entries.len(), want.len(), show(o), show(p)));
    }
    None
}

/// Pair `(o, p)` with `|o⁻¹p| ≤ 20`; odd indices plant a long power of the germ in the middle.
pub fn pair(g: &Group, germ: &Element, seed: u64, i: u64) -> (Element, Element) {
    let mut rng = substream(seed, "ht-oracle", i);
    let lo = rng.random_range(0..8);
    let o = random_product(g, &mut rng, lo);
    let step = if i % 2 == 0 {
        let len = rng.random_range(0..=20);
        random_product(g, &mut rng, len)
    } else {
        let k = rng.random_range(2..=12) * if rng.random_bool(0.5) { 1 } else { -1 };
        let side = rng.random_range(0..=4);
        let m = g.mul(&random_product(g, &mut rng, side), &g.power(germ, k));
        g.mul(&m, &random_product(g, &mut rng, side))
    };
    if g.word_length(&step) > 20 {
        return (o.clone(), o);
    }
    let p = g.mul(&o, &step);
    (o, p)
}
