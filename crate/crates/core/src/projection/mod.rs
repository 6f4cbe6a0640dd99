//! Coset projections for a loxodromic germ `g`.
//!
//! With `γ = ⟨g₀⟩` for the primitive root `g₀` of `g`, every coset `hγ` has an
//! axis `h · Axis(γ)`, and `π_{hγ}(x)` is the closest point of that axis to
//! `x·x₀`. Points are identified with their index along the axis, so
//! `d_{hγ}(x, y)` is a difference of indices. The projection of another coset
//! is the (possibly one-point) interval of indices its axis projects onto.
//!
//! In a tree, `d_{hγ}(o, p) ≥ 1` exactly when the geodesic `[o·x₀, p·x₀]`
//! runs along the axis of `hγ`, and the length of that overlap is
//! `d_{hγ}(o, p)`. [`ProjectionSystem::compute_ht`] is built on this.

pub mod checks;
mod tracker;


use serde_json::json;
use thiserror::Error;

use crate::group::{Element, Group, Letter};
use crate::tree::{Axis, TreeError, TreeKind, TreeModel, Vertex};

pub use tracker::CosetTracker;

/// Default threshold `T`.
pub const DEFAULT_THRESHOLD: u64 = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProjectionError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("threshold {threshold} must be at least 3 and at least 10 * B = {}", 10 * behrstock)]
    Threshold { threshold: u64, behrstock: u64 },
}

/// Primitive root of a loxodromic element: the `g₀` with `g = g₀^k`, `k` maximal.
pub fn root_of(model: &TreeModel, g: &Element) -> Result<Element, TreeError> {
    let (u, c) = root_parts(model, g)?;
    let group = model.group();
    Ok(group.mul(&group.mul(&u, &c), &group.invert(&u)))
}

/// `(u, c₀)` with `root_of(g) = u·c₀·u⁻¹` and `c₀` cyclically reduced.
fn root_parts(model: &TreeModel, g: &Element) -> Result<(Element, Element), TreeError> {
    model.group().validate(g)?;
    if !model.is_loxodromic(g) {
        return Err(TreeError::NotLoxodromic(model.group().format(g)));
    }
    let (u, c) = model.group().cyclic_reduction(g);
    let m = c.len();
    let period = (1..=m)
        .filter(|d| m % d == 0)
        .find(|&d| match &c {
            Element::Word(w) => (d..m).all(|i| w[i] == w[i - d]),
            Element::Syllables(s) => (d..m).all(|i| s[i] == s[i - d]),
        })
        .expect("the full length is a period");
    Ok((u, c.prefix(period)))
}

/// The trivial vertex and the block of the coset vertex of a Bass-Serre edge.
fn edge_ends(pair: &[Vertex]) -> (&Element, usize) {
    match (&pair[0], &pair[1]) {
        (Vertex::Element(g), Vertex::Coset { block, .. }) | (Vertex::Coset { block, .. }, Vertex::Element(g)) => (g, *block),
        _ => unreachable!("Bass-Serre edges join a trivial vertex to a coset"),
    }
}

/// A coset `hγ` with its canonical representative and its axis.
#[derive(Clone, Debug)]
pub struct CosetMarking {
    pub rep: Element,
    pub axis: Axis,
}

impl PartialEq for CosetMarking {
    fn eq(&self, other: &Self) -> bool {
        self.rep == other.rep
    }
}

impl Eq for CosetMarking {}

/// Index interval `[lo, hi]` on an axis, with the distance between the two axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: i64,
    pub hi: i64,
    pub gap: u64,
}

impl Interval {
    pub fn contains(&self, i: i64) -> bool {
        self.lo <= i && i <= self.hi
    }

    pub fn len(&self) -> u64 {
        (self.hi - self.lo) as u64
    }

    pub fn is_empty(&self) -> bool {
        self.lo == self.hi
    }
}

/// One member of `H_T(o, p)`.
#[derive(Clone, Debug)]
pub struct HtEntry {
    pub marking: CosetMarking,
    pub distance: u64,
    /// Edge range `[first, last)` of the geodesic from `o` to `p` on this axis.
    pub span: (usize, usize),
}

/// `H_T(o, p)` listed from `o` towards `p`.
#[derive(Clone, Debug)]
pub struct OrderedHt {
    pub o: Element,
    pub p: Element,
    pub threshold: u64,
    pub entries: Vec<HtEntry>,
}

impl OrderedHt {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_json(&self, group: &Group) -> serde_json::Value {
        let cosets: Vec<_> = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| {
                json!({
                    "order": i,
                    "representative": group.format(&e.marking.rep),
                    "distance": e.distance,
                })
            })
            .collect();
        json!({
            "o": group.format(&self.o),
            "p": group.format(&self.p),
            "threshold": self.threshold,
            "cosets": cosets,
        })
    }
}

/// The projection data attached to one germ.
#[derive(Clone, Debug)]
pub struct ProjectionSystem {
    model: TreeModel,
    germ: Element,
    root: Element,
    conj: Element,
    core: Element,
    base_axis: Axis,
    behrstock: u64,
    threshold: u64,
}

impl ProjectionSystem {
    /// System with the Behrstock constant calibrated from the geometry.
    pub fn new(model: TreeModel, germ: &Element, threshold: u64) -> Result<Self, ProjectionError> {
        let mut sys = Self::build(model, germ, 0, 3)?;
        sys.behrstock = sys.calibrated_behrstock();
        sys.with_constants(sys.behrstock, threshold)
    }

    /// System with an explicit Behrstock constant `B`.
    pub fn with_behrstock(
        model: TreeModel,
        germ: &Element,
        behrstock: u64,
        threshold: u64,
    ) -> Result<Self, ProjectionError> {
        Self::build(model, germ, behrstock, threshold)
    }

    fn build(
        model: TreeModel,
        germ: &Element,
        behrstock: u64,
        threshold: u64,
    ) -> Result<Self, ProjectionError> {
        let (conj, core) = root_parts(&model, germ)?;
        let group = model.group();
        let root = group.mul(&group.mul(&conj, &core), &group.invert(&conj));
        let base_axis = model.axis_from_parts(root.clone(), conj.clone(), core.clone());
        let sys = ProjectionSystem {
            germ: germ.clone(),
            root,
            conj,
            core,
            base_axis,
            behrstock,
            threshold,
            model,
        };
        sys.with_constants(behrstock, threshold)
    }

    /// Smallest threshold this module accepts by default for a Behrstock constant `b`.
    pub fn default_threshold(b: u64) -> u64 {
        DEFAULT_THRESHOLD.max(b.saturating_mul(10))
    }

    /// Same germ with new constants, validated.
    pub fn with_constants(&self, behrstock: u64, threshold: u64) -> Result<Self, ProjectionError> {
        if threshold < 3 || threshold < behrstock.saturating_mul(10) {
            return Err(ProjectionError::Threshold { threshold, behrstock });
        }
        Ok(ProjectionSystem { behrstock, threshold, ..self.clone() })
    }

    pub fn model(&self) -> &TreeModel {
        &self.model
    }

    pub fn group(&self) -> &Group {
        self.model.group()
    }

    pub fn germ(&self) -> &Element {
        &self.germ
    }

    pub fn root(&self) -> &Element {
        &self.root
    }

    pub fn behrstock(&self) -> u64 {
        self.behrstock
    }

    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    pub fn base_axis(&self) -> &Axis {
        &self.base_axis
    }

    /// Largest number of edges two distinct translates of `Axis(γ)` share.
    ///
    /// Strong Behrstock holds with `B` equal to this overlap: a point whose
    /// projection to one axis is farther than the overlap from the other axis
    /// reaches the other axis through the overlap.
    pub fn calibrated_behrstock(&self) -> u64 {
        let group = self.group();
        let reach = (2 * group.word_length(&self.root) as usize + 2).min(6);
        let ball = group.ball(reach).expect("radius under the cap");
        let base = self.marking(&group.identity());
        let mut best = 0;
        for h in &ball {
            let m = self.marking(h);
            if m == base {
                continue;
            }
            let iv = self.coset_interval(&base, &m);
            if iv.gap == 0 {
                best = best.max(iv.len());
            }
        }
        best
    }

    /// Minimal-length representative of `hγ`, ties broken by the element order.
    pub fn canonical_rep(&self, h: &Element) -> Element {
        let group = self.group();
        let core_len = group.word_length(&self.core).max(1);
        let bound = (2 * group.word_length(h) + 2 * group.word_length(&self.conj)) / core_len + 2;
        let root_inv = group.invert(&self.root);
        let mut best = h.clone();
        for step in [&self.root, &root_inv] {
            let mut x = h.clone();
            for _ in 0..bound {
                x = group.mul(&x, step);
                if group.canonical_cmp(&x, &best).is_lt() {
                    best = x.clone();
                }
            }
        }
        best
    }

    pub fn marking(&self, h: &Element) -> CosetMarking {
        let rep = self.canonical_rep(h);
        let axis = self.model.translate_axis(&rep, &self.base_axis);
        CosetMarking { rep, axis }
    }

    /// `g · m`.
    pub fn translate(&self, g: &Element, m: &CosetMarking) -> CosetMarking {
        self.marking(&self.group().mul(g, &m.rep))
    }

    /// Axis index of `π_{hγ}(x)`.
    pub fn coset_index(&self, m: &CosetMarking, x: &Element) -> i64 {
        self.model.locate(&self.model.orbit_point(x), &m.axis).index
    }

    /// `π_{hγ}(x)` as a tree vertex.
    pub fn project_coset(&self, m: &CosetMarking, x: &Element) -> Vertex {
        self.model.axis_vertex(&m.axis, self.coset_index(m, x))
    }

    /// `d_{hγ}(x, y)`.
    pub fn coset_distance(&self, m: &CosetMarking, x: &Element, y: &Element) -> u64 {
        self.coset_index(m, x).abs_diff(self.coset_index(m, y))
    }

    /// `π_{m}(other)`: indices on the axis of `m` that the axis of `other` projects to.
    pub fn coset_interval(&self, m: &CosetMarking, other: &CosetMarking) -> Interval {
        assert!(m != other, "a coset does not project to itself");
        let tree = &self.model;
        let foot = |i: i64| tree.locate(&tree.axis_vertex(&other.axis, i), &m.axis);
        let start = foot(0);
        let (mut lo, mut hi, mut gap) = (start.index, start.index, start.distance);
        let limit = start.distance as i64 + 8 * other.axis.period as i64 + 64;
        for dir in [1i64, -1] {
            let mut prev = start;
            let mut i = 0;
            loop {
                i += dir;
                assert!(i.abs() <= limit, "axes of distinct cosets share an unbounded segment");
                let f = foot(i);
                lo = lo.min(f.index);
                hi = hi.max(f.index);
                gap = gap.min(f.distance);
                // moving away: every later vertex projects to the same point
                if f.distance > prev.distance {
                    break;
                }
                prev = f;
            }
        }
        Interval { lo, hi, gap }
    }

    /// `d_{m}(x, other) = diam(π_m(x) ∪ π_m(other))`.
    pub fn point_coset_distance(&self, m: &CosetMarking, x: &Element, other: &CosetMarking) -> u64 {
        let i = self.coset_index(m, x);
        let iv = self.coset_interval(m, other);
        (iv.hi.max(i) - iv.lo.min(i)) as u64
    }

    /// `H_T(o, p)` in the order from `o` to `p`.
    pub fn compute_ht(&self, o: &Element, p: &Element) -> OrderedHt {
        let mut entries = match self.model.kind() {
            TreeKind::Cayley => self.ht_free(o, p),
            TreeKind::BassSerre => self.ht_generic(o, p),
        };
        entries.sort_by(|a, b| a.span.cmp(&b.span).then_with(|| a.marking.rep.cmp(&b.marking.rep)));
        OrderedHt { o: o.clone(), p: p.clone(), threshold: self.threshold, entries }
    }

    /// Maximal runs of the geodesic label sequence that read `core^∞` (or its
    /// inverse) from some phase; each such run is the overlap with one translate.
    /// Returns `(first edge, end edge, direction, phase at first edge)`.
    fn label_runs(&self, w: &[Letter], min_len: usize) -> Vec<(usize, usize, bool, usize)> {
        let core = self.core.letters().expect("free group core");
        let m = core.len();
        let inv: Vec<Letter> = core.iter().rev().map(|l| l.inverse()).collect();
        let mut runs = Vec::new();
        for (forward, seq) in [(true, core), (false, &inv[..])] {
            for r in 0..m {
                let mut t = 0;
                while t < w.len() {
                    if w[t] != seq[(t + r) % m] {
                        t += 1;
                        continue;
                    }
                    let start = t;
                    while t < w.len() && w[t] == seq[(t + r) % m] {
                        t += 1;
                    }
                    if t - start >= min_len {
                        runs.push((start, t, forward, (start + r) % m));
                    }
                }
            }
        }
        runs
    }

    fn ht_free(&self, o: &Element, p: &Element) -> Vec<HtEntry> {
        let group = self.group();
        let diff = group.difference(o, p);
        let w = diff.letters().expect("free group element");
        let core = &self.core;
        let m = core.len();
        let conj_inv = group.invert(&self.conj);
        let mut out = Vec::new();
        for (start, end, forward, phase) in self.label_runs(w, self.threshold as usize) {
            let v = group.mul(o, &diff.prefix(start));
            let back = if forward { core.prefix(phase) } else { core.prefix(m - phase) };
            let k = group.mul(&v, &group.invert(&back));
            let marking = self.marking(&group.mul(&k, &conj_inv));
            let distance = self.coset_distance(&marking, o, p);
            debug_assert_eq!(distance as usize, end - start);
            out.push(HtEntry { marking, distance, span: (start, end) });
        }
        out
    }

    /// Candidate translates `k·⟨core⟩` on each edge of the geodesic. A coset axis
    /// meets the geodesic in one segment, so runs are followed edge to edge and
    /// only runs of length at least `T` are canonicalised.
    fn ht_generic(&self, o: &Element, p: &Element) -> Vec<HtEntry> {
        let group = self.group();
        let path = self.model.geodesic(&self.model.orbit_point(o), &self.model.orbit_point(p));
        let syl = self.core.syllables().expect("free product core");
        let m = syl.len();
        let prefixes: Vec<Element> = (0..=m).map(|j| group.invert(&self.core.prefix(j))).collect();
        let powers: Vec<Element> = (-2..=2).map(|n| group.power(&self.core, n)).collect();
        let same = |a: &Element, b: &Element| powers.contains(&group.difference(a, b));
        // (translate, first edge)
        let mut open: Vec<(Element, usize)> = Vec::new();
        let mut runs: Vec<(Element, usize, usize)> = Vec::new();
        for (t, pair) in path.windows(2).enumerate() {
            let (g, block) = edge_ends(pair);
            let mut here: Vec<(Element, usize)> = Vec::new();
            for j in (0..m).filter(|&j| syl[j].block == block) {
                for back in [&prefixes[j], &prefixes[j + 1]] {
                    let k = group.mul(g, back);
                    if here.iter().any(|(h, _)| same(h, &k)) {
                        continue;
                    }
                    let first = match open.iter().position(|(h, _)| same(h, &k)) {
                        Some(i) => open.swap_remove(i).1,
                        None => t,
                    };
                    here.push((k, first));
                }
            }
            runs.extend(open.drain(..).map(|(k, first)| (k, first, t)));
            open = here;
        }
        let last = path.len().saturating_sub(1);
        runs.extend(open.into_iter().map(|(k, first)| (k, first, last)));

        let conj_inv = group.invert(&self.conj);
        let mut out = Vec::new();
        for (k, first, end) in runs {
            if ((end - first) as u64) < self.threshold {
                continue;
            }
            let marking = self.marking(&group.mul(&k, &conj_inv));
            let distance = self.coset_distance(&marking, o, p);
            debug_assert_eq!(distance as usize, end - first);
            if distance >= self.threshold {
                out.push(HtEntry { marking, distance, span: (first, end) });
            }
        }
        out
    }

    /// Reference for `ht_generic`: canonicalises every candidate.
    #[cfg(test)]
    fn ht_generic_by_rep(&self, o: &Element, p: &Element) -> Vec<HtEntry> {
        let group = self.group();
        let tree = &self.model;
        let path = tree.geodesic(&tree.orbit_point(o), &tree.orbit_point(p));
        let syl = self.core.syllables().expect("free product core");
        let m = syl.len();
        let prefixes: Vec<Element> = (0..=m).map(|j| group.invert(&self.core.prefix(j))).collect();
        let conj_inv = group.invert(&self.conj);
        let mut cache: std::collections::HashMap<Element, Element> = Default::default();
        // canonical rep -> (edge count, first edge, last edge)
        let mut seen: std::collections::HashMap<Element, (usize, usize, usize)> = Default::default();
        for (t, pair) in path.windows(2).enumerate() {
            let (g, block) = edge_ends(pair);
            let mut here: Vec<Element> = Vec::new();
            for j in (0..m).filter(|&j| syl[j].block == block) {
                for back in [&prefixes[j], &prefixes[j + 1]] {
                    let k = group.mul(g, back);
                    let rep = cache
                        .entry(k.clone())
                        .or_insert_with(|| self.canonical_rep(&group.mul(&k, &conj_inv)))
                        .clone();
                    if !here.contains(&rep) {
                        here.push(rep);
                    }
                }
            }
            for rep in here {
                let e = seen.entry(rep).or_insert((0, t, t));
                e.0 += 1;
                e.2 = t;
            }
        }
        let mut out = Vec::new();
        for (rep, (count, first, last)) in seen {
            if (count as u64) < self.threshold {
                continue;
            }
            let marking = self.marking(&rep);
            let distance = self.coset_distance(&marking, o, p);
            debug_assert_eq!(distance as usize, count);
            if distance >= self.threshold {
                out.push(HtEntry { marking, distance, span: (first, last + 1) });
            }
        }
        out
    }

    /// `Σ_{H_T(o,p)}[o, p]` without building the markings (free groups use
    /// label runs directly).
    pub fn ht_total(&self, o: &Element, p: &Element) -> u64 {
        match self.model.kind() {
            TreeKind::Cayley => {
                let diff = self.group().difference(o, p);
                let w = diff.letters().expect("free group element");
                self.label_runs(w, self.threshold as usize)
                    .iter()
                    .map(|(s, e, _, _)| (e - s) as u64)
                    .sum()
            }
            TreeKind::BassSerre => self.compute_ht(o, p).entries.iter().map(|e| e.distance).sum(),
        }
    }

    /// `Σ_{H}[z₁, z₂]`.
    pub fn distance_formula_sum(&self, ht: &OrderedHt, z1: &Element, z2: &Element) -> u64 {
        ht.entries.iter().map(|e| self.coset_distance(&e.marking, z1, z2)).sum()
    }

    /// Incremental projection of a moving point onto a fixed coset.
    pub fn tracker(&self, m: &CosetMarking, start: &Element) -> CosetTracker {
        CosetTracker::new(self, m, start)
    }
}
