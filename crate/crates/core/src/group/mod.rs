//! Exact arithmetic in the supported group catalog.
//!
//! Two families are supported: free groups `F_k` (reduced words over
//! `a, b, c, …`, inverses written in upper case) and free products of finitely
//! many abelian factors `Z^r` and `Z/m` (alternating syllable normal form).
//! Every operation is pure; a [`Group`] is an immutable value.

mod catalog;
mod element;

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

pub use catalog::{Block, GroupKind};
pub use element::{Element, Letter, Syllable};
pub(crate) use element::common_prefix;

/// Symbols handed out, in order, to the coordinates of free-product factors.
pub(crate) const PRODUCT_SYMBOLS: &[char] = &[
    'x', 'y', 't', 'u', 'v', 'w', 'z', 'p', 'q', 'r', 's', 'm', 'n', 'j', 'k', 'l', 'h', 'g', 'f',
    'd', 'c', 'b', 'a',
];

/// Largest radius [`Group::ball`] enumerates unless a different cap is passed.
pub const DEFAULT_BALL_RADIUS_CAP: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error("invalid group descriptor: {0}")]
    Descriptor(String),
    #[error("unknown letter symbol `{0}`")]
    UnknownSymbol(String),
    #[error("cannot parse element `{input}`: {reason}")]
    Parse { input: String, reason: String },
    #[error("element does not belong to {0}")]
    Mismatch(String),
    #[error("ball radius {radius} exceeds the configured cap {cap}")]
    RadiusOverCap { radius: usize, cap: usize },
}

/// One entry of the ordered generator list.
#[derive(Clone, Debug)]
pub struct Generator {
    pub symbol: String,
    pub element: Element,
    /// Index of the formal inverse in the generator list (itself for order-2 generators).
    pub inverse: usize,
}

/// A catalog group together with its ordered, inversion-closed generator list.
#[derive(Clone, Debug)]
pub struct Group {
    kind: GroupKind,
    generators: Vec<Generator>,
    /// `coordinate_symbols[block][coord]` for free products.
    coordinate_symbols: Vec<Vec<char>>,
}

impl PartialEq for Group {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Group {}

impl std::str::FromStr for Group {
    type Err = GroupError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Group::new(s.parse()?)
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.kind.fmt(f)
    }
}

impl Group {
    pub fn new(kind: GroupKind) -> Result<Self, GroupError> {
        kind.validate()?;
        let mut generators = Vec::new();
        let mut coordinate_symbols = Vec::new();
        match &kind {
            GroupKind::Free { rank } => {
                for g in 0..*rank {
                    let sym = (b'a' + g as u8) as char;
                    let idx = generators.len();
                    generators.push(Generator {
                        symbol: sym.to_string(),
                        element: Element::Word(vec![Letter::new(g, false)]),
                        inverse: idx + 1,
                    });
                    generators.push(Generator {
                        symbol: sym.to_ascii_uppercase().to_string(),
                        element: Element::Word(vec![Letter::new(g, true)]),
                        inverse: idx,
                    });
                }
            }
            GroupKind::FreeProduct { blocks } => {
                let mut pool = PRODUCT_SYMBOLS.iter();
                for (b, block) in blocks.iter().enumerate() {
                    let mut syms = Vec::new();
                    for coord in 0..block.dimension() {
                        let sym = *pool.next().expect("validated symbol budget");
                        syms.push(sym);
                        let (plus, minus) = match *block {
                            Block::Lattice { rank } => {
                                let mut up = vec![0; rank];
                                up[coord] = 1;
                                let down = up.iter().map(|v| -v).collect();
                                (up, down)
                            }
                            Block::Cyclic { order } => (vec![1], vec![order - 1]),
                        };
                        let idx = generators.len();
                        let self_inverse = plus == minus;
                        generators.push(Generator {
                            symbol: sym.to_string(),
                            element: Element::Syllables(vec![Syllable { block: b, value: plus }]),
                            inverse: if self_inverse { idx } else { idx + 1 },
                        });
                        if !self_inverse {
                            generators.push(Generator {
                                symbol: sym.to_ascii_uppercase().to_string(),
                                element: Element::Syllables(vec![Syllable {
                                    block: b,
                                    value: minus,
                                }]),
                                inverse: idx,
                            });
                        }
                    }
                    coordinate_symbols.push(syms);
                }
            }
        }
        Ok(Group { kind, generators, coordinate_symbols })
    }

    pub fn free(rank: usize) -> Result<Self, GroupError> {
        Group::new(GroupKind::Free { rank })
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn is_free(&self) -> bool {
        matches!(self.kind, GroupKind::Free { .. })
    }

    pub fn blocks(&self) -> &[Block] {
        match &self.kind {
            GroupKind::FreeProduct { blocks } => blocks,
            GroupKind::Free { .. } => &[],
        }
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn generator_index(&self, symbol: &str) -> Option<usize> {
        let symbol = symbol.trim();
        if let Some(i) = self.generators.iter().position(|g| g.symbol == symbol) {
            return Some(i);
        }
        let base = symbol
            .strip_suffix("⁻¹")
            .or_else(|| symbol.strip_suffix("^-1"))?;
        let i = self.generators.iter().position(|g| g.symbol == base)?;
        Some(self.generators[i].inverse)
    }

    pub fn identity(&self) -> Element {
        if self.is_free() {
            Element::Word(Vec::new())
        } else {
            Element::Syllables(Vec::new())
        }
    }

    /// Check that `x` is a normal form of this group.
    pub fn validate(&self, x: &Element) -> Result<(), GroupError> {
        let bad = || GroupError::Mismatch(self.kind.to_string());
        match (&self.kind, x) {
            (GroupKind::Free { rank }, Element::Word(w)) => {
                if w.iter().any(|l| l.generator() >= *rank) {
                    return Err(bad());
                }
                if w.windows(2).any(|p| p[0] == p[1].inverse()) {
                    return Err(bad());
                }
                Ok(())
            }
            (GroupKind::FreeProduct { blocks }, Element::Syllables(s)) => {
                for (i, syl) in s.iter().enumerate() {
                    let block = blocks.get(syl.block).ok_or_else(bad)?;
                    if syl.value.len() != block.dimension() {
                        return Err(bad());
                    }
                    match *block {
                        Block::Lattice { .. } => {
                            if syl.value.iter().all(|v| *v == 0) {
                                return Err(bad());
                            }
                        }
                        Block::Cyclic { order } => {
                            if !(1..order).contains(&syl.value[0]) {
                                return Err(bad());
                            }
                        }
                    }
                    if i > 0 && s[i - 1].block == syl.block {
                        return Err(bad());
                    }
                }
                Ok(())
            }
            _ => Err(bad()),
        }
    }

    /// Normal form of a product of generator symbols.
    pub fn reduce<S: AsRef<str>>(&self, symbols: &[S]) -> Result<Element, GroupError> {
        let mut x = self.identity();
        for s in symbols {
            let i = self
                .generator_index(s.as_ref())
                .ok_or_else(|| GroupError::UnknownSymbol(s.as_ref().to_string()))?;
            self.mul_in_place(&mut x, &self.generators[i].element);
        }
        Ok(x)
    }

    /// Normal form from generator indices.
    pub fn from_generators(&self, indices: &[usize]) -> Element {
        let mut x = self.identity();
        for &i in indices {
            self.mul_in_place(&mut x, &self.generators[i].element);
        }
        x
    }

    pub fn multiply(&self, x: &Element, y: &Element) -> Result<Element, GroupError> {
        self.validate(x)?;
        self.validate(y)?;
        Ok(self.mul(x, y))
    }

    /// Group law on elements already known to belong to this group.
    pub fn mul(&self, x: &Element, y: &Element) -> Element {
        let mut out = x.clone();
        self.mul_in_place(&mut out, y);
        out
    }

    /// Right-multiply `x` by `y` in place.
    ///
    /// Returns the number of leading letters (or syllables) of the old `x`
    /// that survive unchanged in the result.
    pub fn mul_in_place(&self, x: &mut Element, y: &Element) -> usize {
        match (x, y) {
            (Element::Word(w), Element::Word(v)) => {
                let mut low = w.len();
                for &l in v {
                    if w.last() == Some(&l.inverse()) {
                        w.pop();
                        low = low.min(w.len());
                    } else {
                        w.push(l);
                    }
                }
                low
            }
            (Element::Syllables(s), Element::Syllables(t)) => {
                let mut low = s.len();
                for syl in t {
                    match s.last_mut() {
                        Some(last) if last.block == syl.block => {
                            let n = s.len() - 1;
                            low = low.min(n);
                            match self.combine(syl.block, &s[n].value, &syl.value) {
                                Some(v) => s[n].value = v,
                                None => {
                                    s.pop();
                                }
                            }
                        }
                        _ => s.push(syl.clone()),
                    }
                }
                low
            }
            _ => panic!("element shape does not match group {}", self.kind),
        }
    }

    fn combine(&self, block: usize, a: &[i64], b: &[i64]) -> Option<Vec<i64>> {
        match self.blocks()[block] {
            Block::Lattice { .. } => {
                let v: Vec<i64> = a.iter().zip(b).map(|(p, q)| p + q).collect();
                (!v.iter().all(|c| *c == 0)).then_some(v)
            }
            Block::Cyclic { order } => {
                let r = (a[0] + b[0]).rem_euclid(order);
                (r != 0).then_some(vec![r])
            }
        }
    }

    fn negate(&self, syl: &Syllable) -> Syllable {
        let value = match self.blocks()[syl.block] {
            Block::Lattice { .. } => syl.value.iter().map(|v| -v).collect(),
            Block::Cyclic { order } => vec![(order - syl.value[0]).rem_euclid(order)],
        };
        Syllable { block: syl.block, value }
    }

    pub fn invert(&self, x: &Element) -> Element {
        match x {
            Element::Word(w) => Element::Word(w.iter().rev().map(|l| l.inverse()).collect()),
            Element::Syllables(s) => {
                Element::Syllables(s.iter().rev().map(|syl| self.negate(syl)).collect())
            }
        }
    }

    pub fn power(&self, x: &Element, n: i64) -> Element {
        let base = if n < 0 { self.invert(x) } else { x.clone() };
        let mut out = self.identity();
        for _ in 0..n.unsigned_abs() {
            self.mul_in_place(&mut out, &base);
        }
        out
    }

    /// `x⁻¹ y`.
    pub fn difference(&self, x: &Element, y: &Element) -> Element {
        match (x, y) {
            (Element::Word(a), Element::Word(b)) => {
                let c = common_prefix(a, b);
                let mut w: Vec<Letter> = a[c..].iter().rev().map(|l| l.inverse()).collect();
                w.extend_from_slice(&b[c..]);
                Element::Word(w)
            }
            _ => self.mul(&self.invert(x), y),
        }
    }

    pub fn syllable_length(&self, syl: &Syllable) -> u64 {
        match self.blocks()[syl.block] {
            Block::Lattice { .. } => syl.value.iter().map(|v| v.unsigned_abs()).sum(),
            Block::Cyclic { order } => {
                let j = syl.value[0];
                j.min(order - j) as u64
            }
        }
    }

    /// Word length with respect to the generator list.
    pub fn word_length(&self, x: &Element) -> u64 {
        match x {
            Element::Word(w) => w.len() as u64,
            Element::Syllables(s) => s.iter().map(|syl| self.syllable_length(syl)).sum(),
        }
    }

    /// Word metric `d_G(x, y) = |x⁻¹ y|`.
    pub fn distance(&self, x: &Element, y: &Element) -> u64 {
        match (x, y) {
            (Element::Word(a), Element::Word(b)) => {
                let c = common_prefix(a, b);
                (a.len() + b.len() - 2 * c) as u64
            }
            (Element::Syllables(a), Element::Syllables(b)) => {
                let c = common_prefix(a, b);
                let tail = |s: &[Syllable]| -> u64 {
                    s.iter().map(|syl| self.syllable_length(syl)).sum()
                };
                match (a.get(c), b.get(c)) {
                    (Some(p), Some(q)) if p.block == q.block => {
                        let merged = self
                            .combine(p.block, &self.negate(p).value, &q.value)
                            .expect("distinct syllables do not cancel");
                        self.syllable_length(&Syllable { block: p.block, value: merged })
                            + tail(&a[c + 1..])
                            + tail(&b[c + 1..])
                    }
                    _ => tail(&a[c..]) + tail(&b[c..]),
                }
            }
            _ => panic!("element shape does not match group {}", self.kind),
        }
    }

    /// Generator indices spelling a geodesic from `x` to `y`.
    ///
    /// Inside a `Z^r` syllable the coordinates are emitted in generator order;
    /// a `Z/m` residue `j` is spelled with `min(j, m - j)` letters, positive
    /// powers on ties.
    pub fn geodesic_word(&self, x: &Element, y: &Element) -> Result<Vec<usize>, GroupError> {
        self.validate(x)?;
        self.validate(y)?;
        Ok(self.spell(&self.difference(x, y)))
    }

    /// Generator indices spelling `x` geodesically from the identity.
    pub fn spell(&self, x: &Element) -> Vec<usize> {
        match x {
            Element::Word(w) => w.iter().map(|l| l.rank()).collect(),
            Element::Syllables(s) => {
                let mut out = Vec::new();
                for syl in s {
                    let first = self.first_generator_of_block(syl.block);
                    match self.blocks()[syl.block] {
                        Block::Lattice { .. } => {
                            for (coord, &v) in syl.value.iter().enumerate() {
                                let idx = first + 2 * coord + usize::from(v < 0);
                                out.extend(std::iter::repeat_n(idx, v.unsigned_abs() as usize));
                            }
                        }
                        Block::Cyclic { order } => {
                            let j = syl.value[0];
                            if j <= order - j {
                                out.extend(std::iter::repeat_n(first, j as usize));
                            } else {
                                let inv = self.generators[first].inverse;
                                out.extend(std::iter::repeat_n(inv, (order - j) as usize));
                            }
                        }
                    }
                }
                out
            }
        }
    }

    fn first_generator_of_block(&self, block: usize) -> usize {
        self.generators
            .iter()
            .position(|g| matches!(&g.element, Element::Syllables(s) if s[0].block == block))
            .expect("every block has generators")
    }

    pub fn symbols(&self, indices: &[usize]) -> Vec<String> {
        indices.iter().map(|&i| self.generators[i].symbol.clone()).collect()
    }

    /// All elements of word length at most `radius`, each once, in BFS order.
    pub fn ball(&self, radius: usize) -> Result<Vec<Element>, GroupError> {
        self.ball_with_cap(radius, DEFAULT_BALL_RADIUS_CAP)
    }

    pub fn ball_with_cap(&self, radius: usize, cap: usize) -> Result<Vec<Element>, GroupError> {
        if radius > cap {
            return Err(GroupError::RadiusOverCap { radius, cap });
        }
        let mut seen: HashSet<Element> = HashSet::new();
        let mut out = vec![self.identity()];
        seen.insert(self.identity());
        let mut frontier = 0;
        for _ in 0..radius {
            let end = out.len();
            for i in frontier..end {
                for g in &self.generators {
                    let y = self.mul(&out[i], &g.element);
                    if seen.insert(y.clone()) {
                        out.push(y);
                    }
                }
            }
            frontier = end;
        }
        Ok(out)
    }

    /// Total order used for canonical representatives: shorter first, then
    /// lexicographic in the generator order.
    pub fn canonical_cmp(&self, x: &Element, y: &Element) -> Ordering {
        self.word_length(x).cmp(&self.word_length(y)).then_with(|| x.cmp(y))
    }

    /// Write `x = u · c · u⁻¹` with `c` cyclically reduced; returns `(u, c)`.
    pub fn cyclic_reduction(&self, x: &Element) -> (Element, Element) {
        match x {
            Element::Word(w) => {
                let mut k = 0;
                while w.len() >= 2 * k + 2 && w[k] == w[w.len() - 1 - k].inverse() {
                    k += 1;
                }
                (
                    Element::Word(w[..k].to_vec()),
                    Element::Word(w[k..w.len() - k].to_vec()),
                )
            }
            Element::Syllables(s) => {
                let mut core: Vec<Syllable> = s.clone();
                let mut conj = self.identity();
                while core.len() >= 2 && core[0].block == core[core.len() - 1].block {
                    let first = core.remove(0);
                    self.mul_in_place(&mut conj, &Element::Syllables(vec![first.clone()]));
                    let last = core.pop().expect("len >= 1");
                    if let Some(v) = self.combine(first.block, &last.value, &first.value) {
                        core.push(Syllable { block: first.block, value: v });
                    }
                }
                (conj, Element::Syllables(core))
            }
        }
    }

    /// Parse either a word (`aBa`, `a^5 b^-2`, `a5b5a5`) or a canonical
    /// free-product normal form (`x1y0|t2`). `1` is the identity.
    pub fn parse_element(&self, input: &str) -> Result<Element, GroupError> {
        let err = |reason: &str| GroupError::Parse {
            input: input.to_string(),
            reason: reason.to_string(),
        };
        let trimmed = input.trim();
        let mut x = self.identity();
        if trimmed.is_empty() || trimmed == "1" {
            return Ok(x);
        }
        let chars: Vec<char> = trimmed.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() || matches!(c, '|' | '·' | '*' | '.') {
                i += 1;
                continue;
            }
            if !c.is_alphabetic() {
                return Err(err(&format!("unexpected `{c}`")));
            }
            let gen = self
                .generator_index(&c.to_string())
                .ok_or_else(|| GroupError::UnknownSymbol(c.to_string()))?;
            i += 1;
            if i < chars.len() && chars[i] == '^' {
                i += 1;
            }
            let mut exp_str = String::new();
            if i < chars.len() && (chars[i] == '-' || chars[i] == '+') {
                exp_str.push(chars[i]);
                i += 1;
            }
            while i < chars.len() && chars[i].is_ascii_digit() {
                exp_str.push(chars[i]);
                i += 1;
            }
            if chars.get(i) == Some(&'⁻') && chars.get(i + 1) == Some(&'¹') {
                i += 2;
                exp_str = if exp_str.starts_with('-') {
                    exp_str.trim_start_matches('-').to_string()
                } else {
                    format!("-{}", exp_str.trim_start_matches('+'))
                };
            }
            let exp: i64 = match exp_str.as_str() {
                "" | "+" => 1,
                "-" => -1,
                s => s.parse().map_err(|_| err("bad exponent"))?,
            };
            let g = self.power(&self.generators[gen].element, exp);
            self.mul_in_place(&mut x, &g);
        }
        Ok(x)
    }

    /// Canonical string form, inverse of [`Group::parse_element`].
    pub fn format(&self, x: &Element) -> String {
        if x.is_identity() {
            return "1".to_string();
        }
        match x {
            Element::Word(w) => w
                .iter()
                .map(|l| {
                    let c = (b'a' + l.generator() as u8) as char;
                    if l.is_inverse() {
                        c.to_ascii_uppercase()
                    } else {
                        c
                    }
                })
                .collect(),
            Element::Syllables(s) => s
                .iter()
                .map(|syl| {
                    syl.value
                        .iter()
                        .enumerate()
                        .map(|(k, v)| format!("{}{}", self.coordinate_symbols[syl.block][k], v))
                        .collect::<String>()
                })
                .collect::<Vec<_>>()
                .join("|"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> Group {
        Group::free(2).unwrap()
    }

    fn z2z() -> Group {
        "freeproduct:Z2,Z".parse().unwrap()
    }

    #[test]
    fn reduce_cancels_fully() {
        let g = f2();
        assert!(g.reduce(&["a", "b", "B", "A"]).unwrap().is_identity());
        assert_eq!(g.format(&g.reduce(&["a", "a", "b"]).unwrap()), "aab");
        assert_eq!(g.format(&g.reduce(&["a", "b⁻¹"]).unwrap()), "aB");
        assert!(matches!(g.reduce(&["q"]), Err(GroupError::UnknownSymbol(_))));
    }

    #[test]
    fn reduce_in_free_product_merges_syllables() {
        let g = z2z();
        let x = g.reduce(&["x", "t", "T", "y"]).unwrap();
        assert_eq!(x, Element::Syllables(vec![Syllable { block: 0, value: vec![1, 1] }]));
        assert_eq!(g.format(&x), "x1y1");
    }

    #[test]
    fn multiply_examples() {
        let g = f2();
        let ab = g.parse_element("ab").unwrap();
        let b_inv_a = g.parse_element("Ba").unwrap();
        assert_eq!(g.format(&g.multiply(&ab, &b_inv_a).unwrap()), "aa");
        assert!(g.multiply(&ab, &g.invert(&ab)).unwrap().is_identity());

        let p = z2z();
        let xt = p.parse_element("xt").unwrap();
        let ty = p.parse_element("Ty").unwrap();
        assert_eq!(p.format(&p.multiply(&xt, &ty).unwrap()), "x1y1");
    }

    #[test]
    fn multiply_rejects_foreign_elements() {
        let g = f2();
        let p = z2z();
        let x = p.parse_element("xt").unwrap();
        assert!(matches!(g.multiply(&x, &g.identity()), Err(GroupError::Mismatch(_))));
        let f3 = Group::free(3).unwrap();
        let c = f3.parse_element("c").unwrap();
        assert!(g.multiply(&c, &c).is_err());
    }

    #[test]
    fn word_lengths() {
        let g = f2();
        assert_eq!(g.word_length(&g.identity()), 0);
        assert_eq!(g.word_length(&g.parse_element("aBa").unwrap()), 3);
        let p = z2z();
        let x = p.parse_element("x1y1|t3").unwrap();
        let x = p.mul(&x, &p.identity());
        // (2,1) needs x^2 y, built explicitly
        let e = p.parse_element("x2y1|t3").unwrap();
        assert_eq!(p.word_length(&e), 6);
        assert_eq!(p.word_length(&x), 5);
        let cyc: Group = "freeproduct:Z/5,Z".parse().unwrap();
        assert_eq!(cyc.word_length(&cyc.parse_element("x3").unwrap()), 2);
        assert_eq!(cyc.word_length(&cyc.parse_element("x2").unwrap()), 2);
    }

    #[test]
    fn geodesic_word_spells_difference() {
        let p = z2z();
        let x = p.parse_element("t").unwrap();
        let y = p.parse_element("t x2 Y").unwrap();
        let w = p.geodesic_word(&x, &y).unwrap();
        assert_eq!(p.symbols(&w), vec!["x", "x", "Y"]);
        assert_eq!(w.len() as u64, p.distance(&x, &y));

        let c: Group = "freeproduct:Z/4,Z/3".parse().unwrap();
        let e = c.parse_element("x2").unwrap();
        assert_eq!(c.symbols(&c.spell(&e)), vec!["x", "x"]);
        let e = c.parse_element("x3").unwrap();
        assert_eq!(c.symbols(&c.spell(&e)), vec!["X"]);
    }

    #[test]
    fn ball_counts_in_f2() {
        let g = f2();
        assert_eq!(g.ball(0).unwrap().len(), 1);
        assert_eq!(g.ball(1).unwrap().len(), 5);
        assert_eq!(g.ball(3).unwrap().len(), 53);
        assert!(matches!(g.ball(13), Err(GroupError::RadiusOverCap { .. })));
        assert_eq!(g.ball_with_cap(2, 2).unwrap().len(), 17);
    }

    #[test]
    fn z2_generators_are_self_inverse() {
        let g: Group = "freeproduct:Z/2,Z/3".parse().unwrap();
        let x = g.generator_index("x").unwrap();
        assert_eq!(g.generators()[x].inverse, x);
        assert_eq!(g.generators().len(), 3);
    }

    #[test]
    fn parse_and_format_roundtrip() {
        let g = f2();
        let e = g.parse_element("a^5 b5 a^-2").unwrap();
        assert_eq!(g.format(&e), "aaaaabbbbbAA");
        assert_eq!(g.parse_element(&g.format(&e)).unwrap(), e);
        let p = z2z();
        let e = p.parse_element("x-1y2|t2|x0y1").unwrap();
        assert_eq!(p.format(&e), "x-1y2|t2|x0y1");
        assert_eq!(p.parse_element("1").unwrap(), p.identity());
        assert!(p.parse_element("x#").is_err());
    }

    #[test]
    fn cyclic_reduction_of_free_product() {
        let p = z2z();
        let g = p.parse_element("x t y").unwrap();
        let (u, c) = p.cyclic_reduction(&g);
        assert_eq!(p.mul(&p.mul(&u, &c), &p.invert(&u)), g);
        assert_eq!(c.len(), 2);
        let e = p.parse_element("x t X").unwrap();
        let (_, c) = p.cyclic_reduction(&e);
        assert_eq!(c.len(), 1);
    }
}
