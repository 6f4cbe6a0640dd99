//! Bijections of a free group that are quasi-isometries but not homomorphisms.

use rand::seq::SliceRandom;

use crate::group::{Element, Group, Letter};
use crate::rng::substream;

/// Letter-level permutation tables of a basepoint-fixing Cayley tree automorphism.
///
/// A reduced word is read as a first letter followed by "turns": the turn
/// index of a letter is its position among the `2k - 1` letters allowed after
/// the previous one, in generator order. The map permutes the first letter
/// with `root` and each turn with the table for the parity of its depth.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelabelTable {
    pub root: Vec<usize>,
    pub turns: [Vec<usize>; 2],
}

impl RelabelTable {
    pub fn identity(rank: usize) -> Self {
        RelabelTable {
            root: (0..2 * rank).collect(),
            turns: [(0..2 * rank - 1).collect(), (0..2 * rank - 1).collect()],
        }
    }

    /// Tables drawn from `seed`; the same seed always gives the same map.
    pub fn from_seed(rank: usize, seed: u64) -> Self {
        let mut rng = substream(seed, "depth-relabel", 0);
        let mut t = Self::identity(rank);
        t.root.shuffle(&mut rng);
        t.turns[0].shuffle(&mut rng);
        t.turns[1].shuffle(&mut rng);
        t
    }

    fn inverse(&self) -> Self {
        let inv = |p: &[usize]| {
            let mut q = vec![0; p.len()];
            for (i, &j) in p.iter().enumerate() {
                q[j] = i;
            }
            q
        };
        RelabelTable { root: inv(&self.root), turns: [inv(&self.turns[0]), inv(&self.turns[1])] }
    }

    /// Turn index of `next` after `prev` (ranks skip `prev⁻¹`).
    fn turn(prev: Letter, next: Letter) -> usize {
        let forbidden = prev.inverse().rank();
        let r = next.rank();
        if r > forbidden {
            r - 1
        } else {
            r
        }
    }

    fn untur(prev: Letter, turn: usize) -> Letter {
        let forbidden = prev.inverse().rank();
        Letter::from_rank(if turn >= forbidden { turn + 1 } else { turn })
    }

    /// Image letters of `x[from..]`, given the image of `x[..from]` in `out`.
    fn apply_from(&self, x: &[Letter], out: &mut Vec<Letter>, from: usize) {
        out.truncate(from);
        for i in from..x.len() {
            let l = if i == 0 {
                Letter::from_rank(self.root[x[0].rank()])
            } else {
                let t = Self::turn(x[i - 1], x[i]);
                Self::untur(out[i - 1], self.turns[i % 2][t])
            };
            out.push(l);
        }
    }
}

/// A bijection `f: G → G` with a displacement or distortion guarantee.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum QiBijection {
    Identity,
    /// Swaps `w·b ↔ w·b·a` for reduced words; displacement 1.
    SuffixSwap,
    /// Basepoint-fixing tree automorphism; an isometry of the word metric.
    DepthRelabel { seed: Option<u64>, forward: RelabelTable, backward: RelabelTable },
}

impl QiBijection {
    pub fn depth_relabel(rank: usize, seed: u64) -> Self {
        Self::relabel_with(Some(seed), RelabelTable::from_seed(rank, seed))
    }

    pub fn relabel_with(seed: Option<u64>, table: RelabelTable) -> Self {
        let backward = table.inverse();
        QiBijection::DepthRelabel { seed, forward: table, backward }
    }

    pub fn descriptor(&self) -> String {
        match self {
            QiBijection::Identity => "identity".into(),
            QiBijection::SuffixSwap => "suffix_swap".into(),
            QiBijection::DepthRelabel { seed: Some(s), .. } => format!("depth_relabel:{s}"),
            QiBijection::DepthRelabel { seed: None, .. } => "depth_relabel:custom".into(),
        }
    }

    /// `sup d(x, f(x))`, when finite.
    pub fn displacement(&self) -> Option<u64> {
        match self {
            QiBijection::Identity => Some(0),
            QiBijection::SuffixSwap => Some(1),
            QiBijection::DepthRelabel { .. } => None,
        }
    }

    /// Whether `d(f(x), f(y)) = d(x, y)` for all `x, y`.
    pub fn is_isometry(&self) -> bool {
        !matches!(self, QiBijection::SuffixSwap)
    }

    /// Extra jump length a push-forward can pick up: `2R`, or 0 for isometries.
    pub fn jump_allowance(&self) -> u64 {
        if self.is_isometry() {
            0
        } else {
            2 * self.displacement().expect("non-isometries here have bounded displacement")
        }
    }

    pub fn requires_free_group(&self) -> bool {
        !matches!(self, QiBijection::Identity)
    }

    pub fn forward(&self, x: &Element) -> Element {
        let mut image = Element::Word(Vec::new());
        if let Element::Syllables(_) = x {
            image = Element::Syllables(Vec::new());
        }
        self.extend_image(x, &mut image, 0);
        image
    }

    pub fn inverse(&self, y: &Element) -> Element {
        match self {
            QiBijection::Identity => y.clone(),
            QiBijection::SuffixSwap => self.forward(y),
            QiBijection::DepthRelabel { backward, .. } => {
                let w = y.letters().expect("free group element");
                let mut out = Vec::new();
                backward.apply_from(w, &mut out, 0);
                Element::Word(out)
            }
        }
    }

    /// Update `image = f(x)` after `x` changed, given that the first
    /// `low_water` units of `x` did not change and `image` held `f` of the
    /// old `x`. Returns how many leading units of `image` were kept.
    pub fn extend_image(&self, x: &Element, image: &mut Element, low_water: usize) -> usize {
        match self {
            QiBijection::Identity => {
                let keep = low_water.min(image.len()).min(x.len());
                image.truncate(keep);
                match (x, image) {
                    (Element::Word(a), Element::Word(b)) => b.extend_from_slice(&a[keep..]),
                    (Element::Syllables(a), Element::Syllables(b)) => b.extend_from_slice(&a[keep..]),
                    _ => unreachable!("same group"),
                }
                keep
            }
            QiBijection::SuffixSwap => {
                let (Element::Word(a), Element::Word(b)) = (x, image) else {
                    panic!("suffix swap needs a free group");
                };
                // f(x) agrees with x except at the last position
                let keep = low_water.min(b.len()).min(a.len().saturating_sub(1));
                b.truncate(keep);
                b.extend_from_slice(&a[keep..]);
                let bb = Letter::new(1, false);
                let aa = Letter::new(0, false);
                let n = a.len();
                if n >= 1 && a[n - 1] == bb {
                    b.push(aa);
                } else if n >= 2 && a[n - 2] == bb && a[n - 1] == aa {
                    b.pop();
                }
                keep.min(b.len())
            }
            QiBijection::DepthRelabel { forward, .. } => {
                let (Element::Word(a), Element::Word(b)) = (x, image) else {
                    panic!("depth relabelling needs a free group");
                };
                let keep = low_water.min(b.len()).min(a.len());
                forward.apply_from(a, b, keep);
                keep
            }
        }
    }

    /// Check the map against a group (free-group-only maps need a free group).
    pub fn check_group(&self, group: &Group) -> Result<(), String> {
        if self.requires_free_group() && !group.is_free() {
            return Err(format!("{} needs a free group", self.descriptor()));
        }
        if let QiBijection::DepthRelabel { forward, .. } = self {
            let rank = group.generators().len() / 2;
            if forward.root.len() != 2 * rank {
                return Err("relabel table has the wrong rank".into());
            }
        }
        Ok(())
    }
}
