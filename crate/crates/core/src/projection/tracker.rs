use crate::group::{Element, Group};
use crate::tree::TreeKind;

use super::{CosetMarking, ProjectionSystem};

/// Follows `π_{hγ}(w)` while `w` is right-multiplied by generators.
///
/// Keeps `shift⁻¹·w` together with how far its prefix agrees with the forward
/// and backward rays of the standard line. Right multiplication only touches
/// the tail of the normal form, so each step costs time proportional to the
/// number of letters it changes.
#[derive(Clone, Debug)]
pub struct CosetTracker {
    kind: TreeKind,
    shift_inv: Element,
    core: Element,
    core_inv: Element,
    local: Element,
    forward: usize,
    backward: usize,
}

impl CosetTracker {
    pub(super) fn new(sys: &ProjectionSystem, m: &CosetMarking, start: &Element) -> Self {
        let group = sys.group();
        let mut t = CosetTracker {
            kind: sys.model().kind(),
            shift_inv: group.invert(&m.axis.shift),
            core: m.axis.core.clone(),
            core_inv: group.invert(&m.axis.core),
            local: group.identity(),
            forward: 0,
            backward: 0,
        };
        t.reset(group, start);
        t
    }

    /// Jump to a new position `w`.
    pub fn reset(&mut self, group: &Group, w: &Element) {
        self.local = group.mul(&self.shift_inv, w);
        self.forward = 0;
        self.backward = 0;
        self.extend();
    }

    /// Right-multiply the tracked position by `s`.
    pub fn step(&mut self, group: &Group, s: &Element) {
        let low = group.mul_in_place(&mut self.local, s);
        self.forward = self.forward.min(low).min(self.local.len());
        self.backward = self.backward.min(low).min(self.local.len());
        self.extend();
    }

    fn extend(&mut self) {
        fn grow<T: PartialEq>(v: &[T], seq: &[T], mut k: usize) -> usize {
            while k < v.len() && v[k] == seq[k % seq.len()] {
                k += 1;
            }
            k
        }
        match (&self.local, &self.core, &self.core_inv) {
            (Element::Word(w), Element::Word(c), Element::Word(ci)) => {
                self.forward = grow(w, c, self.forward);
                self.backward = grow(w, ci, self.backward);
            }
            (Element::Syllables(w), Element::Syllables(c), Element::Syllables(ci)) => {
                self.forward = grow(w, c, self.forward);
                self.backward = grow(w, ci, self.backward);
            }
            _ => unreachable!("tracker elements share one group"),
        }
    }

    /// Axis index of the current projection.
    pub fn index(&self) -> i64 {
        match self.kind {
            TreeKind::Cayley => {
                if self.forward > 0 {
                    self.forward as i64
                } else {
                    -(self.backward as i64)
                }
            }
            TreeKind::BassSerre => {
                let s = self.local.syllables().expect("syllable form");
                // orbit points are cosets of factor 0: drop a trailing factor-0 syllable
                let eff = s.len() - usize::from(s.last().is_some_and(|l| l.block == 0));
                let ray = |matched: usize, seq: &Element| -> i64 {
                    let seq = seq.syllables().expect("syllable form");
                    let k = matched.min(eff);
                    let next = if k < eff { s[k].block } else { 0 };
                    2 * k as i64 + i64::from(next == seq[k % seq.len()].block)
                };
                let f = ray(self.forward, &self.core);
                if f > 0 {
                    f
                } else {
                    -ray(self.backward, &self.core_inv)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use crate::tree::TreeModel;
    use rand::Rng;

    #[test]
    fn tracker_matches_direct_projection() {
        for (desc, germ) in [("free:2", "ab"), ("free:2", "a"), ("freeproduct:Z2,Z", "xt"), ("freeproduct:Z/3,Z", "xyXy")] {
            let model = TreeModel::new(desc.parse().unwrap());
            let g = model.group().parse_element(germ).unwrap();
            let sys = ProjectionSystem::with_behrstock(model, &g, 0, 3).unwrap();
            let group = sys.group().clone();
            let mut rng = substream(1, "tracker", 0);
            for trial in 0..20 {
                let h = crate::rng::random_element(&group, &mut rng, 6);
                let m = sys.marking(&h);
                let mut w = crate::rng::random_element(&group, &mut rng, 6);
                let mut t = sys.tracker(&m, &w);
                for _ in 0..200 {
                    let gens = group.generators();
                    let s = &gens[rng.random_range(0..gens.len())].element;
                    t.step(&group, s);
                    w = group.mul(&w, s);
                    assert_eq!(t.index(), sys.coset_index(&m, &w), "{desc} trial {trial}");
                }
            }
        }
    }
}
