//! Trajectory sampling.

use std::io::Write;

use rand::distr::Distribution;
use rand::Rng;

use crate::group::Element;
use crate::rng::substream;
use crate::tree::TreeModel;

use super::{Body, Kernel};

/// The position of one chain, advanced in place.
///
/// A push-forward walker runs its base chain and keeps the image of the base
/// state up to date, so each step costs time proportional to the letters it
/// changes rather than to the length of the state.
#[derive(Clone, Debug)]
pub struct Walker<'k> {
    kernel: &'k Kernel,
    state: Element,
    inner: Option<Box<Walker<'k>>>,
}

impl<'k> Walker<'k> {
    pub fn new(kernel: &'k Kernel, start: &Element) -> Self {
        let inner = match &kernel.body {
            Body::Pushforward { map, base } => Some(Box::new(Walker::new(base, &map.inverse(start)))),
            _ => None,
        };
        Walker { kernel, state: start.clone(), inner }
    }

    pub fn state(&self) -> &Element {
        &self.state
    }

    /// State of the underlying chain (equal to `state` except for push-forwards).
    pub fn base_state(&self) -> &Element {
        match &self.inner {
            Some(w) => w.base_state(),
            None => &self.state,
        }
    }

    /// Take one step. Returns how many leading letters (or syllables) of the
    /// previous state survive unchanged.
    pub fn step<R: Rng>(&mut self, rng: &mut R) -> usize {
        let group = self.kernel.group();
        match &self.kernel.body {
            Body::RandomWalk { steps, sampler } => {
                let i = sampler.sample(rng);
                group.mul_in_place(&mut self.state, &steps[i].0)
            }
            Body::Parity { samplers, .. } => {
                let parity = (self.state.len() % 2) as usize;
                let i = samplers[parity].sample(rng);
                group.mul_in_place(&mut self.state, &group.generators()[i].element)
            }
            Body::Pushforward { map, .. } => {
                let inner = self.inner.as_mut().expect("push-forward walker has a base");
                let low = inner.step(rng);
                map.extend_image(&inner.state, &mut self.state, low)
            }
        }
    }

    /// Take one step and return the increment `w_old⁻¹·w_new`.
    pub fn step_increment<R: Rng>(&mut self, rng: &mut R) -> Element {
        let group = self.kernel.group();
        // a jump of length K rewrites at most K trailing units (plus two per swap layer)
        let from = self.state.len().saturating_sub(self.kernel.support_bound() as usize + 4);
        let old_tail = self.state.suffix(from);
        let low = self.step(rng);
        assert!(low >= from, "step rewrote more of the state than the jump bound allows");
        group.mul(&group.invert(&old_tail), &self.state.suffix(from))
    }
}

/// `n` steps from `o`, drawn from the substream of `(seed, descriptor)`.
pub fn sample_path(kernel: &Kernel, o: &Element, n: usize, seed: u64) -> Vec<Element> {
    let mut rng = substream(seed, &format!("path:{}", kernel.descriptor()), 0);
    sample_path_with(kernel, o, n, &mut rng)
}

pub fn sample_path_with<R: Rng>(kernel: &Kernel, o: &Element, n: usize, rng: &mut R) -> Vec<Element> {
    let mut w = Walker::new(kernel, o);
    let mut out = Vec::with_capacity(n + 1);
    out.push(o.clone());
    for _ in 0..n {
        w.step(rng);
        out.push(w.state().clone());
    }
    out
}

/// One CSV row per step: index, element, word length, tree distance to the basepoint.
pub fn write_trajectory_csv<W: Write>(model: &TreeModel, path: &[Element], out: W) -> csv::Result<()> {
    let group = model.group();
    let origin = group.identity();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "element", "word_length", "tree_distance"])?;
    for (i, x) in path.iter().enumerate() {
        w.write_record([
            i.to_string(),
            group.format(x),
            group.word_length(x).to_string(),
            model.orbit_distance(&origin, x).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
