//! Exact finite-step laws.

use std::collections::HashMap;

use crate::group::Element;

use super::{Kernel, KernelError};

/// Largest step count [`exact_distribution`] accepts by default.
pub const DEFAULT_EXACT_CAP: usize = 10;

/// A finitely supported probability law on group elements.
pub type Law = HashMap<Element, f64>;

/// Law of the chain after `n` steps from `o`, by sparse forward convolution.
pub fn exact_distribution(kernel: &Kernel, o: &Element, n: usize) -> Result<Law, KernelError> {
    exact_distribution_with_cap(kernel, o, n, DEFAULT_EXACT_CAP)
}

pub fn exact_distribution_with_cap(kernel: &Kernel, o: &Element, n: usize, cap: usize) -> Result<Law, KernelError> {
    if n > cap {
        return Err(KernelError::CapExceeded { steps: n, cap });
    }
    Ok(exact_sequence(kernel, o, n).pop().expect("at least the initial law"))
}

/// Laws after `0, 1, …, n` steps.
pub(crate) fn exact_sequence(kernel: &Kernel, o: &Element, n: usize) -> Vec<Law> {
    let mut laws = vec![Law::from([(o.clone(), 1.0)])];
    for _ in 0..n {
        let cur = laws.last().expect("non-empty");
        let mut next = Law::with_capacity(cur.len() * 3);
        for (g, p) in cur {
            for (h, q) in kernel.transitions(g) {
                *next.entry(h).or_insert(0.0) += p * q;
            }
        }
        laws.push(next);
    }
    laws
}

/// Exact law of `|w_n|` for the simple random walk on a free group.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialLaw {
    /// Offset of `probs[0]`: lengths below it have probability zero (underflow).
    pub offset: usize,
    pub probs: Vec<f64>,
}

impl RadialLaw {
    pub fn atom(&self, r: usize) -> f64 {
        r.checked_sub(self.offset).and_then(|i| self.probs.get(i)).copied().unwrap_or(0.0)
    }

    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(i, p)| (i + self.offset) as f64 * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.probs.iter().enumerate().map(|(i, p)| ((i + self.offset) as f64 - m).powi(2) * p).sum()
    }

    /// `P[|w_n| < x]`.
    pub fn prob_below(&self, x: f64) -> f64 {
        self.probs.iter().enumerate().filter(|(i, _)| ((i + self.offset) as f64) < x).map(|(_, p)| p).sum()
    }

    /// `P[|w_n| ≤ x]`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.probs.iter().enumerate().filter(|(i, _)| ((i + self.offset) as f64) <= x).map(|(_, p)| p).sum()
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// Law of `|w_n|` for the simple random walk on `F_2`.
pub fn radial_exact(n: usize) -> RadialLaw {
    radial_exact_rank(2, n)
}

/// Law of `|w_n|` for the simple random walk on `F_rank`: the length is a
/// birth-death chain that steps up with probability `(2k−1)/2k` away from 0
/// and always steps up from 0.
pub fn radial_exact_rank(rank: usize, n: usize) -> RadialLaw {
    let up = (2 * rank - 1) as f64 / (2 * rank) as f64;
    let down = 1.0 - up;
    let mut p = vec![0.0; n + 2];
    p[0] = 1.0;
    let (mut lo, mut hi) = (0usize, 0usize);
    let mut next = vec![0.0; n + 2];
    for _ in 0..n {
        let nlo = lo.saturating_sub(1);
        for v in &mut next[nlo..=hi + 1] {
            *v = 0.0;
        }
        for r in lo..=hi {
            let q = p[r];
            if q == 0.0 {
                continue;
            }
            if r == 0 {
                next[1] += q;
            } else {
                next[r + 1] += up * q;
                next[r - 1] += down * q;
            }
        }
        std::mem::swap(&mut p, &mut next);
        lo = nlo;
        hi += 1;
        for v in &mut p[..lo] {
            *v = 0.0;
        }
        // drop underflowed edges, they stay zero forever
        while lo < hi && p[lo] == 0.0 {
            lo += 1;
        }
        while hi > lo && p[hi] == 0.0 {
            hi -= 1;
        }
    }
    RadialLaw { offset: lo, probs: p[lo..=hi].to_vec() }
}
