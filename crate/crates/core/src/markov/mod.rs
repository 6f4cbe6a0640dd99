//! Transition kernels on groups: random walks, position-dependent chains and
//! push-forwards through bijections that are not homomorphisms.
//!
//! The state space is infinite, so a kernel is a rule `g ↦ [(h, p(g, h))]`
//! plus a descriptor string that reconstructs it.

mod exact;
pub mod qi;
mod tame;
mod walk;

use std::collections::HashSet;

use rand::distr::weighted::WeightedIndex;
use thiserror::Error;

use crate::group::{Element, Group, GroupError};

pub use exact::{exact_distribution, exact_distribution_with_cap, radial_exact, radial_exact_rank, Law, RadialLaw, DEFAULT_EXACT_CAP};
pub use qi::{QiBijection, RelabelTable};
pub use tame::{tameness_probe, GeneratorReach, NonAmenabilityFit, ProbeCaps, TamenessReport, Verdicts};
pub use walk::{sample_path, sample_path_with, write_trajectory_csv, Walker};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("not a probability distribution: {0}")]
    NotDistribution(String),
    #[error("support does not generate the group as a semigroup (missing {0})")]
    NotGenerating(String),
    #[error("bad kernel descriptor {input:?}: {reason}")]
    Descriptor { input: String, reason: String },
    #[error("{0}")]
    Map(String),
    #[error("exact law requested for {steps} steps, cap is {cap}")]
    CapExceeded { steps: usize, cap: usize },
    #[error(transparent)]
    Group(#[from] GroupError),
}

/// Rounds of support products the semigroup probe tries before giving up.
const SEMIGROUP_ROUNDS: usize = 8;
/// Bound on the number of products the probe keeps per round.
const SEMIGROUP_STATES: usize = 200_000;

#[derive(Clone, Debug)]
pub(crate) enum Body {
    /// `p(g, g·s) = μ(s)`.
    RandomWalk { steps: Vec<(Element, f64)>, sampler: WeightedIndex<f64> },
    /// Nearest-neighbour chain whose profile depends on the parity of `|g|`.
    Parity { profiles: [Vec<f64>; 2], samplers: [WeightedIndex<f64>; 2] },
    /// `p(g, h) = p_base(f⁻¹g, f⁻¹h)`.
    Pushforward { map: QiBijection, base: Box<Kernel> },
}

/// A Markov transition kernel on a group.
#[derive(Clone, Debug)]
pub struct Kernel {
    group: Group,
    pub(crate) body: Body,
    support_bound: u64,
    descriptor: String,
    structural: Option<String>,
}

fn check_distribution(probs: &[f64]) -> Result<(), KernelError> {
    if probs.is_empty() {
        return Err(KernelError::NotDistribution("empty support".into()));
    }
    if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
        return Err(KernelError::NotDistribution(format!("non-positive weight {p}")));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(KernelError::NotDistribution(format!("weights sum to {total}")));
    }
    Ok(())
}

fn sampler(probs: &[f64]) -> WeightedIndex<f64> {
    WeightedIndex::new(probs.iter().copied()).expect("validated weights")
}

impl Kernel {
    /// Random walk driven by `measure`, after checking that it is a
    /// distribution whose support generates the group as a semigroup.
    pub fn random_walk(group: &Group, measure: Vec<(Element, f64)>) -> Result<Self, KernelError> {
        let descriptor = Self::srw_descriptor(group, &measure);
        let k = Self::random_walk_unchecked(group, measure)?;
        if let Body::RandomWalk { steps, .. } = &k.body {
            semigroup_probe(group, steps)?;
        }
        Ok(Kernel { structural: Some(Self::RW_NOTE.into()), descriptor, ..k })
    }

    const RW_NOTE: &'static str = "equivariant random walk: constants at the identity hold at every state";

    /// Random walk without the semigroup probe (for negative controls).
    pub fn random_walk_unchecked(group: &Group, measure: Vec<(Element, f64)>) -> Result<Self, KernelError> {
        let mut seen = HashSet::new();
        for (s, _) in &measure {
            group.validate(s)?;
            if !seen.insert(s.clone()) {
                return Err(KernelError::NotDistribution(format!("{} listed twice", group.format(s))));
            }
        }
        let probs: Vec<f64> = measure.iter().map(|(_, p)| *p).collect();
        check_distribution(&probs)?;
        let support_bound = measure.iter().map(|(s, _)| group.word_length(s)).max().unwrap_or(0);
        let descriptor = format!("unchecked:{}", Self::srw_descriptor(group, &measure));
        Ok(Kernel {
            group: group.clone(),
            body: Body::RandomWalk { sampler: sampler(&probs), steps: measure },
            support_bound,
            descriptor,
            structural: None,
        })
    }

    /// Uniform measure on the generating set.
    pub fn simple_random_walk(group: &Group) -> Self {
        let gens = group.generators();
        let p = 1.0 / gens.len() as f64;
        let measure = gens.iter().map(|g| (g.element.clone(), p)).collect();
        let mut k = Self::random_walk(group, measure).expect("generators generate");
        k.descriptor = "srw:uniform".into();
        k
    }

    fn srw_descriptor(group: &Group, measure: &[(Element, f64)]) -> String {
        let parts: Vec<String> = measure.iter().map(|(s, p)| format!("{}={p}", group.format(s))).collect();
        format!("srw:{}", parts.join(","))
    }

    /// Nearest-neighbour chain on a free group using `even` at states of even
    /// length and `odd` otherwise. Profiles list probabilities in generator
    /// order; every entry must be at least 1/10.
    pub fn parity(group: &Group, even: Vec<f64>, odd: Vec<f64>) -> Result<Self, KernelError> {
        if !group.is_free() {
            return Err(KernelError::Map("parity-labelled chains need a free group".into()));
        }
        let n = group.generators().len();
        for prof in [&even, &odd] {
            if prof.len() != n {
                return Err(KernelError::NotDistribution(format!("profile needs {n} entries, got {}", prof.len())));
            }
            check_distribution(prof)?;
            if let Some(p) = prof.iter().find(|p| **p < 0.1 - 1e-12) {
                return Err(KernelError::NotDistribution(format!("{p} is below 1/10")));
            }
        }
        let fmt = |v: &[f64]| v.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(",");
        let descriptor = format!("parity:{}|{}", fmt(&even), fmt(&odd));
        Ok(Kernel {
            group: group.clone(),
            body: Body::Parity { samplers: [sampler(&even), sampler(&odd)], profiles: [even, odd] },
            support_bound: 1,
            descriptor,
            structural: Some("every neighbour has probability at least 1/10 at every state".into()),
        })
    }

    /// The push-forward of `base` through the bijection `map`.
    pub fn pushforward(map: QiBijection, base: Kernel) -> Result<Self, KernelError> {
        map.check_group(&base.group).map_err(KernelError::Map)?;
        let support_bound = base.support_bound + map.jump_allowance();
        let descriptor = format!("pushforward:{}:{}", map.descriptor(), base.descriptor);
        let structural = base
            .structural
            .as_ref()
            .map(|s| format!("push-forward through a bijective quasi-isometry of a chain with: {s}"));
        Ok(Kernel {
            group: base.group.clone(),
            body: Body::Pushforward { map, base: Box::new(base) },
            support_bound,
            descriptor,
            structural,
        })
    }

    /// Build a kernel from its descriptor string.
    pub fn from_descriptor(group: &Group, input: &str) -> Result<Self, KernelError> {
        let bad = |reason: &str| KernelError::Descriptor { input: input.into(), reason: reason.into() };
        if let Some(rest) = input.strip_prefix("unchecked:") {
            let measure = parse_measure(group, rest.strip_prefix("srw:").ok_or_else(|| bad("expected srw after unchecked"))?)
                .map_err(|r| bad(&r))?;
            return Self::random_walk_unchecked(group, measure);
        }
        if let Some(rest) = input.strip_prefix("srw:") {
            if rest == "uniform" {
                return Ok(Self::simple_random_walk(group));
            }
            let measure = parse_measure(group, rest).map_err(|r| bad(&r))?;
            return Self::random_walk(group, measure);
        }
        if let Some(rest) = input.strip_prefix("parity:") {
            let (e, o) = rest.split_once('|').ok_or_else(|| bad("expected even|odd profiles"))?;
            let parse = |s: &str| -> Result<Vec<f64>, KernelError> {
                s.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| bad("bad probability"))).collect()
            };
            return Self::parity(group, parse(e)?, parse(o)?);
        }
        if let Some(rest) = input.strip_prefix("pushforward:") {
            let (name, rest) = rest.split_once(':').ok_or_else(|| bad("expected a map and a base kernel"))?;
            let (map, base) = match name {
                "identity" => (QiBijection::Identity, rest),
                "suffix_swap" => (QiBijection::SuffixSwap, rest),
                "depth_relabel" => {
                    let (seed, base) = rest.split_once(':').ok_or_else(|| bad("expected depth_relabel:<seed>:<base>"))?;
                    let seed: u64 = seed.parse().map_err(|_| bad("relabel seed must be an unsigned integer"))?;
                    if !group.is_free() {
                        return Err(KernelError::Map("depth_relabel needs a free group".into()));
                    }
                    (QiBijection::depth_relabel(group.generators().len() / 2, seed), base)
                }
                _ => return Err(bad("unknown map")),
            };
            return Self::pushforward(map, Self::from_descriptor(group, base)?);
        }
        Err(bad("unknown kernel family"))
    }

    pub fn group(&self) -> &Group {
        &self.group
    }

    /// `K` with `d_G(g, h) ≤ K` for every transition.
    pub fn support_bound(&self) -> u64 {
        self.support_bound
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    /// Reason why irreducibility constants at sampled states hold everywhere, if any.
    pub fn structural_note(&self) -> Option<&str> {
        self.structural.as_deref()
    }

    /// Whether `p(g, h)` depends only on `g⁻¹h`.
    pub fn is_random_walk(&self) -> bool {
        match &self.body {
            Body::RandomWalk { .. } => true,
            Body::Pushforward { map: QiBijection::Identity, base } => base.is_random_walk(),
            _ => false,
        }
    }

    /// The finite list `[(h, p(g, h))]` of transitions out of `g`.
    pub fn transitions(&self, g: &Element) -> Vec<(Element, f64)> {
        match &self.body {
            Body::RandomWalk { steps, .. } => steps.iter().map(|(s, p)| (self.group.mul(g, s), *p)).collect(),
            Body::Parity { profiles, .. } => {
                let prof = &profiles[(self.group.word_length(g) % 2) as usize];
                self.group
                    .generators()
                    .iter()
                    .zip(prof)
                    .map(|(s, p)| (self.group.mul(g, &s.element), *p))
                    .collect()
            }
            Body::Pushforward { map, base } => {
                let x = map.inverse(g);
                base.transitions(&x).into_iter().map(|(y, p)| (map.forward(&y), p)).collect()
            }
        }
    }
}

fn parse_measure(group: &Group, s: &str) -> Result<Vec<(Element, f64)>, String> {
    s.split(',')
        .map(|part| {
            let (el, p) = part.rsplit_once('=').ok_or_else(|| format!("{part:?} is not element=probability"))?;
            let x = group.parse_element(el.trim()).map_err(|e| e.to_string())?;
            let p: f64 = p.trim().parse().map_err(|_| format!("bad probability {p:?}"))?;
            Ok((x, p))
        })
        .collect()
}

/// Check that products of support elements reach every element of `ball(2)`.
fn semigroup_probe(group: &Group, steps: &[(Element, f64)]) -> Result<(), KernelError> {
    let target: Vec<Element> = group.ball(2)?;
    let support: Vec<&Element> = steps.iter().map(|(s, _)| s).collect();
    let mut reached: HashSet<Element> = support.iter().map(|s| (*s).clone()).collect();
    let mut frontier: Vec<Element> = reached.iter().cloned().collect();
    for _ in 0..SEMIGROUP_ROUNDS {
        if target.iter().all(|t| reached.contains(t)) {
            return Ok(());
        }
        let mut next = Vec::new();
        'grow: for x in &frontier {
            for s in &support {
                let y = group.mul(x, s);
                if reached.insert(y.clone()) {
                    next.push(y);
                    if reached.len() >= SEMIGROUP_STATES {
                        break 'grow;
                    }
                }
            }
        }
        frontier = next;
    }
    match target.iter().find(|t| !reached.contains(t)) {
        None => Ok(()),
        Some(t) => Err(KernelError::NotGenerating(group.format(t))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> Group {
        Group::free(2).unwrap()
    }

    #[test]
    fn uniform_walk_transitions() {
        let g = f2();
        let k = Kernel::simple_random_walk(&g);
        let t = k.transitions(&g.identity());
        assert_eq!(t.len(), 4);
        assert!(t.iter().all(|(_, p)| *p == 0.25));
        let z: Group = "freeproduct:Z2,Z".parse().unwrap();
        let kz = Kernel::from_descriptor(&z, "srw:uniform").unwrap();
        let x = z.parse_element("x2t").unwrap();
        let tz = kz.transitions(&x);
        assert_eq!(tz.len(), 6);
        assert!(tz.iter().all(|(h, p)| (*p - 1.0 / 6.0).abs() < 1e-15 && z.distance(&x, h) == 1));
    }

    #[test]
    fn measure_validation() {
        let g = f2();
        let e = |s: &str| g.parse_element(s).unwrap();
        assert!(matches!(
            Kernel::random_walk(&g, vec![(e("a"), 0.5), (e("b"), 0.4)]),
            Err(KernelError::NotDistribution(_))
        ));
        assert!(matches!(
            Kernel::random_walk(&g, vec![(e("a"), 0.5), (e("A"), 0.5)]),
            Err(KernelError::NotGenerating(_))
        ));
        // positive words generate F2 as a group but not as a semigroup
        assert!(Kernel::random_walk(&g, vec![(e("a"), 0.5), (e("b"), 0.5)]).is_err());
        assert!(Kernel::random_walk(&g, vec![(e("a"), 0.3), (e("b"), 0.3), (e("AB"), 0.4)]).is_ok());
        assert!(Kernel::from_descriptor(&g, "unchecked:srw:a=0.5,A=0.5").is_ok());
    }

    #[test]
    fn parity_profiles() {
        let g = f2();
        let k = Kernel::from_descriptor(&g, "parity:0.4,0.2,0.2,0.2|0.1,0.3,0.3,0.3").unwrap();
        let at1: Vec<f64> = k.transitions(&g.identity()).iter().map(|(_, p)| *p).collect();
        assert_eq!(at1, vec![0.4, 0.2, 0.2, 0.2]);
        let ata: Vec<f64> = k.transitions(&g.parse_element("a").unwrap()).iter().map(|(_, p)| *p).collect();
        assert_eq!(ata, vec![0.1, 0.3, 0.3, 0.3]);
        assert!(Kernel::parity(&g, vec![0.05, 0.35, 0.3, 0.3], vec![0.25; 4]).is_err());
        let uniform = Kernel::parity(&g, vec![0.25; 4], vec![0.25; 4]).unwrap();
        let srw = Kernel::simple_random_walk(&g);
        for x in g.ball(4).unwrap() {
            assert_eq!(uniform.transitions(&x), srw.transitions(&x));
        }
        assert!(Kernel::parity(&g, vec![0.4, 0.2, 0.2, 0.1], vec![0.1, 0.3, 0.3, 0.3]).is_err());
    }

    #[test]
    fn pushforward_of_swap_at_identity() {
        let g = f2();
        let k = Kernel::from_descriptor(&g, "pushforward:suffix_swap:srw:uniform").unwrap();
        assert_eq!(k.support_bound(), 3);
        let mut t: Vec<(String, f64)> = k.transitions(&g.identity()).iter().map(|(h, p)| (g.format(h), *p)).collect();
        t.sort_by(|a, b| a.0.cmp(&b.0));
        let want: Vec<(String, f64)> = ["A", "B", "a", "ba"].iter().map(|s| (s.to_string(), 0.25)).collect();
        assert_eq!(t, want);
    }

    #[test]
    fn descriptors_round_trip() {
        let g = f2();
        for d in [
            "srw:uniform",
            "srw:a=0.3,b=0.3,AB=0.4",
            "unchecked:srw:a=1",
            "parity:0.4,0.2,0.2,0.2|0.1,0.3,0.3,0.3",
            "pushforward:suffix_swap:srw:uniform",
            "pushforward:identity:parity:0.4,0.2,0.2,0.2|0.1,0.3,0.3,0.3",
            "pushforward:depth_relabel:7:srw:uniform",
        ] {
            let k = Kernel::from_descriptor(&g, d).unwrap();
            assert_eq!(k.descriptor(), d);
        }
        assert!(Kernel::from_descriptor(&g, "levy:flight").is_err());
        let z: Group = "freeproduct:Z2,Z".parse().unwrap();
        assert!(matches!(
            Kernel::from_descriptor(&z, "pushforward:suffix_swap:srw:uniform"),
            Err(KernelError::Map(_))
        ));
    }
}
