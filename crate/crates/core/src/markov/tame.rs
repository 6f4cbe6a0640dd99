//! Finitary certificate for the three tameness conditions.

use serde::Serialize;

use crate::group::Element;
use crate::stats::linear_fit;

use super::exact::exact_sequence;
use super::Kernel;

/// Step limits for the probe.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ProbeCaps {
    /// Largest `k` searched for `P[w_k^g = gs]`.
    pub reach_steps: usize,
    /// Steps of exact law used for the point-mass decay fit.
    pub fit_steps: usize,
}

impl Default for ProbeCaps {
    fn default() -> Self {
        ProbeCaps { reach_steps: 4, fit_steps: 10 }
    }
}

/// Irreducibility constants for one generator.
#[derive(Clone, Debug, Serialize)]
pub struct GeneratorReach {
    pub generator: String,
    /// `min_g max_{k ≤ cap} P[w_k^g = g·s]` over the sampled states.
    pub epsilon: f64,
    /// Largest step count at which the maximum was first attained.
    pub steps: usize,
}

/// `max_y P[w_n = y] ≈ A·ρⁿ`, fitted on logs.
#[derive(Clone, Debug, Serialize)]
pub struct NonAmenabilityFit {
    pub amplitude: f64,
    pub rho: f64,
    pub residual: f64,
    pub max_atoms: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdicts {
    pub bounded_jumps: bool,
    pub non_amenable: bool,
    pub irreducible: bool,
    pub tame: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TamenessReport {
    pub descriptor: String,
    pub declared_jump_bound: u64,
    pub observed_jump_bound: u64,
    pub reach: Vec<GeneratorReach>,
    /// Whether the constants are known at every state or only at the sample.
    pub basis: String,
    pub fit: NonAmenabilityFit,
    pub verdicts: Verdicts,
    pub failures: Vec<String>,
    pub caps: ProbeCaps,
    pub sampled_states: usize,
}

/// Probe `kernel` at the given states. The decay fit starts at the first state.
pub fn tameness_probe(kernel: &Kernel, basepoints: &[Element], caps: ProbeCaps) -> TamenessReport {
    let group = kernel.group();
    let basepoints: Vec<Element> = if basepoints.is_empty() { vec![group.identity()] } else { basepoints.to_vec() };
    let mut failures = Vec::new();

    let mut observed = 0;
    for g in &basepoints {
        for (h, _) in kernel.transitions(g) {
            observed = observed.max(group.distance(g, &h));
        }
    }
    let bounded_jumps = observed <= kernel.support_bound();
    if !bounded_jumps {
        failures.push(format!("jump of length {observed} exceeds declared bound {}", kernel.support_bound()));
    }

    let gens = group.generators();
    let mut reach: Vec<GeneratorReach> = gens
        .iter()
        .map(|s| GeneratorReach { generator: s.symbol.clone(), epsilon: f64::INFINITY, steps: 0 })
        .collect();
    for g in &basepoints {
        let laws = exact_sequence(kernel, g, caps.reach_steps);
        for (s, r) in gens.iter().zip(reach.iter_mut()) {
            let target = group.mul(g, &s.element);
            let (mut best, mut at) = (0.0, 0);
            for (k, law) in laws.iter().enumerate().skip(1) {
                let p = law.get(&target).copied().unwrap_or(0.0);
                if p > best {
                    best = p;
                    at = k;
                }
            }
            if best < r.epsilon {
                r.epsilon = best;
            }
            r.steps = r.steps.max(at);
        }
    }
    for r in &reach {
        if r.epsilon <= 0.0 {
            failures.push(format!("generator {} is never reached within {} steps", r.generator, caps.reach_steps));
        }
    }
    let irreducible = reach.iter().all(|r| r.epsilon > 0.0);

    let laws = exact_sequence(kernel, &basepoints[0], caps.fit_steps);
    let max_atoms: Vec<f64> = laws.iter().skip(1).map(|l| l.values().copied().fold(0.0, f64::max)).collect();
    let ns: Vec<f64> = (1..=max_atoms.len()).map(|n| n as f64).collect();
    let logs: Vec<f64> = max_atoms.iter().map(|a| a.ln()).collect();
    let fit = match linear_fit(&ns, &logs) {
        Some(f) => NonAmenabilityFit { amplitude: f.intercept.exp(), rho: f.slope.exp(), residual: f.residual, max_atoms },
        None => NonAmenabilityFit { amplitude: f64::NAN, rho: f64::NAN, residual: f64::NAN, max_atoms },
    };
    let non_amenable = fit.rho < 1.0;
    if !non_amenable {
        failures.push(format!("point masses do not decay exponentially (fitted rho {})", fit.rho));
    }

    let basis = match kernel.structural_note() {
        Some(note) => format!("structural: {note}"),
        None => format!("sampled at {} states", basepoints.len()),
    };
    TamenessReport {
        descriptor: kernel.descriptor().to_string(),
        declared_jump_bound: kernel.support_bound(),
        observed_jump_bound: observed,
        reach,
        basis,
        fit,
        verdicts: Verdicts { bounded_jumps, non_amenable, irreducible, tame: bounded_jumps && non_amenable && irreducible },
        failures,
        caps,
        sampled_states: basepoints.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Group;

    #[test]
    fn reducible_kernel_is_flagged_for_b() {
        let g = Group::free(2).unwrap();
        let k = Kernel::from_descriptor(&g, "unchecked:srw:a=0.5,A=0.5").unwrap();
        let r = tameness_probe(&k, &[g.identity()], ProbeCaps { reach_steps: 4, fit_steps: 6 });
        assert!(!r.verdicts.irreducible && !r.verdicts.tame);
        let zero: Vec<&str> = r.reach.iter().filter(|x| x.epsilon == 0.0).map(|x| x.generator.as_str()).collect();
        assert_eq!(zero, vec!["b", "B"]);
        assert!(r.basis.starts_with("sampled"));
    }

    #[test]
    fn swap_pushforward_is_tame() {
        let g = Group::free(2).unwrap();
        let k = Kernel::from_descriptor(&g, "pushforward:suffix_swap:srw:uniform").unwrap();
        let states: Vec<Element> = ["1", "b", "ba", "abAB"].iter().map(|s| g.parse_element(s).unwrap()).collect();
        let r = tameness_probe(&k, &states, ProbeCaps { reach_steps: 4, fit_steps: 8 });
        assert!(r.verdicts.tame, "{:?}", r.failures);
        assert!(r.observed_jump_bound <= 3 && r.declared_jump_bound == 3);
        assert!(r.fit.rho < 1.0);
    }
}
