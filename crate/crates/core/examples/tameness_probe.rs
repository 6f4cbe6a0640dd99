//! Certify the tameness conditions for a few kernels on F2.

use tamechain::group::Group;
use tamechain::markov::{tameness_probe, Kernel, ProbeCaps};

fn main() {
    let g = Group::free(2).expect("F2");
    let states: Vec<_> = ["1", "b", "ba", "abAB", "BBa"].iter().map(|s| g.parse_element(s).unwrap()).collect();
    for d in [
        "srw:uniform",
        "parity:0.4,0.2,0.2,0.2|0.1,0.3,0.3,0.3",
        "pushforward:suffix_swap:srw:uniform",
        "pushforward:depth_relabel:7:srw:uniform",
        "unchecked:srw:a=0.5,A=0.5",
    ] {
        let k = Kernel::from_descriptor(&g, d).expect("descriptor");
        let r = tameness_probe(&k, &states, ProbeCaps::default());
        println!("{d}");
        println!(
            "  K declared {} observed {}; rho {:.4} (residual {:.3})",
            r.declared_jump_bound, r.observed_jump_bound, r.fit.rho, r.fit.residual
        );
        for s in &r.reach {
            println!("  reach {}: eps {:.4} within {} steps", s.generator, s.epsilon, s.steps);
        }
        println!("  tame: {} ({})", r.verdicts.tame, r.basis);
        for f in &r.failures {
            println!("  failure: {f}");
        }
    }
}
