//! Randomised invariants of the group, tree, projection and kernel layers.

use std::collections::HashMap;

use proptest::prelude::*;
use tamechain::group::{Element, Group};
use tamechain::markov::{exact_distribution, Kernel, QiBijection, Walker};
use tamechain::projection::ProjectionSystem;
use tamechain::rng::{random_product, substream};
use tamechain::stats::total_variation;
use tamechain::tree::TreeModel;

const GROUPS: [&str; 4] = ["free:2", "free:3", "freeproduct:Z2,Z", "freeproduct:Z/2,Z/3"];

fn group(i: usize) -> Group {
    GROUPS[i].parse().unwrap()
}

fn element(g: &Group, seed: u64, len: usize) -> Element {
    random_product(g, &mut substream(seed, "prop", 0), len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn word_metric_is_a_left_invariant_metric(gi in 0..4usize, s in any::<u64>(), lx in 0..7usize, ly in 0..7usize, lz in 0..7usize, lh in 0..12usize) {
        let g = group(gi);
        let (x, y, z, h) = (element(&g, s, lx), element(&g, s ^ 1, ly), element(&g, s ^ 2, lz), element(&g, s ^ 3, lh));
        prop_assert!(g.distance(&x, &z) <= g.distance(&x, &y) + g.distance(&y, &z));
        prop_assert_eq!(g.distance(&x, &y), g.distance(&y, &x));
        prop_assert_eq!(g.distance(&x, &y) == 0, x == y);
        prop_assert_eq!(g.distance(&g.mul(&h, &x), &g.mul(&h, &y)), g.distance(&x, &y));
    }

    #[test]
    fn multiplication_is_associative_and_reduction_idempotent(gi in 0..4usize, s in any::<u64>(), l in 0..15usize) {
        let g = group(gi);
        let (x, y, z) = (element(&g, s, l), element(&g, s ^ 5, l), element(&g, s ^ 6, l));
        prop_assert_eq!(g.mul(&g.mul(&x, &y), &z), g.mul(&x, &g.mul(&y, &z)));
        let spelled = g.symbols(&g.spell(&x));
        let once = g.reduce(&spelled).unwrap();
        prop_assert_eq!(&once, &x);
        prop_assert_eq!(g.reduce(&g.symbols(&g.spell(&once))).unwrap(), once);
    }

    #[test]
    fn four_point_condition(gi in 0..4usize, s in any::<u64>(), l in 0..10usize) {
        let g = group(gi);
        let t = TreeModel::new(g.clone());
        let v: Vec<_> = (0..4).map(|i| t.orbit_point(&element(&g, s ^ (i << 8), l + i as usize))).collect();
        let d = |a: usize, b: usize| t.distance(&v[a], &v[b]);
        prop_assert!(d(0, 1) + d(2, 3) <= (d(0, 2) + d(1, 3)).max(d(0, 3) + d(1, 2)));
    }

    #[test]
    fn tree_is_equivariant(gi in 0..4usize, s in any::<u64>(), l in 1..10usize) {
        let g = group(gi);
        let t = TreeModel::new(g.clone());
        let (x, y, h) = (element(&g, s, l), element(&g, s ^ 1, l), element(&g, s ^ 2, l));
        let (u, v) = (t.orbit_point(&x), t.orbit_point(&y));
        prop_assert_eq!(t.distance(&t.act(&h, &u), &t.act(&h, &v)), t.distance(&u, &v));
        let germ = element(&g, s ^ 3, l + 2);
        if let Ok(axis) = t.axis_of(&germ) {
            let moved = t.translate_axis(&h, &axis);
            prop_assert_eq!(t.project_to_axis(&t.act(&h, &u), &moved), t.act(&h, &t.project_to_axis(&u, &axis)));
        }
    }

    #[test]
    fn translation_length_is_a_class_function_and_homogeneous(gi in 0..4usize, s in any::<u64>(), l in 0..10usize, n in 1..=8i64) {
        let g = group(gi);
        let t = TreeModel::new(g.clone());
        let (x, h) = (element(&g, s, l), element(&g, s ^ 9, l));
        let tau = t.translation_length(&x);
        prop_assert_eq!(t.translation_length(&g.mul(&g.mul(&h, &x), &g.invert(&h))), tau);
        prop_assert_eq!(t.translation_length(&g.power(&x, n)), n as u64 * tau);
    }

    #[test]
    fn ht_is_equivariant(s in any::<u64>(), l in 0..20usize, t in prop::sample::select(vec![3u64, 5, 10])) {
        let g = Group::free(2).unwrap();
        let sys = ProjectionSystem::new(TreeModel::new(g.clone()), &g.parse_element("a").unwrap(), t).unwrap();
        let o = element(&g, s, 4);
        let p = g.mul(&o, &g.mul(&element(&g, s ^ 1, l), &g.power(&g.parse_element("a").unwrap(), 3 + (s % 9) as i64)));
        let h = element(&g, s ^ 2, 6);
        let ht = sys.compute_ht(&o, &p);
        let moved = sys.compute_ht(&g.mul(&h, &o), &g.mul(&h, &p));
        let mut a: Vec<(Element, u64)> = ht.entries.iter().map(|e| (sys.translate(&h, &e.marking).rep, e.distance)).collect();
        let mut b: Vec<(Element, u64)> = moved.entries.iter().map(|e| (e.marking.rep.clone(), e.distance)).collect();
        a.sort();
        b.sort();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn pushforward_keeps_distances_within_twice_the_displacement(s in any::<u64>(), n in 1..400usize) {
        let g = Group::free(2).unwrap();
        let k = Kernel::pushforward(QiBijection::SuffixSwap, Kernel::simple_random_walk(&g)).unwrap();
        let mut w = Walker::new(&k, &g.identity());
        let mut rng = substream(s, "pushforward", 0);
        for _ in 0..n {
            w.step(&mut rng);
            let (base, image) = (g.word_length(w.base_state()), g.word_length(w.state()));
            prop_assert!(base.abs_diff(image) <= 2);
        }
    }

    #[test]
    fn rows_are_distributions_within_the_jump_bound(s in any::<u64>(), l in 0..12usize, ki in 0..4usize) {
        let g = Group::free(2).unwrap();
        let desc = ["srw:a=0.3,b=0.3,AB=0.4", "parity:0.4,0.2,0.2,0.2|0.1,0.3,0.3,0.3",
            "pushforward:suffix_swap:srw:uniform", "pushforward:depth_relabel:11:srw:uniform"][ki];
        let k = Kernel::from_descriptor(&g, desc).unwrap();
        let x = element(&g, s, l);
        let row = k.transitions(&x);
        let total: f64 = row.iter().map(|(_, p)| p).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(row.iter().all(|(y, p)| *p > 0.0 && g.distance(&x, y) <= k.support_bound()));
    }
}

#[test]
fn sphere_sizes_in_f2() {
    let g = Group::free(2).unwrap();
    let mut counts = vec![0usize; 9];
    for x in g.ball(8).unwrap() {
        counts[g.word_length(&x) as usize] += 1;
    }
    for (n, c) in counts.iter().enumerate().skip(1) {
        assert_eq!(*c, 4 * 3usize.pow(n as u32 - 1), "sphere {n}");
    }
}

/// Every walk in the Cayley tree from `u` to `v` passes through the
/// projection of `u` onto an axis whenever `u` and `v` project to different points.
#[test]
fn walks_between_points_pass_through_projections() {
    let g = Group::free(2).unwrap();
    let t = TreeModel::new(g.clone());
    let axis = t.axis_of(&g.parse_element("a").unwrap()).unwrap();
    let ball = g.ball(4).unwrap();
    let inside: std::collections::HashSet<Element> = ball.iter().cloned().collect();
    let starts = g.ball(2).unwrap();
    let mut checked = 0;
    for u in &starts {
        for v in &starts {
            let (pu, pv) = (t.project_to_axis(&t.orbit_point(u), &axis), t.project_to_axis(&t.orbit_point(v), &axis));
            if pu == pv {
                continue;
            }
            // all walks of length up to d(u, v) + 2 that stay in ball(4)
            let max_len = g.distance(u, v) as usize + 2;
            let mut stack = vec![(u.clone(), 0usize, t.orbit_point(u) == pu)];
            while let Some((x, len, seen)) = stack.pop() {
                if &x == v {
                    assert!(seen, "walk from {} to {} avoids the projection", g.format(u), g.format(v));
                    checked += 1;
                }
                if len == max_len {
                    continue;
                }
                for s in g.generators() {
                    let y = g.mul(&x, &s.element);
                    if inside.contains(&y) {
                        let hit = seen || t.orbit_point(&y) == pu;
                        stack.push((y, len + 1, hit));
                    }
                }
            }
        }
    }
    assert!(checked > 1000);
}

/// Conditional law of `w_{k+m}` given `w_k = h`, against the exact law of the chain started at `h`.
#[test]
fn markov_property_holds_for_sampled_paths() {
    const SAMPLES: u64 = 100_000;
    let g = Group::free(2).unwrap();
    for desc in ["srw:uniform", "parity:0.4,0.2,0.2,0.2|0.1,0.3,0.3,0.3", "pushforward:suffix_swap:srw:uniform"] {
        let k = Kernel::from_descriptor(&g, desc).unwrap();
        let (k_steps, m) = (1, 3);
        let mut by_start: HashMap<Element, HashMap<Element, f64>> = HashMap::new();
        for i in 0..SAMPLES {
            let mut rng = substream(17, desc, i);
            let mut w = Walker::new(&k, &g.identity());
            for _ in 0..k_steps {
                w.step(&mut rng);
            }
            let h = w.state().clone();
            for _ in 0..m {
                w.step(&mut rng);
            }
            *by_start.entry(h).or_default().entry(w.state().clone()).or_default() += 1.0;
        }
        let (h, counts) = by_start.into_iter().max_by(|a, b| a.1.values().sum::<f64>().total_cmp(&b.1.values().sum::<f64>())).unwrap();
        let total: f64 = counts.values().sum();
        let empirical: HashMap<Element, f64> = counts.into_iter().map(|(x, c)| (x, c / total)).collect();
        let exact = exact_distribution(&k, &h, m).unwrap();
        let tv = total_variation(&exact, &empirical);
        assert!(tv <= 0.05, "{desc}: total variation {tv} from {}", g.format(&h));
    }
}

/// `P[w_k = y] ≥ ε₀^{ℓ(y)}` for some `k ≤ U·ℓ(y)`, where `(ε₀, U)` is the worst
/// generator reach of the kernel.
#[test]
fn generator_reach_compounds_along_words() {
    let g = Group::free(2).unwrap();
    for (desc, eps, u) in [("srw:uniform", 0.25f64, 1usize), ("pushforward:suffix_swap:srw:uniform", 0.0156, 3)] {
        let k = Kernel::from_descriptor(&g, desc).unwrap();
        let laws: Vec<_> = (0..=9).map(|n| exact_distribution(&k, &g.identity(), n).unwrap()).collect();
        for y in ["a", "b", "ab", "Ba", "abA", "bbB"] {
            let y = g.reduce(&y.chars().map(|c| c.to_string()).collect::<Vec<_>>()).unwrap();
            let len = g.word_length(&y) as usize;
            let best = laws[..=(u * len).min(9)].iter().map(|l| l.get(&y).copied().unwrap_or(0.0)).fold(0.0, f64::max);
            assert!(best >= eps.powi(len as i32), "{desc}: {} reached with {best}", g.format(&y));
        }
    }
}
