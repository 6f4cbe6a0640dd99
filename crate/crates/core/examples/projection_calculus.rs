//! Cosets of ⟨a⟩ met by a geodesic, their projections and the distance-formula sum.

use tamechain::group::Group;
use tamechain::projection::ProjectionSystem;
use tamechain::tree::TreeModel;

fn main() {
    let g = Group::free(2).expect("F2");
    let model = TreeModel::new(g.clone());
    let germ = g.parse_element("a").unwrap();
    let sys = ProjectionSystem::new(model, &germ, 3).expect("T = 3 is admissible for B = 0");
    let o = g.identity();
    let p = g.parse_element("aaaaabbbbbaaaaa").unwrap();
    let ht = sys.compute_ht(&o, &p);
    println!("B = {}, T = {}", sys.behrstock(), sys.threshold());
    println!("{}", serde_json::to_string_pretty(&ht.to_json(&g)).unwrap());
    println!("sum over the family: {}", sys.distance_formula_sum(&ht, &o, &p));

    let w = g.parse_element("aaab").unwrap();
    for e in &ht.entries {
        println!(
            "coset {}: d(p, w) = {}",
            g.format(&e.marking.rep),
            sys.coset_distance(&e.marking, &p, &w)
        );
    }
}
