//! `compute_ht` against a brute-force scan over cosets meeting the geodesic.

mod common;

use common::{compare, pair, Oracle, GERMS};
use tamechain::group::Group;
use tamechain::projection::ProjectionSystem;
use tamechain::tree::TreeModel;

#[test]
fn high_projection_family_matches_brute_force() {
    let g = Group::free(2).unwrap();
    let mut nonempty = 0;
    for germ in &GERMS {
        let oracle = Oracle::new(&g, germ);
        let germ_el = g.parse_element(germ.word).unwrap();
        for t in [3, 5, 10] {
            let sys = ProjectionSystem::new(TreeModel::new(g.clone()), &germ_el, t).unwrap();
            for i in 0..1000 {
                let (o, p) = pair(&g, &germ_el, t, i);
                if let Some(err) = compare(&sys, &oracle, &o, &p) {
                    panic!("germ {} T {t}: {err}", germ.word);
                }
                nonempty += usize::from(!sys.compute_ht(&o, &p).is_empty());
            }
        }
    }
    // the planted powers make sure the comparison is not vacuous
    assert!(nonempty > 1000, "only {nonempty} pairs with a non-empty family");
}
