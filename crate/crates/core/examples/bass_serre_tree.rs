//! Orbit points, geodesics and translation lengths in the tree of a free product.

use tamechain::group::Group;
use tamechain::tree::TreeModel;

fn main() {
    let g: Group = "freeproduct:Z2,Z".parse().expect("Z2 * Z");
    let tree = TreeModel::new(g.clone());
    let base = tree.basepoint();
    for s in ["x", "xt", "xtyT", "t3"] {
        let e = g.parse_element(s).unwrap();
        let v = tree.orbit_point(&e);
        println!(
            "{s}: vertex {} at distance {}, translation length {}",
            tree.format_vertex(&v),
            tree.distance(&base, &v),
            tree.translation_length(&e)
        );
    }
    let a = tree.orbit_point(&g.parse_element("xt").unwrap());
    let b = tree.orbit_point(&g.parse_element("yT").unwrap());
    let path: Vec<String> = tree.geodesic(&a, &b).iter().map(|v| tree.format_vertex(v)).collect();
    println!("geodesic: {}", path.join(" -> "));
    println!("Gromov product at the base: {}", tree.gromov_product(&a, &b, &base));
}
