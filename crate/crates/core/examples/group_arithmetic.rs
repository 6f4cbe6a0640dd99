//! Normal forms in a free group and in the free product Z² * Z.

use tamechain::group::Group;

fn main() {
    let f2 = Group::free(2).expect("F2");
    let x = f2.parse_element("abA").unwrap();
    let y = f2.parse_element("aBBa").unwrap();
    println!("F2: ({}) ({}) = {}", f2.format(&x), f2.format(&y), f2.format(&f2.mul(&x, &y)));
    println!("F2: inverse of {} is {}", f2.format(&x), f2.format(&f2.invert(&x)));
    let (conj, core) = f2.cyclic_reduction(&x);
    println!("F2: {} = {} {} {}", f2.format(&x), f2.format(&conj), f2.format(&core), f2.format(&f2.invert(&conj)));
    for r in 0..=4 {
        println!("F2: |ball({r})| = {}", f2.ball(r).unwrap().len());
    }

    let g: Group = "freeproduct:Z2,Z".parse().expect("Z2 * Z");
    let u = g.parse_element("x2y|t").unwrap();
    let v = g.parse_element("t-1|X2").unwrap();
    println!("Z2*Z: ({}) ({}) = {}", g.format(&u), g.format(&v), g.format(&g.mul(&u, &v)));
    println!("Z2*Z: word length of {} is {}", g.format(&u), g.word_length(&u));
    println!("Z2*Z: a geodesic spelling is {}", g.symbols(&g.spell(&u)).join(" "));
}
