//! Exact laws: the radial birth-death chain and full convolution at small n.

use tamechain::group::Group;
use tamechain::markov::{exact_distribution, radial_exact, Kernel};

fn main() {
    let law = radial_exact(10_000);
    println!("E|w_n|/n at n = 10^4: {:.6}", law.mean() / 10_000.0);
    println!("Var|w_n|/n at n = 10^4: {:.6}", law.variance() / 10_000.0);
    println!("P[|w_200| < 50] = {:.3e}", radial_exact(200).prob_below(50.0));
    let ratio = radial_exact(2002).atom(0) / radial_exact(2000).atom(0);
    println!("return ratio at 2n = 2000: {ratio:.5} (rho^2 = 0.75)");

    let g = Group::free(2).expect("F2");
    let k = Kernel::simple_random_walk(&g);
    let exact = exact_distribution(&k, &g.identity(), 3).unwrap();
    let mut rows: Vec<_> = exact.iter().collect();
    rows.sort_by(|a, b| b.1.total_cmp(a.1).then(g.canonical_cmp(a.0, b.0)));
    println!("w_3 has {} atoms; the largest:", rows.len());
    for (x, p) in rows.iter().take(5) {
        println!("  {}: {p:.5}", g.format(x));
    }
}
