//! Push a random walk forward through a bounded-displacement bijection and sample it.

use tamechain::group::Group;
use tamechain::markov::{sample_path, write_trajectory_csv, Kernel};
use tamechain::tree::TreeModel;

fn main() {
    let g = Group::free(2).expect("F2");
    let k = Kernel::from_descriptor(&g, "pushforward:suffix_swap:srw:uniform").unwrap();
    println!("{} (K = {})", k.descriptor(), k.support_bound());
    if let Some(note) = k.structural_note() {
        println!("{note}");
    }
    for (y, p) in k.transitions(&g.identity()) {
        println!("  1 -> {}: {p}", g.format(&y));
    }
    let path = sample_path(&k, &g.identity(), 12, 42);
    let model = TreeModel::new(g);
    write_trajectory_csv(&model, &path, std::io::stdout()).expect("stdout");
}
