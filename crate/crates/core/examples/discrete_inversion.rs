//! Recovers a tree and its cut schedule from the cut-tree alone.

use cutforge::cuttree::{build_cut_tree, NuMode, Points};
use cutforge::fragment::make_schedule;
use cutforge::generate::{gen_uniform_tree, RngStream};
use cutforge::invert::{invert_discrete, path_recovery};
use cutforge::trees::MeasuredTree;

fn main() -> cutforge::Result<()> {
    let n = 300;
    let mut rng = RngStream::new(42, 0);
    let tree = MeasuredTree::uniform(gen_uniform_tree(n, &mut rng)?);
    let schedule = make_schedule(&tree, &mut rng)?;
    let ct = build_cut_tree(&tree, &schedule, &Points::All)?;
    let posts = ct.extract_routings();
    let nu = ct.nu_measure(NuMode::Exact);
    let inv = invert_discrete(&ct, &posts, &nu, 1.0)?;
    println!(
        "edge sets equal: {}",
        inv.tree.tree().edge_set() == tree.tree().edge_set()
    );
    let mut original: Vec<_> = schedule.cuts().iter().map(|c| (c.edge, c.time)).collect();
    let mut recovered: Vec<_> = inv
        .schedule
        .cuts()
        .iter()
        .map(|c| (c.edge, c.time))
        .collect();
    original.sort_by_key(|a| a.0);
    recovered.sort_by_key(|a| a.0);
    let worst = original
        .iter()
        .zip(&recovered)
        .map(|(a, b)| {
            if a.0 == b.0 {
                (a.1 - b.1).abs() / a.1
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max);
    println!(
        "{} cuts recovered, worst relative time error {worst:.2e}",
        recovered.len()
    );
    let path = path_recovery(&ct, &posts, 1, n)?;
    println!(
        "path 1 -> {n} from signposts has {} edges (true: {})",
        path.len() - 1,
        tree.tree().hop_distance(1, n)?
    );
    Ok(())
}
