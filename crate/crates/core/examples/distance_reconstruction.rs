//! Continuum distance estimates from signpost routings at increasing depth.

use cutforge::cuttree::{build_cut_tree, NuMode, Points};
use cutforge::fragment::make_schedule;
use cutforge::generate::{gen_uniform_tree, sample_distinct, RngStream};
use cutforge::invert::{default_depth, delta_c};
use cutforge::trees::MeasuredTree;

fn main() -> cutforge::Result<()> {
    let n = 3000;
    let mut rng = RngStream::new(9, 0);
    let tree = MeasuredTree::with_uniform(
        gen_uniform_tree(n, &mut rng)?,
        1.0 / (2.0 * n as f64).sqrt(),
    )?;
    let schedule = make_schedule(&tree, &mut rng)?;
    let ct = build_cut_tree(&tree, &schedule, &Points::All)?;
    let posts = ct.extract_routings();
    let nu = ct.nu_measure(NuMode::Exact);
    for _ in 0..4 {
        let uv = sample_distinct(n, 2, &mut rng)?;
        let d = tree.graph_distance(uv[0], uv[1])?;
        print!("pair ({:>4}, {:>4}) d = {d:.3}:", uv[0], uv[1]);
        for depth in [2, 4, 6, 8, default_depth(n)] {
            let est = delta_c(&ct, &posts, &nu, uv[0], uv[1], depth, 2.0)?;
            print!(
                " depth {depth} -> {:.3}{}",
                est.full,
                if est.exhausted { "*" } else { "" }
            );
        }
        println!();
    }
    println!("(* routing exhausted before the requested depth)");
    Ok(())
}
