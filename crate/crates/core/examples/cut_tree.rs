//! Builds the cut-tree of a small tree and prints its structure.

use cutforge::cuttree::{build_cut_tree, NodeKind, NuMode, Points};
use cutforge::fragment::make_schedule;
use cutforge::generate::{gen_uniform_tree, RngStream};
use cutforge::trees::MeasuredTree;

fn main() -> cutforge::Result<()> {
    let mut rng = RngStream::new(5, 0);
    let tree = MeasuredTree::uniform(gen_uniform_tree(8, &mut rng)?);
    let schedule = make_schedule(&tree, &mut rng)?;
    let ct = build_cut_tree(&tree, &schedule, &Points::All)?;
    let nu = ct.nu_measure(NuMode::Exact);
    println!(
        "cut-tree with {} nodes, nu total {:.3}",
        ct.len(),
        nu.total()
    );
    for (id, node) in ct.nodes().iter().enumerate() {
        let indent = "  ".repeat(depth(&ct, id));
        match node.kind {
            NodeKind::Internal => {
                let cut = node.cut.expect("internal nodes carry a cut");
                println!(
                    "{indent}node {id}: cut {} at t = {:.3}, distance to root {:.3}",
                    cut.edge,
                    cut.time,
                    ct.root_distance(id)
                );
            }
            _ => println!(
                "{indent}node {id}: {:?}, distance to root {:.3}",
                node.kind,
                ct.root_distance(id)
            ),
        }
    }
    let posts = ct.extract_routings();
    println!(
        "signposts consistent with blocks: {}",
        posts.containment_violation(&ct).is_none()
    );
    Ok(())
}

fn depth(ct: &cutforge::cuttree::CutTree, mut id: usize) -> usize {
    let mut d = 0;
    while let Some(p) = ct.node(id).parent {
        id = p;
        d += 1;
    }
    d
}
