//! Uniform and conditioned Galton-Watson trees, and the Prüfer bijection.

use cutforge::generate::{gen_cgw_tree, gen_uniform_tree, Offspring, RngStream};
use cutforge::trees::{decode_prufer, encode_prufer, MeasuredTree};

fn main() -> cutforge::Result<()> {
    let mut rng = RngStream::new(2024, 0);
    let t = gen_uniform_tree(10, &mut rng)?;
    let code = encode_prufer(&t);
    println!("uniform tree on 10 vertices, Prüfer code {code:?}");
    println!(
        "edges: {:?}",
        t.edge_set()
            .iter()
            .map(|e| (e.lo(), e.hi()))
            .collect::<Vec<_>>()
    );
    assert_eq!(decode_prufer(&code)?.edge_set(), t.edge_set());

    for (name, law) in [
        ("Poisson(1)", Offspring::Poisson1),
        ("Geometric(1/2)", Offspring::GeometricHalf),
    ] {
        let heights: Vec<usize> = (0..200)
            .map(|r| gen_cgw_tree(1000, law, &mut RngStream::new(7, r)).map(|t| t.height()))
            .collect::<cutforge::Result<_>>()?;
        let mean = heights.iter().sum::<usize>() as f64 / heights.len() as f64;
        let limit = (2.0 * std::f64::consts::PI * 1000.0).sqrt() / law.variance().sqrt();
        println!("{name} offspring, n = 1000: mean height {mean:.1} (asymptotic {limit:.1})");
    }

    let n = 2000;
    let m = MeasuredTree::with_uniform(
        gen_uniform_tree(n, &mut rng)?,
        1.0 / (2.0 * n as f64).sqrt(),
    )?;
    println!(
        "scaled uniform tree, n = {n}: total length {:.2}, d(1, 2) = {:.3}",
        m.total_length(),
        m.graph_distance(1, 2)?
    );
    Ok(())
}
