//! Poisson edge cutting: component masses over time and the cut metric.

use cutforge::fragment::{make_schedule, run_fragmentation};
use cutforge::generate::{gen_uniform_tree, RngStream};
use cutforge::trees::MeasuredTree;

fn main() -> cutforge::Result<()> {
    let n = 500;
    let mut rng = RngStream::new(11, 0);
    let tree = MeasuredTree::with_uniform(
        gen_uniform_tree(n, &mut rng)?,
        1.0 / (2.0 * n as f64).sqrt(),
    )?;
    let schedule = make_schedule(&tree, &mut rng)?;
    let trace = run_fragmentation(&tree, &schedule)?;
    for t in [0.0, 0.5, 1.0, 2.0, 4.0] {
        let profile = trace.mass_profile(t);
        println!(
            "t = {t:>3}: {:>3} components, largest {:.3}, total {:.6}",
            profile.len(),
            profile[0],
            profile.iter().sum::<f64>()
        );
    }
    let (x, y) = (1, n);
    println!(
        "vertices {x} and {y}: separated at t = {:.4}, graph distance {:.4}, cut distance {:.4}",
        trace.separation_time(x, y),
        tree.graph_distance(x, y)?,
        trace.cut_metric(x, y)
    );
    println!(
        "l({x}, t) at t = 1: {:.4}; l({x}) = {:.4}",
        trace.ell(x, 1.0),
        trace.ell(x, f64::INFINITY)
    );
    Ok(())
}
