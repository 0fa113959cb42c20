//! Size-biased Mittag-Leffler laws as fixed points of a smoothing transform,
//! and the martingale of mass-split trees. The transform preserves the
//! mean, so pools start at the fixed point's mean.

use cutforge::generate::RngStream;
use cutforge::rde::{grow_mass_tree, iterate_pool, sbml_mean, sbml_moment, SamplePool};
use cutforge::stats::{ks_one_sample, ReferenceCdf};

fn main() -> cutforge::Result<()> {
    let mut rng = RngStream::new(3, 0);
    let pool = SamplePool::exponential(0.5, 50_000, sbml_mean(0.5)?, &mut rng)?;
    let iterated = iterate_pool(pool, 20, &mut rng)?;
    let ks = ks_one_sample(&iterated.samples, ReferenceCdf::SbmlHalf, 0.01)?;
    println!(
        "beta = 1/2, exponential start, 20 steps: KS {:.4} (p {:.3})",
        ks.stat, ks.p
    );
    for beta in [1.0 / 3.0, 0.5, 0.75] {
        let pool = SamplePool::exponential(beta, 50_000, sbml_mean(beta)?, &mut rng)?;
        let it = iterate_pool(pool, 25, &mut rng)?;
        let m1 = it.samples.iter().sum::<f64>() / it.len() as f64;
        let m2 = it.samples.iter().map(|x| x * x).sum::<f64>() / it.len() as f64;
        println!(
            "beta = {beta:.3}: pool mean {m1:.3} (exact {:.3}), second moment {m2:.3} (exact {:.3})",
            sbml_moment(beta, 1.0)?,
            sbml_moment(beta, 2.0)?
        );
    }
    let reps = 2000;
    let depth = 10;
    let mut mean_y = vec![0.0; depth + 1];
    for r in 0..reps {
        let t = grow_mass_tree(0.5, depth, &mut RngStream::new(4, r))?;
        for (acc, y) in mean_y.iter_mut().zip(t.y_sequence()) {
            *acc += y / reps as f64;
        }
    }
    println!(
        "mean Y_n over {reps} mass-split trees: {:?}",
        mean_y.iter().map(|y| format!("{y:.3}")).collect::<Vec<_>>()
    );
    Ok(())
}
