//! Aggregation: trees assembled from binary genealogies with random signposts.

use cutforge::aggregate::{
    aggregate_reconstruct, attach_signposts, reroot_invariance_stat, sample_genealogy_k, size_pmf,
    GenealogySampler, RerootStatistic,
};
use cutforge::generate::RngStream;

fn main() -> cutforge::Result<()> {
    let mut rng = RngStream::new(8, 0);
    let g = attach_signposts(sample_genealogy_k(6, &mut rng)?, &mut rng);
    let t = aggregate_reconstruct(&g)?;
    println!(
        "genealogy with 6 leaves -> tree rooted at {} with edges {:?}",
        t.root(),
        t.edge_set()
            .iter()
            .map(|e| (e.lo(), e.hi()))
            .collect::<Vec<_>>()
    );
    println!(
        "leaf-count law: {:?}",
        (1..=5)
            .map(|k| format!("{:.4}", size_pmf(k)))
            .collect::<Vec<_>>()
    );
    let s = reroot_invariance_stat(
        GenealogySampler::Leaves { k: 12 },
        RerootStatistic::Degree,
        20_000,
        1,
    )?;
    let report = s.test(0.01)?;
    println!(
        "root degree vs uniform-vertex degree, k = 12: chi2 {:.2}, p {:.3}",
        report.stat, report.p
    );
    Ok(())
}
