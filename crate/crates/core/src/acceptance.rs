//! The acceptance suite: ten end-to-end checks of exactness, conservation
//! and limit laws, shared by the `accept` subcommand and the test target.
//!
//! Replicate `r` of criterion `c` draws from `RngStream::new(seed, c)
//! .substream(r)`, so results do not depend on the thread count. Tests that
//! report p-values use the family level divided by their number
//! ([`P_VALUE_TESTS`]); moment checks use `|z| < 3`.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregate::{
    reroot_invariance_stat, size_histogram, size_law_test, GenealogySampler, RerootStatistic,
};
use crate::cuttree::{build_cut_tree, check_consistency, NuMode, Points};
use crate::error::Result;
use crate::fragment::{make_schedule, run_fragmentation};
use crate::generate::{
    gen_cgw_tree, gen_uniform_tree, sample_distinct, sample_vertices, Offspring, RngStream,
};
use crate::invert::{default_depth, delta_c, invert_discrete, reconstruct_discrete, tau_to_node};
use crate::rde::{expected_dust, iterate_pool, sample_level_sums, sbml_moment, SamplePool};
use crate::stats::{
    bonferroni, ks_one_sample, ks_one_sample_fn, ks_two_sample, median, moment_summary,
    moment_summary_scaled, MomentTarget, ReferenceCdf, TestReport,
};
use crate::trees::{DiscreteTree, MeasuredTree, Vertex};

/// Family significance level of the suite.
pub const FAMILY_ALPHA: f64 = 0.01;

/// Number of p-value tests in the full suite (criteria 4b, 7, and the two
/// tests of 9).
pub const P_VALUE_TESTS: usize = 4;

/// Per-test level for p-value tests.
pub fn test_alpha() -> f64 {
    bonferroni(FAMILY_ALPHA, P_VALUE_TESTS)
}

/// Roulette threshold for the depth-25 level sums of criterion 6.
pub const LEVEL_SUM_EPSILON: f64 = 1e-3;

/// Criteria that fail at the stated sizes for reasons documented in the
/// README: a finite-size bias in the cut metric (4) and the frozen-segment
/// bias of the distance estimator on a discrete tree (7).
pub const KNOWN_LIMITATIONS: [u8; 2] = [4, 7];

/// Criteria that are pure property checks (run by `--quick`).
pub const PROPERTY_CRITERIA: [u8; 4] = [1, 2, 3, 10];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcceptConfig {
    pub seed: u64,
    /// Run only the property criteria, at a tenth of their sizes.
    pub quick: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub summary: String,
    pub reports: Vec<TestReport>,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {:<34} {} ({:.1}s) {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.seconds,
            self.summary
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcceptSummary {
    pub config: AcceptConfig,
    pub family_alpha: f64,
    pub test_alpha: f64,
    pub results: Vec<CriterionResult>,
}

impl AcceptSummary {
    pub fn failing(&self) -> Vec<u8> {
        self.results
            .iter()
            .filter(|r| !r.passed)
            .map(|r| r.id)
            .collect()
    }

    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn table(&self) -> String {
        let mut s: String = self.results.iter().map(|r| r.line() + "\n").collect();
        let failing = self.failing();
        if failing.is_empty() {
            s.push_str("all criteria passed\n");
        } else {
            let ids: Vec<String> = failing.iter().map(u8::to_string).collect();
            s.push_str(&format!("failing criteria: {}\n", ids.join(", ")));
        }
        s
    }
}

pub const CRITERIA: [(u8, &str); 10] = [
    (1, "exact discrete inversion"),
    (2, "tau exactness"),
    (3, "mass conservation"),
    (4, "Rayleigh limits"),
    (5, "RDE fixed point"),
    (6, "martingale and dust"),
    (7, "distance reconstruction"),
    (8, "Dirichlet split law"),
    (9, "aggregation laws"),
    (10, "routing consistency"),
];

/// Runs the selected criteria (all of them if `ids` is empty; only the
/// property criteria in quick mode).
pub fn run_suite(
    config: AcceptConfig,
    ids: &[u8],
    mut progress: impl FnMut(&CriterionResult),
) -> Result<AcceptSummary> {
    let mut results = Vec::new();
    for (id, _) in CRITERIA {
        let selected = if ids.is_empty() {
            true
        } else {
            ids.contains(&id)
        };
        if !selected || (config.quick && !PROPERTY_CRITERIA.contains(&id)) {
            continue;
        }
        let r = run_criterion(id, config)?;
        progress(&r);
        results.push(r);
    }
    Ok(AcceptSummary {
        config,
        family_alpha: FAMILY_ALPHA,
        test_alpha: test_alpha(),
        results,
    })
}

/// Runs one criterion.
pub fn run_criterion(id: u8, config: AcceptConfig) -> Result<CriterionResult> {
    let start = Instant::now();
    let scale = if config.quick { 10 } else { 1 };
    let streams = RngStream::new(config.seed, id as u64);
    let (passed, summary, reports) = match id {
        1 => criterion_exact_inversion(&streams, 10_000 / scale)?,
        2 => criterion_tau(&streams, 1_000 / scale)?,
        3 => criterion_conservation(&streams, 1_000 / scale)?,
        4 => criterion_rayleigh(&streams, 2_000, 10_000)?,
        5 => criterion_rde(&streams, 100_000)?,
        6 => criterion_martingale(&streams, 25, 10_000)?,
        7 => criterion_distance(&streams, 5_000, 500)?,
        8 => criterion_dirichlet(&streams, 4_000, 10_000)?,
        9 => criterion_aggregation(&streams, 1_000_000, 100_000)?,
        10 => criterion_routing(&streams, 1_000 / scale)?,
        _ => return Err(crate::Error::Input(format!("no criterion {id}"))),
    };
    let name = CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .map(|c| c.1)
        .unwrap_or_default();
    Ok(CriterionResult {
        id,
        name: name.into(),
        passed,
        summary,
        reports: reports
            .into_iter()
            .map(|r| r.with_seed(config.seed))
            .collect(),
        seconds: start.elapsed().as_secs_f64(),
    })
}

type Outcome = (bool, String, Vec<TestReport>);

/// A tree with i.i.d. exponential edge lengths and strictly positive
/// random masses.
fn random_measured_tree<R: Rng + ?Sized>(tree: DiscreteTree, rng: &mut R) -> Result<MeasuredTree> {
    let n = tree.n();
    let len: Vec<f64> = (0..n).map(|_| 0.05 - rng.random::<f64>().ln()).collect();
    let raw: Vec<f64> = (0..n).map(|_| 0.05 + rng.random::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    MeasuredTree::new(tree, len, raw.iter().map(|m| m / total).collect())
}

fn criterion_exact_inversion(streams: &RngStream, instances: usize) -> Result<Outcome> {
    let outcomes: Vec<(bool, f64)> = (0..instances)
        .into_par_iter()
        .map(|r| {
            let mut rng = streams.substream(r as u64);
            let n = rng.random_range(2..=500);
            let t = random_measured_tree(gen_uniform_tree(n, &mut rng)?, &mut rng)?;
            let schedule = make_schedule(&t, &mut rng)?;
            let ct = build_cut_tree(&t, &schedule, &Points::All)?;
            let posts = ct.extract_routings();
            let rebuilt = reconstruct_discrete(&ct, &posts)?;
            let edges_ok = rebuilt.edge_set() == t.tree().edge_set();
            let inv = invert_discrete(&ct, &posts, &ct.nu_measure(NuMode::Exact), 1.0)?;
            let mut worst: f64 = 0.0;
            let mut times_ok = inv.schedule.len() == schedule.len();
            for (a, b) in inv.schedule.cuts().iter().zip(schedule.cuts()) {
                times_ok &= a.edge == b.edge;
                worst = worst.max((a.time - b.time).abs() / b.time.max(1.0));
            }
            Ok((edges_ok && times_ok && worst <= 1e-9, worst))
        })
        .collect::<Result<_>>()?;
    let bad = outcomes.iter().filter(|o| !o.0).count();
    let worst = outcomes.iter().map(|o| o.1).fold(0.0, f64::max);
    Ok((
        bad == 0,
        format!(
            "{instances} instances, {bad} mismatches, worst relative cut-time error {worst:.2e}"
        ),
        Vec::new(),
    ))
}

fn criterion_tau(streams: &RngStream, instances: usize) -> Result<Outcome> {
    let outcomes: Vec<(usize, usize, f64)> = (0..instances)
        .into_par_iter()
        .map(|r| {
            let mut rng = streams.substream(r as u64);
            let n = rng.random_range(2..=2000);
            let t = random_measured_tree(gen_uniform_tree(n, &mut rng)?, &mut rng)?;
            let schedule = make_schedule(&t, &mut rng)?;
            let k = rng.random_range(2..=n.min(12));
            let points = sample_distinct(n, k, &mut rng)?;
            let ct = build_cut_tree(&t, &schedule, &Points::Sample(points.clone()))?;
            let nu = ct.nu_measure(NuMode::Exact);
            let trace = ct.trace().expect("built from a trace");
            let (mut pairs, mut bad, mut worst) = (0, 0, 0.0f64);
            for (a, &i) in points.iter().enumerate() {
                for &j in &points[a + 1..] {
                    let tau = tau_to_node(&ct, &nu, ct.meet(i, j)?)?;
                    let t_true = trace.separation_time(i, j);
                    let err = (tau - t_true).abs() / t_true.max(1.0);
                    worst = worst.max(err);
                    pairs += 1;
                    if !(err <= 1e-9) {
                        bad += 1;
                    }
                }
            }
            Ok((pairs, bad, worst))
        })
        .collect::<Result<_>>()?;
    let pairs: usize = outcomes.iter().map(|o| o.0).sum();
    let bad: usize = outcomes.iter().map(|o| o.1).sum();
    let worst = outcomes.iter().map(|o| o.2).fold(0.0, f64::max);
    Ok((
        bad == 0,
        format!("{instances} instances, {pairs} pairs, {bad} mismatches, worst relative error {worst:.2e}"),
        Vec::new(),
    ))
}

fn criterion_conservation(streams: &RngStream, instances: usize) -> Result<Outcome> {
    let worst: Vec<f64> = (0..instances)
        .into_par_iter()
        .map(|r| {
            let mut rng = streams.substream(r as u64);
            let n = rng.random_range(2..=2000);
            let t = random_measured_tree(gen_uniform_tree(n, &mut rng)?, &mut rng)?;
            let schedule = make_schedule(&t, &mut rng)?;
            let trace = run_fragmentation(&t, &schedule)?;
            let horizon = 1.2 * schedule.cuts().last().map_or(1.0, |c| c.time);
            let mut w: f64 = 0.0;
            for _ in 0..100 {
                let s = rng.random::<f64>() * horizon;
                w = w.max((trace.mass_profile(s).iter().sum::<f64>() - 1.0).abs());
            }
            Ok(w)
        })
        .collect::<Result<_>>()?;
    let w = worst.iter().copied().fold(0.0, f64::max);
    Ok((
        w <= 1e-12,
        format!("{instances} instances x 100 probe times, worst |sum - 1| = {w:.2e}"),
        Vec::new(),
    ))
}

/// Uniform tree on `n` vertices with edge length `1/sqrt(2n)` and masses
/// `1/n`, so the cutting rate of an edge is `2/sqrt(2n)`.
fn scaled_uniform_tree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<MeasuredTree> {
    MeasuredTree::with_uniform(gen_uniform_tree(n, rng)?, 1.0 / (2.0 * n as f64).sqrt())
}

fn criterion_rayleigh(streams: &RngStream, n: usize, reps: usize) -> Result<Outcome> {
    let pairs: Vec<(f64, f64)> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = streams.substream(r as u64);
            let t = scaled_uniform_tree(n, &mut rng)?;
            let u = sample_vertices(&t, 2, &mut rng)?;
            let hops = t.tree().hop_distance(u[0], u[1])? as f64;
            let schedule = make_schedule(&t, &mut rng)?;
            let trace = run_fragmentation(&t, &schedule)?;
            Ok((
                hops / (n as f64).sqrt(),
                std::f64::consts::SQRT_2 * trace.cut_metric(u[0], u[1]),
            ))
        })
        .collect::<Result<_>>()?;
    let (graph, cut): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let a = ks_one_sample(&graph, ReferenceCdf::Rayleigh, test_alpha())?
        .with_notes("(a) d_graph/sqrt(n) vs Rayleigh");
    let b =
        ks_two_sample(&cut, &graph, test_alpha())?.with_notes("(b) sqrt(2) D(U1,U2) vs (a) sample");
    let pass_a = a.stat <= 0.05;
    let pass_b = b.passed();
    let summary = format!(
        "(a) KS {:.4} (bound 0.05) {}; (b) KS {:.4} p {:.2e} (level {:.4}) {}",
        a.stat,
        verdict(pass_a),
        b.stat,
        b.p,
        test_alpha(),
        verdict(pass_b)
    );
    Ok((pass_a && pass_b, summary, vec![a, b]))
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

fn sbml_targets(beta: f64) -> Result<Vec<MomentTarget>> {
    (1..=3)
        .map(|p| {
            Ok(MomentTarget::new(
                p as f64,
                sbml_moment(beta, p as f64)?,
                "size-biased ML moment",
            ))
        })
        .collect()
}

fn criterion_rde(streams: &RngStream, pool_size: usize) -> Result<Outcome> {
    let mut rng = streams.substream(0);
    let targets = sbml_targets(0.5)?;
    // Resampling makes the pool mean a martingale with one i.i.d. sampling
    // error per generation, so standard errors grow like sqrt(1 + steps).
    let fixed = iterate_pool(
        SamplePool::sqrt2_rayleigh(pool_size, &mut rng)?,
        10,
        &mut rng,
    )?;
    let a = moment_summary_scaled(
        &fixed.samples,
        &targets,
        (1.0 + fixed.generation as f64).sqrt(),
    )?
    .with_notes(format!(
        "sqrt(2) Rayleigh pool after {} steps",
        fixed.generation
    ));
    let start = SamplePool::exponential(0.5, pool_size, sbml_moment(0.5, 1.0)?, &mut rng)?;
    let conv = iterate_pool(start, 30, &mut rng)?;
    let b = moment_summary_scaled(
        &conv.samples,
        &targets,
        (1.0 + conv.generation as f64).sqrt(),
    )?
    .with_notes(format!("exponential pool after {} steps", conv.generation));
    let zs = |r: &TestReport| {
        r.moments
            .iter()
            .map(|m| format!("{:+.2}", m.z))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let summary = format!("invariance z [{}]; convergence z [{}]", zs(&a), zs(&b));
    Ok((a.passed() && b.passed(), summary, vec![a, b]))
}

fn criterion_martingale(streams: &RngStream, depth: usize, reps: usize) -> Result<Outcome> {
    let mut reports = Vec::new();
    let mut parts = Vec::new();
    let mut pass = true;
    for (b, beta) in [1.0 / 3.0, 0.5].into_iter().enumerate() {
        let sums: Vec<_> = (0..reps)
            .into_par_iter()
            .map(|r| {
                sample_level_sums(
                    beta,
                    depth,
                    LEVEL_SUM_EPSILON,
                    &mut streams.substream((b * reps + r) as u64),
                )
            })
            .collect::<Result<_>>()?;
        let (mut zy, mut zd): (f64, f64) = (0.0, 0.0);
        for n in 0..=depth {
            let y: Vec<f64> = sums.iter().map(|s| s.y[n]).collect();
            let d: Vec<f64> = sums.iter().map(|s| s.dust[n]).collect();
            let ry = moment_summary(&y, &[MomentTarget::new(1.0, 1.0, format!("E[Y_{n}] = 1"))])?;
            let rd = moment_summary(
                &d,
                &[MomentTarget::new(
                    1.0,
                    expected_dust(beta, n),
                    format!("dust level {n}"),
                )],
            )?;
            zy = zy.max(ry.stat);
            zd = zd.max(rd.stat);
            pass &= ry.passed() && rd.passed();
            reports.push(ry.with_notes(format!("beta {beta:.4} level {n} martingale")));
            reports.push(rd.with_notes(format!("beta {beta:.4} level {n} dust")));
        }
        parts.push(format!("beta {beta:.3}: max|z| Y {zy:.2}, dust {zd:.2}"));
    }
    Ok((pass, parts.join("; "), reports))
}

/// Median relative errors are compared at these depths, then at exhaustion.
pub const CALIBRATION_DEPTHS: [usize; 3] = [4, 8, 12];

fn criterion_distance(streams: &RngStream, n: usize, reps: usize) -> Result<Outcome> {
    let rows: Vec<(f64, Vec<f64>, f64)> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = streams.substream(r as u64);
            let t = scaled_uniform_tree(n, &mut rng)?;
            let schedule = make_schedule(&t, &mut rng)?;
            let uv = sample_distinct(n, 2, &mut rng)?;
            let (i, j) = (uv[0], uv[1]);
            let d = t.graph_distance(i, j)?;
            let ct = build_cut_tree(&t, &schedule, &Points::All)?;
            let posts = ct.extract_routings();
            let nu = ct.nu_measure(NuMode::Exact);
            let mut deltas = Vec::new();
            for depth in CALIBRATION_DEPTHS.into_iter().chain([4 * n]) {
                deltas.push(delta_c(&ct, &posts, &nu, i, j, depth, 2.0)?.full);
            }
            let default = delta_c(&ct, &posts, &nu, i, j, default_depth(n), 2.0)?.full;
            Ok((d, deltas, default))
        })
        .collect::<Result<_>>()?;
    let truth: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let medians: Vec<f64> = (0..=CALIBRATION_DEPTHS.len())
        .map(|k| {
            median(
                &rows
                    .iter()
                    .map(|r| (r.1[k] - r.0).abs() / r.0)
                    .collect::<Vec<_>>(),
            )
        })
        .collect();
    let decreasing = medians.windows(2).all(|w| w[1] < w[0]);
    let estimates: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let ks = ks_two_sample(&estimates, &truth, test_alpha())?.with_notes(format!(
        "delta_C at depth {} vs d/sqrt(2n)",
        default_depth(n)
    ));
    let summary = format!(
        "median rel. error at depths 4/8/12/exhaustion = {} ({}); KS {:.4} p {:.2e} {}",
        medians
            .iter()
            .map(|m| format!("{m:.3}"))
            .collect::<Vec<_>>()
            .join("/"),
        if decreasing {
            "decreasing"
        } else {
            "not decreasing"
        },
        ks.stat,
        ks.p,
        verdict(ks.passed())
    );
    Ok((decreasing && ks.passed(), summary, vec![ks]))
}

/// Sizes of the components of `t` minus `b`, seen from each of `points`
/// (0 for a point equal to `b`). `sizes[v]` is the subtree size of `v`.
fn component_sizes_from(
    t: &DiscreteTree,
    sizes: &[usize],
    b: Vertex,
    points: &[Vertex],
) -> Vec<usize> {
    points
        .iter()
        .map(|&x| {
            if x == b {
                return 0;
            }
            // Walk up from x; if b is met, the component is the subtree of
            // the child of b on the way.
            let mut v = x;
            while let Some(p) = t.parent(v) {
                if p == b {
                    return sizes[v];
                }
                v = p;
            }
            t.n() - sizes[b]
        })
        .collect()
}

fn subtree_sizes(t: &DiscreteTree) -> Vec<usize> {
    let mut sizes = vec![1usize; t.n() + 1];
    sizes[0] = 0;
    for &v in t.bfs_order().iter().rev() {
        if let Some(p) = t.parent(v) {
            sizes[p] += sizes[v];
        }
    }
    sizes
}

/// The branch point of three vertices: the deepest of their pairwise MRCAs.
pub fn branch_point(t: &DiscreteTree, a: Vertex, b: Vertex, c: Vertex) -> Result<Vertex> {
    let cands = [t.mrca(a, b)?, t.mrca(a, c)?, t.mrca(b, c)?];
    Ok(cands
        .into_iter()
        .max_by_key(|&v| t.depth(v))
        .expect("three candidates"))
}

fn criterion_dirichlet(streams: &RngStream, n: usize, reps: usize) -> Result<Outcome> {
    let triples: Vec<[f64; 3]> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = streams.substream(r as u64);
            let t = gen_cgw_tree(n, Offspring::Poisson1, &mut rng)?;
            let u: Vec<Vertex> = (0..3).map(|_| rng.random_range(1..=n)).collect();
            let b = branch_point(&t, u[0], u[1], u[2])?;
            let sizes = subtree_sizes(&t);
            let c = component_sizes_from(&t, &sizes, b, &u);
            Ok([0, 1, 2].map(|k| c[k] as f64 / n as f64))
        })
        .collect::<Result<_>>()?;
    let mut reports = Vec::new();
    let mut pass = true;
    let mut stats = Vec::new();
    for k in 0..3 {
        let roots: Vec<f64> = triples.iter().map(|x| x[k].sqrt()).collect();
        let r = ks_one_sample_fn(&roots, |x| x.clamp(0.0, 1.0), "uniform01", test_alpha())?
            .with_notes(format!("sqrt of mass fraction {} vs U[0,1]", k + 1));
        pass &= r.stat <= 0.05;
        stats.push(format!("{:.4}", r.stat));
        reports.push(r);
    }
    Ok((
        pass,
        format!("KS statistics {} (bound 0.05)", stats.join("/")),
        reports,
    ))
}

/// Leaf cap for the unconditioned genealogies of the re-rooting test.
pub const REROOT_MAX_LEAVES: usize = 10_000;

fn criterion_aggregation(
    streams: &RngStream,
    size_draws: usize,
    reroot_reps: usize,
) -> Result<Outcome> {
    let hist = size_histogram(size_draws, 8, streams.substream(0).random())?;
    let size = size_law_test(&hist, test_alpha())?.with_notes("leaf counts 1..=8 and tail");
    let reroot = reroot_invariance_stat(
        GenealogySampler::Unconditioned {
            max_leaves: REROOT_MAX_LEAVES,
        },
        RerootStatistic::Degree,
        reroot_reps,
        streams.substream(1).random(),
    )?;
    let degree = reroot
        .test(test_alpha())?
        .with_notes("root degree vs uniform-vertex degree");
    let summary = format!(
        "size chi2 {:.2} p {:.3} {}; re-rooting chi2 {:.2} p {:.3} {}",
        size.stat,
        size.p,
        verdict(size.passed()),
        degree.stat,
        degree.p,
        verdict(degree.passed())
    );
    Ok((
        size.passed() && degree.passed(),
        summary,
        vec![size, degree],
    ))
}

fn criterion_routing(streams: &RngStream, instances: usize) -> Result<Outcome> {
    let outcomes: Vec<[bool; 3]> = (0..instances)
        .into_par_iter()
        .map(|r| {
            let mut rng = streams.substream(r as u64);
            let n = rng.random_range(2..=40);
            let t = random_measured_tree(gen_uniform_tree(n, &mut rng)?, &mut rng)?;
            let schedule = make_schedule(&t, &mut rng)?;
            let ct = build_cut_tree(&t, &schedule, &Points::All)?;
            let posts = ct.extract_routings();
            let consistent = check_consistency(&posts, &ct, 3)?.is_consistent();
            let internal: Vec<usize> = ct.internal_nodes().collect();
            let v = internal[rng.random_range(0..internal.len())];
            let [a, b] = posts.get(v).expect("internal nodes carry signposts");
            let mut swapped = posts.clone();
            swapped.posts[v] = Some([b, a]);
            let swap_caught = !check_consistency(&swapped, &ct, 3)?.is_consistent();
            // Replace the first signpost by a vertex outside its side.
            let mut broken = posts.clone();
            let outside = (1..=n)
                .find(|&x| !ct.side_contains(v, 0, x))
                .expect("side 1 is nonempty");
            broken.posts[v] = Some([outside, b]);
            let break_caught = !check_consistency(&broken, &ct, 3)?.is_consistent();
            Ok([consistent, swap_caught, break_caught])
        })
        .collect::<Result<_>>()?;
    let count = |k: usize| outcomes.iter().filter(|o| o[k]).count();
    let (ok, swaps, breaks) = (count(0), count(1), count(2));
    Ok((
        ok == instances && swaps == instances && breaks == instances,
        format!("{ok}/{instances} consistent; swaps caught {swaps}/{instances}; containment breaks caught {breaks}/{instances}"),
        Vec::new(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn branch_point_of_a_star_is_the_centre() {
        let t = DiscreteTree::from_parents(1, vec![0, 1, 1, 1]).unwrap();
        assert_eq!(branch_point(&t, 2, 3, 4).unwrap(), 1);
        assert_eq!(branch_point(&t, 2, 2, 4).unwrap(), 2);
        let sizes = subtree_sizes(&t);
        assert_eq!(
            component_sizes_from(&t, &sizes, 1, &[2, 3, 1]),
            vec![1, 1, 0]
        );
    }

    #[test]
    fn branch_point_off_root() {
        // Path 1-2-3-4 with 5 hanging off 3.
        let t = DiscreteTree::from_parents(1, vec![0, 1, 2, 3, 3]).unwrap();
        assert_eq!(branch_point(&t, 1, 4, 5).unwrap(), 3);
        let sizes = subtree_sizes(&t);
        assert_eq!(
            component_sizes_from(&t, &sizes, 3, &[1, 4, 5]),
            vec![2, 1, 1]
        );
    }

    #[test]
    fn quick_property_criteria_pass() {
        let s = run_suite(
            AcceptConfig {
                seed: 1,
                quick: true,
            },
            &[1, 3, 10],
            |_| {},
        )
        .unwrap();
        assert_eq!(s.results.len(), 3);
        assert!(s.all_passed(), "{}", s.table());
    }
}
