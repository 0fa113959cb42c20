use cutforge::aggregate::{aggregate_reconstruct, attach_signposts, sample_genealogy_k};
use cutforge::cuttree::{build_cut_tree, check_consistency, NodeKind, NuMode, Points};
use cutforge::fragment::{make_schedule, run_fragmentation, FragmentationTrace};
use cutforge::generate::{gen_uniform_tree, RngStream};
use cutforge::invert::{path_recovery, reconstruct_discrete, tau_to_node};
use cutforge::rde::{grow_mass_tree, sample_dirichlet, smoothing_step, SamplePool};
use cutforge::trees::{decode_prufer, encode_prufer, MeasuredTree};
use proptest::prelude::*;
use rand::Rng;

const TOL: f64 = 1e-9;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL * (1.0 + a.abs().max(b.abs()))
}

/// A uniform tree with exponential edge lengths and positive random masses.
fn measured(n: usize, seed: u64) -> MeasuredTree {
    let mut rng = RngStream::new(seed, 0);
    let tree = gen_uniform_tree(n, &mut rng).unwrap();
    let len: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().ln() + 1e-3).collect();
    let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.05).collect();
    let total: f64 = raw.iter().sum();
    MeasuredTree::new(tree, len, raw.iter().map(|m| m / total).collect()).unwrap()
}

fn trace(n: usize, seed: u64) -> (MeasuredTree, FragmentationTrace) {
    let t = measured(n, seed);
    let schedule = make_schedule(&t, &mut RngStream::new(seed, 1)).unwrap();
    let tr = run_fragmentation(&t, &schedule).unwrap();
    (t, tr)
}

fn prufer_seq() -> impl Strategy<Value = Vec<usize>> {
    (2usize..60).prop_flat_map(|n| proptest::collection::vec(1..=n, n - 2))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn prufer_round_trip(seq in prufer_seq()) {
        let tree = decode_prufer(&seq).unwrap();
        prop_assert_eq!(tree.n(), seq.len() + 2);
        prop_assert_eq!(encode_prufer(&tree), seq);
    }

    #[test]
    fn rerooting_keeps_edges(n in 1usize..50, seed: u64, r in 0usize..50) {
        let t = gen_uniform_tree(n, &mut RngStream::new(seed, 0)).unwrap();
        let root = 1 + r % n;
        let re = t.rerooted(root).unwrap();
        prop_assert_eq!(re.root(), root);
        prop_assert_eq!(re.edge_set(), t.edge_set());
    }

    #[test]
    fn mass_is_conserved(n in 2usize..40, seed: u64, s in 0.0f64..5.0) {
        let (t, tr) = trace(n, seed);
        let total: f64 = t.masses().iter().sum();
        let profile = tr.mass_profile(s);
        prop_assert!(close(profile.iter().sum::<f64>(), total));
        prop_assert!(profile.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    /// Truncated `ℓ` makes `D` a pseudometric: zero is allowed off the diagonal.
    fn cut_metric_is_a_metric(n in 2usize..30, seed: u64) {
        let (_, tr) = trace(n, seed);
        for x in 1..=n {
            prop_assert_eq!(tr.cut_metric(x, x), 0.0);
            for y in 1..=n {
                let d = tr.cut_metric(x, y);
                prop_assert!(close(d, tr.cut_metric(y, x)));
                prop_assert!(close(d, tr.cut_metric_alt(x, y)));
                for z in 1..=n {
                    prop_assert!(d <= tr.cut_metric(x, z) + tr.cut_metric(z, y) + TOL);
                }
            }
        }
    }

    #[test]
    fn cut_tree_realises_the_cut_metric(n in 2usize..40, seed: u64) {
        let t = measured(n, seed);
        let schedule = make_schedule(&t, &mut RngStream::new(seed, 1)).unwrap();
        let ct = build_cut_tree(&t, &schedule, &Points::All).unwrap();
        let tr = ct.trace().unwrap();
        for x in 1..=n {
            for y in x + 1..=n {
                prop_assert!(close(ct.leaf_distance(x, y).unwrap(), tr.cut_metric(x, y)));
            }
        }
    }

    #[test]
    fn arrival_times_recover_cut_times(n in 2usize..40, seed: u64) {
        let t = measured(n, seed);
        let schedule = make_schedule(&t, &mut RngStream::new(seed, 1)).unwrap();
        let ct = build_cut_tree(&t, &schedule, &Points::All).unwrap();
        for id in ct.internal_nodes() {
            let node = ct.node(id);
            prop_assert_eq!(node.kind, NodeKind::Internal);
            let cut = node.cut.unwrap();
            prop_assert!(close(ct.arrival_time(id), cut.time));
        }
    }

    #[test]
    fn tau_matches_separation_time(n in 2usize..40, seed: u64) {
        let t = measured(n, seed);
        let schedule = make_schedule(&t, &mut RngStream::new(seed, 1)).unwrap();
        let ct = build_cut_tree(&t, &schedule, &Points::All).unwrap();
        let nu = ct.nu_measure(NuMode::Exact);
        prop_assert!(close(nu.total(), 1.0));
        let tr = ct.trace().unwrap();
        for x in 1..=n {
            for y in x + 1..=n {
                let tau = tau_to_node(&ct, &nu, ct.meet(x, y).unwrap()).unwrap();
                prop_assert!(close(tau, tr.separation_time(x, y)));
            }
        }
    }

    #[test]
    fn signposts_rebuild_the_tree(n in 2usize..60, seed: u64) {
        let t = measured(n, seed);
        let schedule = make_schedule(&t, &mut RngStream::new(seed, 1)).unwrap();
        let ct = build_cut_tree(&t, &schedule, &Points::All).unwrap();
        let posts = ct.extract_routings();
        prop_assert_eq!(posts.containment_violation(&ct), None);
        let rebuilt = reconstruct_discrete(&ct, &posts).unwrap();
        prop_assert_eq!(rebuilt.edge_set(), t.tree().edge_set());
        prop_assert!(check_consistency(&posts, &ct, 3).unwrap().is_consistent());
        for x in 1..=n {
            for y in 1..=n {
                let path = path_recovery(&ct, &posts, x, y).unwrap();
                prop_assert_eq!(path, t.tree().path(x, y).unwrap());
            }
        }
    }

    #[test]
    fn dirichlet_lies_on_the_simplex(beta in 0.05f64..0.95, seed: u64) {
        let d = sample_dirichlet(beta, &mut RngStream::new(seed, 0)).unwrap();
        prop_assert!(d.iter().all(|&x| (0.0..=1.0).contains(&x)));
        prop_assert!(close(d.iter().sum::<f64>(), 1.0));
    }

    #[test]
    fn mass_splits_never_gain_mass(beta in 0.05f64..0.95, depth in 0usize..8, seed: u64) {
        let t = grow_mass_tree(beta, depth, &mut RngStream::new(seed, 0)).unwrap();
        let dust = t.dust_sequence();
        prop_assert!(close(dust[0], 1.0));
        prop_assert!(dust.windows(2).all(|w| w[1] <= w[0] + TOL));
        prop_assert_eq!(t.y_sequence().len(), depth + 1);
    }

    #[test]
    fn smoothing_keeps_samples_positive(beta in 0.1f64..0.9, seed: u64) {
        let mut rng = RngStream::new(seed, 0);
        let pool = SamplePool::exponential(beta, 64, 1.0, &mut rng).unwrap();
        let next = smoothing_step(&pool, &mut rng).unwrap();
        prop_assert_eq!(next.len(), 64);
        prop_assert_eq!(next.generation, pool.generation + 1);
        prop_assert!(next.samples.iter().all(|&x| x.is_finite() && x > 0.0));
    }

    #[test]
    fn genealogies_aggregate_to_trees(k in 1usize..40, seed: u64) {
        let mut rng = RngStream::new(seed, 0);
        let g = attach_signposts(sample_genealogy_k(k, &mut rng).unwrap(), &mut rng);
        prop_assert_eq!(g.leaf_count(), k);
        prop_assert_eq!(g.internal_count(), k - 1);
        prop_assert_eq!(g.signpost_violation(), None);
        let t = aggregate_reconstruct(&g).unwrap();
        prop_assert_eq!(t.n(), k);
        prop_assert_eq!(Some(t.root()), g.root_leaf().or(Some(1)));
    }
}
