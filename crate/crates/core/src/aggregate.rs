//! Trees grown by aggregation, read off their genealogy.
//!
//! The genealogy `G` is a critical binary Galton–Watson tree: every node is
//! a leaf or has two children with probability 1/2 each, so a plane tree
//! with `k` leaves has probability `2^{1-2k}`. Leaves of `G` are the
//! vertices of the aggregated tree `T` and internal nodes are its edges;
//! each internal node carries a signpost `(a, b)` with `a` uniform among
//! the leaves of its left subtree and `b` uniform among those of its right
//! subtree, and `T` is the tree whose edges are the signposts. The root of
//! `T` is a uniformly chosen leaf.
//!
//! Leaves are labelled `1..=k` left to right, so every node's leaf set is a
//! contiguous label range.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::generate::{cycle_lemma_rotate, RngStream};
use crate::invert::tree_from_signpost_pairs;
use crate::stats::{chi_square_gof, chi_square_two_sample, TestReport};
use crate::trees::{DiscreteTree, Edge, Vertex};

/// A genealogy node. Nodes are stored in preorder; node 0 is the root.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GNode {
    pub parent: Option<usize>,
    /// `[left, right]` for internal nodes.
    pub children: Option<[usize; 2]>,
    /// Leaf labels below this node are `first_leaf..=last_leaf`.
    pub first_leaf: Vertex,
    pub last_leaf: Vertex,
}

impl GNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }

    pub fn leaf_count(&self) -> usize {
        self.last_leaf - self.first_leaf + 1
    }

    pub fn contains_leaf(&self, x: Vertex) -> bool {
        (self.first_leaf..=self.last_leaf).contains(&x)
    }
}

/// A full binary plane tree with optional signposts and root leaf.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenealogyTree {
    nodes: Vec<GNode>,
    /// `signposts[id]` for internal nodes once attached.
    signposts: Vec<Option<[Vertex; 2]>>,
    root_leaf: Option<Vertex>,
}

impl GenealogyTree {
    /// Builds the tree from its preorder node types (`true` = internal).
    pub fn from_preorder(internal: &[bool]) -> Result<Self> {
        let n = internal.len();
        let internals = internal.iter().filter(|&&b| b).count();
        if n == 0 || n != 2 * internals + 1 {
            return input("preorder must describe a full binary tree");
        }
        let mut nodes: Vec<GNode> = Vec::with_capacity(n);
        // Open internal nodes with the number of children still to attach.
        let mut open: Vec<(usize, usize)> = Vec::new();
        let mut next_leaf = 1;
        for (id, &is_internal) in internal.iter().enumerate() {
            let parent = if id == 0 {
                None
            } else {
                let Some(top) = open.last_mut() else {
                    return input("preorder ends early");
                };
                let p = top.0;
                top.1 -= 1;
                if top.1 == 0 {
                    open.pop();
                }
                Some(p)
            };
            nodes.push(GNode {
                parent,
                children: None,
                first_leaf: 0,
                last_leaf: 0,
            });
            if let Some(p) = parent {
                match &mut nodes[p].children {
                    None => nodes[p].children = Some([id, usize::MAX]),
                    Some(c) => c[1] = id,
                }
            }
            if is_internal {
                open.push((id, 2));
            } else {
                nodes[id].first_leaf = next_leaf;
                nodes[id].last_leaf = next_leaf;
                next_leaf += 1;
            }
        }
        if !open.is_empty() {
            return input("preorder leaves internal nodes unfinished");
        }
        // Children follow parents in preorder, so a reverse sweep fills ranges.
        for id in (0..n).rev() {
            if let Some([l, r]) = nodes[id].children {
                nodes[id].first_leaf = nodes[l].first_leaf;
                nodes[id].last_leaf = nodes[r].last_leaf;
            }
        }
        Ok(GenealogyTree {
            signposts: vec![None; n],
            nodes,
            root_leaf: None,
        })
    }

    pub fn nodes(&self) -> &[GNode] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &GNode {
        &self.nodes[id]
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes[0].leaf_count()
    }

    pub fn internal_count(&self) -> usize {
        self.nodes.len() - self.leaf_count()
    }

    /// Preorder node types (`true` = internal).
    pub fn preorder(&self) -> Vec<bool> {
        self.nodes.iter().map(|g| !g.is_leaf()).collect()
    }

    pub fn signpost(&self, id: usize) -> Option<[Vertex; 2]> {
        self.signposts[id]
    }

    pub fn root_leaf(&self) -> Option<Vertex> {
        self.root_leaf
    }

    /// Sets the signpost of internal node `id`.
    pub fn set_signpost(&mut self, id: usize, post: [Vertex; 2]) -> Result<()> {
        if self.nodes.get(id).is_none_or(|g| g.is_leaf()) {
            return input(format!("node {id} is not internal"));
        }
        self.signposts[id] = Some(post);
        Ok(())
    }

    pub fn set_root_leaf(&mut self, x: Vertex) -> Result<()> {
        if x == 0 || x > self.leaf_count() {
            return input(format!("leaf {x} out of range"));
        }
        self.root_leaf = Some(x);
        Ok(())
    }

    /// The first internal node whose signpost is missing or leaves its
    /// subtrees.
    pub fn signpost_violation(&self) -> Option<usize> {
        self.nodes.iter().enumerate().find_map(|(id, g)| {
            let [l, r] = g.children?;
            match self.signposts[id] {
                Some([a, b])
                    if self.nodes[l].contains_leaf(a) && self.nodes[r].contains_leaf(b) =>
                {
                    None
                }
                _ => Some(id),
            }
        })
    }
}

/// `P(k leaves) = (2/k) C(2k-2, k-1) 4^{-k}` for the critical binary
/// Galton–Watson tree.
pub fn size_pmf(k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let mut p = 0.5;
    for j in 1..k {
        p *= (2 * j - 1) as f64 / (2 * (j + 1)) as f64;
    }
    p
}

/// The number of full binary plane trees with `k` leaves, `C(2k-2, k-1)/k`.
pub fn shape_count(k: usize) -> u128 {
    if k == 0 {
        return 0;
    }
    let mut c: u128 = 1;
    for j in 1..k as u128 {
        c = c * 2 * (2 * j - 1) / (j + 1);
    }
    c
}

/// All full binary plane trees with `k` leaves, as preorder node types.
pub fn enumerate_shapes(k: usize) -> Vec<Vec<bool>> {
    match k {
        0 => Vec::new(),
        1 => vec![vec![false]],
        _ => {
            let mut out = Vec::new();
            for left in 1..k {
                for l in enumerate_shapes(left) {
                    for r in enumerate_shapes(k - left) {
                        let mut s = Vec::with_capacity(2 * k - 1);
                        s.push(true);
                        s.extend_from_slice(&l);
                        s.extend_from_slice(&r);
                        out.push(s);
                    }
                }
            }
            out
        }
    }
}

/// The leaf count of a critical binary Galton–Watson tree, or `None` once
/// it exceeds `max_leaves`.
pub fn sample_leaf_count<R: Rng + ?Sized>(max_leaves: usize, rng: &mut R) -> Option<usize> {
    let mut pending = 1usize;
    let mut leaves = 0usize;
    while pending > 0 {
        if rng.random::<bool>() {
            pending += 1;
        } else {
            pending -= 1;
            leaves += 1;
            if leaves > max_leaves {
                return None;
            }
        }
    }
    Some(leaves)
}

/// A critical binary Galton–Watson genealogy, or `None` if it has more
/// than `max_leaves` leaves. The cap only truncates the law; draws that
/// return `Some` have the conditional law given at most `max_leaves` leaves.
pub fn sample_genealogy<R: Rng + ?Sized>(max_leaves: usize, rng: &mut R) -> Option<GenealogyTree> {
    let mut pending = 1usize;
    let mut leaves = 0usize;
    let mut pre = Vec::new();
    while pending > 0 {
        let internal = rng.random::<bool>();
        pre.push(internal);
        if internal {
            pending += 1;
        } else {
            pending -= 1;
            leaves += 1;
            if leaves > max_leaves {
                return None;
            }
        }
    }
    Some(GenealogyTree::from_preorder(&pre).expect("a finished excursion is a full binary tree"))
}

/// A uniform full binary plane tree with `k` leaves, which is the
/// genealogy conditioned on `k` leaves. Places `k - 1` internal nodes
/// uniformly among `2k - 1` preorder slots and rotates by the cycle lemma.
pub fn sample_genealogy_k<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<GenealogyTree> {
    if k == 0 {
        return input("k must be at least 1");
    }
    let n = 2 * k - 1;
    let mut xi = vec![0usize; n];
    for s in rand::seq::index::sample(rng, n, k - 1) {
        xi[s] = 2;
    }
    let pre: Vec<bool> = cycle_lemma_rotate(&xi)
        .into_iter()
        .map(|x| x == 2)
        .collect();
    GenealogyTree::from_preorder(&pre)
}

/// Reference sampler for [`sample_genealogy_k`]: unconditioned draws
/// rejected until the leaf count is `k`. Accepts with probability of order
/// `k^{-3/2}`.
pub fn sample_genealogy_k_rejection<R: Rng + ?Sized>(
    k: usize,
    rng: &mut R,
) -> Result<GenealogyTree> {
    if k == 0 {
        return input("k must be at least 1");
    }
    loop {
        if let Some(g) = sample_genealogy(k, rng) {
            if g.leaf_count() == k {
                return Ok(g);
            }
        }
    }
}

/// Draws every signpost uniformly from the two subtrees of its node and a
/// uniform root leaf.
pub fn attach_signposts<R: Rng + ?Sized>(mut g: GenealogyTree, rng: &mut R) -> GenealogyTree {
    for id in 0..g.nodes.len() {
        if let Some([l, r]) = g.nodes[id].children {
            let a = rng.random_range(g.nodes[l].first_leaf..=g.nodes[l].last_leaf);
            let b = rng.random_range(g.nodes[r].first_leaf..=g.nodes[r].last_leaf);
            g.signposts[id] = Some([a, b]);
        }
    }
    g.root_leaf = Some(rng.random_range(1..=g.leaf_count()));
    g
}

/// The tree on the leaves whose edges are the signposts, rooted at the
/// root leaf (leaf 1 if none was drawn).
pub fn aggregate_reconstruct(g: &GenealogyTree) -> Result<DiscreteTree> {
    if let Some(id) = g.signpost_violation() {
        return Err(Error::Reconstruction {
            node: id,
            reason: "signpost missing or outside its subtree".into(),
        });
    }
    let pairs: Vec<(usize, Edge)> = g
        .signposts
        .iter()
        .enumerate()
        .filter_map(|(id, p)| p.map(|[a, b]| (id, Edge::new(a, b))))
        .collect();
    let k = g.leaf_count();
    if k == 1 {
        return Ok(DiscreteTree::singleton());
    }
    let t = tree_from_signpost_pairs(k, &pairs)?;
    match g.root_leaf {
        Some(r) if r != 1 => t.rerooted(r),
        _ => Ok(t),
    }
}

/// How genealogies are drawn for aggregation experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenealogySampler {
    /// The unconditioned law restricted to at most `max_leaves` leaves
    /// (larger draws are discarded and redrawn).
    Unconditioned { max_leaves: usize },
    /// Conditioned on exactly `k` leaves.
    Leaves { k: usize },
}

impl GenealogySampler {
    pub fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> Result<GenealogyTree> {
        match self {
            GenealogySampler::Unconditioned { max_leaves } => {
                if max_leaves == 0 {
                    return input("max_leaves must be at least 1");
                }
                loop {
                    if let Some(g) = sample_genealogy(max_leaves, rng) {
                        return Ok(g);
                    }
                }
            }
            GenealogySampler::Leaves { k } => sample_genealogy_k(k, rng),
        }
    }

    /// A reconstructed aggregated tree.
    pub fn draw_tree<R: Rng + ?Sized>(self, rng: &mut R) -> Result<DiscreteTree> {
        let g = attach_signposts(self.draw(rng)?, rng);
        aggregate_reconstruct(&g)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RerootStatistic {
    /// Degree of the vertex.
    Degree,
    /// Hop distance from the vertex to an independent uniform vertex.
    Distance,
}

/// The statistic at the root and at an independent uniform vertex, one
/// pair per replicate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RerootSamples {
    pub statistic: RerootStatistic,
    pub at_root: Vec<usize>,
    pub at_uniform: Vec<usize>,
}

impl RerootSamples {
    /// Chi-square two-sample test of the two empirical laws.
    pub fn test(&self, alpha: f64) -> Result<TestReport> {
        let top = self
            .at_root
            .iter()
            .chain(&self.at_uniform)
            .copied()
            .max()
            .unwrap_or(0);
        let mut a = vec![0u64; top + 1];
        let mut b = vec![0u64; top + 1];
        for &x in &self.at_root {
            a[x] += 1;
        }
        for &x in &self.at_uniform {
            b[x] += 1;
        }
        chi_square_two_sample(&a, &b, alpha)
    }
}

fn statistic_at<R: Rng + ?Sized>(
    t: &DiscreteTree,
    v: Vertex,
    stat: RerootStatistic,
    rng: &mut R,
) -> Result<usize> {
    Ok(match stat {
        RerootStatistic::Degree => t.degree(v),
        RerootStatistic::Distance => t.hop_distance(v, rng.random_range(1..=t.n()))?,
    })
}

/// Compares the statistic at the root of aggregated trees with the same
/// statistic at a uniform vertex. Replicate `r` uses stream `(seed, r)`.
pub fn reroot_invariance_stat(
    sampler: GenealogySampler,
    stat: RerootStatistic,
    reps: usize,
    seed: u64,
) -> Result<RerootSamples> {
    if reps == 0 {
        return input("reps must be at least 1");
    }
    let pairs: Vec<(usize, usize)> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = RngStream::new(seed, r as u64);
            let t = sampler.draw_tree(&mut rng)?;
            let v = rng.random_range(1..=t.n());
            Ok((
                statistic_at(&t, t.root(), stat, &mut rng)?,
                statistic_at(&t, v, stat, &mut rng)?,
            ))
        })
        .collect::<Result<_>>()?;
    let (at_root, at_uniform) = pairs.into_iter().unzip();
    Ok(RerootSamples {
        statistic: stat,
        at_root,
        at_uniform,
    })
}

/// Draws per chunk in [`size_histogram`].
const SIZE_CHUNK: usize = 10_000;

/// Leaf-count histogram of `draws` genealogies: entry `k - 1` counts size
/// `k` for `k <= max_k`, the last entry counts larger sizes. Chunk `c` of
/// the draws uses stream `(seed, c)`.
pub fn size_histogram(draws: usize, max_k: usize, seed: u64) -> Result<Vec<u64>> {
    if draws == 0 || max_k == 0 {
        return input("draws and max_k must be positive");
    }
    let chunks = draws.div_ceil(SIZE_CHUNK);
    let parts: Vec<Vec<u64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = RngStream::new(seed, c as u64);
            let mut h = vec![0u64; max_k + 1];
            let todo = SIZE_CHUNK.min(draws - c * SIZE_CHUNK);
            for _ in 0..todo {
                match sample_leaf_count(max_k, &mut rng) {
                    Some(k) => h[k - 1] += 1,
                    None => h[max_k] += 1,
                }
            }
            h
        })
        .collect();
    let mut total = vec![0u64; max_k + 1];
    for h in parts {
        for (t, x) in total.iter_mut().zip(h) {
            *t += x;
        }
    }
    Ok(total)
}

/// Chi-square test of a [`size_histogram`] against [`size_pmf`].
pub fn size_law_test(histogram: &[u64], alpha: f64) -> Result<TestReport> {
    if histogram.len() < 2 {
        return input("histogram needs at least one size bin and the tail bin");
    }
    let max_k = histogram.len() - 1;
    let mut probs: Vec<f64> = (1..=max_k).map(size_pmf).collect();
    let head: f64 = probs.iter().sum();
    probs.push(1.0 - head);
    chi_square_gof(histogram, &probs, alpha)
}

/// Hop distances between two independent uniform vertices of aggregated
/// trees with `k` vertices, divided by `sqrt(k)`.
pub fn scaled_distances(k: usize, reps: usize, seed: u64) -> Result<Vec<f64>> {
    let sampler = GenealogySampler::Leaves { k };
    (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = RngStream::new(seed, r as u64);
            let t = sampler.draw_tree(&mut rng)?;
            let u = rng.random_range(1..=k);
            let v = rng.random_range(1..=k);
            Ok(t.hop_distance(u, v)? as f64 / (k as f64).sqrt())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::binomial_z;

    #[test]
    fn pmf_and_shape_counts() {
        assert_eq!(size_pmf(1), 0.5);
        assert_eq!(size_pmf(2), 0.125);
        assert_eq!(shape_count(3), 2);
        assert_eq!(shape_count(5), 14);
        for k in 1..=8 {
            assert_eq!(enumerate_shapes(k).len() as u128, shape_count(k));
            let exact = shape_count(k) as f64 * 0.5f64.powi(2 * k as i32 - 1);
            assert!((size_pmf(k) - exact).abs() < 1e-15);
        }
    }

    #[test]
    fn preorder_round_trip_and_ranges() {
        let g = GenealogyTree::from_preorder(&[true, true, false, false, false]).unwrap();
        assert_eq!(g.leaf_count(), 3);
        assert_eq!(g.internal_count(), 2);
        assert_eq!(g.node(1).first_leaf..=g.node(1).last_leaf, 1..=2);
        assert_eq!(g.node(4).first_leaf, 3);
        assert_eq!(g.preorder(), vec![true, true, false, false, false]);
        assert!(GenealogyTree::from_preorder(&[true, false]).is_err());
        assert!(GenealogyTree::from_preorder(&[false, true, false]).is_err());
    }

    #[test]
    fn two_leaves_give_one_edge() {
        let mut rng = RngStream::new(31, 0);
        let g = attach_signposts(
            GenealogyTree::from_preorder(&[true, false, false]).unwrap(),
            &mut rng,
        );
        assert_eq!(g.signpost(0), Some([1, 2]));
        assert_eq!(
            aggregate_reconstruct(&g).unwrap().edge_set(),
            vec![Edge::new(1, 2)]
        );
    }

    #[test]
    fn cherry_left_pick_is_fair() {
        let mut rng = RngStream::new(32, 0);
        let shape = GenealogyTree::from_preorder(&[true, true, false, false, false]).unwrap();
        let trials = 20_000;
        let mut ones = 0;
        for _ in 0..trials {
            let g = attach_signposts(shape.clone(), &mut rng);
            assert!(g.signpost_violation().is_none());
            if g.signpost(0).unwrap()[0] == 1 {
                ones += 1;
            }
        }
        assert!(binomial_z(ones, trials, 0.5).abs() < 3.0);
    }

    #[test]
    fn three_leaf_reconstructions_are_trees() {
        for shape in enumerate_shapes(3) {
            let g = GenealogyTree::from_preorder(&shape).unwrap();
            let internal: Vec<usize> = (0..g.nodes().len())
                .filter(|&i| !g.node(i).is_leaf())
                .collect();
            let choices = |id: usize| {
                let [l, r] = g.node(id).children.unwrap();
                let (l, r) = (g.node(l), g.node(r));
                (l.first_leaf..=l.last_leaf)
                    .flat_map(move |a| (r.first_leaf..=r.last_leaf).map(move |b| [a, b]))
                    .collect::<Vec<_>>()
            };
            for p0 in choices(internal[0]) {
                for p1 in choices(internal[1]) {
                    let mut h = g.clone();
                    h.set_signpost(internal[0], p0).unwrap();
                    h.set_signpost(internal[1], p1).unwrap();
                    let t = aggregate_reconstruct(&h).unwrap();
                    assert_eq!(t.n(), 3);
                    assert_eq!(t.edge_set().len(), 2);
                }
            }
        }
    }

    /// Exact laws of the root degree and of a uniform vertex's degree for
    /// aggregated trees with `k` vertices, with the root taken as
    /// `root(g)` (a fixed leaf per shape, or `None` for a uniform leaf).
    fn exact_degree_laws(
        k: usize,
        root: impl Fn(&GenealogyTree) -> Option<Vertex>,
    ) -> (Vec<f64>, Vec<f64>) {
        let mut at_root = vec![0.0; k + 1];
        let mut at_uniform = vec![0.0; k + 1];
        let shapes = enumerate_shapes(k);
        let w_shape = 1.0 / shapes.len() as f64;
        for shape in shapes {
            let g = GenealogyTree::from_preorder(&shape).unwrap();
            let internal: Vec<usize> = (0..g.nodes().len())
                .filter(|&i| !g.node(i).is_leaf())
                .collect();
            let options: Vec<Vec<[Vertex; 2]>> = internal
                .iter()
                .map(|&id| {
                    let [l, r] = g.node(id).children.unwrap();
                    let (l, r) = (g.node(l).clone(), g.node(r).clone());
                    (l.first_leaf..=l.last_leaf)
                        .flat_map(|a| (r.first_leaf..=r.last_leaf).map(move |b| [a, b]))
                        .collect()
                })
                .collect();
            let total: usize = options.iter().map(Vec::len).product();
            for code in 0..total {
                let mut h = g.clone();
                let mut rest = code;
                let mut w = w_shape;
                for (id, opts) in internal.iter().zip(&options) {
                    h.set_signpost(*id, opts[rest % opts.len()]).unwrap();
                    rest /= opts.len();
                    w /= opts.len() as f64;
                }
                let t = aggregate_reconstruct(&h).unwrap();
                match root(&h) {
                    Some(r) => at_root[t.degree(r)] += w,
                    None => (1..=k).for_each(|r| at_root[t.degree(r)] += w / k as f64),
                }
                (1..=k).for_each(|v| at_uniform[t.degree(v)] += w / k as f64);
            }
        }
        (at_root, at_uniform)
    }

    #[test]
    fn uniform_root_leaf_is_reroot_invariant_for_three_leaves() {
        let (root, uniform) = exact_degree_laws(3, |_| None);
        for (a, b) in root.iter().zip(&uniform) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!((uniform[2] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn leftmost_leaf_root_is_not_reroot_invariant() {
        let (root, uniform) = exact_degree_laws(3, |_| Some(1));
        assert!((root[2] - 0.25).abs() < 1e-12);
        assert!((uniform[2] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn single_leaf_reroot_is_degenerate() {
        let s = reroot_invariance_stat(
            GenealogySampler::Leaves { k: 1 },
            RerootStatistic::Degree,
            50,
            1,
        )
        .unwrap();
        assert!(s.at_root.iter().chain(&s.at_uniform).all(|&d| d == 0));
        assert!(s.test(0.01).unwrap().passed());
    }

    #[test]
    fn exact_k_sampler_matches_rejection_sampler() {
        // All 14 shapes with 5 leaves are equally likely under both samplers.
        let mut rng = RngStream::new(33, 0);
        let shapes = enumerate_shapes(5);
        let index = |g: &GenealogyTree| shapes.iter().position(|s| *s == g.preorder()).unwrap();
        let draws = 14_000;
        let mut exact = vec![0u64; shapes.len()];
        let mut reject = vec![0u64; shapes.len()];
        for _ in 0..draws {
            exact[index(&sample_genealogy_k(5, &mut rng).unwrap())] += 1;
            reject[index(&sample_genealogy_k_rejection(5, &mut rng).unwrap())] += 1;
        }
        let uniform = vec![1.0 / 14.0; 14];
        assert!(chi_square_gof(&exact, &uniform, 0.001).unwrap().passed());
        assert!(chi_square_gof(&reject, &uniform, 0.001).unwrap().passed());
    }

    #[test]
    fn small_sizes_match_pmf() {
        let h = size_histogram(100_000, 4, 34).unwrap();
        assert_eq!(h.iter().sum::<u64>(), 100_000);
        assert!(binomial_z(h[0], 100_000, 0.5).abs() < 3.0);
        assert!(binomial_z(h[1], 100_000, 0.125).abs() < 3.0);
        assert!(size_law_test(&h, 0.001).unwrap().passed());
    }

    #[test]
    fn broken_signposts_are_rejected() {
        let mut rng = RngStream::new(35, 0);
        let mut g = attach_signposts(sample_genealogy_k(6, &mut rng).unwrap(), &mut rng);
        let [l, _] = g.node(0).children.unwrap();
        let outside = g.node(l).last_leaf + 1;
        g.set_signpost(0, [outside, outside]).unwrap();
        assert!(matches!(
            aggregate_reconstruct(&g),
            Err(Error::Reconstruction { node: 0, .. })
        ));
    }
}
