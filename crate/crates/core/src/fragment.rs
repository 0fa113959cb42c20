//! Poisson edge cutting and the fragmentation it induces.
//!
//! The component history is stored as a binary merge tree. Its leaves are
//! the *atoms*, the components that remain after every scheduled cut (single
//! vertices when every edge is cut). Merge node `atoms + k` is the component
//! destroyed by cut `k`; its two children are the components containing the
//! cut edge's `lo` and `hi` endpoints, in that order. A component is alive
//! on `[birth, death)`, where `birth` is its parent's cut time (0 at the
//! root) and `death` its own cut time (infinite for atoms).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::generate::open_unit;
use crate::trees::{Edge, MeasuredTree, Vertex};
use crate::unionfind::UnionFind;

/// How edge cutting rates are derived from the tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntensityMode {
    /// Rate `2 * length * scale`: twice the length measure.
    Length,
    /// Rate `scale` for every edge; the cut order is a uniform permutation.
    UniformOrder,
}

/// A single Poisson cut.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub edge: Edge,
    pub time: f64,
}

/// Cuts sorted by strictly increasing time, each edge at most once.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutSchedule {
    cuts: Vec<Cut>,
    mode: IntensityMode,
    scale: f64,
}

impl CutSchedule {
    /// Validates and sorts an explicit list of cuts.
    pub fn new(mut cuts: Vec<Cut>, mode: IntensityMode, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return input("rate scale must be positive and finite");
        }
        if let Some(c) = cuts.iter().find(|c| !(c.time > 0.0 && c.time.is_finite())) {
            return input(format!("cut of {} has invalid time {}", c.edge, c.time));
        }
        cuts.sort_by(|a, b| a.time.total_cmp(&b.time));
        for w in cuts.windows(2) {
            if w[0].time >= w[1].time {
                return input(format!("cut times must be distinct (tie at {})", w[0].time));
            }
        }
        let mut edges: Vec<Edge> = cuts.iter().map(|c| c.edge).collect();
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return input(format!("edge {} is cut twice", w[0]));
        }
        Ok(CutSchedule { cuts, mode, scale })
    }

    /// Convenience for hand-built schedules with unit length intensity.
    pub fn from_pairs(pairs: &[((Vertex, Vertex), f64)]) -> Result<Self> {
        let cuts = pairs
            .iter()
            .map(|&((a, b), time)| Cut {
                edge: Edge::new(a, b),
                time,
            })
            .collect();
        Self::new(cuts, IntensityMode::Length, 1.0)
    }

    pub fn cuts(&self) -> &[Cut] {
        &self.cuts
    }

    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    pub fn mode(&self) -> IntensityMode {
        self.mode
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
}

/// Cutting rate of one edge of the given length.
pub fn edge_rate(len: f64, mode: IntensityMode, scale: f64) -> f64 {
    match mode {
        IntensityMode::Length => 2.0 * len * scale,
        IntensityMode::UniformOrder => scale,
    }
}

/// Independent exponential cut times for every edge at twice its length.
pub fn make_schedule<R: Rng + ?Sized>(tree: &MeasuredTree, rng: &mut R) -> Result<CutSchedule> {
    make_schedule_with(tree, IntensityMode::Length, 1.0, rng)
}

/// Independent exponential cut times for every edge, drawn by inverse CDF.
pub fn make_schedule_with<R: Rng + ?Sized>(
    tree: &MeasuredTree,
    mode: IntensityMode,
    scale: f64,
    rng: &mut R,
) -> Result<CutSchedule> {
    if tree.n() < 2 {
        return input("tree has no edges to cut");
    }
    let mut cuts = Vec::with_capacity(tree.n() - 1);
    for edge in tree.tree().edges() {
        let rate = edge_rate(tree.edge_len(edge)?, mode, scale);
        if !(rate > 0.0 && rate.is_finite()) {
            return input(format!("edge {edge} has non-positive rate"));
        }
        cuts.push(Cut {
            edge,
            time: -open_unit(rng).ln() / rate,
        });
    }
    CutSchedule::new(cuts, mode, scale)
}

/// Convention for `ℓ(x, ∞)`, which diverges at finite size because `x`
/// keeps a residual atom of positive mass.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EllConvention {
    /// Integrate only up to the birth of `x`'s final component.
    #[default]
    Truncated,
    /// Integrate `m_x - m_x(∞)` up to the birth of `x`'s final component.
    TailSubtracted,
}

/// One cut's effect on the component history.
#[derive(Clone, Debug, PartialEq)]
pub struct CutRecord {
    pub edge: Edge,
    pub time: f64,
    /// Merge node of the component that was split.
    pub parent: usize,
    /// Merge nodes of the `lo`-side and `hi`-side components.
    pub children: [usize; 2],
    pub masses: [f64; 2],
}

/// The complete component history of a cut schedule on a measured tree.
#[derive(Clone, Debug)]
pub struct FragmentationTrace {
    n: usize,
    cuts: Vec<Cut>,
    atom_of: Vec<usize>,
    atom_vertices: Vec<Vec<Vertex>>,
    parent: Vec<Option<usize>>,
    children: Vec<Option<[usize; 2]>>,
    mass: Vec<f64>,
    birth: Vec<f64>,
    death: Vec<f64>,
    depth: Vec<usize>,
    root: usize,
}

/// Builds the component history by merging in reverse time.
pub fn run_fragmentation(
    tree: &MeasuredTree,
    schedule: &CutSchedule,
) -> Result<FragmentationTrace> {
    let n = tree.n();
    let mut is_cut = vec![false; n];
    for c in schedule.cuts() {
        match tree.tree().lower_endpoint(c.edge) {
            Some(v) => is_cut[v - 1] = true,
            None => return input(format!("scheduled edge {} is not in the tree", c.edge)),
        }
    }
    let mut uf = UnionFind::new(n);
    for v in 1..=n {
        if let (Some(p), false) = (tree.tree().parent(v), is_cut[v - 1]) {
            uf.union(v - 1, p - 1);
        }
    }
    let mut node_of_rep = vec![usize::MAX; n];
    let mut atom_of = vec![0; n];
    let mut atom_vertices: Vec<Vec<Vertex>> = Vec::new();
    let mut mass = Vec::new();
    for v in 1..=n {
        let r = uf.find(v - 1);
        if node_of_rep[r] == usize::MAX {
            node_of_rep[r] = atom_vertices.len();
            atom_vertices.push(Vec::new());
            mass.push(0.0);
        }
        let a = node_of_rep[r];
        atom_of[v - 1] = a;
        atom_vertices[a].push(v);
        mass[a] += tree.mass(v);
    }
    let atoms = atom_vertices.len();
    let cuts = schedule.cuts().to_vec();
    let total = atoms + cuts.len();
    let mut parent = vec![None; total];
    let mut children = vec![None; total];
    mass.resize(total, 0.0);
    for k in (0..cuts.len()).rev() {
        let e = cuts[k].edge;
        let (ra, rb) = (uf.find(e.lo() - 1), uf.find(e.hi() - 1));
        let (ca, cb) = (node_of_rep[ra], node_of_rep[rb]);
        let node = atoms + k;
        children[node] = Some([ca, cb]);
        parent[ca] = Some(node);
        parent[cb] = Some(node);
        mass[node] = mass[ca] + mass[cb];
        let r = uf
            .union(ra, rb)
            .expect("cut edges join distinct components in a tree");
        node_of_rep[r] = node;
    }
    let root = if cuts.is_empty() { 0 } else { atoms };
    let mut birth = vec![0.0; total];
    let mut death = vec![f64::INFINITY; total];
    let mut depth = vec![0; total];
    for (k, c) in cuts.iter().enumerate() {
        death[atoms + k] = c.time;
    }
    // Parents of merge nodes have smaller cut index, so one ascending pass suffices.
    let order = (atoms..total).chain(0..atoms);
    for node in order {
        if let Some(p) = parent[node] {
            birth[node] = death[p];
            depth[node] = depth[p] + 1;
        }
    }
    Ok(FragmentationTrace {
        n,
        cuts,
        atom_of,
        atom_vertices,
        parent,
        children,
        mass,
        birth,
        death,
        depth,
        root,
    })
}

impl FragmentationTrace {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cuts(&self) -> &[Cut] {
        &self.cuts
    }

    pub fn atom_count(&self) -> usize {
        self.atom_vertices.len()
    }

    pub fn node_count(&self) -> usize {
        self.mass.len()
    }

    /// Merge node of the component alive at time 0.
    pub fn root_node(&self) -> usize {
        self.root
    }

    /// Merge node of the final component of `x`.
    pub fn atom_of(&self, x: Vertex) -> usize {
        self.atom_of[x - 1]
    }

    /// Merge node created by cut `k`.
    pub fn cut_node(&self, k: usize) -> usize {
        self.atom_count() + k
    }

    pub fn is_atom(&self, node: usize) -> bool {
        node < self.atom_count()
    }

    /// Index into [`cuts`](Self::cuts) of a merge node, if it is not an atom.
    pub fn cut_index(&self, node: usize) -> Option<usize> {
        node.checked_sub(self.atom_count())
    }

    pub fn node_parent(&self, node: usize) -> Option<usize> {
        self.parent[node]
    }

    pub fn node_children(&self, node: usize) -> Option<[usize; 2]> {
        self.children[node]
    }

    pub fn node_mass(&self, node: usize) -> f64 {
        self.mass[node]
    }

    pub fn node_birth(&self, node: usize) -> f64 {
        self.birth[node]
    }

    pub fn node_death(&self, node: usize) -> f64 {
        self.death[node]
    }

    pub fn node_depth(&self, node: usize) -> usize {
        self.depth[node]
    }

    /// True if `anc` is `node` or one of its ancestors.
    pub fn is_ancestor(&self, anc: usize, mut node: usize) -> bool {
        while self.depth[node] > self.depth[anc] {
            node = self.parent[node].expect("non-root has a parent");
        }
        node == anc
    }

    /// Lowest common ancestor of two merge nodes.
    pub fn node_mrca(&self, mut a: usize, mut b: usize) -> usize {
        while self.depth[a] > self.depth[b] {
            a = self.parent[a].expect("non-root has a parent");
        }
        while self.depth[b] > self.depth[a] {
            b = self.parent[b].expect("non-root has a parent");
        }
        while a != b {
            a = self.parent[a].expect("non-root has a parent");
            b = self.parent[b].expect("non-root has a parent");
        }
        a
    }

    /// Vertex set of a merge node, sorted.
    pub fn block(&self, node: usize) -> Vec<Vertex> {
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(u) = stack.pop() {
            match self.children[u] {
                Some([a, b]) => {
                    stack.push(a);
                    stack.push(b);
                }
                None => out.extend_from_slice(&self.atom_vertices[u]),
            }
        }
        out.sort_unstable();
        out
    }

    /// True if vertex `x` lies in the component of merge node `node`.
    pub fn block_contains(&self, node: usize, x: Vertex) -> bool {
        x >= 1 && x <= self.n && self.is_ancestor(node, self.atom_of(x))
    }

    pub fn cut_record(&self, k: usize) -> CutRecord {
        let node = self.cut_node(k);
        let children = self.children[node].expect("cut nodes have two children");
        CutRecord {
            edge: self.cuts[k].edge,
            time: self.cuts[k].time,
            parent: node,
            children,
            masses: [self.mass[children[0]], self.mass[children[1]]],
        }
    }

    /// Ancestors of `x`'s atom from the root down, atom included.
    fn lineage(&self, x: Vertex) -> Vec<usize> {
        let mut out = vec![self.atom_of(x)];
        while let Some(p) = self.parent[*out.last().expect("non-empty")] {
            out.push(p);
        }
        out.reverse();
        out
    }

    /// Merge node containing `x` at time `t`.
    pub fn component_at(&self, x: Vertex, t: f64) -> usize {
        let mut node = self.atom_of(x);
        while self.birth[node] > t {
            node = self.parent[node].expect("root is born at 0");
        }
        node
    }

    /// `m_x(t)`: mass of the component containing `x` at time `t`.
    pub fn mass_at(&self, x: Vertex, t: f64) -> f64 {
        self.mass[self.component_at(x, t)]
    }

    /// The step function `m_x` as `(start, mass)` pairs, from time 0.
    pub fn mass_steps(&self, x: Vertex) -> Vec<(f64, f64)> {
        self.lineage(x)
            .into_iter()
            .map(|u| (self.birth[u], self.mass[u]))
            .collect()
    }

    /// Birth time of `x`'s final component.
    pub fn t_last(&self, x: Vertex) -> f64 {
        self.birth[self.atom_of(x)]
    }

    /// `ℓ(x, t) = ∫_0^t m_x(s) ds` for finite `t`; for infinite `t` the
    /// default [`EllConvention::Truncated`] applies.
    pub fn ell(&self, x: Vertex, t: f64) -> f64 {
        if t.is_infinite() {
            return self.ell_infinite(x, EllConvention::Truncated);
        }
        let mut acc = 0.0;
        for u in self.lineage(x) {
            if self.birth[u] >= t {
                break;
            }
            acc += self.mass[u] * (t.min(self.death[u]) - self.birth[u]);
        }
        acc
    }

    /// `ℓ(x) = ℓ(x, ∞)` under the given convention.
    pub fn ell_infinite(&self, x: Vertex, convention: EllConvention) -> f64 {
        let atom = self.atom_of(x);
        let floor = match convention {
            EllConvention::Truncated => 0.0,
            EllConvention::TailSubtracted => self.mass[atom],
        };
        self.lineage(x)
            .into_iter()
            .filter(|&u| u != atom)
            .map(|u| (self.mass[u] - floor) * (self.death[u] - self.birth[u]))
            .sum()
    }

    /// First cut strictly inside the `x`–`y` path, or `(∞, None)` if none.
    pub fn first_separator(&self, x: Vertex, y: Vertex) -> (f64, Option<Edge>) {
        let m = self.node_mrca(self.atom_of(x), self.atom_of(y));
        match self.cut_index(m) {
            Some(k) => (self.cuts[k].time, Some(self.cuts[k].edge)),
            None => (f64::INFINITY, None),
        }
    }

    /// `t(x, y)`.
    pub fn separation_time(&self, x: Vertex, y: Vertex) -> f64 {
        self.first_separator(x, y).0
    }

    /// `D(x, y) = ℓ(x) + ℓ(y) - 2ℓ(x, t(x, y))`, truncated convention.
    pub fn cut_metric(&self, x: Vertex, y: Vertex) -> f64 {
        self.cut_metric_with(x, y, false)
    }

    /// `D(x, y)` with the shared term evaluated at `y` instead of `x`.
    pub fn cut_metric_alt(&self, x: Vertex, y: Vertex) -> f64 {
        self.cut_metric_with(x, y, true)
    }

    fn cut_metric_with(&self, x: Vertex, y: Vertex, use_y: bool) -> f64 {
        if x == y {
            return 0.0;
        }
        let t = self.separation_time(x, y);
        let shared = if use_y {
            self.ell(y, t)
        } else {
            self.ell(x, t)
        };
        (self.ell(x, f64::INFINITY) + self.ell(y, f64::INFINITY) - 2.0 * shared).max(0.0)
    }

    /// Component masses alive at time `s`, in decreasing order.
    pub fn mass_profile(&self, s: f64) -> Vec<f64> {
        let mut out: Vec<f64> = (0..self.node_count())
            .filter(|&u| self.birth[u] <= s && s < self.death[u])
            .map(|u| self.mass[u])
            .collect();
        out.sort_by(|a, b| b.total_cmp(a));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{gen_uniform_tree, RngStream};
    use crate::trees::DiscreteTree;

    fn path_example() -> FragmentationTrace {
        let t = MeasuredTree::uniform(DiscreteTree::from_parents(1, vec![0, 1, 2]).unwrap());
        let s = CutSchedule::from_pairs(&[((1, 2), 1.0), ((2, 3), 2.0)]).unwrap();
        run_fragmentation(&t, &s).unwrap()
    }

    const THIRD: f64 = 1.0 / 3.0;

    #[test]
    fn path_mass_functions() {
        let tr = path_example();
        assert_eq!(tr.mass_at(1, 0.5), 1.0);
        assert!((tr.mass_at(1, 1.0) - THIRD).abs() < 1e-15);
        assert!((tr.mass_at(1, 7.0) - THIRD).abs() < 1e-15);
        assert_eq!(tr.mass_at(3, 0.0), 1.0);
        assert!((tr.mass_at(3, 1.5) - 2.0 * THIRD).abs() < 1e-15);
        assert!((tr.mass_at(3, 2.0) - THIRD).abs() < 1e-15);
        let steps = tr.mass_steps(3);
        assert_eq!(steps.len(), 3);
        assert_eq!(steps[1].0, 1.0);
        assert_eq!(steps[2].0, 2.0);
    }

    #[test]
    fn path_separator_and_ell() {
        let tr = path_example();
        assert_eq!(tr.first_separator(2, 2), (f64::INFINITY, None));
        assert_eq!(tr.first_separator(1, 3), (1.0, Some(Edge::new(1, 2))));
        assert_eq!(tr.first_separator(3, 2), (2.0, Some(Edge::new(2, 3))));
        assert_eq!(tr.ell(1, 0.0), 0.0);
        assert!((tr.ell(1, 2.0) - 4.0 / 3.0).abs() < 1e-15);
        assert!((tr.ell(1, f64::INFINITY) - 1.0).abs() < 1e-15);
        assert!((tr.ell(3, f64::INFINITY) - 5.0 / 3.0).abs() < 1e-15);
        // Tail-subtracted: (1 - 1/3)·1 + (2/3 - 1/3)·1.
        assert!((tr.ell_infinite(3, EllConvention::TailSubtracted) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn path_cut_metric_both_forms() {
        let tr = path_example();
        assert_eq!(tr.cut_metric(2, 2), 0.0);
        assert!((tr.cut_metric(1, 3) - 2.0 / 3.0).abs() < 1e-15);
        assert!((tr.cut_metric_alt(1, 3) - 2.0 / 3.0).abs() < 1e-15);
        // ℓ(2) = 5/3 as well, and t(2,3) = 2 gives ℓ(2, 2) = 5/3.
        assert!(tr.cut_metric(2, 3).abs() < 1e-15);
    }

    #[test]
    fn path_mass_profile() {
        let tr = path_example();
        assert_eq!(tr.mass_profile(0.0), vec![1.0]);
        let mid = tr.mass_profile(1.5);
        assert!((mid[0] - 2.0 * THIRD).abs() < 1e-15 && (mid[1] - THIRD).abs() < 1e-15);
        assert_eq!(tr.mass_profile(10.0).len(), 3);
        assert_eq!(tr.block(tr.root_node()), vec![1, 2, 3]);
    }

    #[test]
    fn no_cuts_single_component() {
        let t = MeasuredTree::uniform(DiscreteTree::from_parents(1, vec![0, 1, 2]).unwrap());
        let s = CutSchedule::new(vec![], IntensityMode::Length, 1.0).unwrap();
        let tr = run_fragmentation(&t, &s).unwrap();
        assert_eq!(tr.mass_profile(0.0), vec![1.0]);
        assert_eq!(tr.mass_profile(1e9), vec![1.0]);
        assert_eq!(tr.first_separator(1, 3).0, f64::INFINITY);
        assert_eq!(tr.ell(1, f64::INFINITY), 0.0);
    }

    #[test]
    fn schedule_validation() {
        assert!(CutSchedule::from_pairs(&[((1, 2), 1.0), ((2, 1), 2.0)]).is_err());
        assert!(CutSchedule::from_pairs(&[((1, 2), 1.0), ((2, 3), 1.0)]).is_err());
        assert!(CutSchedule::from_pairs(&[((1, 2), -1.0)]).is_err());
        let t = MeasuredTree::uniform(DiscreteTree::from_parents(1, vec![0, 1, 2]).unwrap());
        let s = CutSchedule::from_pairs(&[((1, 3), 1.0)]).unwrap();
        assert!(run_fragmentation(&t, &s).is_err());
    }

    #[test]
    fn random_instance_conservation() {
        let mut rng = RngStream::new(11, 0);
        let t = MeasuredTree::uniform(gen_uniform_tree(200, &mut rng).unwrap());
        let s = make_schedule(&t, &mut rng).unwrap();
        let tr = run_fragmentation(&t, &s).unwrap();
        let horizon = s.cuts().last().unwrap().time * 1.1;
        for k in 0..100 {
            let total: f64 = tr.mass_profile(horizon * k as f64 / 100.0).iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
        assert_eq!(tr.mass_profile(horizon).len(), 200);
    }
}
