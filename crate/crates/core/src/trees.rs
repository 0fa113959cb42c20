//! Finite rooted trees with edge lengths and vertex masses.
//!
//! Vertices are labelled `1..=n`. An edge is identified by its unordered
//! endpoint pair, stored canonically as `(min, max)`. Edge lengths and masses
//! are indexed by vertex: the length of the edge joining `v` to its parent is
//! stored at `v`, and the root slot holds `0.0`.

use std::collections::VecDeque;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::unionfind::UnionFind;

/// A 1-based vertex label.
pub type Vertex = usize;

/// Tolerance on the total vertex mass.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// An undirected edge in canonical `(min, max)` form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[Vertex; 2]", into = "[Vertex; 2]")]
pub struct Edge {
    lo: Vertex,
    hi: Vertex,
}

impl Edge {
    pub fn new(a: Vertex, b: Vertex) -> Self {
        Edge {
            lo: a.min(b),
            hi: a.max(b),
        }
    }

    pub fn lo(self) -> Vertex {
        self.lo
    }

    pub fn hi(self) -> Vertex {
        self.hi
    }

    pub fn contains(self, v: Vertex) -> bool {
        self.lo == v || self.hi == v
    }

    /// The endpoint opposite to `v`, if `v` is an endpoint.
    pub fn other(self, v: Vertex) -> Option<Vertex> {
        if v == self.lo {
            Some(self.hi)
        } else if v == self.hi {
            Some(self.lo)
        } else {
            None
        }
    }
}

impl From<[Vertex; 2]> for Edge {
    fn from(p: [Vertex; 2]) -> Self {
        Edge::new(p[0], p[1])
    }
}

impl From<Edge> for [Vertex; 2] {
    fn from(e: Edge) -> Self {
        [e.lo, e.hi]
    }
}

impl std::fmt::Display for Edge {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{{{},{}}}", self.lo, self.hi)
    }
}

/// A rooted labelled tree on `1..=n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscreteTree {
    root: Vertex,
    parent: Vec<Vertex>,
    children: Vec<Vec<Vertex>>,
    depth: Vec<usize>,
    bfs: Vec<Vertex>,
}

impl DiscreteTree {
    /// Builds a tree from a parent array: `parent[i]` is the parent of
    /// vertex `i + 1`, and the root's slot is `0`.
    pub fn from_parents(root: Vertex, parent: Vec<Vertex>) -> Result<Self> {
        let n = parent.len();
        if n == 0 {
            return input("tree must have at least one vertex");
        }
        if root == 0 || root > n {
            return input(format!("root {root} out of range 1..={n}"));
        }
        let mut children = vec![Vec::new(); n];
        for (i, &p) in parent.iter().enumerate() {
            let v = i + 1;
            if v == root {
                if p != 0 {
                    return input(format!("root {root} has parent entry {p}"));
                }
                continue;
            }
            if p == 0 || p > n {
                return input(format!("vertex {v} has invalid parent {p}"));
            }
            if p == v {
                return input(format!("vertex {v} is its own parent"));
            }
            children[p - 1].push(v);
        }
        let mut depth = vec![usize::MAX; n];
        let mut bfs = Vec::with_capacity(n);
        let mut queue = VecDeque::from([root]);
        depth[root - 1] = 0;
        while let Some(v) = queue.pop_front() {
            bfs.push(v);
            for &c in &children[v - 1] {
                depth[c - 1] = depth[v - 1] + 1;
                queue.push_back(c);
            }
        }
        if bfs.len() != n {
            return input("parent array contains a cycle or is disconnected");
        }
        Ok(DiscreteTree {
            root,
            parent,
            children,
            depth,
            bfs,
        })
    }

    /// Builds a tree on `1..=n` from an edge list, rooted at `root`.
    pub fn from_edges(n: usize, edges: &[Edge], root: Vertex) -> Result<Self> {
        if n == 0 {
            return input("tree must have at least one vertex");
        }
        if edges.len() + 1 != n {
            return input(format!("{} edges cannot span {} vertices", edges.len(), n));
        }
        if root == 0 || root > n {
            return input(format!("root {root} out of range 1..={n}"));
        }
        let mut adj = vec![Vec::new(); n];
        let mut uf = UnionFind::new(n);
        for e in edges {
            if e.lo() == 0 || e.hi() > n || e.lo() == e.hi() {
                return input(format!("edge {e} invalid for {n} vertices"));
            }
            if uf.union(e.lo() - 1, e.hi() - 1).is_none() {
                return input(format!("edge {e} closes a cycle"));
            }
            adj[e.lo() - 1].push(e.hi());
            adj[e.hi() - 1].push(e.lo());
        }
        let mut parent = vec![usize::MAX; n];
        parent[root - 1] = 0;
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            for &w in &adj[v - 1] {
                if parent[w - 1] == usize::MAX {
                    parent[w - 1] = v;
                    stack.push(w);
                }
            }
        }
        Self::from_parents(root, parent)
    }

    /// The single-vertex tree.
    pub fn singleton() -> Self {
        Self::from_parents(1, vec![0]).expect("singleton tree is valid")
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> Vertex {
        self.root
    }

    pub fn contains(&self, v: Vertex) -> bool {
        v >= 1 && v <= self.n()
    }

    fn check(&self, v: Vertex) -> Result<()> {
        if self.contains(v) {
            Ok(())
        } else {
            input(format!("vertex {v} not in tree on {} vertices", self.n()))
        }
    }

    pub fn parent(&self, v: Vertex) -> Option<Vertex> {
        match self.parent[v - 1] {
            0 => None,
            p => Some(p),
        }
    }

    /// Raw parent array in file order (root entry `0`).
    pub fn parent_array(&self) -> &[Vertex] {
        &self.parent
    }

    pub fn children(&self, v: Vertex) -> &[Vertex] {
        &self.children[v - 1]
    }

    pub fn depth(&self, v: Vertex) -> usize {
        self.depth[v - 1]
    }

    pub fn degree(&self, v: Vertex) -> usize {
        self.children[v - 1].len() + usize::from(v != self.root)
    }

    pub fn height(&self) -> usize {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    /// Vertices in breadth-first order from the root.
    pub fn bfs_order(&self) -> &[Vertex] {
        &self.bfs
    }

    /// Edges as `(child, parent)` pairs, canonicalised.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.parent
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != 0)
            .map(|(i, &p)| Edge::new(i + 1, p))
    }

    /// The sorted canonical edge set.
    pub fn edge_set(&self) -> Vec<Edge> {
        let mut e: Vec<Edge> = self.edges().collect();
        e.sort_unstable();
        e
    }

    /// True if `e` is an edge of the tree.
    pub fn has_edge(&self, e: Edge) -> bool {
        self.contains(e.hi())
            && (self.parent(e.lo()) == Some(e.hi()) || self.parent(e.hi()) == Some(e.lo()))
    }

    /// The vertex below `e`, i.e. the endpoint whose parent is the other one.
    pub fn lower_endpoint(&self, e: Edge) -> Option<Vertex> {
        if self.contains(e.hi()) && self.parent(e.lo()) == Some(e.hi()) {
            Some(e.lo())
        } else if self.contains(e.hi()) && self.parent(e.hi()) == Some(e.lo()) {
            Some(e.hi())
        } else {
            None
        }
    }

    /// The same tree rooted at `new_root`.
    pub fn rerooted(&self, new_root: Vertex) -> Result<Self> {
        self.check(new_root)?;
        Self::from_edges(self.n(), &self.edge_set(), new_root)
    }

    /// Most recent common ancestor with respect to the root.
    pub fn mrca(&self, u: Vertex, v: Vertex) -> Result<Vertex> {
        self.check(u)?;
        self.check(v)?;
        let (mut a, mut b) = (u, v);
        while self.depth(a) > self.depth(b) {
            a = self.parent[a - 1];
        }
        while self.depth(b) > self.depth(a) {
            b = self.parent[b - 1];
        }
        while a != b {
            a = self.parent[a - 1];
            b = self.parent[b - 1];
        }
        Ok(a)
    }

    /// The unique vertex path from `u` to `v`, endpoints included.
    pub fn path(&self, u: Vertex, v: Vertex) -> Result<Vec<Vertex>> {
        let m = self.mrca(u, v)?;
        let mut head = vec![u];
        let mut a = u;
        while a != m {
            a = self.parent[a - 1];
            head.push(a);
        }
        let mut tail = Vec::new();
        let mut b = v;
        while b != m {
            tail.push(b);
            b = self.parent[b - 1];
        }
        head.extend(tail.into_iter().rev());
        Ok(head)
    }

    /// Number of edges on the `u`–`v` path.
    pub fn hop_distance(&self, u: Vertex, v: Vertex) -> Result<usize> {
        let m = self.mrca(u, v)?;
        Ok(self.depth(u) + self.depth(v) - 2 * self.depth(m))
    }
}

/// Decodes a Prüfer sequence into the labelled tree on `n = seq.len() + 2`
/// vertices, rooted at vertex 1.
pub fn decode_prufer(seq: &[Vertex]) -> Result<DiscreteTree> {
    let n = seq.len() + 2;
    if let Some(&bad) = seq.iter().find(|&&x| x == 0 || x > n) {
        return input(format!("Prüfer entry {bad} outside 1..={n}"));
    }
    let mut degree = vec![1usize; n + 1];
    degree[0] = 0;
    for &x in seq {
        degree[x] += 1;
    }
    let mut ptr = 1;
    while degree[ptr] != 1 {
        ptr += 1;
    }
    let mut leaf = ptr;
    let mut edges = Vec::with_capacity(n - 1);
    for &x in seq {
        edges.push(Edge::new(leaf, x));
        degree[leaf] -= 1;
        degree[x] -= 1;
        if degree[x] == 1 && x < ptr {
            leaf = x;
        } else {
            ptr += 1;
            while degree[ptr] != 1 {
                ptr += 1;
            }
            leaf = ptr;
        }
    }
    edges.push(Edge::new(leaf, n));
    DiscreteTree::from_edges(n, &edges, 1)
}

/// Prüfer sequence of an (unrooted) labelled tree; empty for `n <= 2`.
pub fn encode_prufer(tree: &DiscreteTree) -> Vec<Vertex> {
    let n = tree.n();
    if n <= 2 {
        return Vec::new();
    }
    let mut degree: Vec<usize> = (0..=n)
        .map(|v| if v == 0 { 0 } else { tree.degree(v) })
        .collect();
    let mut adj = vec![Vec::new(); n + 1];
    for e in tree.edges() {
        adj[e.lo()].push(e.hi());
        adj[e.hi()].push(e.lo());
    }
    let mut removed = vec![false; n + 1];
    let neighbour = |v: Vertex, removed: &[bool], adj: &[Vec<Vertex>]| -> Vertex {
        *adj[v]
            .iter()
            .find(|&&w| !removed[w])
            .expect("leaf has a live neighbour")
    };
    let mut seq = Vec::with_capacity(n - 2);
    let mut ptr = 1;
    while degree[ptr] != 1 {
        ptr += 1;
    }
    let mut leaf = ptr;
    for _ in 0..n - 2 {
        let next = neighbour(leaf, &removed, &adj);
        seq.push(next);
        removed[leaf] = true;
        degree[next] -= 1;
        if degree[next] == 1 && next < ptr {
            leaf = next;
        } else {
            ptr += 1;
            while ptr <= n && (degree[ptr] != 1 || removed[ptr]) {
                ptr += 1;
            }
            leaf = ptr;
        }
    }
    seq
}

/// A rooted tree with positive edge lengths and a probability mass on vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasuredTree {
    tree: DiscreteTree,
    edge_len: Vec<f64>,
    mass: Vec<f64>,
    root_dist: Vec<f64>,
}

impl MeasuredTree {
    /// `edge_len[v - 1]` is the length of the edge from `v` to its parent
    /// (ignored at the root); `mass[v - 1]` is the mass of `v`.
    pub fn new(tree: DiscreteTree, mut edge_len: Vec<f64>, mass: Vec<f64>) -> Result<Self> {
        let n = tree.n();
        if edge_len.len() != n || mass.len() != n {
            return input(format!(
                "expected {n} edge lengths and masses, got {} and {}",
                edge_len.len(),
                mass.len()
            ));
        }
        for v in 1..=n {
            if v == tree.root() {
                edge_len[v - 1] = 0.0;
            } else if !(edge_len[v - 1] > 0.0 && edge_len[v - 1].is_finite()) {
                return input(format!("edge above vertex {v} has non-positive length"));
            }
        }
        if mass.iter().any(|&m| !(m >= 0.0 && m.is_finite())) {
            return input("masses must be finite and non-negative");
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return input(format!("masses sum to {total}, not 1"));
        }
        let mut root_dist = vec![0.0; n];
        for &v in tree.bfs_order() {
            if let Some(p) = tree.parent(v) {
                root_dist[v - 1] = root_dist[p - 1] + edge_len[v - 1];
            }
        }
        Ok(MeasuredTree {
            tree,
            edge_len,
            mass,
            root_dist,
        })
    }

    /// Every edge of length `len`, uniform mass `1/n` on vertices.
    pub fn with_uniform(tree: DiscreteTree, len: f64) -> Result<Self> {
        let n = tree.n();
        Self::new(tree, vec![len; n], vec![1.0 / n as f64; n])
    }

    /// Unit edge lengths, uniform vertex mass.
    pub fn uniform(tree: DiscreteTree) -> Self {
        Self::with_uniform(tree, 1.0).expect("uniform measured tree is valid")
    }

    pub fn tree(&self) -> &DiscreteTree {
        &self.tree
    }

    pub fn n(&self) -> usize {
        self.tree.n()
    }

    pub fn mass(&self, v: Vertex) -> f64 {
        self.mass[v - 1]
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    /// Per-vertex edge lengths in file order (root slot `0`).
    pub fn edge_lengths(&self) -> &[f64] {
        &self.edge_len
    }

    pub fn edge_len(&self, e: Edge) -> Result<f64> {
        match self.tree.lower_endpoint(e) {
            Some(v) => Ok(self.edge_len[v - 1]),
            None => input(format!("{e} is not an edge")),
        }
    }

    /// Length-weighted distance from the root.
    pub fn root_distance(&self, v: Vertex) -> f64 {
        self.root_dist[v - 1]
    }

    /// Sum of edge lengths on the unique `u`–`v` path.
    pub fn graph_distance(&self, u: Vertex, v: Vertex) -> Result<f64> {
        let m = self.tree.mrca(u, v)?;
        let d = self.root_dist[u - 1] + self.root_dist[v - 1] - 2.0 * self.root_dist[m - 1];
        Ok(d.max(0.0))
    }

    /// Total length of all edges.
    pub fn total_length(&self) -> f64 {
        self.edge_len.iter().sum()
    }

    /// The same measured tree rooted at `new_root`; edge lengths follow their edges.
    pub fn rerooted(&self, new_root: Vertex) -> Result<Self> {
        let tree = self.tree.rerooted(new_root)?;
        let mut len = vec![0.0; self.n()];
        for v in 1..=self.n() {
            if let Some(p) = tree.parent(v) {
                len[v - 1] = self.edge_len(Edge::new(v, p))?;
            }
        }
        Self::new(tree, len, self.mass.clone())
    }

    pub fn to_file(&self) -> TreeFile {
        TreeFile {
            n: self.n(),
            root: self.tree.root(),
            parent: self.tree.parent_array().to_vec(),
            edge_len: Some(self.edge_len.clone()),
            mass: Some(self.mass.clone()),
        }
    }

    pub fn from_file(file: TreeFile) -> Result<Self> {
        if file.parent.len() != file.n {
            return input(format!(
                "parent array has {} entries, n = {}",
                file.parent.len(),
                file.n
            ));
        }
        let tree = DiscreteTree::from_parents(file.root, file.parent)?;
        let n = tree.n();
        let edge_len = file.edge_len.unwrap_or_else(|| vec![1.0; n]);
        let mass = file.mass.unwrap_or_else(|| vec![1.0 / n as f64; n]);
        Self::new(tree, edge_len, mass)
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_file(serde_json::from_str(&text)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(&self.to_file())?)?;
        Ok(())
    }
}

/// On-disk tree format. `parent[i]` is the parent of vertex `i + 1`, with `0`
/// at the root; `edge_len[i]` is the length of the edge above vertex `i + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeFile {
    pub n: usize,
    pub root: Vertex,
    pub parent: Vec<Vertex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_len: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<Vec<f64>>,
}

/// One connected component left after deleting edges.
#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub vertices: Vec<Vertex>,
    pub mass: f64,
}

/// Connected components of `tree` minus `removed`, ordered by smallest vertex.
pub fn component_masses(tree: &MeasuredTree, removed: &[Edge]) -> Result<Vec<Component>> {
    let n = tree.n();
    let mut cut = vec![false; n];
    for &e in removed {
        match tree.tree().lower_endpoint(e) {
            Some(v) => cut[v - 1] = true,
            None => return input(format!("{e} is not an edge of the tree")),
        }
    }
    let mut uf = UnionFind::new(n);
    for v in 1..=n {
        if let Some(p) = tree.tree().parent(v) {
            if !cut[v - 1] {
                uf.union(v - 1, p - 1);
            }
        }
    }
    let mut slot = vec![usize::MAX; n];
    let mut comps: Vec<Component> = Vec::new();
    for v in 1..=n {
        let r = uf.find(v - 1);
        if slot[r] == usize::MAX {
            slot[r] = comps.len();
            comps.push(Component {
                vertices: Vec::new(),
                mass: 0.0,
            });
        }
        let c = &mut comps[slot[r]];
        c.vertices.push(v);
        c.mass += tree.mass(v);
    }
    Ok(comps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn path3() -> DiscreteTree {
        DiscreteTree::from_parents(1, vec![0, 1, 2]).unwrap()
    }

    #[test]
    fn prufer_two_vertices() {
        let t = decode_prufer(&[]).unwrap();
        assert_eq!(t.edge_set(), vec![Edge::new(1, 2)]);
    }

    #[test]
    fn prufer_star_on_three() {
        let t = decode_prufer(&[1]).unwrap();
        assert_eq!(t.edge_set(), vec![Edge::new(1, 2), Edge::new(1, 3)]);
    }

    #[test]
    fn prufer_rejects_out_of_range() {
        assert!(decode_prufer(&[5, 1]).is_err());
        assert!(decode_prufer(&[0]).is_err());
    }

    #[test]
    fn prufer_four_vertices_bijective() {
        let mut seen = HashSet::new();
        for a in 1..=4 {
            for b in 1..=4 {
                let t = decode_prufer(&[a, b]).unwrap();
                assert_eq!(encode_prufer(&t), vec![a, b]);
                seen.insert(t.edge_set());
            }
        }
        assert_eq!(seen.len(), 16);
    }

    /// Every labelled tree on `n <= 7` vertices is hit exactly once.
    #[test]
    fn prufer_exhaustive_roundtrip() {
        for n in 3..=7usize {
            let total = n.pow((n - 2) as u32);
            let mut seen = HashSet::with_capacity(total);
            let mut seq = vec![1; n - 2];
            for code in 0..total {
                let mut c = code;
                for s in seq.iter_mut() {
                    *s = c % n + 1;
                    c /= n;
                }
                let t = decode_prufer(&seq).unwrap();
                assert_eq!(t.n(), n);
                assert_eq!(encode_prufer(&t), seq);
                assert!(seen.insert(t.edge_set()));
            }
            assert_eq!(seen.len(), total);
        }
    }

    #[test]
    fn mrca_cases() {
        let t = path3();
        assert_eq!(t.mrca(2, 2).unwrap(), 2);
        assert_eq!(t.mrca(2, 3).unwrap(), 2);
        let star = DiscreteTree::from_parents(1, vec![0, 1, 1, 1]).unwrap();
        assert_eq!(star.mrca(3, 4).unwrap(), 1);
        assert!(star.mrca(1, 9).is_err());
    }

    #[test]
    fn distance_on_unit_path() {
        let t = MeasuredTree::uniform(path3());
        assert_eq!(t.graph_distance(1, 1).unwrap(), 0.0);
        assert_eq!(t.graph_distance(1, 3).unwrap(), 2.0);
        assert_eq!(t.graph_distance(3, 1).unwrap(), 2.0);
        assert!(t.graph_distance(0, 1).is_err());
    }

    #[test]
    fn rejects_bad_trees() {
        assert!(DiscreteTree::from_parents(1, vec![0, 3, 2]).is_err());
        assert!(DiscreteTree::from_parents(2, vec![0, 0]).is_err());
        assert!(DiscreteTree::from_edges(3, &[Edge::new(1, 2), Edge::new(2, 1)], 1).is_err());
        let t = path3();
        assert!(MeasuredTree::new(t.clone(), vec![0.0, 1.0, 0.0], vec![1.0 / 3.0; 3]).is_err());
        assert!(MeasuredTree::new(t, vec![0.0, 1.0, 1.0], vec![0.5; 3]).is_err());
    }

    #[test]
    fn components_of_path() {
        let t = MeasuredTree::uniform(path3());
        let all = component_masses(&t, &[]).unwrap();
        assert_eq!(all.len(), 1);
        assert!((all[0].mass - 1.0).abs() < 1e-15);
        let split = component_masses(&t, &[Edge::new(1, 2)]).unwrap();
        assert_eq!(split[0].vertices, vec![1]);
        assert!((split[0].mass - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(split[1].vertices, vec![2, 3]);
        assert!((split[1].mass - 2.0 / 3.0).abs() < 1e-15);
        assert!(component_masses(&t, &[Edge::new(1, 3)]).is_err());
    }

    #[test]
    fn reroot_keeps_edges_and_lengths() {
        let t = MeasuredTree::new(path3(), vec![0.0, 2.0, 5.0], vec![0.2, 0.3, 0.5]).unwrap();
        let r = t.rerooted(3).unwrap();
        assert_eq!(r.tree().root(), 3);
        assert_eq!(r.tree().edge_set(), t.tree().edge_set());
        assert_eq!(r.edge_len(Edge::new(2, 3)).unwrap(), 5.0);
        assert_eq!(r.graph_distance(1, 3).unwrap(), 7.0);
    }

    #[test]
    fn json_roundtrip() {
        let t = MeasuredTree::new(path3(), vec![0.0, 2.0, 5.0], vec![0.2, 0.3, 0.5]).unwrap();
        let text = serde_json::to_string(&t.to_file()).unwrap();
        let back = MeasuredTree::from_file(serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, t);
        let minimal: TreeFile =
            serde_json::from_str(r#"{"n":3,"root":1,"parent":[0,1,1]}"#).unwrap();
        let m = MeasuredTree::from_file(minimal).unwrap();
        assert!((m.mass(2) - 1.0 / 3.0).abs() < 1e-15);
    }
}
