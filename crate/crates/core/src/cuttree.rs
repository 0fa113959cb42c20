//! The cut-tree of a fragmentation, its measures, and signpost routings.
//!
//! Node 0 is the root `ρ`. Every other node hangs below its parent by an
//! edge described by *pieces*: the lifetimes `[start, end)` of the merge
//! components traversed by that edge, each carrying the component mass as
//! its slope. The edge length is `Σ mass * (end - start)`, so the distance
//! from `ρ` to the leaf of `x` is `ℓ(x)` and the distance between leaves is
//! the cut metric `D`.
//!
//! When only some vertices are tracked, components that lose every tracked
//! point (*chips*) are frozen onto the edge as point masses of `ν`, placed
//! at the end of the piece whose cut detached them.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::fragment::{run_fragmentation, Cut, CutSchedule, FragmentationTrace};
use crate::trees::{MeasuredTree, Vertex};

/// Which vertices become leaves of the cut-tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Points {
    /// Every vertex: the full discrete cut-tree.
    All,
    /// The listed distinct vertices, in order.
    Sample(Vec<Vertex>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Root,
    Internal,
    Leaf,
}

/// A stretch of an edge where the component below has constant mass.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub start: f64,
    pub end: f64,
    pub mass: f64,
}

impl Piece {
    pub fn length(&self) -> f64 {
        self.mass * (self.end - self.start)
    }
}

/// A frozen untracked component, recorded as a `ν` atom on an edge.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chip {
    /// Cut time that detached the component; equals some piece's `end`.
    pub time: f64,
    pub mass: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CutNode {
    pub parent: Option<usize>,
    pub kind: NodeKind,
    /// Internal nodes: `[lo-side, hi-side]` of the cut edge. Root: one child.
    pub children: Vec<usize>,
    /// Merge node of the fragmentation this node stands for.
    pub origin: Option<usize>,
    pub cut: Option<Cut>,
    pub vertex: Option<Vertex>,
    /// `μ` of the leaf's final component.
    pub leaf_mass: f64,
    pub pieces: Vec<Piece>,
    pub chips: Vec<Chip>,
    pub length: f64,
    pub root_dist: f64,
}

impl CutNode {
    fn new(parent: Option<usize>, kind: NodeKind) -> Self {
        CutNode {
            parent,
            kind,
            children: Vec::new(),
            origin: None,
            cut: None,
            vertex: None,
            leaf_mass: 0.0,
            pieces: Vec::new(),
            chips: Vec::new(),
            length: 0.0,
            root_dist: 0.0,
        }
    }
}

/// The cut-tree `(C, d, ρ)` with its leaf labelling.
#[derive(Clone, Debug)]
pub struct CutTree {
    n: usize,
    full: bool,
    nodes: Vec<CutNode>,
    points: Vec<Vertex>,
    leaf_of: HashMap<Vertex, usize>,
    tin: Vec<usize>,
    tout: Vec<usize>,
    trace: Option<FragmentationTrace>,
}

/// Cuts `tree` by `schedule` and builds the cut-tree of `points`.
pub fn build_cut_tree(
    tree: &MeasuredTree,
    schedule: &CutSchedule,
    points: &Points,
) -> Result<CutTree> {
    CutTree::from_trace(run_fragmentation(tree, schedule)?, points)
}

impl CutTree {
    pub fn from_trace(trace: FragmentationTrace, points: &Points) -> Result<Self> {
        let n = trace.n();
        let (full, points) = match points {
            Points::All => (true, (1..=n).collect::<Vec<_>>()),
            Points::Sample(p) => (false, p.clone()),
        };
        if points.is_empty() {
            return input("at least one tracked point is required");
        }
        let mut tracked_atom: Vec<Option<Vertex>> = vec![None; trace.node_count()];
        let mut seen = vec![false; n + 1];
        for &x in &points {
            if x == 0 || x > n {
                return input(format!("tracked point {x} not in 1..={n}"));
            }
            if std::mem::replace(&mut seen[x], true) {
                return input(format!("tracked point {x} appears twice"));
            }
            let a = trace.atom_of(x);
            if let Some(y) = tracked_atom[a] {
                return input(format!("tracked points {y} and {x} are never separated"));
            }
            tracked_atom[a] = Some(x);
        }
        // Atoms first, then merge nodes from the last cut to the first.
        let mut count = vec![0usize; trace.node_count()];
        let atoms = trace.atom_count();
        for u in (0..atoms).chain((atoms..trace.node_count()).rev()) {
            count[u] = match trace.node_children(u) {
                Some([a, b]) => count[a] + count[b],
                None => usize::from(tracked_atom[u].is_some()),
            };
        }

        let mut nodes = vec![CutNode::new(None, NodeKind::Root)];
        // (merge node, cut-tree parent, pieces, chips)
        let mut stack = vec![(trace.root_node(), 0usize, Vec::new(), Vec::new())];
        while let Some((start, parent, mut pieces, mut chips)) = stack.pop() {
            let mut u = start;
            loop {
                let Some([c0, c1]) = trace.node_children(u) else {
                    let x = tracked_atom[u].expect("walk only enters tracked subtrees");
                    let mut leaf = CutNode::new(Some(parent), NodeKind::Leaf);
                    leaf.origin = Some(u);
                    leaf.vertex = Some(x);
                    leaf.leaf_mass = trace.node_mass(u);
                    leaf.pieces = pieces;
                    leaf.chips = chips;
                    nodes.push(leaf);
                    break;
                };
                pieces.push(Piece {
                    start: trace.node_birth(u),
                    end: trace.node_death(u),
                    mass: trace.node_mass(u),
                });
                match (count[c0] > 0, count[c1] > 0) {
                    (true, true) => {
                        let mut node = CutNode::new(Some(parent), NodeKind::Internal);
                        node.origin = Some(u);
                        node.cut = Some(trace.cuts()[trace.cut_index(u).expect("merge node")]);
                        node.pieces = pieces;
                        node.chips = chips;
                        let id = nodes.len();
                        nodes.push(node);
                        stack.push((c1, id, Vec::new(), Vec::new()));
                        stack.push((c0, id, Vec::new(), Vec::new()));
                        break;
                    }
                    (keep0, _) => {
                        let (next, chip) = if keep0 { (c0, c1) } else { (c1, c0) };
                        chips.push(Chip {
                            time: trace.node_death(u),
                            mass: trace.node_mass(chip),
                        });
                        u = next;
                    }
                }
            }
            let id = nodes.len() - 1;
            nodes[parent].children.push(id);
        }
        Self::finish(n, full, nodes, Some(trace))
    }

    fn finish(
        n: usize,
        full: bool,
        mut nodes: Vec<CutNode>,
        trace: Option<FragmentationTrace>,
    ) -> Result<Self> {
        for id in 1..nodes.len() {
            let p = nodes[id].parent.expect("non-root node has a parent");
            if p >= id {
                return input(format!("node {id} precedes its parent {p}"));
            }
            let len: f64 = nodes[id].pieces.iter().map(Piece::length).sum();
            nodes[id].length = len;
            nodes[id].root_dist = nodes[p].root_dist + len;
        }
        let mut leaf_of = HashMap::new();
        let mut points = Vec::new();
        for (id, node) in nodes.iter().enumerate() {
            if let Some(x) = node.vertex {
                if leaf_of.insert(x, id).is_some() {
                    return input(format!("vertex {x} labels two leaves"));
                }
                points.push(x);
            }
        }
        let mut tin = vec![0; nodes.len()];
        let mut tout = vec![0; nodes.len()];
        let mut clock = 0;
        let mut stack = vec![(0usize, false)];
        while let Some((u, done)) = stack.pop() {
            if done {
                tout[u] = clock;
                continue;
            }
            tin[u] = clock;
            clock += 1;
            stack.push((u, true));
            for &c in nodes[u].children.iter().rev() {
                stack.push((c, false));
            }
        }
        Ok(CutTree {
            n,
            full,
            nodes,
            points,
            leaf_of,
            tin,
            tout,
            trace,
        })
    }

    /// Number of vertices of the original tree.
    pub fn n(&self) -> usize {
        self.n
    }

    /// True when every vertex is a leaf.
    pub fn is_full(&self) -> bool {
        self.full
    }

    pub fn nodes(&self) -> &[CutNode] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &CutNode {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Tracked vertices in leaf order.
    pub fn points(&self) -> &[Vertex] {
        &self.points
    }

    pub fn trace(&self) -> Option<&FragmentationTrace> {
        self.trace.as_ref()
    }

    pub fn internal_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].kind == NodeKind::Internal)
    }

    pub fn leaf_count(&self) -> usize {
        self.points.len()
    }

    pub fn leaf_of(&self, x: Vertex) -> Option<usize> {
        self.leaf_of.get(&x).copied()
    }

    fn leaf(&self, x: Vertex) -> Result<usize> {
        self.leaf_of(x)
            .ok_or_else(|| Error::Input(format!("vertex {x} is not a tracked point")))
    }

    /// True if `anc` is `node` or lies on the path from `node` to `ρ`.
    pub fn is_ancestor(&self, anc: usize, node: usize) -> bool {
        self.tin[anc] <= self.tin[node] && self.tout[node] <= self.tout[anc]
    }

    /// Lowest common ancestor of two nodes.
    pub fn mrca(&self, mut a: usize, b: usize) -> usize {
        while !self.is_ancestor(a, b) {
            a = self.nodes[a]
                .parent
                .expect("ρ is an ancestor of everything");
        }
        a
    }

    /// Branchpoint `i ∧ j` of two tracked points.
    pub fn meet(&self, i: Vertex, j: Vertex) -> Result<usize> {
        Ok(self.mrca(self.leaf(i)?, self.leaf(j)?))
    }

    /// Index of the child of `node` whose subtree contains `below`.
    pub fn side_toward(&self, node: usize, below: usize) -> Option<usize> {
        self.nodes[node]
            .children
            .iter()
            .position(|&c| self.is_ancestor(c, below))
    }

    /// Distance in `C` from `ρ` to a node.
    pub fn root_distance(&self, id: usize) -> f64 {
        self.nodes[id].root_dist
    }

    /// Distance in `C` between the leaves of two tracked points.
    pub fn leaf_distance(&self, i: Vertex, j: Vertex) -> Result<f64> {
        let (a, b) = (self.leaf(i)?, self.leaf(j)?);
        let m = self.mrca(a, b);
        Ok(self.nodes[a].root_dist + self.nodes[b].root_dist - 2.0 * self.nodes[m].root_dist)
    }

    /// Cut time recovered from a node's distance to `ρ`, by inverting the
    /// piecewise-linear map `t ↦ ℓ(x, t)` along the path.
    pub fn arrival_time(&self, id: usize) -> f64 {
        let mut path = vec![id];
        while let Some(p) = self.nodes[*path.last().expect("non-empty")].parent {
            path.push(p);
        }
        let mut remaining = self.nodes[id].root_dist;
        let mut t = 0.0;
        for &u in path.iter().rev() {
            for piece in &self.nodes[u].pieces {
                let len = piece.length();
                if len >= remaining {
                    return t + remaining / piece.mass;
                }
                remaining -= len;
                t += piece.end - piece.start;
            }
        }
        t
    }

    /// Leaves in the subtree of `id`, as vertices.
    pub fn leaves_below(&self, id: usize) -> Vec<Vertex> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(u) = stack.pop() {
            if let Some(x) = self.nodes[u].vertex {
                out.push(x);
            }
            stack.extend_from_slice(&self.nodes[u].children);
        }
        out.sort_unstable();
        out
    }

    /// Vertex set of the component represented by `id` at its cut.
    pub fn block(&self, id: usize) -> Result<Vec<Vertex>> {
        match (&self.trace, self.nodes[id].origin) {
            (Some(tr), Some(o)) => Ok(tr.block(o)),
            _ if self.full => Ok(self.leaves_below(id)),
            _ => input("blocks of a sampled cut-tree need its fragmentation trace"),
        }
    }

    /// True if vertex `x` lies in the component on side `side` of the cut
    /// at internal node `id`, immediately after that cut.
    pub fn side_contains(&self, id: usize, side: usize, x: Vertex) -> bool {
        let node = &self.nodes[id];
        if node.kind != NodeKind::Internal || side > 1 {
            return false;
        }
        match (&self.trace, node.origin) {
            (Some(tr), Some(o)) => {
                let c = tr.node_children(o).expect("internal nodes are merge nodes")[side];
                tr.block_contains(c, x)
            }
            _ => match self.leaf_of(x) {
                Some(l) if self.full => self.is_ancestor(node.children[side], l),
                _ => false,
            },
        }
    }

    /// `ν` in the given mode.
    pub fn nu_measure(&self, mode: NuMode) -> NuMeasure {
        let k = self.points.len() as f64;
        let len = self.nodes.len();
        let mut leaf = vec![0.0; len];
        let mut chips = vec![Vec::new(); len];
        for (id, node) in self.nodes.iter().enumerate() {
            match mode {
                NuMode::Exact => {
                    if node.kind == NodeKind::Leaf {
                        leaf[id] = node.leaf_mass;
                    }
                    chips[id] = node.chips.clone();
                }
                NuMode::Empirical => {
                    if node.kind == NodeKind::Leaf {
                        leaf[id] = 1.0 / k;
                    }
                }
            }
        }
        let mut subtree = leaf.clone();
        for id in (1..len).rev() {
            let p = self.nodes[id].parent.expect("non-root node has a parent");
            let edge_mass: f64 = chips[id].iter().map(|c| c.mass).sum();
            subtree[p] += subtree[id] + edge_mass;
        }
        NuMeasure {
            mode,
            leaf,
            chips,
            subtree,
        }
    }

    /// Signposts read off the cut edges.
    pub fn extract_routings(&self) -> SignpostMap {
        let posts = self
            .nodes
            .iter()
            .map(|node| node.cut.map(|c| [c.edge.lo(), c.edge.hi()]))
            .collect();
        SignpostMap { posts }
    }

    pub fn to_file(&self, nu: &NuMeasure) -> Result<CutTreeFile> {
        let posts = self.extract_routings();
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for (id, node) in self.nodes.iter().enumerate() {
            nodes.push(CutNodeRecord {
                id,
                parent: node.parent,
                kind: node.kind,
                block: if node.kind == NodeKind::Internal {
                    Some(self.block(id)?)
                } else {
                    None
                },
                time: node.cut.map(|c| c.time),
                cut_edge: node.cut.map(|c| c.edge.into()),
                signposts: posts.posts[id],
                nu: nu.subtree[id],
                vertex: node.vertex,
                leaf_mass: (node.kind == NodeKind::Leaf).then_some(node.leaf_mass),
                length: node.length,
                pieces: node.pieces.clone(),
                chips: node.chips.clone(),
            });
        }
        Ok(CutTreeFile {
            n: self.n,
            full: self.full,
            nodes,
        })
    }

    /// Rebuilds a cut-tree from its file form. The result has no trace;
    /// blocks and containment are then derived from the leaf sets, which
    /// requires a full cut-tree.
    pub fn from_file(file: CutTreeFile) -> Result<Self> {
        let mut nodes: Vec<CutNode> = Vec::with_capacity(file.nodes.len());
        for (id, rec) in file.nodes.iter().enumerate() {
            if rec.id != id {
                return input(format!("node records out of order at {id}"));
            }
            let mut node = CutNode::new(rec.parent, rec.kind);
            node.vertex = rec.vertex;
            node.leaf_mass = rec.leaf_mass.unwrap_or(0.0);
            node.pieces = rec.pieces.clone();
            node.chips = rec.chips.clone();
            if let (Some(time), Some(edge)) = (rec.time, rec.cut_edge) {
                node.cut = Some(Cut {
                    edge: edge.into(),
                    time,
                });
            }
            nodes.push(node);
        }
        for id in 1..nodes.len() {
            match nodes[id].parent {
                Some(p) if p < id => nodes[p].children.push(id),
                _ => return input(format!("node {id} has an invalid parent")),
            }
        }
        if nodes.first().map(|r| r.kind) != Some(NodeKind::Root) {
            return input("node 0 must be the root");
        }
        // Internal children must follow the cut edge's orientation.
        for id in 0..nodes.len() {
            if let (Some(cut), [a, b]) = (nodes[id].cut, nodes[id].children.as_slice()) {
                let lo_in_b = file_subtree_has(&nodes, *b, cut.edge.lo());
                if lo_in_b {
                    let (a, b) = (*a, *b);
                    nodes[id].children = vec![b, a];
                }
            }
        }
        Self::finish(file.n, file.full, nodes, None)
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_file(serde_json::from_str(&text)?)
    }
}

fn file_subtree_has(nodes: &[CutNode], id: usize, x: Vertex) -> bool {
    let mut stack = vec![id];
    while let Some(u) = stack.pop() {
        if nodes[u].vertex == Some(x) {
            return true;
        }
        stack.extend_from_slice(&nodes[u].children);
    }
    false
}

/// Serialized cut-tree.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CutTreeFile {
    pub n: usize,
    pub full: bool,
    pub nodes: Vec<CutNodeRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CutNodeRecord {
    pub id: usize,
    pub parent: Option<usize>,
    pub kind: NodeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block: Option<Vec<Vertex>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cut_edge: Option<[Vertex; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signposts: Option<[Vertex; 2]>,
    /// `ν` of the subtree at and above this node.
    pub nu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertex: Option<Vertex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leaf_mass: Option<f64>,
    pub length: f64,
    #[serde(default)]
    pub pieces: Vec<Piece>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub chips: Vec<Chip>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NuMode {
    /// Masses of the original tree: leaf atoms plus frozen chips.
    Exact,
    /// `1/k` on each of the `k` tracked leaves.
    Empirical,
}

/// A probability measure on the cut-tree.
#[derive(Clone, Debug, PartialEq)]
pub struct NuMeasure {
    pub mode: NuMode,
    /// Atom at each leaf.
    pub leaf: Vec<f64>,
    /// Atoms on the edge above each node.
    pub chips: Vec<Vec<Chip>>,
    /// `ν` of the subtree above each node (the node's own edge excluded).
    pub subtree: Vec<f64>,
}

impl NuMeasure {
    pub fn total(&self) -> f64 {
        self.subtree[0]
    }

    /// `ν(C_z)` for `z` inside piece `piece` of the edge above `node`.
    pub fn above_piece(&self, tree: &CutTree, node: usize, piece: usize) -> f64 {
        let end = tree.nodes[node].pieces[piece].end;
        self.subtree[node]
            + self.chips[node]
                .iter()
                .filter(|c| c.time >= end)
                .map(|c| c.mass)
                .sum::<f64>()
    }
}

/// Signposts per internal node, oriented as the node's children.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignpostMap {
    pub posts: Vec<Option<[Vertex; 2]>>,
}

impl SignpostMap {
    pub fn get(&self, node: usize) -> Option<[Vertex; 2]> {
        self.posts.get(node).copied().flatten()
    }

    /// First internal node whose signpost is missing or outside its side.
    pub fn containment_violation(&self, tree: &CutTree) -> Option<usize> {
        tree.internal_nodes().find(|&id| match self.get(id) {
            Some([a, b]) => !(tree.side_contains(id, 0, a) && tree.side_contains(id, 1, b)),
            None => true,
        })
    }
}

/// A routing for one ordered pair, indexed like a binary heap: index 1 is
/// `∅` and the children of index `h` are `2h` (suffix 0) and `2h + 1`
/// (suffix 1). Entries at levels `1..=depth` are filled.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Routing {
    pub depth: usize,
    pub r: Vec<Vertex>,
}

impl Routing {
    /// Entry for the binary word given as bits, most significant first.
    pub fn at(&self, word: &[u8]) -> Vertex {
        self.r[heap_index(word)]
    }
}

/// Heap index of a binary word.
pub fn heap_index(word: &[u8]) -> usize {
    word.iter().fold(1, |h, &bit| 2 * h + usize::from(bit))
}

/// Anything that yields routings between tracked points.
pub trait RoutingSource {
    fn routing(&self, tree: &CutTree, i: Vertex, j: Vertex, depth: usize) -> Result<Routing>;
}

impl RoutingSource for SignpostMap {
    fn routing(&self, tree: &CutTree, i: Vertex, j: Vertex, depth: usize) -> Result<Routing> {
        if !tree.is_full() {
            return input("routings need a full cut-tree");
        }
        let mut r = vec![0; 1 << (depth + 1)];
        if depth == 0 {
            return Ok(Routing { depth, r });
        }
        r[2] = i;
        r[3] = j;
        for h in 2..(1 << depth) {
            let (x, y) = (r[h], r[h ^ 1]);
            r[2 * h] = x;
            r[2 * h + 1] = if x == y {
                x
            } else {
                let (lx, ly) = (tree.leaf(x)?, tree.leaf(y)?);
                let v = tree.mrca(lx, ly);
                let side = tree
                    .side_toward(v, lx)
                    .expect("leaf lies below its ancestor");
                let posts = self.get(v).ok_or(Error::Reconstruction {
                    node: v,
                    reason: "missing signpost".into(),
                })?;
                posts[side]
            };
        }
        Ok(Routing { depth, r })
    }
}

/// Explicitly tabulated routings, e.g. to probe the consistency checker.
#[derive(Clone, Debug, Default)]
pub struct RoutingTable {
    pub table: HashMap<(Vertex, Vertex), Routing>,
}

impl RoutingTable {
    /// Tabulates `source` on all ordered pairs of tracked points.
    pub fn tabulate(source: &impl RoutingSource, tree: &CutTree, depth: usize) -> Result<Self> {
        let mut table = HashMap::new();
        for &i in tree.points() {
            for &j in tree.points() {
                if i != j {
                    table.insert((i, j), source.routing(tree, i, j, depth)?);
                }
            }
        }
        Ok(RoutingTable { table })
    }

    pub fn set(&mut self, i: Vertex, j: Vertex, word: &[u8], value: Vertex) {
        if let Some(rt) = self.table.get_mut(&(i, j)) {
            rt.r[heap_index(word)] = value;
        }
    }
}

impl RoutingSource for RoutingTable {
    fn routing(&self, _tree: &CutTree, i: Vertex, j: Vertex, depth: usize) -> Result<Routing> {
        let rt = self
            .table
            .get(&(i, j))
            .ok_or_else(|| Error::Input(format!("no routing tabulated for ({i}, {j})")))?;
        if rt.depth < depth {
            return input(format!(
                "routing for ({i}, {j}) only reaches depth {}",
                rt.depth
            ));
        }
        Ok(Routing {
            depth,
            r: rt.r[..1 << (depth + 1)].to_vec(),
        })
    }
}

/// Outcome of [`check_consistency`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConsistencyReport {
    pub routing_failures: usize,
    pub condition1_failures: usize,
    pub condition2_failures: usize,
    pub condition3_failures: usize,
    pub first_violation: Option<String>,
}

impl ConsistencyReport {
    pub fn is_consistent(&self) -> bool {
        self.routing_failures
            + self.condition1_failures
            + self.condition2_failures
            + self.condition3_failures
            == 0
    }

    fn note(&mut self, msg: impl FnOnce() -> String) {
        if self.first_violation.is_none() {
            self.first_violation = Some(msg());
        }
    }
}

/// Checks the routing property and the three consistency conditions over all
/// ordered pairs of tracked points, for words of length up to `depth`
/// (at least 2).
pub fn check_consistency(
    source: &impl RoutingSource,
    tree: &CutTree,
    depth: usize,
) -> Result<ConsistencyReport> {
    let depth = depth.max(2);
    let table = RoutingTable::tabulate(source, tree, depth)?;
    let mut rep = ConsistencyReport {
        routing_failures: 0,
        condition1_failures: 0,
        condition2_failures: 0,
        condition3_failures: 0,
        first_violation: None,
    };
    let mut keys: Vec<(Vertex, Vertex)> = table.table.keys().copied().collect();
    keys.sort_unstable();
    let mut direction_posts: HashMap<(usize, usize), Vertex> = HashMap::new();
    for &(i, j) in &keys {
        let r = &table.table[&(i, j)].r;
        // Routing property.
        let mut ok = r[2] == i && r[3] == j;
        for h in 2..(1 << depth) {
            ok &= r[2 * h] == r[h];
        }
        for g in 1..(1 << (depth - 1)) {
            let (x, y) = (r[2 * g], r[2 * g + 1]);
            let (sx, sy) = (r[4 * g + 1], r[4 * g + 3]);
            ok &= if x == y {
                sx == x && sy == x
            } else {
                is_signpost(tree, x, y, sx, sy)
            };
        }
        if !ok {
            rep.routing_failures += 1;
            rep.note(|| format!("({i}, {j}) is not a routing"));
        }
        // (1): r^{ij}_{0b} = r^{ji}_{1b}.
        let rev = &table.table[&(j, i)].r;
        let mut ok1 = true;
        for level in 0..depth {
            for v in 0..(1usize << level) {
                ok1 &= r[(1 << (level + 1)) + v] == rev[(1 << (level + 1)) + (1 << level) + v];
            }
        }
        if !ok1 {
            rep.condition1_failures += 1;
            rep.note(|| format!("condition (1) fails for ({i}, {j})"));
        }
        // (2): sub-routings are the routings of their endpoints.
        let mut ok2 = true;
        for g in 2..(1 << depth) {
            let (k, l) = (r[2 * g], r[2 * g + 1]);
            if k == l {
                continue;
            }
            let Some(sub) = table.table.get(&(k, l)) else {
                continue;
            };
            let mut scale = 2;
            while g * scale < (1 << (depth + 1)) {
                for va in 0..scale {
                    ok2 &= sub.r[scale + va] == r[g * scale + va];
                }
                scale *= 2;
            }
        }
        if !ok2 {
            rep.condition2_failures += 1;
            rep.note(|| format!("condition (2) fails for ({i}, {j})"));
        }
        // (3): one signpost per branchpoint and direction.
        let (li, lj) = (tree.leaf(i)?, tree.leaf(j)?);
        let v = tree.mrca(li, lj);
        let side = tree
            .side_toward(v, li)
            .expect("leaf lies below its ancestor");
        let post = r[5];
        match direction_posts.insert((v, side), post) {
            Some(prev) if prev != post => {
                rep.condition3_failures += 1;
                rep.note(|| {
                    format!("condition (3) fails at node {v}: {prev} vs {post} via ({i}, {j})")
                });
            }
            _ => {}
        }
    }
    Ok(rep)
}

/// `(sx, sy)` is a signpost for leaves `x ≠ y`: each lies in the subtree
/// above `x ∧ y` containing its partner.
fn is_signpost(tree: &CutTree, x: Vertex, y: Vertex, sx: Vertex, sy: Vertex) -> bool {
    let leaves = [x, y, sx, sy].map(|v| tree.leaf_of(v));
    let [Some(lx), Some(ly), Some(lsx), Some(lsy)] = leaves else {
        return false;
    };
    let v = tree.mrca(lx, ly);
    let (Some(a), Some(b)) = (tree.side_toward(v, lx), tree.side_toward(v, ly)) else {
        return false;
    };
    tree.side_toward(v, lsx) == Some(a) && tree.side_toward(v, lsy) == Some(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::DiscreteTree;

    fn path_example() -> (MeasuredTree, CutSchedule) {
        let t = MeasuredTree::uniform(DiscreteTree::from_parents(1, vec![0, 1, 2]).unwrap());
        let s = CutSchedule::from_pairs(&[((1, 2), 1.0), ((2, 3), 2.0)]).unwrap();
        (t, s)
    }

    #[test]
    fn two_vertex_shape() {
        let t = MeasuredTree::uniform(DiscreteTree::from_parents(1, vec![0, 1]).unwrap());
        let s = CutSchedule::from_pairs(&[((1, 2), 0.7)]).unwrap();
        let ct = build_cut_tree(&t, &s, &Points::All).unwrap();
        assert_eq!(ct.len(), 4);
        assert_eq!(ct.node(0).children, vec![1]);
        let v = ct.node(1);
        assert_eq!(v.kind, NodeKind::Internal);
        assert_eq!(ct.block(1).unwrap(), vec![1, 2]);
        assert_eq!(ct.extract_routings().get(1), Some([1, 2]));
        assert_eq!(
            v.children
                .iter()
                .map(|&c| ct.node(c).vertex.unwrap())
                .collect::<Vec<_>>(),
            vec![1, 2]
        );
        assert!((v.length - 0.7).abs() < 1e-15);
    }

    #[test]
    fn path_shape_and_signposts() {
        let (t, s) = path_example();
        let ct = build_cut_tree(&t, &s, &Points::All).unwrap();
        let top = ct.node(0).children[0];
        assert_eq!(ct.block(top).unwrap(), vec![1, 2, 3]);
        let [left, right] = [ct.node(top).children[0], ct.node(top).children[1]];
        assert_eq!(ct.node(left).vertex, Some(1));
        assert_eq!(ct.block(right).unwrap(), vec![2, 3]);
        let below: Vec<_> = ct
            .node(right)
            .children
            .iter()
            .map(|&c| ct.node(c).vertex.unwrap())
            .collect();
        assert_eq!(below, vec![2, 3]);
        let posts = ct.extract_routings();
        assert_eq!(posts.get(top), Some([1, 2]));
        assert_eq!(posts.get(right), Some([2, 3]));
        assert!(posts.containment_violation(&ct).is_none());
        assert_eq!(ct.internal_nodes().count(), 2);
    }

    #[test]
    fn path_distances_are_ell_and_d() {
        let (t, s) = path_example();
        let ct = build_cut_tree(&t, &s, &Points::All).unwrap();
        assert!((ct.root_distance(ct.leaf_of(1).unwrap()) - 1.0).abs() < 1e-15);
        assert!((ct.root_distance(ct.leaf_of(3).unwrap()) - 5.0 / 3.0).abs() < 1e-15);
        assert!((ct.leaf_distance(1, 3).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        for id in ct.internal_nodes() {
            assert!((ct.arrival_time(id) - ct.node(id).cut.unwrap().time).abs() < 1e-12);
        }
    }

    #[test]
    fn sampled_points_freeze_chips() {
        let (t, s) = path_example();
        let ct = build_cut_tree(&t, &s, &Points::Sample(vec![3, 2])).unwrap();
        assert_eq!(ct.leaf_count(), 2);
        // Vertex 1 breaks off at t = 1 as a chip on the edge above {2,3}.
        let top = ct.node(0).children[0];
        assert_eq!(
            ct.node(top).chips,
            vec![Chip {
                time: 1.0,
                mass: 1.0 / 3.0
            }]
        );
        assert_eq!(ct.node(top).pieces.len(), 2);
        let nu = ct.nu_measure(NuMode::Exact);
        assert!((nu.total() - 1.0).abs() < 1e-15);
        assert!((nu.above_piece(&ct, top, 0) - 1.0).abs() < 1e-15);
        assert!((nu.above_piece(&ct, top, 1) - 2.0 / 3.0).abs() < 1e-15);
        let emp = ct.nu_measure(NuMode::Empirical);
        assert!((emp.total() - 1.0).abs() < 1e-15);
        assert_eq!(ct.extract_routings().get(top), Some([2, 3]));
        assert!(ct.extract_routings().containment_violation(&ct).is_none());
    }

    #[test]
    fn rejects_bad_points() {
        let (t, s) = path_example();
        assert!(build_cut_tree(&t, &s, &Points::Sample(vec![1, 1])).is_err());
        assert!(build_cut_tree(&t, &s, &Points::Sample(vec![4])).is_err());
        assert!(build_cut_tree(&t, &s, &Points::Sample(vec![])).is_err());
        let partial = CutSchedule::from_pairs(&[((1, 2), 1.0)]).unwrap();
        assert!(build_cut_tree(&t, &partial, &Points::Sample(vec![2, 3])).is_err());
        assert!(build_cut_tree(&t, &partial, &Points::Sample(vec![1, 3])).is_ok());
    }

    #[test]
    fn path_routings_consistent_and_mutations_detected() {
        let (t, s) = path_example();
        let ct = build_cut_tree(&t, &s, &Points::All).unwrap();
        let posts = ct.extract_routings();
        assert!(check_consistency(&posts, &ct, 4).unwrap().is_consistent());
        let r13 = posts.routing(&ct, 1, 3, 3).unwrap();
        assert_eq!((r13.at(&[0, 1]), r13.at(&[1, 1])), (1, 2));
        assert_eq!((r13.at(&[1, 0, 1]), r13.at(&[1, 1, 1])), (3, 2));

        let top = ct.node(0).children[0];
        let mut swapped = posts.clone();
        swapped.posts[top] = Some([2, 1]);
        assert!(swapped.containment_violation(&ct).is_some());
        assert!(!check_consistency(&swapped, &ct, 3).unwrap().is_consistent());

        // Pointing 1 → 3 at vertex 3 instead of 2 is a valid routing on its
        // own but disagrees with the routing 2 → 1 in the same direction.
        let mut table = RoutingTable::tabulate(&posts, &ct, 2).unwrap();
        table.set(1, 3, &[1, 1], 3);
        table.set(3, 1, &[0, 1], 3);
        let rep = check_consistency(&table, &ct, 2).unwrap();
        assert_eq!(rep.routing_failures, 0);
        assert_eq!(rep.condition1_failures, 0);
        assert!(rep.condition3_failures > 0);
    }

    #[test]
    fn json_roundtrip_keeps_geometry() {
        let (t, s) = path_example();
        let ct = build_cut_tree(&t, &s, &Points::All).unwrap();
        let nu = ct.nu_measure(NuMode::Exact);
        let text = serde_json::to_string(&ct.to_file(&nu).unwrap()).unwrap();
        let back = CutTree::from_file(serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(
            back.nodes(),
            ct.nodes()
                .iter()
                .cloned()
                .map(|mut n| {
                    n.origin = None;
                    n
                })
                .collect::<Vec<_>>()
                .as_slice()
        );
        assert_eq!(back.extract_routings(), ct.extract_routings());
        assert!(back
            .extract_routings()
            .containment_violation(&back)
            .is_none());
        assert_eq!(back.nu_measure(NuMode::Exact), nu);
    }
}
