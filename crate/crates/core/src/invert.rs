//! Inverting the cut-tree transform.
//!
//! Discretely the signposts are exactly the cut edges, so the tree, the
//! cut order and (through `τ`) the cut times come back exactly. The
//! continuum estimators follow a routing level by level: every routed
//! segment `(x, s)` splits at `x ∧ s` into two segments whose `ν`-masses
//! `M_b` feed the partial sums `Y_n = Σ_{|b| = n} M_b^β`, `β = 1 - 1/α`.

use statrs::function::gamma::gamma;

use crate::cuttree::{CutTree, NodeKind, NuMeasure, SignpostMap};
use crate::error::{input, Error, Result};
use crate::fragment::{Cut, CutSchedule, IntensityMode};
use crate::trees::{DiscreteTree, Edge, MeasuredTree, Vertex};

fn reconstruction(node: usize, reason: impl Into<String>) -> Error {
    Error::Reconstruction {
        node,
        reason: reason.into(),
    }
}

/// The tree whose edges are the signpost pairs, rooted at vertex 1.
pub fn reconstruct_discrete(tree: &CutTree, posts: &SignpostMap) -> Result<DiscreteTree> {
    if !tree.is_full() {
        return input("discrete reconstruction needs a full cut-tree");
    }
    let mut edges = Vec::with_capacity(tree.n().saturating_sub(1));
    for id in tree.internal_nodes() {
        let [a, b] = posts
            .get(id)
            .ok_or_else(|| reconstruction(id, "missing signpost"))?;
        if !(tree.side_contains(id, 0, a) && tree.side_contains(id, 1, b)) {
            return Err(reconstruction(
                id,
                format!("signpost ({a}, {b}) leaves its subtree"),
            ));
        }
        edges.push((id, Edge::new(a, b)));
    }
    tree_from_signpost_pairs(tree.n(), &edges)
}

/// The tree on `1..=n` whose edges are the given signpost pairs, rooted at
/// vertex 1. Each pair is tagged with the node that carries it.
pub fn tree_from_signpost_pairs(n: usize, pairs: &[(usize, Edge)]) -> Result<DiscreteTree> {
    if pairs.len() + 1 != n {
        let node = pairs.first().map_or(0, |&(id, _)| id);
        return Err(reconstruction(
            node,
            format!("{} signposts for {n} vertices", pairs.len()),
        ));
    }
    let list: Vec<Edge> = pairs.iter().map(|&(_, e)| e).collect();
    DiscreteTree::from_edges(n, &list, 1).map_err(|e| {
        let node = pairs.first().map_or(0, |&(id, _)| id);
        reconstruction(node, e.to_string())
    })
}

/// The `i`–`j` path, found by splitting at `i ∧ j` along its signposts and
/// recursing on both halves.
pub fn path_recovery(
    tree: &CutTree,
    posts: &SignpostMap,
    i: Vertex,
    j: Vertex,
) -> Result<Vec<Vertex>> {
    if !tree.is_full() {
        return input("path recovery needs a full cut-tree");
    }
    let leaf = |x: Vertex| {
        tree.leaf_of(x)
            .ok_or_else(|| Error::Input(format!("vertex {x} is not a leaf")))
    };
    let mut out = Vec::new();
    // Segments still to walk, last on top; every split shrinks the block.
    let mut stack = vec![(i, j)];
    let mut budget = 2 * tree.n() + 2;
    while let Some((x, y)) = stack.pop() {
        budget = budget
            .checked_sub(1)
            .ok_or_else(|| reconstruction(0, "signpost walk does not terminate"))?;
        if x == y {
            if out.last() != Some(&x) {
                out.push(x);
            }
            continue;
        }
        let (lx, ly) = (leaf(x)?, leaf(y)?);
        let v = tree.mrca(lx, ly);
        let side = tree
            .side_toward(v, lx)
            .ok_or_else(|| reconstruction(v, "leaf not below node"))?;
        let posts = posts
            .get(v)
            .ok_or_else(|| reconstruction(v, "missing signpost"))?;
        let (sx, sy) = (posts[side], posts[1 - side]);
        stack.push((sy, y));
        stack.push((x, sx));
    }
    Ok(out)
}

/// `2Γ(2 - 1/α) / (α Γ(3 - 2/α))`: the mean distance between two
/// `μ`-points when `α · d` is size-biased Mittag-Leffler of index `1 - 1/α`.
/// Equals `√π / 2` at `α = 2`.
pub fn delta_constant(alpha: f64) -> Result<f64> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(Error::Domain(format!("alpha = {alpha} outside (1, 2]")));
    }
    Ok(2.0 * gamma(2.0 - 1.0 / alpha) / (alpha * gamma(3.0 - 2.0 / alpha)))
}

/// One routed segment at the current level: the word `b` has `R_b = point`,
/// `R_{b1} = partner` and mass `M_b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub point: Vertex,
    pub partner: Vertex,
    pub mass: f64,
    /// First letter of `b` (0 or 1).
    pub branch: u8,
}

impl Segment {
    /// A segment whose endpoints coincide can no longer split.
    pub fn is_frozen(&self) -> bool {
        self.point == self.partner
    }
}

/// `(Y_n, Y_n^0, Y_n^1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct YLevel {
    pub y: f64,
    pub y0: f64,
    pub y1: f64,
}

/// The level-`n` routing frontier of a pair of leaves. Segments are kept in
/// lexicographic order of their words, so every reduction is deterministic.
#[derive(Clone, Debug)]
pub struct RoutingFrontier<'a> {
    tree: &'a CutTree,
    posts: &'a SignpostMap,
    nu: &'a NuMeasure,
    beta: f64,
    level: usize,
    segments: Vec<Segment>,
}

impl<'a> RoutingFrontier<'a> {
    pub fn new(
        tree: &'a CutTree,
        posts: &'a SignpostMap,
        nu: &'a NuMeasure,
        i: Vertex,
        j: Vertex,
        alpha: f64,
    ) -> Result<Self> {
        delta_constant(alpha)?;
        if !tree.is_full() {
            return input("routing frontiers need a full cut-tree");
        }
        if i == j {
            return input("routing needs two distinct points");
        }
        for x in [i, j] {
            if tree.leaf_of(x).is_none() {
                return input(format!("vertex {x} is not a leaf"));
            }
        }
        Ok(RoutingFrontier {
            tree,
            posts,
            nu,
            beta: 1.0 - 1.0 / alpha,
            level: 0,
            segments: vec![Segment {
                point: i,
                partner: j,
                mass: 1.0,
                branch: 0,
            }],
        })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// True once no segment can split: deeper levels repeat this one.
    pub fn is_exhausted(&self) -> bool {
        self.level > 0 && self.segments.iter().all(Segment::is_frozen)
    }

    /// `(Y_n, Y_n^0, Y_n^1)` at the current level. At level 0 the branch
    /// sums are empty and `Y_0 = 1`.
    pub fn y(&self) -> YLevel {
        if self.level == 0 {
            return YLevel {
                y: 1.0,
                y0: 0.0,
                y1: 0.0,
            };
        }
        let (mut y0, mut y1) = (0.0, 0.0);
        for s in &self.segments {
            let term = s.mass.powf(self.beta);
            if s.branch == 0 {
                y0 += term;
            } else {
                y1 += term;
            }
        }
        YLevel { y: y0 + y1, y0, y1 }
    }

    fn split(&self, seg: &Segment, out: &mut Vec<Segment>) -> Result<()> {
        if seg.is_frozen() {
            out.push(*seg);
            return Ok(());
        }
        let (x, s) = (seg.point, seg.partner);
        let leaf = |v: Vertex| {
            self.tree
                .leaf_of(v)
                .ok_or_else(|| reconstruction(0, format!("vertex {v} is not a leaf")))
        };
        let (lx, ls) = (leaf(x)?, leaf(s)?);
        let v = self.tree.mrca(lx, ls);
        let posts = self
            .posts
            .get(v)
            .ok_or_else(|| reconstruction(v, "missing signpost"))?;
        for (point, l) in [(x, lx), (s, ls)] {
            let side = self
                .tree
                .side_toward(v, l)
                .ok_or_else(|| reconstruction(v, "leaf not below node"))?;
            let mass = branch_mass(self.tree, self.nu, v, side);
            if !(mass > 0.0) {
                return Err(Error::Degenerate(format!("zero ν-mass above node {v}")));
            }
            out.push(Segment {
                point,
                partner: posts[side],
                mass,
                branch: if self.level == 0 {
                    (point == s) as u8
                } else {
                    seg.branch
                },
            });
        }
        Ok(())
    }

    /// Advances one level.
    pub fn step(&mut self) -> Result<()> {
        let mut next = Vec::with_capacity(2 * self.segments.len());
        for seg in &self.segments {
            self.split(seg, &mut next)?;
        }
        self.segments = next;
        self.level += 1;
        Ok(())
    }
}

/// `ν` of the subtree above internal node `v` on side `side`, edge included.
pub fn branch_mass(tree: &CutTree, nu: &NuMeasure, v: usize, side: usize) -> f64 {
    let c = tree.node(v).children[side];
    nu.subtree[c] + nu.chips[c].iter().map(|ch| ch.mass).sum::<f64>()
}

/// Partial sums along a routing.
#[derive(Clone, Debug, PartialEq)]
pub struct YPartial {
    /// `levels[n]` holds `(Y_n, Y_n^0, Y_n^1)`.
    pub levels: Vec<YLevel>,
    /// First level at which every segment is frozen, if reached.
    pub exhaustion: Option<usize>,
}

impl YPartial {
    pub fn last(&self) -> YLevel {
        *self.levels.last().expect("level 0 is always present")
    }

    /// True if the requested depth reached or passed exhaustion.
    pub fn is_exhausted(&self) -> bool {
        self.exhaustion.is_some()
    }
}

/// `Y_n, Y_n^0, Y_n^1` for `n = 0..=depth`, stopping early at exhaustion
/// (frozen segments keep contributing, so deeper levels would repeat).
pub fn y_partial(
    tree: &CutTree,
    posts: &SignpostMap,
    nu: &NuMeasure,
    i: Vertex,
    j: Vertex,
    depth: usize,
    alpha: f64,
) -> Result<YPartial> {
    let mut f = RoutingFrontier::new(tree, posts, nu, i, j, alpha)?;
    let mut levels = vec![f.y()];
    let mut exhaustion = None;
    while f.level() < depth {
        f.step()?;
        levels.push(f.y());
        if f.is_exhausted() {
            exhaustion = Some(f.level());
            break;
        }
    }
    Ok(YPartial { levels, exhaustion })
}

/// `(δ_C(i, j), δ_C(i, i ∧ j), δ_C(j, i ∧ j))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaC {
    pub full: f64,
    pub from_i: f64,
    pub from_j: f64,
    pub level: usize,
    pub exhausted: bool,
}

/// Distance estimates from the routing of `(i, j)` at the given depth.
/// A depth of 1 or more is needed for the one-sided estimates.
pub fn delta_c(
    tree: &CutTree,
    posts: &SignpostMap,
    nu: &NuMeasure,
    i: Vertex,
    j: Vertex,
    depth: usize,
    alpha: f64,
) -> Result<DeltaC> {
    let c = delta_constant(alpha)?;
    let yp = y_partial(tree, posts, nu, i, j, depth.max(1), alpha)?;
    let last = yp.last();
    let (from_i, from_j) = (c * last.y0, c * last.y1);
    Ok(DeltaC {
        full: from_i + from_j,
        from_i,
        from_j,
        level: yp.levels.len() - 1,
        exhausted: yp.is_exhausted(),
    })
}

/// Default depth: `min(exhaustion, 2 log2 n)`.
pub fn default_depth(n: usize) -> usize {
    (2.0 * (n.max(2) as f64).log2()).ceil() as usize
}

/// `∫ 1/ν(C_z) dz` along `ρ → node`, summed piece by piece.
pub fn tau_to_node(tree: &CutTree, nu: &NuMeasure, node: usize) -> Result<f64> {
    let mut acc = 0.0;
    let mut u = node;
    while let Some(p) = tree.node(u).parent {
        for (k, piece) in tree.node(u).pieces.iter().enumerate() {
            let mass = nu.above_piece(tree, u, k);
            if !(mass > 0.0) {
                return Err(Error::Degenerate(format!("zero ν-mass above node {u}")));
            }
            acc += piece.length() / mass;
        }
        u = p;
    }
    Ok(acc)
}

/// A location on the recovered path: `offset ∈ [0, 1]` of the way along
/// `edge` from `from` to its other endpoint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathPoint {
    pub edge: Edge,
    pub from: Vertex,
    pub offset: f64,
}

/// `(τ(i, j), π(i, j))`: `π` sits at distance `δ_C(i, i ∧ j)` from `i` on
/// the recovered `i`–`j` path whose edges have length `edge_len`.
#[allow(clippy::too_many_arguments)]
pub fn tau_pi(
    tree: &CutTree,
    posts: &SignpostMap,
    nu: &NuMeasure,
    i: Vertex,
    j: Vertex,
    alpha: f64,
    depth: usize,
    edge_len: f64,
) -> Result<(f64, PathPoint)> {
    let v = tree.meet(i, j)?;
    let tau = tau_to_node(tree, nu, v)?;
    let delta = delta_c(tree, posts, nu, i, j, depth, alpha)?;
    let path = path_recovery(tree, posts, i, j)?;
    Ok((tau, point_on_path(&path, delta.from_i, edge_len)?))
}

/// The point at distance `dist` from `path[0]` along a path of equal edges.
pub fn point_on_path(path: &[Vertex], dist: f64, edge_len: f64) -> Result<PathPoint> {
    if path.len() < 2 {
        return input("path has no edges");
    }
    if !(edge_len > 0.0) {
        return input("edge length must be positive");
    }
    let steps = dist / edge_len;
    let k = (steps.floor().max(0.0) as usize).min(path.len() - 2);
    Ok(PathPoint {
        edge: Edge::new(path[k], path[k + 1]),
        from: path[k],
        offset: (steps - k as f64).clamp(0.0, 1.0),
    })
}

/// The reconstructed triple: tree, tracked points and cut schedule.
#[derive(Clone, Debug)]
pub struct Inversion {
    pub tree: MeasuredTree,
    pub points: Vec<Vertex>,
    pub schedule: CutSchedule,
}

/// Continuum-mode output: the discrete topology with one fitted edge length.
#[derive(Clone, Debug)]
pub struct ContinuumInversion {
    pub inversion: Inversion,
    pub fitted_edge_len: f64,
    /// `(i, j, δ_C(i, j), hop count)` for every pair used in the fit.
    pub pairs: Vec<(Vertex, Vertex, f64, usize)>,
    pub four_point_violations: usize,
    pub quadruples_checked: usize,
}

fn invert_common(
    tree: &CutTree,
    posts: &SignpostMap,
    nu: &NuMeasure,
    edge_len: f64,
) -> Result<Inversion> {
    let topology = reconstruct_discrete(tree, posts)?;
    let n = tree.n();
    let mut mass = vec![0.0; n];
    for &x in tree.points() {
        let leaf = tree.leaf_of(x).expect("points are leaves");
        mass[x - 1] = nu.leaf[leaf];
    }
    let measured = MeasuredTree::new(topology, vec![edge_len; n], mass)?;
    // τ at every internal node, accumulated from the root down.
    let mut tau = vec![0.0; tree.len()];
    let mut cuts = Vec::new();
    for id in 1..tree.len() {
        let node = tree.node(id);
        let p = node.parent.expect("non-root node has a parent");
        let mut acc = tau[p];
        for (k, piece) in node.pieces.iter().enumerate() {
            let m = nu.above_piece(tree, id, k);
            if !(m > 0.0) {
                return Err(Error::Degenerate(format!("zero ν-mass above node {id}")));
            }
            acc += piece.length() / m;
        }
        tau[id] = acc;
        if node.kind == NodeKind::Internal {
            let [a, b] = posts
                .get(id)
                .ok_or_else(|| reconstruction(id, "missing signpost"))?;
            cuts.push(Cut {
                edge: Edge::new(a, b),
                time: acc,
            });
        }
    }
    let schedule = CutSchedule::new(cuts, IntensityMode::Length, 1.0)?;
    Ok(Inversion {
        tree: measured,
        points: tree.points().to_vec(),
        schedule,
    })
}

/// Discrete inversion. Edge lengths cannot be read off a discrete cut-tree,
/// so every edge gets `edge_len`.
pub fn invert_discrete(
    tree: &CutTree,
    posts: &SignpostMap,
    nu: &NuMeasure,
    edge_len: f64,
) -> Result<Inversion> {
    invert_common(tree, posts, nu, edge_len)
}

/// Continuum inversion: topology from the signposts, a single edge length
/// fitted by least squares to `δ_C` over `pairs`, and a four-point check of
/// the `δ_C` matrix on the points involved.
pub fn invert_continuum(
    tree: &CutTree,
    posts: &SignpostMap,
    nu: &NuMeasure,
    alpha: f64,
    depth: usize,
    pairs: &[(Vertex, Vertex)],
) -> Result<ContinuumInversion> {
    if pairs.is_empty() {
        return input("at least one pair is required");
    }
    let topology = reconstruct_discrete(tree, posts)?;
    let mut rows = Vec::with_capacity(pairs.len());
    let (mut num, mut den) = (0.0, 0.0);
    for &(i, j) in pairs {
        let d = delta_c(tree, posts, nu, i, j, depth, alpha)?.full;
        let h = topology.hop_distance(i, j)?;
        num += d * h as f64;
        den += (h * h) as f64;
        rows.push((i, j, d, h));
    }
    if den == 0.0 {
        return Err(Error::Degenerate("all pairs coincide".into()));
    }
    let fitted = num / den;
    let inversion = invert_common(tree, posts, nu, fitted)?;

    let mut pts: Vec<Vertex> = pairs.iter().flat_map(|&(i, j)| [i, j]).collect();
    pts.sort_unstable();
    pts.dedup();
    let index = |x: Vertex| pts.binary_search(&x).expect("collected above");
    let m = pts.len();
    let mut dist = vec![vec![f64::NAN; m]; m];
    for &(i, j, d, _) in &rows {
        dist[index(i)][index(j)] = d;
        dist[index(j)][index(i)] = d;
    }
    for (a, row) in dist.iter_mut().enumerate() {
        row[a] = 0.0;
    }
    let (violations, checked) = four_point_violations(&dist, 1e-6);
    Ok(ContinuumInversion {
        inversion,
        fitted_edge_len: fitted,
        pairs: rows,
        four_point_violations: violations,
        quadruples_checked: checked,
    })
}

/// Counts quadruples breaking the four-point condition: of the three
/// pairings' sums, the largest two must agree (up to `rel_tol` of the
/// largest). Quadruples with an unknown distance are skipped.
pub fn four_point_violations(dist: &[Vec<f64>], rel_tol: f64) -> (usize, usize) {
    let m = dist.len();
    let (mut bad, mut checked) = (0, 0);
    for a in 0..m {
        for b in a + 1..m {
            for c in b + 1..m {
                for d in c + 1..m {
                    let mut s = [
                        dist[a][b] + dist[c][d],
                        dist[a][c] + dist[b][d],
                        dist[a][d] + dist[b][c],
                    ];
                    if s.iter().any(|x| x.is_nan()) {
                        continue;
                    }
                    s.sort_by(f64::total_cmp);
                    checked += 1;
                    if s[2] - s[1] > rel_tol * s[2].max(1e-300) {
                        bad += 1;
                    }
                }
            }
        }
    }
    (bad, checked)
}
