//! Random tree ensembles and seeded random streams.
//!
//! Every generator takes any [`rand::Rng`]; [`RngStream`] is the seeded
//! source used throughout the crate. A stream is identified by
//! `(seed, stream_index)` and its ChaCha8 key is
//! `mix64(seed ^ stream_index * 0x9E3779B97F4A7C15)`, where `mix64` is the
//! splitmix64 finaliser.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{input, Result};
use crate::trees::{decode_prufer, DiscreteTree, MeasuredTree, Vertex};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// The splitmix64 output mixer: a bijective 64-bit avalanche function.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A reproducible random stream. Equal `(seed, stream_index)` give
/// bit-identical draws.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        let key = mix64(seed ^ stream_index.wrapping_mul(GOLDEN));
        RngStream {
            seed,
            stream_index,
            rng: ChaCha8Rng::seed_from_u64(key),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// An independent child stream, a pure function of this stream's
    /// identity and `index` (not of how much has been drawn).
    pub fn substream(&self, index: u64) -> RngStream {
        let child_seed = mix64(self.seed ^ self.stream_index.wrapping_mul(GOLDEN));
        RngStream::new(child_seed, index)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// A uniform draw from `(0, 1]`, safe to pass to `ln`.
pub(crate) fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.random::<f64>()
}

/// Uniform labelled tree on `1..=n` via a uniform Prüfer sequence, rooted at 1.
pub fn gen_uniform_tree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DiscreteTree> {
    match n {
        0 => input("n must be at least 1"),
        1 => Ok(DiscreteTree::singleton()),
        _ => {
            let seq: Vec<Vertex> = (0..n - 2).map(|_| rng.random_range(1..=n)).collect();
            decode_prufer(&seq)
        }
    }
}

/// Critical offspring laws with finite variance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Offspring {
    /// Poisson(1); variance 1.
    Poisson1,
    /// P(k) = 2^-(k+1); variance 2.
    GeometricHalf,
}

impl Offspring {
    pub fn variance(self) -> f64 {
        match self {
            Offspring::Poisson1 => 1.0,
            Offspring::GeometricHalf => 2.0,
        }
    }

    fn draw<R: Rng + ?Sized>(self, rng: &mut R) -> usize {
        match self {
            Offspring::Poisson1 => {
                // Knuth's product method; the mean is 1 so this is cheap.
                let limit = (-1.0f64).exp();
                let mut k = 0;
                let mut p = rng.random::<f64>();
                while p > limit {
                    k += 1;
                    p *= rng.random::<f64>();
                }
                k
            }
            Offspring::GeometricHalf => {
                let mut k = 0;
                while rng.random::<bool>() {
                    k += 1;
                }
                k
            }
        }
    }

    /// `n` i.i.d. offspring counts conditioned on summing to `n - 1`.
    ///
    /// Poisson: the conditional law is multinomial with equal cell
    /// probabilities. Geometric: it is uniform over weak compositions,
    /// sampled as a uniform stars-and-bars arrangement.
    fn conditioned<R: Rng + ?Sized>(self, n: usize, rng: &mut R) -> Vec<usize> {
        let mut xi = vec![0usize; n];
        match self {
            Offspring::Poisson1 => {
                for _ in 0..n - 1 {
                    xi[rng.random_range(0..n)] += 1;
                }
            }
            Offspring::GeometricHalf => {
                // 2n-2 slots, n-1 of them bars: bars split the n-1 stars into n cells.
                let slots = 2 * n - 2;
                let mut is_bar = vec![false; slots];
                for s in rand::seq::index::sample(rng, slots, n - 1) {
                    is_bar[s] = true;
                }
                let mut cell = 0;
                for bar in is_bar {
                    if bar {
                        cell += 1;
                    } else {
                        xi[cell] += 1;
                    }
                }
            }
        }
        xi
    }
}

/// Rotates an offspring sequence summing to `n - 1` into the unique cyclic
/// shift whose Łukasiewicz path first hits -1 at step `n`.
pub fn cycle_lemma_rotate(xi: &[usize]) -> Vec<usize> {
    let n = xi.len();
    let mut walk: i64 = 0;
    let mut min = i64::MAX;
    let mut argmin = 0;
    for (k, &x) in xi.iter().enumerate() {
        walk += x as i64 - 1;
        if walk < min {
            min = walk;
            argmin = k;
        }
    }
    (0..n).map(|k| xi[(argmin + 1 + k) % n]).collect()
}

/// Builds the plane tree whose depth-first offspring sequence is `xi`.
/// Vertices are labelled in depth-first order; the root is 1.
pub fn tree_from_offspring(xi: &[usize]) -> Result<DiscreteTree> {
    let n = xi.len();
    if n == 0 || xi.iter().sum::<usize>() + 1 != n {
        return input("offspring sequence must sum to n - 1");
    }
    let mut parent = vec![0; n];
    let mut open: Vec<(Vertex, usize)> = Vec::new();
    for v in 1..=n {
        if v > 1 {
            let Some(top) = open.last_mut() else {
                return input("offspring sequence is not an excursion");
            };
            parent[v - 1] = top.0;
            top.1 -= 1;
            if top.1 == 0 {
                open.pop();
            }
        }
        if xi[v - 1] > 0 {
            open.push((v, xi[v - 1]));
        }
    }
    if !open.is_empty() {
        return input("offspring sequence is not an excursion");
    }
    DiscreteTree::from_parents(1, parent)
}

/// Galton–Watson tree conditioned on exactly `n` vertices.
///
/// The conditioned offspring vector is sampled exactly and rotated into an
/// excursion by the cycle lemma, so no draw is ever rejected.
pub fn gen_cgw_tree<R: Rng + ?Sized>(
    n: usize,
    offspring: Offspring,
    rng: &mut R,
) -> Result<DiscreteTree> {
    if n == 0 {
        return input("n must be at least 1");
    }
    let xi = offspring.conditioned(n, rng);
    tree_from_offspring(&cycle_lemma_rotate(&xi))
}

/// Reference sampler: i.i.d. offspring vectors rejected until the total
/// progeny is `n`, then rotated. Same law as [`gen_cgw_tree`]; accepts with
/// probability of order `n^{-1/2}`.
pub fn gen_cgw_tree_rejection<R: Rng + ?Sized>(
    n: usize,
    offspring: Offspring,
    rng: &mut R,
) -> Result<DiscreteTree> {
    if n == 0 {
        return input("n must be at least 1");
    }
    loop {
        let xi: Vec<usize> = (0..n).map(|_| offspring.draw(rng)).collect();
        if xi.iter().sum::<usize>() + 1 == n {
            return tree_from_offspring(&cycle_lemma_rotate(&xi));
        }
    }
}

/// `k` i.i.d. vertices drawn from the tree's mass distribution.
pub fn sample_vertices<R: Rng + ?Sized>(
    tree: &MeasuredTree,
    k: usize,
    rng: &mut R,
) -> Result<Vec<Vertex>> {
    if k == 0 {
        return input("k must be at least 1");
    }
    let dist = WeightedIndex::new(tree.masses())
        .map_err(|e| crate::Error::Input(format!("mass distribution: {e}")))?;
    Ok((0..k).map(|_| dist.sample(rng) + 1).collect())
}

/// `k` distinct vertices, uniformly without replacement.
pub fn sample_distinct<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Vec<Vertex>> {
    if k == 0 || k > n {
        return input(format!("cannot pick {k} distinct vertices out of {n}"));
    }
    Ok(rand::seq::index::sample(rng, n, k)
        .into_iter()
        .map(|i| i + 1)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trees::Edge;

    fn draws(mut r: RngStream) -> Vec<u64> {
        (0..4).map(|_| r.next_u64()).collect()
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        assert_eq!(draws(RngStream::new(7, 3)), draws(RngStream::new(7, 3)));
        assert_ne!(draws(RngStream::new(7, 3)), draws(RngStream::new(7, 4)));
        assert_ne!(draws(RngStream::new(7, 3)), draws(RngStream::new(8, 3)));
        let mut used = RngStream::new(7, 3);
        used.next_u64();
        assert_eq!(
            draws(used.substream(1)),
            draws(RngStream::new(7, 3).substream(1))
        );
    }

    #[test]
    fn two_vertex_uniform_tree() {
        let mut rng = RngStream::new(1, 0);
        for _ in 0..10 {
            let t = gen_uniform_tree(2, &mut rng).unwrap();
            assert_eq!(t.edge_set(), vec![Edge::new(1, 2)]);
        }
        assert!(gen_uniform_tree(0, &mut rng).is_err());
    }

    #[test]
    fn cycle_lemma_gives_excursion() {
        let rotated = cycle_lemma_rotate(&[0, 0, 2]);
        assert_eq!(rotated, vec![2, 0, 0]);
        let rotated = cycle_lemma_rotate(&[1, 0, 2, 0, 0, 2]);
        let mut walk = 0i64;
        for (k, &x) in rotated.iter().enumerate() {
            walk += x as i64 - 1;
            assert!(walk >= 0 || k == rotated.len() - 1);
        }
    }

    #[test]
    fn cgw_singleton_and_sizes() {
        let mut rng = RngStream::new(2, 0);
        assert_eq!(
            gen_cgw_tree(1, Offspring::Poisson1, &mut rng).unwrap().n(),
            1
        );
        for n in [2, 5, 17, 100] {
            for off in [Offspring::Poisson1, Offspring::GeometricHalf] {
                assert_eq!(gen_cgw_tree(n, off, &mut rng).unwrap().n(), n);
                assert_eq!(gen_cgw_tree_rejection(n, off, &mut rng).unwrap().n(), n);
            }
        }
    }

    #[test]
    fn point_mass_sampling() {
        let t = DiscreteTree::from_parents(1, vec![0, 1, 1]).unwrap();
        let m = MeasuredTree::new(t.clone(), vec![0.0, 1.0, 1.0], vec![0.0, 1.0, 0.0]).unwrap();
        let mut rng = RngStream::new(3, 0);
        assert!(sample_vertices(&m, 50, &mut rng)
            .unwrap()
            .iter()
            .all(|&v| v == 2));
        let half = MeasuredTree::new(t, vec![0.0, 1.0, 1.0], vec![0.5, 0.5, 0.0]).unwrap();
        assert!(!sample_vertices(&half, 1000, &mut rng).unwrap().contains(&3));
    }
}
