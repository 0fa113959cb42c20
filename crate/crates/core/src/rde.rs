//! Mittag-Leffler laws, Dirichlet splits, the smoothing transform and
//! synthetic mass-split trees.
//!
//! For `beta` in `(0, 1)`, `ML(beta)` has moments `G(p+1)/G(p beta+1)` and
//! its size-biased version `ML-hat(beta)` has moments
//! `G(beta+1) G(p+2)/G((p+1) beta+1)`. `ML-hat(beta)` solves
//! `M = X1^beta M1 + X2^beta M2` in law, where `(X1, X2, X3)` is
//! Dirichlet(beta, beta, 1-beta) and `M1`, `M2` are independent copies of
//! `M`. For `beta = 1/2`, `ML-hat` is `sqrt(2)` times a standard Rayleigh.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::generate::{open_unit, RngStream};

/// Largest depth for which [`grow_mass_tree`] stores every node.
pub const MAX_FULL_DEPTH: usize = 22;

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "beta must lie in (0, 1), got {beta}"
        )))
    }
}

/// `E[Y^p]` for `Y ~ ML(beta)`; infinite at `p = -1`.
pub fn ml_moment(beta: f64, p: f64) -> Result<f64> {
    check_beta(beta)?;
    if !(p >= -1.0) {
        return Err(Error::Domain(format!("ML moments need p >= -1, got {p}")));
    }
    if p == -1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(gamma(p + 1.0) / gamma(p * beta + 1.0))
}

/// `E[M^p]` for `M ~ ML-hat(beta)`; infinite at `p = -2`.
pub fn sbml_moment(beta: f64, p: f64) -> Result<f64> {
    check_beta(beta)?;
    if !(p >= -2.0) {
        return Err(Error::Domain(format!(
            "size-biased ML moments need p >= -2, got {p}"
        )));
    }
    if p == -2.0 {
        return Ok(f64::INFINITY);
    }
    Ok(gamma(beta + 1.0) * gamma(p + 2.0) / gamma((p + 1.0) * beta + 1.0))
}

/// `E[M]` for `M ~ ML-hat(beta)`, i.e. `2 G(beta+1)/G(2 beta+1)`.
pub fn sbml_mean(beta: f64) -> Result<f64> {
    sbml_moment(beta, 1.0)
}

/// `log 2 - log(s + 1)`: the log of `E[X1^s + X2^s]` after the change of
/// variable `X^beta ~ U[0,1]`.
pub fn nu_exponent(s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::Domain(format!("nu_exponent needs s >= 0, got {s}")));
    }
    Ok(std::f64::consts::LN_2 - (s + 1.0).ln())
}

/// Dirichlet(beta, beta, 1-beta) from normalised Gamma draws. The third
/// coordinate is `1 - x1 - x2`.
pub fn sample_dirichlet<R: Rng + ?Sized>(beta: f64, rng: &mut R) -> Result<[f64; 3]> {
    check_beta(beta)?;
    let side = Gamma::new(beta, 1.0).map_err(|e| Error::Domain(e.to_string()))?;
    let rest = Gamma::new(1.0 - beta, 1.0).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(dirichlet_from(&side, &rest, rng))
}

fn dirichlet_from<R: Rng + ?Sized>(side: &Gamma<f64>, rest: &Gamma<f64>, rng: &mut R) -> [f64; 3] {
    loop {
        let g1 = side.sample(rng);
        let g2 = side.sample(rng);
        let g3 = rest.sample(rng);
        let s = g1 + g2 + g3;
        if s > 0.0 && s.is_finite() {
            let x1 = g1 / s;
            let x2 = g2 / s;
            return [x1, x2, (1.0 - x1 - x2).max(0.0)];
        }
    }
}

/// One exact draw from `ML-hat(1/2)`, i.e. `sqrt(2)` times a standard Rayleigh.
pub fn sample_sbml_half<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    (-4.0 * open_unit(rng).ln()).sqrt()
}

/// A population of samples for the smoothing transform.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplePool {
    pub samples: Vec<f64>,
    pub beta: f64,
    /// Number of smoothing steps applied since initialisation.
    pub generation: usize,
}

impl SamplePool {
    pub fn from_samples(beta: f64, samples: Vec<f64>) -> Result<Self> {
        check_beta(beta)?;
        if samples.is_empty() {
            return Err(Error::Input("pool must be nonempty".into()));
        }
        if samples.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
            return Err(Error::Input(
                "pool samples must be finite and non-negative".into(),
            ));
        }
        Ok(SamplePool {
            samples,
            beta,
            generation: 0,
        })
    }

    /// An exact `ML-hat(1/2)` pool.
    pub fn sqrt2_rayleigh<R: Rng + ?Sized>(size: usize, rng: &mut R) -> Result<Self> {
        Self::from_samples(0.5, (0..size).map(|_| sample_sbml_half(rng)).collect())
    }

    /// An exponential pool with the given mean.
    pub fn exponential<R: Rng + ?Sized>(
        beta: f64,
        size: usize,
        mean: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if !(mean > 0.0) {
            return Err(Error::Input("mean must be positive".into()));
        }
        Self::from_samples(
            beta,
            (0..size).map(|_| -mean * open_unit(rng).ln()).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// One population-dynamics step: each new sample is `x1^beta M1 + x2^beta M2`
/// with `M1`, `M2` drawn with replacement from `pool` and a fresh Dirichlet
/// split. Sample `i` uses its own substream, so the result does not depend
/// on the thread count.
pub fn smoothing_step<R: Rng + ?Sized>(pool: &SamplePool, rng: &mut R) -> Result<SamplePool> {
    check_beta(pool.beta)?;
    if pool.is_empty() {
        return Err(Error::Input("pool must be nonempty".into()));
    }
    let beta = pool.beta;
    let side = Gamma::new(beta, 1.0).map_err(|e| Error::Domain(e.to_string()))?;
    let rest = Gamma::new(1.0 - beta, 1.0).map_err(|e| Error::Domain(e.to_string()))?;
    let base = RngStream::new(rng.random(), pool.generation as u64);
    let n = pool.len();
    let samples: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut r = base.substream(i as u64);
            let [x1, x2, _] = dirichlet_from(&side, &rest, &mut r);
            let m1 = pool.samples[r.random_range(0..n)];
            let m2 = pool.samples[r.random_range(0..n)];
            x1.powf(beta) * m1 + x2.powf(beta) * m2
        })
        .collect();
    Ok(SamplePool {
        samples,
        beta,
        generation: pool.generation + 1,
    })
}

/// Applies [`smoothing_step`] `steps` times.
pub fn iterate_pool<R: Rng + ?Sized>(
    pool: SamplePool,
    steps: usize,
    rng: &mut R,
) -> Result<SamplePool> {
    let mut p = pool;
    for _ in 0..steps {
        p = smoothing_step(&p, rng)?;
    }
    Ok(p)
}

/// Generation used for approximate `ML-hat(beta)` reference pools.
pub const REFERENCE_GENERATION: usize = 30;

/// A reference `ML-hat(beta)` sample: exact for `beta = 1/2`, otherwise an
/// exponential pool with the right mean after [`REFERENCE_GENERATION`]
/// smoothing steps (the pool's `generation` records which).
pub fn reference_pool<R: Rng + ?Sized>(beta: f64, size: usize, rng: &mut R) -> Result<SamplePool> {
    if beta == 0.5 {
        return SamplePool::sqrt2_rayleigh(size, rng);
    }
    let start = SamplePool::exponential(beta, size, sbml_mean(beta)?, rng)?;
    iterate_pool(start, REFERENCE_GENERATION, rng)
}

/// Masses `M_b` over the binary words of length at most `depth`, stored in
/// heap order: index 1 is the empty word and word `b` has children `2b`
/// and `2b + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct MassSplitTree {
    pub beta: f64,
    pub depth: usize,
    pub masses: Vec<f64>,
}

impl MassSplitTree {
    /// The masses of the `2^n` words of length `n`.
    pub fn level(&self, n: usize) -> &[f64] {
        &self.masses[1 << n..2 << n]
    }

    /// `Y_n = sum over |b| = n of M_b^beta`, for `n = 0..=depth`.
    pub fn y_sequence(&self) -> Vec<f64> {
        (0..=self.depth)
            .map(|n| self.level(n).iter().map(|m| m.powf(self.beta)).sum())
            .collect()
    }

    /// `sum over |b| = n of M_b`, for `n = 0..=depth`.
    pub fn dust_sequence(&self) -> Vec<f64> {
        (0..=self.depth)
            .map(|n| self.level(n).iter().sum())
            .collect()
    }
}

/// Grows every node of a mass-split tree: `M_root = 1` and
/// `(M_b0, M_b1) = M_b (X1, X2)` with i.i.d. Dirichlet(beta, beta, 1-beta)
/// splits.
pub fn grow_mass_tree<R: Rng + ?Sized>(
    beta: f64,
    depth: usize,
    rng: &mut R,
) -> Result<MassSplitTree> {
    check_beta(beta)?;
    if depth > MAX_FULL_DEPTH {
        return Err(Error::Input(format!(
            "full mass-split trees are limited to depth {MAX_FULL_DEPTH}; use sample_level_sums"
        )));
    }
    let side = Gamma::new(beta, 1.0).map_err(|e| Error::Domain(e.to_string()))?;
    let rest = Gamma::new(1.0 - beta, 1.0).map_err(|e| Error::Domain(e.to_string()))?;
    let mut masses = vec![0.0; 2 << depth];
    masses[1] = 1.0;
    for b in 1..1usize << depth {
        let [x1, x2, _] = dirichlet_from(&side, &rest, rng);
        masses[2 * b] = masses[b] * x1;
        masses[2 * b + 1] = masses[b] * x2;
    }
    Ok(MassSplitTree {
        beta,
        depth,
        masses,
    })
}

/// `Y_0..Y_depth` of a mass-split tree.
pub fn y_sequence(tree: &MassSplitTree) -> Vec<f64> {
    tree.y_sequence()
}

/// Per-level sums of one mass-split tree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSums {
    /// `Y_n` for `n = 0..=depth`.
    pub y: Vec<f64>,
    /// `sum over |b| = n of M_b`.
    pub dust: Vec<f64>,
    /// Nodes visited.
    pub nodes: usize,
}

/// Unbiased per-level sums of a depth-`depth` mass-split tree without
/// visiting all `2^depth` words.
///
/// Nodes carry a weight `w` (1 at the root). A child whose weighted
/// contribution `w M^beta` falls below `epsilon` survives with probability
/// `w M^beta / epsilon` and its weight is divided by that probability, so
/// every level sum keeps its expectation. `epsilon = 0` visits every node.
pub fn sample_level_sums<R: Rng + ?Sized>(
    beta: f64,
    depth: usize,
    epsilon: f64,
    rng: &mut R,
) -> Result<LevelSums> {
    check_beta(beta)?;
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::Input("epsilon must lie in [0, 1)".into()));
    }
    if epsilon == 0.0 && depth > MAX_FULL_DEPTH {
        return Err(Error::Input(format!(
            "exact level sums are limited to depth {MAX_FULL_DEPTH}"
        )));
    }
    let side = Gamma::new(beta, 1.0).map_err(|e| Error::Domain(e.to_string()))?;
    let rest = Gamma::new(1.0 - beta, 1.0).map_err(|e| Error::Domain(e.to_string()))?;
    let mut out = LevelSums {
        y: vec![0.0; depth + 1],
        dust: vec![0.0; depth + 1],
        nodes: 0,
    };
    // Depth-first stack of (mass, weight, level).
    let mut stack = vec![(1.0f64, 1.0f64, 0usize)];
    while let Some((m, w, level)) = stack.pop() {
        out.nodes += 1;
        out.y[level] += w * m.powf(beta);
        out.dust[level] += w * m;
        if level == depth {
            continue;
        }
        let [x1, x2, _] = dirichlet_from(&side, &rest, rng);
        for x in [x1, x2] {
            let child = m * x;
            let c = w * child.powf(beta);
            if epsilon > 0.0 && c < epsilon {
                let keep = c / epsilon;
                if rng.random::<f64>() < keep {
                    stack.push((child, w / keep, level + 1));
                }
            } else {
                stack.push((child, w, level + 1));
            }
        }
    }
    Ok(out)
}

/// `E[sum over |b| = n of M_b] = (2 beta/(beta + 1))^n`.
pub fn expected_dust(beta: f64, n: usize) -> f64 {
    (2.0 * beta / (beta + 1.0)).powi(n as i32)
}
