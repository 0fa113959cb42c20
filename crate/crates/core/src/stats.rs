//! Hypothesis tests and moment checks shared by the experiments.
//!
//! Every test returns a [`TestReport`]; p-value tests pass when `p > alpha`,
//! moment checks pass when every z-score is below [`Z_LIMIT`] in absolute
//! value. Kolmogorov–Smirnov p-values are asymptotic (with the
//! `sqrt(n) + 0.12 + 0.11/sqrt(n)` small-sample correction).

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{input, Result};

/// Default per-test significance.
pub const DEFAULT_ALPHA: f64 = 0.01;

/// Moment checks pass when every |z| is below this.
pub const Z_LIMIT: f64 = 3.0;

/// Reference distributions for one-sample KS tests.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceCdf {
    /// Standard Rayleigh: `1 - exp(-x^2/2)`.
    Rayleigh,
    Uniform01,
    Exponential {
        rate: f64,
    },
    /// The size-biased Mittag-Leffler law of index 1/2, i.e. `sqrt(2)` times
    /// a standard Rayleigh: `1 - exp(-x^2/4)`.
    SbmlHalf,
}

impl ReferenceCdf {
    pub fn cdf(self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match self {
            ReferenceCdf::Rayleigh => -(-x * x / 2.0).exp_m1(),
            ReferenceCdf::Uniform01 => x.min(1.0),
            ReferenceCdf::Exponential { rate } => -(-rate * x).exp_m1(),
            ReferenceCdf::SbmlHalf => -(-x * x / 4.0).exp_m1(),
        }
    }

    /// Parses `rayleigh`, `uniform01`, `sbml_half` or `exponential(RATE)`.
    pub fn from_tag(tag: &str) -> Result<Self> {
        let t = tag.trim();
        match t {
            "rayleigh" => return Ok(ReferenceCdf::Rayleigh),
            "uniform01" => return Ok(ReferenceCdf::Uniform01),
            "sbml_half" => return Ok(ReferenceCdf::SbmlHalf),
            _ => {}
        }
        if let Some(rest) = t
            .strip_prefix("exponential(")
            .and_then(|r| r.strip_suffix(')'))
        {
            if let Ok(rate) = rest.trim().parse::<f64>() {
                if rate > 0.0 && rate.is_finite() {
                    return Ok(ReferenceCdf::Exponential { rate });
                }
            }
        }
        input(format!("unknown reference cdf `{tag}`"))
    }

    pub fn tag(self) -> String {
        match self {
            ReferenceCdf::Rayleigh => "rayleigh".into(),
            ReferenceCdf::Uniform01 => "uniform01".into(),
            ReferenceCdf::Exponential { rate } => format!("exponential({rate})"),
            ReferenceCdf::SbmlHalf => "sbml_half".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

/// One moment comparison inside a [`TestReport`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentZ {
    pub p: f64,
    pub expected: f64,
    pub observed: f64,
    pub se: f64,
    pub z: f64,
    pub source: String,
}

/// A target `E[X^p] = expected`, with a free-text origin.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentTarget {
    pub p: f64,
    pub expected: f64,
    pub source: String,
}

impl MomentTarget {
    pub fn new(p: f64, expected: f64, source: impl Into<String>) -> Self {
        MomentTarget {
            p,
            expected,
            source: source.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub test: String,
    pub stat: f64,
    pub p: f64,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub m: Option<usize>,
    pub verdict: Verdict,
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub notes: String,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub moments: Vec<MomentZ>,
}

impl TestReport {
    fn p_test(test: &str, stat: f64, p: f64, n: usize, m: Option<usize>, alpha: f64) -> Self {
        let p = p.clamp(0.0, 1.0);
        TestReport {
            test: test.into(),
            stat,
            p,
            n,
            m,
            verdict: Verdict::from_bool(p > alpha),
            alpha,
            seed: None,
            notes: String::new(),
            moments: Vec::new(),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn with_notes(mut self, notes: impl Into<String>) -> Self {
        self.notes = notes.into();
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict.passed()
    }
}

/// Per-test level for a family of `m` tests at family level `alpha`.
pub fn bonferroni(alpha: f64, m: usize) -> f64 {
    alpha / m.max(1) as f64
}

/// The Kolmogorov survival function `P(K > lambda)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 0.2 {
        // The alternating series converges slowly here and the value is 1 to
        // double precision.
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn ks_p(d: f64, effective_n: f64) -> f64 {
    let s = effective_n.sqrt();
    kolmogorov_sf((s + 0.12 + 0.11 / s) * d)
}

fn sorted_finite(samples: &[f64]) -> Result<Vec<f64>> {
    if samples.iter().any(|x| !x.is_finite()) {
        return input("samples must be finite");
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Supremum distance between the empirical CDF of `samples` and `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return input("KS needs at least one sample");
    }
    let v = sorted_finite(samples)?;
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(d)
}

/// One-sample KS test against an arbitrary continuous CDF.
pub fn ks_one_sample_fn<F: Fn(f64) -> f64>(
    samples: &[f64],
    cdf: F,
    name: &str,
    alpha: f64,
) -> Result<TestReport> {
    if samples.len() < 10 {
        return input("one-sample KS needs at least 10 samples");
    }
    let d = ks_statistic(samples, cdf)?;
    let n = samples.len();
    Ok(
        TestReport::p_test("ks_one_sample", d, ks_p(d, n as f64), n, None, alpha)
            .with_notes(format!("reference {name}")),
    )
}

/// One-sample KS test against a named reference law.
pub fn ks_one_sample(samples: &[f64], reference: ReferenceCdf, alpha: f64) -> Result<TestReport> {
    ks_one_sample_fn(samples, |x| reference.cdf(x), &reference.tag(), alpha)
}

/// Two-sample KS statistic `sup |F_a - F_b|`.
pub fn ks_two_sample_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return input("two-sample KS needs nonempty samples");
    }
    let a = sorted_finite(a)?;
    let b = sorted_finite(b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

pub fn ks_two_sample(a: &[f64], b: &[f64], alpha: f64) -> Result<TestReport> {
    let d = ks_two_sample_statistic(a, b)?;
    let (n, m) = (a.len(), b.len());
    let ne = (n * m) as f64 / (n + m) as f64;
    Ok(TestReport::p_test(
        "ks_two_sample",
        d,
        ks_p(d, ne),
        n,
        Some(m),
        alpha,
    ))
}

/// Pearson goodness-of-fit test of bin counts against bin probabilities.
/// Probabilities must sum to 1; bins with zero probability must be empty.
pub fn chi_square_gof(observed: &[u64], probs: &[f64], alpha: f64) -> Result<TestReport> {
    if observed.len() != probs.len() || observed.len() < 2 {
        return input("chi-square needs at least two bins with matching probabilities");
    }
    if probs.iter().any(|&p| !(0.0..=1.0).contains(&p))
        || (probs.iter().sum::<f64>() - 1.0).abs() > 1e-9
    {
        return input("bin probabilities must lie in [0, 1] and sum to 1");
    }
    let total: u64 = observed.iter().sum();
    if total == 0 {
        return input("chi-square needs at least one observation");
    }
    let mut stat = 0.0;
    let mut bins = 0usize;
    for (&o, &p) in observed.iter().zip(probs) {
        if p == 0.0 {
            if o > 0 {
                return input("observation in a zero-probability bin");
            }
            continue;
        }
        let e = total as f64 * p;
        stat += (o as f64 - e).powi(2) / e;
        bins += 1;
    }
    let p = chi_square_sf(stat, bins.saturating_sub(1));
    Ok(
        TestReport::p_test("chi_square_gof", stat, p, total as usize, None, alpha)
            .with_notes(format!("{bins} bins")),
    )
}

/// Pearson test that two count vectors over the same categories share a law
/// (2 x K contingency table). Categories empty in both samples are dropped.
pub fn chi_square_two_sample(a: &[u64], b: &[u64], alpha: f64) -> Result<TestReport> {
    if a.len() != b.len() {
        return input("count vectors must have equal length");
    }
    let (na, nb): (u64, u64) = (a.iter().sum(), b.iter().sum());
    if na == 0 || nb == 0 {
        return input("both samples must be nonempty");
    }
    let total = (na + nb) as f64;
    let mut stat = 0.0;
    let mut cols = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        let c = (x + y) as f64;
        if c == 0.0 {
            continue;
        }
        cols += 1;
        let ea = na as f64 * c / total;
        let eb = nb as f64 * c / total;
        stat += (x as f64 - ea).powi(2) / ea + (y as f64 - eb).powi(2) / eb;
    }
    let p = chi_square_sf(stat, cols.saturating_sub(1));
    Ok(TestReport::p_test(
        "chi_square_two_sample",
        stat,
        p,
        na as usize,
        Some(nb as usize),
        alpha,
    )
    .with_notes(format!("{cols} categories")))
}

fn chi_square_sf(stat: f64, df: usize) -> f64 {
    if df == 0 {
        return 1.0;
    }
    ChiSquared::new(df as f64)
        .map(|d| d.sf(stat))
        .unwrap_or(f64::NAN)
}

/// Two-sided normal tail `P(|Z| > |z|)`.
pub fn normal_two_sided(z: f64) -> f64 {
    let n = Normal::new(0.0, 1.0).expect("standard normal");
    (2.0 * n.sf(z.abs())).min(1.0)
}

/// z-scores of sample moments against targets, using the Monte Carlo
/// standard error of each sample moment.
pub fn moment_summary(samples: &[f64], targets: &[MomentTarget]) -> Result<TestReport> {
    moment_summary_scaled(samples, targets, 1.0)
}

/// As [`moment_summary`] with every standard error multiplied by
/// `se_factor`, for samples whose fluctuations exceed the i.i.d. rate.
pub fn moment_summary_scaled(
    samples: &[f64],
    targets: &[MomentTarget],
    se_factor: f64,
) -> Result<TestReport> {
    if samples.len() < 2 {
        return input("moment summary needs at least two samples");
    }
    if targets.is_empty() {
        return input("moment summary needs at least one target");
    }
    if !(se_factor > 0.0 && se_factor.is_finite()) {
        return input("standard-error factor must be positive");
    }
    let n = samples.len() as f64;
    let mut moments = Vec::with_capacity(targets.len());
    for t in targets {
        let powered: Vec<f64> = samples.iter().map(|&x| x.powf(t.p)).collect();
        if powered.iter().any(|v| !v.is_finite()) {
            return input(format!(
                "moment of order {} is not finite on these samples",
                t.p
            ));
        }
        let (mean, var) = mean_var(&powered);
        let se = se_factor * (var / n).sqrt();
        let z = if se > 0.0 {
            (mean - t.expected) / se
        } else if mean == t.expected {
            0.0
        } else {
            f64::INFINITY.copysign(mean - t.expected)
        };
        moments.push(MomentZ {
            p: t.p,
            expected: t.expected,
            observed: mean,
            se,
            z,
            source: t.source.clone(),
        });
    }
    let zmax = moments.iter().map(|m| m.z.abs()).fold(0.0, f64::max);
    let p = (moments.len() as f64 * normal_two_sided(zmax)).min(1.0);
    Ok(TestReport {
        test: "moment_summary".into(),
        stat: zmax,
        p,
        n: samples.len(),
        m: None,
        verdict: Verdict::from_bool(zmax < Z_LIMIT),
        alpha: normal_two_sided(Z_LIMIT),
        seed: None,
        notes: format!("|z| < {Z_LIMIT} per moment"),
        moments,
    })
}

/// Sample mean and unbiased variance (variance 0 for one sample).
pub fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    if x.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = x.iter().sum::<f64>() / n;
    if x.len() == 1 {
        return (mean, 0.0);
    }
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Sample median (mean of the middle pair for even lengths).
pub fn median(x: &[f64]) -> f64 {
    if x.is_empty() {
        return f64::NAN;
    }
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

/// z-score of an observed count against a binomial expectation.
pub fn binomial_z(count: u64, trials: u64, p: f64) -> f64 {
    let n = trials as f64;
    let sd = (n * p * (1.0 - p)).sqrt();
    if sd == 0.0 {
        return if count as f64 == n * p {
            0.0
        } else {
            f64::INFINITY
        };
    }
    (count as f64 - n * p) / sd
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::RngStream;
    use rand::Rng;

    #[test]
    fn kolmogorov_tail_values() {
        // Classical critical values of the Kolmogorov distribution.
        assert!((kolmogorov_sf(1.3581) - 0.05).abs() < 1e-4);
        assert!((kolmogorov_sf(1.6276) - 0.01).abs() < 1e-4);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
    }

    #[test]
    fn degenerate_samples_reject() {
        let zeros = vec![0.0; 100];
        let r = ks_one_sample(&zeros, ReferenceCdf::Uniform01, DEFAULT_ALPHA).unwrap();
        assert!((r.stat - 1.0).abs() < 1e-12);
        assert!(r.p < 1e-10);
        assert!(ks_one_sample(&zeros[..5], ReferenceCdf::Uniform01, DEFAULT_ALPHA).is_err());
    }

    #[test]
    fn two_sample_extremes() {
        let a: Vec<f64> = (0..50).map(|i| i as f64).collect();
        assert_eq!(ks_two_sample(&a, &a, DEFAULT_ALPHA).unwrap().stat, 0.0);
        let b: Vec<f64> = (100..150).map(|i| i as f64).collect();
        let r = ks_two_sample(&a, &b, DEFAULT_ALPHA).unwrap();
        assert_eq!(r.stat, 1.0);
        assert!(r.p < 1e-10);
        assert!(ks_two_sample(&a, &[], DEFAULT_ALPHA).is_err());
    }

    #[test]
    fn unknown_tag_rejected() {
        assert!(ReferenceCdf::from_tag("cauchy").is_err());
        assert_eq!(
            ReferenceCdf::from_tag("exponential(2.5)").unwrap(),
            ReferenceCdf::Exponential { rate: 2.5 }
        );
        for r in [
            ReferenceCdf::Rayleigh,
            ReferenceCdf::Uniform01,
            ReferenceCdf::SbmlHalf,
        ] {
            assert_eq!(ReferenceCdf::from_tag(&r.tag()).unwrap(), r);
        }
    }

    #[test]
    fn ks_calibration_under_null() {
        let mut rng = RngStream::new(11, 0);
        let meta = 1000;
        let mut rejections = 0u64;
        for _ in 0..meta {
            let x: Vec<f64> = (0..200).map(|_| rng.random::<f64>()).collect();
            if !ks_one_sample(&x, ReferenceCdf::Uniform01, 0.01)
                .unwrap()
                .passed()
            {
                rejections += 1;
            }
        }
        assert!(
            binomial_z(rejections, meta, 0.01).abs() < 3.0,
            "{rejections} rejections"
        );
    }

    #[test]
    fn two_sample_calibration_under_null() {
        let mut rng = RngStream::new(12, 0);
        let meta = 1000;
        let mut rejections = 0u64;
        for _ in 0..meta {
            let a: Vec<f64> = (0..150).map(|_| rng.random::<f64>()).collect();
            let b: Vec<f64> = (0..250).map(|_| rng.random::<f64>()).collect();
            if !ks_two_sample(&a, &b, 0.01).unwrap().passed() {
                rejections += 1;
            }
        }
        assert!(
            binomial_z(rejections, meta, 0.01).abs() < 3.0,
            "{rejections} rejections"
        );
    }

    #[test]
    fn chi_square_fair_die() {
        let r = chi_square_gof(&[100, 100, 100, 100], &[0.25; 4], DEFAULT_ALPHA).unwrap();
        assert_eq!(r.stat, 0.0);
        assert!((r.p - 1.0).abs() < 1e-12);
        let r = chi_square_gof(&[400, 0, 0, 0], &[0.25; 4], DEFAULT_ALPHA).unwrap();
        assert!(!r.passed());
        assert!(chi_square_gof(&[1, 1], &[0.5, 0.6], DEFAULT_ALPHA).is_err());
    }

    #[test]
    fn chi_square_two_sample_identical_counts() {
        let r = chi_square_two_sample(&[10, 20, 0, 5], &[20, 40, 0, 10], DEFAULT_ALPHA).unwrap();
        assert!(r.stat.abs() < 1e-12);
        assert_eq!(r.notes, "3 categories");
        let r = chi_square_two_sample(&[100, 0], &[0, 100], DEFAULT_ALPHA).unwrap();
        assert!(!r.passed());
    }

    #[test]
    fn constant_moments_have_zero_z() {
        let x = vec![2.0; 10];
        let r = moment_summary(
            &x,
            &[
                MomentTarget::new(1.0, 2.0, "const"),
                MomentTarget::new(2.0, 4.0, "const"),
            ],
        )
        .unwrap();
        assert!(r.moments.iter().all(|m| m.z == 0.0));
        assert!(r.passed());
    }

    #[test]
    fn sqrt2_rayleigh_passes_own_tests() {
        let mut rng = RngStream::new(13, 0);
        let x: Vec<f64> = (0..20000)
            .map(|_| (-4.0 * (1.0 - rng.random::<f64>()).ln()).sqrt())
            .collect();
        assert!(ks_one_sample(&x, ReferenceCdf::SbmlHalf, DEFAULT_ALPHA)
            .unwrap()
            .passed());
        let pi = std::f64::consts::PI;
        let targets = [
            MomentTarget::new(1.0, pi.sqrt(), "closed form"),
            MomentTarget::new(2.0, 4.0, "closed form"),
            MomentTarget::new(3.0, 6.0 * pi.sqrt(), "closed form"),
        ];
        assert!(moment_summary(&x, &targets).unwrap().passed());
    }

    #[test]
    fn report_json_schema() {
        let r = ks_two_sample(&[1.0, 2.0], &[1.5], 0.01)
            .unwrap()
            .with_seed(4);
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        for key in [
            "test", "stat", "p", "n", "m", "verdict", "alpha", "seed", "notes",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["verdict"], "pass");
    }
}
