//! Estimators and test statistics shared by the analysis and the simulators.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::error::{invalid, Error, Result};

/// Number of batches used by every batch-means standard error in the crate.
pub const BATCHES: usize = 20;

/// A point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    /// Distance between `self.value` and `target` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        let diff = (self.value - target).abs();
        if diff == 0.0 {
            0.0
        } else {
            diff / self.std_error
        }
    }

    pub fn within_sigmas(&self, target: f64, sigmas: f64) -> bool {
        self.z_score(target) <= sigmas
    }
}

/// Moment summary of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    /// Unbiased (n - 1) sample variance; zero for a single sample.
    pub variance: f64,
    pub second_moment: f64,
    /// Batch-means standard error of the mean over [`BATCHES`] contiguous
    /// batches. Falls back to `sqrt(variance / n)` below `2 * BATCHES` samples.
    pub std_error: f64,
    pub min: f64,
    pub max: f64,
}

pub fn summarize(samples: &[f64]) -> Result<Summary> {
    let n = samples.len();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let second_moment = samples.iter().map(|x| x * x).sum::<f64>() / nf;
    let variance = if n > 1 {
        samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0)
    } else {
        0.0
    };
    let (min, max) = samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });

    let std_error = if n >= 2 * BATCHES {
        let mut sums = [0.0; BATCHES];
        let mut counts = [0.0; BATCHES];
        for (i, &x) in samples.iter().enumerate() {
            let b = batch_of(i as u64, n as u64, BATCHES);
            sums[b] += x;
            counts[b] += 1.0;
        }
        ratio_batch_means(&sums, &counts)
            .map(|e| e.std_error)
            .unwrap_or(f64::INFINITY)
    } else {
        (variance / nf).sqrt()
    };

    Ok(Summary {
        count: n,
        mean,
        variance,
        second_moment,
        std_error,
        min,
        max,
    })
}

/// Batch index of item `i` out of `n` when split into `batches` contiguous groups.
pub fn batch_of(i: u64, n: u64, batches: usize) -> usize {
    debug_assert!(i < n);
    ((i as u128 * batches as u128) / n as u128) as usize
}

/// Ratio estimator `sum(nums) / sum(dens)` with a batch-means standard error.
///
/// Each batch contributes one numerator/denominator pair; the error uses the
/// linearised residuals `num_b - R den_b`, which stays well defined when some
/// batches have an empty denominator. Returns `None` when the pooled
/// denominator is zero. With fewer than two batches the error is infinite.
pub fn ratio_batch_means(nums: &[f64], dens: &[f64]) -> Option<Estimate> {
    assert_eq!(nums.len(), dens.len());
    let total_den: f64 = dens.iter().sum();
    if total_den <= 0.0 {
        return None;
    }
    let ratio = nums.iter().sum::<f64>() / total_den;
    let b = nums.len();
    if b < 2 {
        return Some(Estimate {
            value: ratio,
            std_error: f64::INFINITY,
        });
    }
    let bf = b as f64;
    let ss: f64 = nums
        .iter()
        .zip(dens)
        .map(|(n, d)| (n - ratio * d).powi(2))
        .sum();
    let mean_den = total_den / bf;
    Some(Estimate {
        value: ratio,
        std_error: (ss / (bf * (bf - 1.0))).sqrt() / mean_den,
    })
}

/// Lag-1 autocorrelation; `None` below three samples or for a constant series.
pub fn lag1_correlation(xs: &[f64]) -> Option<f64> {
    if xs.len() < 3 {
        return None;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let var: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
    if var == 0.0 {
        return None;
    }
    let cov: f64 = xs.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum();
    Some(cov / var)
}

/// One-sample Kolmogorov-Smirnov result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsTest {
    pub statistic: f64,
    pub critical_value: f64,
    pub alpha: f64,
    pub n: usize,
}

impl KsTest {
    /// True when the null hypothesis is not rejected at `alpha`.
    pub fn passes(&self) -> bool {
        self.statistic < self.critical_value
    }
}

/// Smallest sample the asymptotic critical value is trusted for.
pub const KS_MIN_SAMPLES: usize = 100;

/// Asymptotic Kolmogorov critical value `sqrt(-ln(alpha/2)/2) / sqrt(n)`.
pub fn ks_critical_value(n: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

pub fn ks_statistic<F>(samples: &[f64], cdf: F, alpha: f64) -> Result<KsTest>
where
    F: Fn(f64) -> f64,
{
    if samples.len() < KS_MIN_SAMPLES {
        return Err(invalid(
            "samples",
            format!(
                "KS test needs at least {KS_MIN_SAMPLES} samples, got {}",
                samples.len()
            ),
        ));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid("alpha", format!("must lie in (0, 1), got {alpha}")));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(invalid("samples", "contains NaN"));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let statistic = xs.iter().enumerate().fold(0.0_f64, |d, (i, &x)| {
        let f = cdf(x);
        let above = (i as f64 + 1.0) / n - f;
        let below = f - i as f64 / n;
        d.max(above).max(below)
    });
    Ok(KsTest {
        statistic,
        critical_value: ks_critical_value(xs.len(), alpha),
        alpha,
        n: xs.len(),
    })
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(invalid("order", "must be at least 1"));
        }
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        // Roots are symmetric; solve for the upper half by Newton on P_n.
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = x;
            weights[i] = w;
            nodes[n - 1 - i] = -x;
            weights[n - 1 - i] = w;
        }
        Ok(Self { nodes, weights })
    }

    /// Shared rule for `order`, built once per process.
    pub fn cached(order: usize) -> Result<&'static Self> {
        static CACHE: OnceLock<Mutex<HashMap<usize, &'static GaussLegendre>>> = OnceLock::new();
        let mut map = CACHE
            .get_or_init(Default::default)
            .lock()
            .unwrap_or_else(|e| e.into_inner());
        if let Some(rule) = map.get(&order) {
            return Ok(rule);
        }
        let rule: &'static Self = Box::leak(Box::new(Self::new(order)?));
        map.insert(order, rule);
        Ok(rule)
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F>(&self, f: F, lo: f64, hi: f64) -> Result<f64>
    where
        F: Fn(f64) -> f64,
    {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            let t = mid + half * x;
            let y = f(t);
            if !y.is_finite() {
                return Err(Error::NonFiniteIntegrand { x: t });
            }
            acc += w * y;
        }
        Ok(acc * half)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { p0 } else { p1 };
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    /// The `2 * order` estimate.
    pub value: f64,
    /// `|I(order) - I(2 * order)|`.
    pub error_estimate: f64,
}

impl Quadrature {
    pub(crate) fn zero() -> Self {
        Self {
            value: 0.0,
            error_estimate: 0.0,
        }
    }

    pub(crate) fn add(self, other: Self) -> Self {
        Self {
            value: self.value + other.value,
            error_estimate: self.error_estimate + other.error_estimate,
        }
    }
}

/// Integrates `f` over `[lo, hi]` with Gauss-Legendre rules of `order` and
/// `2 * order` nodes.
pub fn quadrature<F>(f: F, lo: f64, hi: f64, order: usize) -> Result<Quadrature>
where
    F: Fn(f64) -> f64,
{
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(invalid(
            "bounds",
            format!("must be finite, got [{lo}, {hi}]"),
        ));
    }
    let coarse = GaussLegendre::cached(order)?.integrate(&f, lo, hi)?;
    let fine = GaussLegendre::cached(2 * order)?.integrate(&f, lo, hi)?;
    Ok(Quadrature {
        value: fine,
        error_estimate: (coarse - fine).abs(),
    })
}
