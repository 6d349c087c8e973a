//! Sample statistics over per-request delays and replication means.

use statrs::distribution::{ContinuousCDF, StudentsT};

/// Welford accumulator for mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Combines two accumulators (Chan et al. pairwise update).
    pub fn merge(&self, other: &Moments) -> Moments {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let frac = other.count as f64 / count as f64;
        Moments {
            count,
            mean: self.mean + delta * frac,
            m2: self.m2 + other.m2 + delta * delta * self.count as f64 * frac,
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance; zero for fewer than two samples.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }
}

/// Two-sided 95% Student-t quantile with `df` degrees of freedom.
pub fn t_quantile_975(df: usize) -> f64 {
    StudentsT::new(0.0, 1.0, df as f64)
        .expect("degrees of freedom are positive")
        .inverse_cdf(0.975)
}

/// Half-width of the 95% confidence interval for the mean of `samples`.
/// Infinite for fewer than two samples.
pub fn ci_halfwidth_95(samples: &[f64]) -> f64 {
    let r = samples.len();
    if r < 2 {
        return f64::INFINITY;
    }
    let mut m = Moments::new();
    samples.iter().for_each(|&x| m.push(x));
    t_quantile_975(r - 1) * (m.variance() / r as f64).sqrt()
}

/// Summary of per-request system delays pooled over replications.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayStats {
    /// Mean delay over all post-warm-up requests (s).
    pub mean: f64,
    /// Sample variance of the individual delays (s²).
    pub variance: f64,
    /// Number of post-warm-up requests.
    pub count: u64,
    /// 95% half-width computed from the replication means (s).
    pub ci_halfwidth_95: f64,
    /// One mean per replication, in replication order.
    pub replication_means: Vec<f64>,
}

impl DelayStats {
    /// Pools per-replication moments in the order given.
    pub fn from_replications(reps: &[Moments]) -> DelayStats {
        let pooled = reps.iter().fold(Moments::new(), |acc, m| acc.merge(m));
        let replication_means: Vec<f64> = reps.iter().map(Moments::mean).collect();
        DelayStats {
            mean: pooled.mean(),
            variance: pooled.variance(),
            count: pooled.count(),
            ci_halfwidth_95: ci_halfwidth_95(&replication_means),
            replication_means,
        }
    }

    pub fn ci_contains(&self, value: f64) -> bool {
        (self.mean - value).abs() <= self.ci_halfwidth_95
    }
}
