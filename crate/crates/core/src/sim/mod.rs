//! Replicated simulation of the non-aggregated and aggregated systems.
//!
//! Each queue is simulated exactly with the Lindley recursion. A replication
//! is a seeded request stream; the same stream can be replayed under any
//! allocation ratio, which gives common random numbers for comparisons and
//! for the split-ratio search.

pub mod lindley;
pub mod search;
pub mod stats;
pub mod workload;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{AllocationRatio, SystemParams};

pub use lindley::{fork_join_max_delays, lindley_fifo_delays, LindleyQueue};
pub use search::{golden_section_minimize, GoldenResult};
pub use stats::{DelayStats, Moments};
pub use workload::{generate_workload, RequestSample};

pub const DEFAULT_NUM_REQUESTS: usize = 200_000;
pub const DEFAULT_REPLICATIONS: usize = 20;
pub const DEFAULT_SEED: u64 = 20_160_101;
/// Width at which the split-ratio search stops.
pub const DEFAULT_SEARCH_TOLERANCE: f64 = 1e-4;
/// Points in the coarse scan that guards the golden-section result.
const COARSE_SCAN_POINTS: usize = 8;

/// Run length and seeding of a replicated experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunConfig {
    /// Requests generated per replication.
    pub num_requests: usize,
    /// Requests discarded from the head of each replication.
    pub warmup_requests: usize,
    pub replications: usize,
    pub master_seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            num_requests: DEFAULT_NUM_REQUESTS,
            warmup_requests: default_warmup(DEFAULT_NUM_REQUESTS),
            replications: DEFAULT_REPLICATIONS,
            master_seed: DEFAULT_SEED,
        }
    }
}

/// Ten percent of the run.
pub fn default_warmup(num_requests: usize) -> usize {
    num_requests / 10
}

impl RunConfig {
    pub fn new(num_requests: usize, warmup_requests: usize, replications: usize, master_seed: u64) -> Result<Self> {
        let config = RunConfig {
            num_requests,
            warmup_requests,
            replications,
            master_seed,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.warmup_requests >= self.num_requests {
            return Err(Error::InvalidRunConfig(format!(
                "warm-up ({}) must be smaller than the number of requests ({})",
                self.warmup_requests, self.num_requests
            )));
        }
        if self.replications == 0 {
            return Err(Error::InvalidRunConfig("at least one replication is required".into()));
        }
        Ok(())
    }
}

/// Which configuration a stream is replayed through.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemKind {
    /// Each request is routed whole, to WiFi with probability alpha.
    NonAggregated,
    /// Each request is split, fraction alpha of its size to WiFi.
    Aggregated,
}

/// Request streams of every replication, kept in memory for replay.
#[derive(Debug, Clone)]
pub struct WorkloadSet {
    params: SystemParams,
    warmup: usize,
    replications: Vec<Vec<RequestSample>>,
}

impl WorkloadSet {
    pub fn generate(params: &SystemParams, config: &RunConfig) -> Result<Self> {
        config.validate()?;
        let replications = (0..config.replications as u64)
            .into_par_iter()
            .map(|r| generate_workload(params, config, r))
            .collect();
        Ok(WorkloadSet {
            params: *params,
            warmup: config.warmup_requests,
            replications,
        })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn replications(&self) -> usize {
        self.replications.len()
    }

    /// Delay statistics of the chosen system at raw allocation `alpha`.
    ///
    /// `alpha` is not checked for stability; an unstable queue simply yields
    /// large delays. Replications run in parallel and are pooled in index
    /// order, so the result does not depend on the thread count.
    pub fn stats(&self, kind: SystemKind, alpha: f64) -> DelayStats {
        let reps: Vec<Moments> = self
            .replications
            .par_iter()
            .map(|work| {
                let mut m = Moments::new();
                self.replay(kind, alpha, work, |i, d| {
                    if i >= self.warmup {
                        m.push(d);
                    }
                });
                m
            })
            .collect();
        DelayStats::from_replications(&reps)
    }

    /// Every per-request delay of one replication, warm-up included.
    pub fn delays(&self, kind: SystemKind, alpha: f64, replication: usize) -> Vec<f64> {
        let work = &self.replications[replication];
        let mut out = Vec::with_capacity(work.len());
        self.replay(kind, alpha, work, |_, d| out.push(d));
        out
    }

    fn replay(&self, kind: SystemKind, alpha: f64, work: &[RequestSample], mut sink: impl FnMut(usize, f64)) {
        let p = &self.params;
        let mut wifi = LindleyQueue::new();
        let mut vlc = vec![LindleyQueue::new(); p.n() as usize];
        match kind {
            SystemKind::NonAggregated => {
                let (inv_b1, inv_b2) = (1.0 / p.b1(), 1.0 / p.b2());
                for (i, r) in work.iter().enumerate() {
                    let d = if r.route_draw < alpha {
                        wifi.push(r.arrival_time, r.size * inv_b1)
                    } else {
                        vlc[r.vlc_index as usize].push(r.arrival_time, r.size * inv_b2)
                    };
                    sink(i, d);
                }
            }
            SystemKind::Aggregated => {
                let wifi_scale = alpha / p.b1();
                let vlc_scale = (1.0 - alpha) / p.b2();
                for (i, r) in work.iter().enumerate() {
                    let dw = wifi.push(r.arrival_time, r.size * wifi_scale);
                    let dv = vlc[r.vlc_index as usize].push(r.arrival_time, r.size * vlc_scale);
                    sink(i, dw.max(dv));
                }
            }
        }
    }
}

fn checked_alpha(params: &SystemParams, alpha: AllocationRatio) -> Result<f64> {
    // Re-validate: the ratio may have been built for another scenario.
    AllocationRatio::new(params, alpha.value()).map(|a| a.value())
}

/// Simulates the non-aggregated system: each request goes whole to WiFi with
/// probability alpha, otherwise to its VLC AP.
pub fn simulate_nonaggregated(params: &SystemParams, alpha: AllocationRatio, config: &RunConfig) -> Result<DelayStats> {
    let a = checked_alpha(params, alpha)?;
    Ok(WorkloadSet::generate(params, config)?.stats(SystemKind::NonAggregated, a))
}

/// Simulates the aggregated system: each request sends `alpha * size` to the
/// shared WiFi queue and the rest to its VLC AP, and completes when both
/// pieces have been served.
pub fn simulate_aggregated(params: &SystemParams, alpha: AllocationRatio, config: &RunConfig) -> Result<DelayStats> {
    let a = checked_alpha(params, alpha)?;
    Ok(WorkloadSet::generate(params, config)?.stats(SystemKind::Aggregated, a))
}

/// Outcome of the simulated split-ratio search.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedOptimum {
    pub alpha: f64,
    pub stats: DelayStats,
    pub evaluations: usize,
    /// The coarse scan beat the golden-section result and the search was
    /// repeated around the best scan point.
    pub refined: bool,
}

/// Minimizes the simulated aggregated mean delay over the feasible interval,
/// replaying the same streams for every candidate.
pub fn optimize_alpha_on(workloads: &WorkloadSet, search_tolerance: f64) -> Result<SimulatedOptimum> {
    if !(search_tolerance > 0.0) {
        return Err(Error::InvalidAlpha(format!(
            "search tolerance must be positive (got {search_tolerance})"
        )));
    }
    let interval = workloads.params().feasible_interval();
    let objective = |a: f64| workloads.stats(SystemKind::Aggregated, a).mean;

    let golden = golden_section_minimize(objective, interval.lo, interval.hi, search_tolerance);
    let mut best = (golden.x, golden.fx);
    let mut evaluations = golden.evaluations;

    // Unimodality is assumed; a coarse scan catches a missed basin.
    let step = interval.width() / COARSE_SCAN_POINTS as f64;
    let scan = (0..COARSE_SCAN_POINTS)
        .map(|i| {
            let a = interval.lo + (i as f64 + 0.5) * step;
            (a, objective(a))
        })
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .expect("scan is non-empty");
    evaluations += COARSE_SCAN_POINTS;

    let mut refined = false;
    if scan.1 < best.1 {
        let lo = (scan.0 - step).max(interval.lo);
        let hi = (scan.0 + step).min(interval.hi);
        let local = golden_section_minimize(objective, lo, hi, search_tolerance);
        evaluations += local.evaluations;
        best = if local.fx < scan.1 { (local.x, local.fx) } else { scan };
        refined = true;
    }

    Ok(SimulatedOptimum {
        alpha: best.0,
        stats: workloads.stats(SystemKind::Aggregated, best.0),
        evaluations,
        refined,
    })
}

/// Golden-section search for the split ratio minimizing the simulated
/// aggregated delay.
pub fn optimize_alpha_simulated(
    params: &SystemParams,
    config: &RunConfig,
    search_tolerance: f64,
) -> Result<(f64, DelayStats)> {
    let workloads = WorkloadSet::generate(params, config)?;
    let opt = optimize_alpha_on(&workloads, search_tolerance)?;
    Ok((opt.alpha, opt.stats))
}
