//! Seeded request streams.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::model::SystemParams;

use super::RunConfig;

/// One request arriving at the router.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RequestSample {
    /// Arrival time (s).
    pub arrival_time: f64,
    /// Request size (Mb).
    pub size: f64,
    /// VLC access point the request (or its VLC piece) is sent to.
    pub vlc_index: u32,
    /// Uniform draw in `[0, 1)`; the non-aggregated router sends the request
    /// to WiFi when this is below the routing probability.
    pub route_draw: f64,
}

/// Random stream for one replication.
///
/// All replications share the ChaCha key derived from `master_seed` and use
/// the replication index as the stream id, so streams never overlap.
pub fn replication_rng(master_seed: u64, replication_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(replication_index);
    rng
}

/// Generates the request stream of one replication.
///
/// Inter-arrival gaps are `Exp(1) / lambda` and sizes are `mu * Exp(1)`, so
/// for a fixed seed the stream scales exactly with `lambda` and `mu`.
pub fn generate_workload(params: &SystemParams, config: &RunConfig, replication_index: u64) -> Vec<RequestSample> {
    let mut rng = replication_rng(config.master_seed, replication_index);
    let n = params.n();
    let inv_lambda = 1.0 / params.lambda();
    let mu = params.mu();
    let mut t = 0.0;
    (0..config.num_requests)
        .map(|_| {
            let gap: f64 = Exp1.sample(&mut rng);
            let size: f64 = Exp1.sample(&mut rng);
            let vlc_index = rng.random_range(0..n);
            let route_draw: f64 = rng.random();
            t += gap * inv_lambda;
            RequestSample {
                arrival_time: t,
                size: mu * size,
                vlc_index,
                route_draw,
            }
        })
        .collect()
}
