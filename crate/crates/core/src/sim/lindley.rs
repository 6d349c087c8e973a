//! Exact waiting times of single-server FIFO queues.

/// Incremental Lindley recursion for one FIFO queue.
///
/// Jobs must be pushed in arrival order. For job `i` the waiting time is
/// `W_i = max(0, W_{i-1} + S_{i-1} - (A_i - A_{i-1}))` with `W_1 = 0`, and the
/// returned system delay is `W_i + S_i`.
#[derive(Debug, Clone, Copy, Default)]
pub struct LindleyQueue {
    last: Option<(f64, f64)>,
}

impl LindleyQueue {
    pub fn new() -> Self {
        Self::default()
    }

    /// Admits a job and returns its system delay.
    #[inline]
    pub fn push(&mut self, arrival: f64, service: f64) -> f64 {
        let wait = match self.last {
            None => 0.0,
            Some((prev_arrival, prev_delay)) => (prev_delay - (arrival - prev_arrival)).max(0.0),
        };
        let delay = wait + service;
        self.last = Some((arrival, delay));
        delay
    }
}

/// Per-job system delays of a FIFO single-server queue.
///
/// # Panics
///
/// If the two slices differ in length.
pub fn lindley_fifo_delays(arrivals: &[f64], service_times: &[f64]) -> Vec<f64> {
    assert_eq!(arrivals.len(), service_times.len(), "one service time per arrival");
    let mut queue = LindleyQueue::new();
    arrivals
        .iter()
        .zip(service_times)
        .map(|(&a, &s)| queue.push(a, s))
        .collect()
}

/// Per-request delays of a fork-join system with one shared queue and
/// `num_branches` parallel queues.
///
/// Request `i` places a piece with service time `shared_service[i]` on the
/// shared queue and a piece with service time `branch_service[i]` on queue
/// `branch[i]`; its delay is the later of the two piece completions.
pub fn fork_join_max_delays(
    arrivals: &[f64],
    shared_service: &[f64],
    branch_service: &[f64],
    branch: &[usize],
    num_branches: usize,
) -> Vec<f64> {
    assert_eq!(arrivals.len(), shared_service.len());
    assert_eq!(arrivals.len(), branch_service.len());
    assert_eq!(arrivals.len(), branch.len());
    let mut shared = LindleyQueue::new();
    let mut branches = vec![LindleyQueue::new(); num_branches];
    (0..arrivals.len())
        .map(|i| {
            let d_shared = shared.push(arrivals[i], shared_service[i]);
            let d_branch = branches[branch[i]].push(arrivals[i], branch_service[i]);
            d_shared.max(d_branch)
        })
        .collect()
}
