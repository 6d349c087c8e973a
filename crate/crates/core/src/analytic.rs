//! Closed-form mean delays for both system configurations.
//!
//! Every queue in the model is M/M/1: Poisson arrivals (thinned or split from
//! the router's Poisson stream) and exponentially distributed service times.
//! The non-aggregated optimum is available in closed form; for the aggregated
//! system only the delay-equalizing split ratio is, since the true objective
//! `E[max(D_wifi, D_vlc)]` couples the WiFi queue to every VLC queue.

use crate::error::{Error, Result};
use crate::model::{unstable_link, AllocationRatio, SystemParams};

/// Mean sojourn time of an M/M/1 queue, `1 / (service_rate - arrival_rate)`.
pub fn mm1_mean_delay(arrival_rate: f64, service_rate: f64) -> Result<f64> {
    if !(service_rate > 0.0) || !(arrival_rate >= 0.0) || arrival_rate >= service_rate {
        return Err(Error::UnstableQueue {
            link: None,
            arrival_rate,
            service_rate,
        });
    }
    Ok(1.0 / (service_rate - arrival_rate))
}

/// Which branch of the closed-form optimum applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonAggBranch {
    /// All traffic goes to VLC.
    BoundaryAllVlc,
    /// The optimum is a stationary point inside the feasible interval.
    Interior,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonAggSolution {
    pub alpha_opt: AllocationRatio,
    /// Minimum mean system delay in seconds.
    pub min_delay: f64,
    pub branch: NonAggBranch,
    /// Set when the stationary point fell outside the admissible set and an
    /// endpoint was returned instead.
    pub clamped: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AggApproxSolution {
    pub alpha_approx: AllocationRatio,
    pub wifi_mean_delay: f64,
    pub vlc_mean_delay: f64,
}

/// Mean delay of the non-aggregated system at a raw routing probability.
///
/// Returns `f64::INFINITY` when either loaded queue is unstable.
pub(crate) fn nonagg_delay_at(params: &SystemParams, alpha: f64) -> f64 {
    let load = params.offered_load();
    let mu = params.mu();
    let wifi = if alpha > 0.0 {
        let margin = params.b1() - alpha * load;
        if margin <= 0.0 {
            return f64::INFINITY;
        }
        alpha * mu / margin
    } else {
        0.0
    };
    let vlc = if alpha < 1.0 {
        let margin = params.b2() - (1.0 - alpha) * load / params.n_f64();
        if margin <= 0.0 {
            return f64::INFINITY;
        }
        (1.0 - alpha) * mu / margin
    } else {
        0.0
    };
    wifi + vlc
}

/// Mean per-request delay when a fraction `alpha` of requests goes to WiFi
/// and the rest is spread evenly over the VLC APs.
pub fn nonagg_mean_delay(params: &SystemParams, alpha: AllocationRatio) -> Result<f64> {
    let a = alpha.value();
    let delay = nonagg_delay_at(params, a);
    if delay.is_finite() {
        Ok(delay)
    } else {
        Err(unstable_link(params, a))
    }
}

/// `(b2 * n / (lambda * mu)) * (1 - sqrt(beta * n))`; the all-VLC allocation
/// is optimal when this is at least one.
pub fn boundary_condition_value(params: &SystemParams) -> f64 {
    let b2n = params.b2() * params.n_f64();
    (b2n / params.offered_load()) * (1.0 - (params.beta() * params.n_f64()).sqrt())
}

/// Stationary point of the non-aggregated objective.
///
/// Written as `sqrt(b1) (L + n sqrt(b1 b2) - n b2) / (L (sqrt(b1) + n sqrt(b2)))`
/// with `L = lambda * mu`, which does not divide by `b2 * n`.
pub fn nonagg_stationary_alpha(params: &SystemParams) -> f64 {
    let load = params.offered_load();
    let n = params.n_f64();
    let (b1, b2) = (params.b1(), params.b2());
    let sb1 = b1.sqrt();
    sb1 * (load + n * (b1 * b2).sqrt() - b2 * n) / (load * (sb1 + n * b2.sqrt()))
}

/// The stationary point in its `beta` form. Kept for cross-checking
/// [`nonagg_stationary_alpha`].
pub fn nonagg_stationary_alpha_beta_form(params: &SystemParams) -> f64 {
    let load = params.offered_load();
    let n = params.n_f64();
    let b2n = params.b2() * n;
    let beta = params.beta();
    let sb = beta.sqrt();
    (load * sb / b2n + sb * ((beta * n).sqrt() - 1.0)) / (load * (sb + n.sqrt()) / b2n)
}

/// The minimum non-aggregated delay as a single closed-form expression
/// (no evaluation of the objective). Used to cross-check the optimizer.
pub fn nonagg_closed_form_min_delay(params: &SystemParams) -> f64 {
    let load = params.offered_load();
    let n = params.n_f64();
    let b2n = params.b2() * n;
    let beta = params.beta();
    if boundary_condition_value(params) >= 1.0 {
        params.mu() * n / (b2n - load)
    } else {
        let gap = 1.0 - (beta * n).sqrt();
        (load * (1.0 + n) - b2n * gap * gap) / (params.lambda() * (b2n * (beta + 1.0) - load))
    }
}

/// Optimal routing probability of the non-aggregated system.
pub fn nonagg_optimal_alpha(params: &SystemParams) -> Result<NonAggSolution> {
    let interval = params.feasible_interval();
    if boundary_condition_value(params) >= 1.0 && interval.zero_admissible {
        let alpha_opt = AllocationRatio::new(params, 0.0)?;
        return Ok(NonAggSolution {
            alpha_opt,
            min_delay: nonagg_mean_delay(params, alpha_opt)?,
            branch: NonAggBranch::BoundaryAllVlc,
            clamped: false,
        });
    }

    let stationary = nonagg_stationary_alpha(params);
    if interval.admits(stationary) {
        let alpha_opt = AllocationRatio::new(params, stationary)?;
        return Ok(NonAggSolution {
            alpha_opt,
            min_delay: nonagg_mean_delay(params, alpha_opt)?,
            branch: NonAggBranch::Interior,
            clamped: false,
        });
    }

    // The objective is convex, so with the stationary point outside the
    // admissible set the best closed endpoint is the minimizer.
    let best = [(0.0, interval.zero_admissible), (1.0, interval.one_admissible)]
        .into_iter()
        .filter(|&(_, ok)| ok)
        .map(|(a, _)| (a, nonagg_delay_at(params, a)))
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .ok_or_else(|| {
            Error::Numerical(format!(
                "stationary point {stationary} lies outside ({}, {}) and no endpoint is admissible",
                interval.lo, interval.hi
            ))
        })?;
    let alpha_opt = AllocationRatio::new(params, best.0)?;
    Ok(NonAggSolution {
        alpha_opt,
        min_delay: best.1,
        branch: if best.0 == 0.0 {
            NonAggBranch::BoundaryAllVlc
        } else {
            NonAggBranch::Interior
        },
        clamped: true,
    })
}

/// Grid search over the feasible interval. An independent check on
/// [`nonagg_optimal_alpha`].
pub fn nonagg_bruteforce_min(params: &SystemParams, grid_step: f64) -> Result<NonAggSolution> {
    let interval = params.feasible_interval();
    if !(grid_step > 0.0) || grid_step >= interval.width() {
        return Err(Error::InvalidAlpha(format!(
            "grid step {grid_step} must be positive and below the feasible width {}",
            interval.width()
        )));
    }

    let mut best = (f64::NAN, f64::INFINITY);
    let mut consider = |a: f64| {
        let d = nonagg_delay_at(params, a);
        if d < best.1 {
            best = (a, d);
        }
    };
    if interval.zero_admissible {
        consider(0.0);
    }
    let mut k = 1u64;
    loop {
        let a = interval.lo + k as f64 * grid_step;
        if a >= interval.hi {
            break;
        }
        consider(a);
        k += 1;
    }
    if interval.one_admissible {
        consider(1.0);
    }

    let alpha_opt = AllocationRatio::new(params, best.0)?;
    Ok(NonAggSolution {
        alpha_opt,
        min_delay: best.1,
        branch: if best.0 == 0.0 {
            NonAggBranch::BoundaryAllVlc
        } else {
            NonAggBranch::Interior
        },
        clamped: false,
    })
}

/// Per-queue mean delays of the aggregated system at raw split `alpha`.
/// `None` when a loaded queue is unstable.
pub(crate) fn agg_delays_at(params: &SystemParams, alpha: f64) -> Option<(f64, f64)> {
    let load = params.offered_load();
    let mu = params.mu();
    let wifi = if alpha > 0.0 {
        let margin = params.b1() - alpha * load;
        if margin <= 0.0 {
            return None;
        }
        alpha * mu / margin
    } else {
        0.0
    };
    let vlc = if alpha < 1.0 {
        let margin = params.b2() - (1.0 - alpha) * load / params.n_f64();
        if margin <= 0.0 {
            return None;
        }
        (1.0 - alpha) * mu / margin
    } else {
        0.0
    };
    Some((wifi, vlc))
}

/// Mean delays `(wifi, vlc)` of the two pieces of a request split at `alpha`.
///
/// Every request puts a piece of mean size `alpha * mu` on WiFi, so the WiFi
/// queue sees arrival rate `lambda` and service rate `b1 / (alpha * mu)`; each
/// VLC queue sees `lambda / n` and `b2 / ((1 - alpha) * mu)`.
pub fn agg_per_queue_mean_delays(params: &SystemParams, alpha: AllocationRatio) -> Result<(f64, f64)> {
    let a = alpha.value();
    agg_delays_at(params, a).ok_or_else(|| unstable_link(params, a))
}

/// `max(E[D_wifi], E[D_vlc])`, a lower bound on `E[max(D_wifi, D_vlc)]`.
pub fn agg_analytic_lower_bound(params: &SystemParams, alpha: AllocationRatio) -> Result<f64> {
    let (w, v) = agg_per_queue_mean_delays(params, alpha)?;
    Ok(w.max(v))
}

/// `E[D_wifi] + E[D_vlc]`, an upper bound on `E[max(D_wifi, D_vlc)]`. It is
/// also the non-aggregated mean delay at the same `alpha`.
pub fn agg_analytic_upper_bound(params: &SystemParams, alpha: AllocationRatio) -> Result<f64> {
    let (w, v) = agg_per_queue_mean_delays(params, alpha)?;
    Ok(w + v)
}

/// Smaller root of `a x^2 + b x + c` with `a = L (1 - 1/n)`,
/// `b = -(b1 + b2 + a)`, `c = b1`, where `L` is the offered load.
///
/// Evaluated as `2c / (-b + sqrt(b^2 - 4ac))`, which is the same root but
/// stays accurate as `a -> 0` and reduces to `b1 / (b1 + b2)` at `n = 1`.
/// `n` is real-valued so the `n -> 1` limit can be probed.
pub fn split_ratio_root(offered_load: f64, b1: f64, b2: f64, n: f64) -> Result<f64> {
    let (a, b, c) = split_ratio_quadratic(offered_load, b1, b2, n);
    let disc = b * b - 4.0 * a * c;
    if !(disc > 0.0) {
        return Err(Error::Numerical(format!(
            "split-ratio discriminant {disc} is not positive (a={a}, b={b}, c={c})"
        )));
    }
    Ok(2.0 * c / (-b + disc.sqrt()))
}

/// Coefficients `(a, b, c)` of the delay-equalization quadratic.
pub fn split_ratio_quadratic(offered_load: f64, b1: f64, b2: f64, n: f64) -> (f64, f64, f64) {
    let a = offered_load * (1.0 - 1.0 / n);
    (a, -(b1 + b2 + a), b1)
}

/// Split ratio that equalizes the two per-queue mean delays.
pub fn agg_split_ratio_approx(params: &SystemParams) -> Result<AggApproxSolution> {
    let alpha = split_ratio_root(params.offered_load(), params.b1(), params.b2(), params.n_f64())?;
    if !params.feasible_interval().contains_strictly(alpha) {
        return Err(Error::Numerical(format!(
            "split ratio {alpha} fell outside the feasible interval"
        )));
    }
    let alpha_approx = AllocationRatio::new(params, alpha)?;
    let (wifi_mean_delay, vlc_mean_delay) = agg_per_queue_mean_delays(params, alpha_approx)?;
    Ok(AggApproxSolution {
        alpha_approx,
        wifi_mean_delay,
        vlc_mean_delay,
    })
}
