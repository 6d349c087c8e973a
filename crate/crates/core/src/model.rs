//! Scenario parameters and the stability logic shared by every other module.
//!
//! Units are fixed throughout the crate: time in seconds, data in megabits,
//! capacities in megabits per second. With these units `lambda * mu` is the
//! offered load in Mb/s and `lambda * mu / b` is a dimensionless utilization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Link, Result};

/// Unvalidated scenario values, as read from a file or the command line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawParams {
    /// Request arrival rate (requests/s).
    pub lambda: f64,
    /// Mean request size (Mb).
    pub mu: f64,
    /// WiFi downlink capacity (Mb/s).
    pub b1: f64,
    /// Downlink capacity of each VLC access point (Mb/s).
    pub b2: f64,
    /// Number of VLC access points.
    pub n: u32,
}

impl RawParams {
    pub fn new(lambda: f64, mu: f64, b1: f64, b2: f64, n: u32) -> Self {
        RawParams { lambda, mu, b1, b2, n }
    }

    pub fn validate(self) -> Result<SystemParams> {
        validate_params(self)
    }
}

/// A validated scenario: all values positive, `b1 < b2` and the offered load
/// below the combined capacity `b1 + n * b2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    lambda: f64,
    mu: f64,
    b1: f64,
    b2: f64,
    n: u32,
}

/// Dimensionless quantities derived from a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedQuantities {
    /// `b1 / (b2 * n)`.
    pub beta: f64,
    /// Offered load `lambda * mu` in Mb/s.
    pub traffic_intensity: f64,
}

/// Validates the five scenario values.
pub fn validate_params(raw: RawParams) -> Result<SystemParams> {
    let params = check_common(raw)?;
    if raw.b1 >= raw.b2 {
        return Err(Error::CapacityOrderViolation { b1: raw.b1, b2: raw.b2 });
    }
    Ok(params)
}

fn check_common(raw: RawParams) -> Result<SystemParams> {
    for (name, value) in [("lambda", raw.lambda), ("mu", raw.mu), ("b1", raw.b1), ("b2", raw.b2)] {
        // `!(x > 0)` also rejects NaN.
        if !(value > 0.0) || !value.is_finite() {
            return Err(Error::NonPositiveParameter { name, value });
        }
    }
    if raw.n == 0 {
        return Err(Error::NonPositiveParameter { name: "n", value: 0.0 });
    }
    let offered = raw.lambda * raw.mu;
    let capacity = raw.b1 + f64::from(raw.n) * raw.b2;
    if offered >= capacity {
        return Err(Error::InfeasibleLoad { offered, capacity });
    }
    Ok(SystemParams {
        lambda: raw.lambda,
        mu: raw.mu,
        b1: raw.b1,
        b2: raw.b2,
        n: raw.n,
    })
}

impl SystemParams {
    pub fn new(lambda: f64, mu: f64, b1: f64, b2: f64, n: u32) -> Result<Self> {
        validate_params(RawParams::new(lambda, mu, b1, b2, n))
    }

    /// Like [`SystemParams::new`] but without the `b1 < b2` requirement.
    ///
    /// The delay formulas remain well defined when WiFi is the faster link;
    /// this is used for symmetric-capacity checks.
    pub fn new_any_capacity_order(lambda: f64, mu: f64, b1: f64, b2: f64, n: u32) -> Result<Self> {
        check_common(RawParams::new(lambda, mu, b1, b2, n))
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn b1(&self) -> f64 {
        self.b1
    }

    pub fn b2(&self) -> f64 {
        self.b2
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn n_f64(&self) -> f64 {
        f64::from(self.n)
    }

    pub fn raw(&self) -> RawParams {
        RawParams::new(self.lambda, self.mu, self.b1, self.b2, self.n)
    }

    /// Offered load `lambda * mu` in Mb/s.
    pub fn offered_load(&self) -> f64 {
        self.lambda * self.mu
    }

    pub fn beta(&self) -> f64 {
        self.b1 / (self.b2 * self.n_f64())
    }

    pub fn derived(&self) -> DerivedQuantities {
        DerivedQuantities {
            beta: self.beta(),
            traffic_intensity: self.offered_load(),
        }
    }

    pub fn feasible_interval(&self) -> FeasibleInterval {
        feasible_alpha_interval(self)
    }
}

/// The open interval of allocation ratios that keep both links stable.
///
/// The same bounds apply to the routing probability of the non-aggregated
/// system and to the size fraction of the aggregated system: in both cases
/// WiFi carries `alpha * lambda * mu` Mb/s and each VLC AP carries
/// `(1 - alpha) * lambda * mu / n` Mb/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibleInterval {
    pub lo: f64,
    pub hi: f64,
    /// `alpha = 0` is admissible: WiFi idle and VLC stable on its own.
    pub zero_admissible: bool,
    /// `alpha = 1` is admissible: VLC idle and WiFi stable on its own.
    pub one_admissible: bool,
}

impl FeasibleInterval {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains_strictly(&self, alpha: f64) -> bool {
        self.lo < alpha && alpha < self.hi
    }

    /// Interior points plus a closed end where the corresponding queue is idle.
    pub fn admits(&self, alpha: f64) -> bool {
        self.contains_strictly(alpha) || (alpha == 0.0 && self.zero_admissible) || (alpha == 1.0 && self.one_admissible)
    }
}

pub fn feasible_alpha_interval(params: &SystemParams) -> FeasibleInterval {
    let load = params.offered_load();
    let vlc_total = params.n_f64() * params.b2;
    FeasibleInterval {
        lo: (1.0 - vlc_total / load).max(0.0),
        hi: (params.b1 / load).min(1.0),
        zero_admissible: load < vlc_total,
        one_admissible: load < params.b1,
    }
}

/// An allocation ratio checked against a scenario's stability bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllocationRatio {
    alpha: f64,
    interval: FeasibleInterval,
}

impl AllocationRatio {
    pub fn new(params: &SystemParams, alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidAlpha(format!("alpha={alpha} is outside [0, 1]")));
        }
        let interval = params.feasible_interval();
        if !interval.admits(alpha) {
            return Err(unstable_link(params, alpha));
        }
        Ok(AllocationRatio { alpha, interval })
    }

    pub fn value(&self) -> f64 {
        self.alpha
    }

    pub fn feasible_interval(&self) -> FeasibleInterval {
        self.interval
    }
}

/// Builds the error naming the link that `alpha` overloads.
pub(crate) fn unstable_link(params: &SystemParams, alpha: f64) -> Error {
    let wifi_load = alpha * params.offered_load();
    if wifi_load >= params.b1 {
        Error::UnstableQueue {
            link: Some(Link::Wifi),
            arrival_rate: wifi_load / params.mu,
            service_rate: params.b1 / params.mu,
        }
    } else {
        let vlc_load = (1.0 - alpha) * params.offered_load() / params.n_f64();
        Error::UnstableQueue {
            link: Some(Link::Vlc),
            arrival_rate: vlc_load / params.mu,
            service_rate: params.b2 / params.mu,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn base_scenario_is_valid() {
        let p = SystemParams::new(0.5, 90.0, 50.0, 100.0, 1).unwrap();
        assert_eq!(p.offered_load(), 45.0);
        assert_eq!(p.beta(), 0.5);
    }

    #[test]
    fn capacity_order_is_enforced() {
        let err = SystemParams::new(0.5, 90.0, 100.0, 50.0, 1).unwrap_err();
        assert!(matches!(err, Error::CapacityOrderViolation { .. }));
        let err = SystemParams::new(0.5, 90.0, 100.0, 100.0, 1).unwrap_err();
        assert!(matches!(err, Error::CapacityOrderViolation { .. }));
        assert!(SystemParams::new_any_capacity_order(0.5, 90.0, 100.0, 100.0, 1).is_ok());
    }

    #[test]
    fn overload_is_infeasible() {
        let err = SystemParams::new(2.0, 90.0, 50.0, 100.0, 1).unwrap_err();
        assert_eq!(
            err,
            Error::InfeasibleLoad {
                offered: 180.0,
                capacity: 150.0
            }
        );
        // Exactly at capacity is still infeasible.
        let err = SystemParams::new(1.5, 100.0, 50.0, 100.0, 1).unwrap_err();
        assert!(matches!(err, Error::InfeasibleLoad { .. }));
    }

    #[test]
    fn non_positive_values_are_named() {
        let err = SystemParams::new(0.0, 90.0, 50.0, 100.0, 1).unwrap_err();
        assert!(matches!(err, Error::NonPositiveParameter { name: "lambda", .. }));
        let err = SystemParams::new(0.5, -1.0, 50.0, 100.0, 1).unwrap_err();
        assert!(matches!(err, Error::NonPositiveParameter { name: "mu", .. }));
        let err = SystemParams::new(0.5, 90.0, f64::NAN, 100.0, 1).unwrap_err();
        assert!(matches!(err, Error::NonPositiveParameter { name: "b1", .. }));
        let err = SystemParams::new(0.5, 90.0, 50.0, 100.0, 0).unwrap_err();
        assert!(matches!(err, Error::NonPositiveParameter { name: "n", .. }));
    }

    #[test]
    fn interval_light_load() {
        let p = SystemParams::new(0.5, 90.0, 50.0, 100.0, 1).unwrap();
        let iv = p.feasible_interval();
        assert_eq!((iv.lo, iv.hi), (0.0, 1.0));
        assert!(iv.zero_admissible && iv.one_admissible);
    }

    #[test]
    fn interval_heavy_load() {
        let p = SystemParams::new(1.2, 90.0, 50.0, 100.0, 1).unwrap();
        let iv = p.feasible_interval();
        assert!((iv.lo - (1.0 - 100.0 / 108.0)).abs() < 1e-15);
        assert!((iv.hi - 50.0 / 108.0).abs() < 1e-15);
        assert!((iv.lo - 0.0741).abs() < 1e-4 && (iv.hi - 0.4630).abs() < 1e-4);
        assert!(!iv.zero_admissible && !iv.one_admissible);
    }

    #[test]
    fn interval_vanishing_load() {
        let p = SystemParams::new(1e-9, 90.0, 50.0, 100.0, 3).unwrap();
        let iv = p.feasible_interval();
        assert_eq!((iv.lo, iv.hi), (0.0, 1.0));
    }

    #[test]
    fn allocation_ratio_boundaries() {
        let light = SystemParams::new(0.5, 90.0, 50.0, 100.0, 1).unwrap();
        assert!(AllocationRatio::new(&light, 0.0).is_ok());
        assert!(AllocationRatio::new(&light, 1.0).is_ok());
        assert!(matches!(AllocationRatio::new(&light, 1.5), Err(Error::InvalidAlpha(_))));

        let heavy = SystemParams::new(1.2, 90.0, 50.0, 100.0, 1).unwrap();
        let err = AllocationRatio::new(&heavy, 0.0).unwrap_err();
        assert!(matches!(
            err,
            Error::UnstableQueue {
                link: Some(Link::Vlc),
                ..
            }
        ));
        let err = AllocationRatio::new(&heavy, 0.5).unwrap_err();
        assert!(matches!(
            err,
            Error::UnstableQueue {
                link: Some(Link::Wifi),
                ..
            }
        ));
        let hi = heavy.feasible_interval().hi;
        assert!(AllocationRatio::new(&heavy, hi).is_err());
        assert!(AllocationRatio::new(&heavy, 0.3).is_ok());
    }

    #[test]
    fn interval_nonempty_iff_feasible() {
        // Scan offered loads straddling b1 + n*b2 for a few geometries.
        for &(b1, b2, n) in &[(50.0, 100.0, 1u32), (10.0, 60.0, 4), (90.0, 200.0, 10)] {
            let capacity = b1 + f64::from(n) * b2;
            for k in (1..400).filter(|&k| k != 200) {
                let load = capacity * f64::from(k) / 200.0;
                let raw = RawParams::new(load / 90.0, 90.0, b1, b2, n);
                // Interval computed without the feasibility gate.
                let lo = (1.0 - f64::from(n) * b2 / load).max(0.0);
                let hi = (b1 / load).min(1.0);
                let nonempty = lo < hi;
                assert_eq!(nonempty, raw.validate().is_ok(), "load={load} b1={b1} b2={b2} n={n}");
            }
        }
    }

    #[test]
    fn beta_times_n_is_capacity_ratio() {
        for n in 1..=10 {
            let p = SystemParams::new(0.3, 70.0, 37.0, 110.0, n).unwrap();
            assert!((p.beta() * p.n_f64() - 37.0 / 110.0).abs() < 1e-15);
            assert!(p.beta() > 0.0 && p.beta() < 1.0);
        }
    }
}
