//! One-parameter sweeps comparing the split-ratio approximation against the
//! simulated optimum, and the aggregated system against the non-aggregated
//! optimum.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::analytic::{agg_split_ratio_approx, nonagg_optimal_alpha};
use crate::error::Result;
use crate::model::RawParams;
use crate::sim::stats::ci_halfwidth_95;
use crate::sim::{optimize_alpha_on, RunConfig, SystemKind, WorkloadSet, DEFAULT_SEARCH_TOLERANCE};

pub const CSV_HEADER: [&str; 7] = [
    "metric",
    "varied_param",
    "varied_value",
    "n",
    "value",
    "ci_halfwidth",
    "status",
];

/// Base scenario of the sweeps: 0.5 req/s, 90 Mb, 50 Mb/s WiFi, 100 Mb/s VLC.
pub fn default_base(n: u32) -> RawParams {
    RawParams::new(0.5, 90.0, 50.0, 100.0, n)
}

pub fn default_n_values() -> Vec<u32> {
    (1..=10).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VariedParam {
    Lambda,
    Mu,
    B1,
    B2,
}

impl VariedParam {
    pub const ALL: [VariedParam; 4] = [VariedParam::Lambda, VariedParam::Mu, VariedParam::B1, VariedParam::B2];

    pub fn name(self) -> &'static str {
        match self {
            VariedParam::Lambda => "lambda",
            VariedParam::Mu => "mu",
            VariedParam::B1 => "b1",
            VariedParam::B2 => "b2",
        }
    }

    pub fn default_grid(self) -> Vec<f64> {
        match self {
            VariedParam::Lambda => (1..=10).map(|k| f64::from(k) / 10.0).collect(),
            VariedParam::Mu => (3..=12).map(|k| f64::from(k) * 10.0).collect(),
            VariedParam::B1 => (1..=9).map(|k| f64::from(k) * 10.0).collect(),
            VariedParam::B2 => (3..=10).map(|k| f64::from(k) * 20.0).collect(),
        }
    }

    pub fn apply(self, base: RawParams, value: f64) -> RawParams {
        let mut p = base;
        match self {
            VariedParam::Lambda => p.lambda = value,
            VariedParam::Mu => p.mu = value,
            VariedParam::B1 => p.b1 = value,
            VariedParam::B2 => p.b2 = value,
        }
        p
    }
}

impl fmt::Display for VariedParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VariedParam {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        VariedParam::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown parameter `{s}` (expected lambda, mu, b1 or b2)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// `100 (D(alpha_approx) - D(alpha_star)) / D(alpha_star)`, both simulated.
    ApproxPenaltyPercent,
    /// Simulated aggregated delay at `alpha_approx` over the analytic
    /// non-aggregated minimum.
    AggOverNonAggRatio,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::ApproxPenaltyPercent => "approx_penalty_percent",
            Metric::AggOverNonAggRatio => "agg_over_nonagg_ratio",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "approx_penalty_percent" | "approx-penalty" | "approx_penalty" | "penalty" => {
                Ok(Metric::ApproxPenaltyPercent)
            }
            "agg_over_nonagg_ratio" | "agg-ratio" | "agg_ratio" | "ratio" => Ok(Metric::AggOverNonAggRatio),
            _ => Err(format!("unknown metric `{s}` (expected approx-penalty or agg-ratio)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Scenario the varied parameter is substituted into; its `n` is replaced
    /// by each entry of `n_values`.
    pub base: RawParams,
    pub varied: VariedParam,
    pub values: Vec<f64>,
    pub n_values: Vec<u32>,
    pub run: RunConfig,
    pub metric: Metric,
    /// Bracket width at which the simulated split-ratio search stops.
    pub search_tolerance: f64,
}

impl SweepSpec {
    /// Default grid for `varied` around the default base point, `n = 1..=10`.
    pub fn new(metric: Metric, varied: VariedParam) -> Self {
        SweepSpec {
            base: default_base(1),
            varied,
            values: varied.default_grid(),
            n_values: default_n_values(),
            run: RunConfig::default(),
            metric,
            search_tolerance: DEFAULT_SEARCH_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStatus {
    Ok,
    SkippedInfeasible,
}

impl RowStatus {
    pub fn name(self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::SkippedInfeasible => "skipped_infeasible",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub varied_value: f64,
    pub n: u32,
    /// NaN for skipped rows.
    pub metric_value: f64,
    pub ci_halfwidth: f64,
    pub status: RowStatus,
    /// Split ratio from the delay-equalization formula.
    pub alpha_approx: f64,
    /// Reference delay the metric is measured against: the simulated optimum
    /// for the penalty, the analytic non-aggregated minimum for the ratio.
    pub reference_delay: f64,
}

impl SweepRow {
    fn skipped(varied_value: f64, n: u32) -> Self {
        SweepRow {
            varied_value,
            n,
            metric_value: f64::NAN,
            ci_halfwidth: f64::NAN,
            status: RowStatus::SkippedInfeasible,
            alpha_approx: f64::NAN,
            reference_delay: f64::NAN,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == RowStatus::Ok
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub metric: Metric,
    pub varied: VariedParam,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn ok_rows(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.is_ok())
    }

    /// Largest metric value over the ok rows.
    pub fn max_value(&self) -> Option<f64> {
        self.ok_rows().map(|r| r.metric_value).reduce(f64::max)
    }

    /// Rows for one AP count, in grid order.
    pub fn series(&self, n: u32) -> Vec<&SweepRow> {
        self.rows.iter().filter(|r| r.n == n).collect()
    }

    /// Default file name, e.g. `approx_penalty_percent_lambda.csv`.
    pub fn file_name(&self) -> String {
        format!("{}_{}.csv", self.metric, self.varied)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for row in &self.rows {
            let (value, ci) = match row.status {
                RowStatus::Ok => (format_sig9(row.metric_value), format_sig9(row.ci_halfwidth)),
                RowStatus::SkippedInfeasible => (String::new(), String::new()),
            };
            w.write_record([
                self.metric.name().to_string(),
                self.varied.name().to_string(),
                format_sig9(row.varied_value),
                row.n.to_string(),
                value,
                ci,
                row.status.name().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Formats `x` with exactly nine significant digits, in plain notation for
/// moderate magnitudes and scientific notation otherwise.
pub fn format_sig9(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0.00000000".to_string();
    }
    // The exponent after rounding to nine digits.
    let sci = format!("{x:.8e}");
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..]
        .parse()
        .expect("integer exponent");
    if (-5..15).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

/// Percentage delay penalty of the approximate split ratio, per cell.
pub fn approx_penalty_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    sweep_with(spec, Metric::ApproxPenaltyPercent)
}

/// Aggregated-over-non-aggregated delay ratio, per cell.
pub fn agg_ratio_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    sweep_with(spec, Metric::AggOverNonAggRatio)
}

/// Runs the sweep for `spec.metric`.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    sweep_with(spec, spec.metric)
}

fn sweep_with(spec: &SweepSpec, metric: Metric) -> Result<SweepTable> {
    spec.run.validate()?;
    let mut rows = Vec::with_capacity(spec.values.len() * spec.n_values.len());
    // Cells run one after another; replications inside a cell run in parallel.
    for &value in &spec.values {
        for &n in &spec.n_values {
            let raw = RawParams {
                n,
                ..spec.varied.apply(spec.base, value)
            };
            let row = match raw.validate() {
                Ok(params) => {
                    let workloads = WorkloadSet::generate(&params, &spec.run)?;
                    match metric {
                        Metric::ApproxPenaltyPercent => penalty_cell(&workloads, value, spec.search_tolerance)?,
                        Metric::AggOverNonAggRatio => ratio_cell(&workloads, value)?,
                    }
                }
                Err(_) => SweepRow::skipped(value, n),
            };
            rows.push(row);
        }
    }
    Ok(SweepTable {
        metric,
        varied: spec.varied,
        rows,
    })
}

fn penalty_cell(workloads: &WorkloadSet, value: f64, tolerance: f64) -> Result<SweepRow> {
    let params = workloads.params();
    let alpha_approx = agg_split_ratio_approx(params)?.alpha_approx.value();
    let at_approx = workloads.stats(SystemKind::Aggregated, alpha_approx);
    let best = optimize_alpha_on(workloads, tolerance)?;
    let reference = best.stats.mean;
    // Paired per-replication penalties share their random numbers.
    let paired: Vec<f64> = at_approx
        .replication_means
        .iter()
        .zip(&best.stats.replication_means)
        .map(|(a, b)| 100.0 * (a - b) / b)
        .collect();
    Ok(SweepRow {
        varied_value: value,
        n: params.n(),
        metric_value: 100.0 * (at_approx.mean - reference) / reference,
        ci_halfwidth: ci_halfwidth_95(&paired),
        status: RowStatus::Ok,
        alpha_approx,
        reference_delay: reference,
    })
}

fn ratio_cell(workloads: &WorkloadSet, value: f64) -> Result<SweepRow> {
    let params = workloads.params();
    let alpha_approx = agg_split_ratio_approx(params)?.alpha_approx.value();
    let agg = workloads.stats(SystemKind::Aggregated, alpha_approx);
    let reference = nonagg_optimal_alpha(params)?.min_delay;
    Ok(SweepRow {
        varied_value: value,
        n: params.n(),
        metric_value: agg.mean / reference,
        ci_halfwidth: agg.ci_halfwidth_95 / reference,
        status: RowStatus::Ok,
        alpha_approx,
        reference_delay: reference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(metric: Metric, varied: VariedParam, values: Vec<f64>, n_values: Vec<u32>) -> SweepSpec {
        SweepSpec {
            values,
            n_values,
            run: RunConfig::new(5_000, 500, 3, 11).unwrap(),
            ..SweepSpec::new(metric, varied)
        }
    }

    #[test]
    fn default_grids() {
        assert_eq!(VariedParam::Lambda.default_grid().len(), 10);
        assert_eq!(
            VariedParam::Mu.default_grid(),
            vec![30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0, 100.0, 110.0, 120.0]
        );
        assert_eq!(*VariedParam::B1.default_grid().last().unwrap(), 90.0);
        assert_eq!(VariedParam::B2.default_grid().first(), Some(&60.0));
        assert_eq!(VariedParam::Lambda.default_grid()[2], 0.3);
    }

    #[test]
    fn sig9_formatting() {
        assert_eq!(format_sig9(0.5), "0.500000000");
        assert_eq!(format_sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(format_sig9(90.0), "90.0000000");
        assert_eq!(format_sig9(9.9999999996), "10.0000000");
        assert_eq!(format_sig9(-2.5e-3), "-0.00250000000");
        assert_eq!(format_sig9(1.5e-9), "1.50000000e-9");
        assert_eq!(format_sig9(0.0), "0.00000000");
    }

    #[test]
    fn table_is_complete_and_marks_infeasible_cells() {
        // b1 = 120 violates b1 < b2 and must show up as a skipped row.
        let spec = quick(
            Metric::AggOverNonAggRatio,
            VariedParam::B1,
            vec![40.0, 120.0],
            vec![1, 3],
        );
        let table = agg_ratio_sweep(&spec).unwrap();
        assert_eq!(table.rows.len(), 4);
        let skipped: Vec<_> = table.rows.iter().filter(|r| !r.is_ok()).collect();
        assert_eq!(skipped.len(), 2);
        assert!(skipped.iter().all(|r| r.varied_value == 120.0));
        let order: Vec<_> = table.rows.iter().map(|r| (r.varied_value, r.n)).collect();
        assert_eq!(order, vec![(40.0, 1), (40.0, 3), (120.0, 1), (120.0, 3)]);
        assert!(table.ok_rows().all(|r| r.reference_delay > 0.0));
    }

    #[test]
    fn overload_is_skipped() {
        let spec = quick(Metric::AggOverNonAggRatio, VariedParam::Lambda, vec![0.5, 3.0], vec![1]);
        let table = run_sweep(&spec).unwrap();
        assert_eq!(table.rows[1].status, RowStatus::SkippedInfeasible);
        assert!(table.rows[0].is_ok());
    }

    #[test]
    fn reruns_are_identical() {
        let spec = quick(Metric::ApproxPenaltyPercent, VariedParam::Mu, vec![60.0], vec![1, 2]);
        let a = approx_penalty_sweep(&spec).unwrap();
        let b = approx_penalty_sweep(&spec).unwrap();
        assert_eq!(a, b);
        let (mut x, mut y) = (Vec::new(), Vec::new());
        a.write_csv(&mut x).unwrap();
        b.write_csv(&mut y).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn csv_layout() {
        let spec = quick(Metric::AggOverNonAggRatio, VariedParam::Lambda, vec![0.5, 5.0], vec![2]);
        let table = run_sweep(&spec).unwrap();
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "metric,varied_param,varied_value,n,value,ci_halfwidth,status");
        assert!(lines[1].starts_with("agg_over_nonagg_ratio,lambda,0.500000000,2,"));
        assert!(lines[1].ends_with(",ok"));
        assert_eq!(
            lines[2],
            "agg_over_nonagg_ratio,lambda,5.00000000,2,,,skipped_infeasible"
        );
        assert_eq!(table.file_name(), "agg_over_nonagg_ratio_lambda.csv");
    }

    #[test]
    fn metric_and_param_names_round_trip() {
        for p in VariedParam::ALL {
            assert_eq!(p.name().parse::<VariedParam>().unwrap(), p);
        }
        assert_eq!("agg-ratio".parse::<Metric>().unwrap(), Metric::AggOverNonAggRatio);
        assert_eq!(
            Metric::ApproxPenaltyPercent.name().parse::<Metric>().unwrap(),
            Metric::ApproxPenaltyPercent
        );
        assert!("speed".parse::<Metric>().is_err());
    }
}
