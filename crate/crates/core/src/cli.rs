//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 for input and validation errors, 3 when the
//! requested allocation makes a queue unstable.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::analytic::{agg_split_ratio_approx, boundary_condition_value, nonagg_optimal_alpha, NonAggBranch};
use crate::error::Error;
use crate::model::{AllocationRatio, RawParams, SystemParams};
use crate::sim::{default_warmup, optimize_alpha_on, RunConfig, SystemKind, WorkloadSet, DEFAULT_SEARCH_TOLERANCE};
use crate::sweep::{default_base, default_n_values, format_sig9, run_sweep, Metric, SweepSpec, VariedParam};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_UNSTABLE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "hybrid-delay",
    version,
    about = "Delay analysis of hybrid WiFi/VLC downlinks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form optimum (non-aggregated) and split ratio (aggregated).
    Analyze {
        /// Scenario file (TOML).
        scenario: PathBuf,
    },
    /// Simulate one system at a given allocation ratio.
    Simulate {
        scenario: PathBuf,
        #[arg(long, value_enum)]
        system: SystemArg,
        /// Allocation ratio; defaults to the analytic choice for the system.
        #[arg(long)]
        alpha: Option<f64>,
        #[command(flatten)]
        run: RunArgs,
        /// Also write the statistics as a one-row CSV file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for the split ratio minimizing the simulated aggregated delay.
    Optimize {
        scenario: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        /// Stop when the search bracket is narrower than this.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Run parameter sweeps and write one CSV file per varied parameter.
    Sweep {
        /// Sweep specification (TOML). Without it the default grids are used.
        spec: Option<PathBuf>,
        /// approx-penalty or agg-ratio; overrides the spec file.
        #[arg(long)]
        metric: Option<String>,
        #[command(flatten)]
        run: RunArgs,
        /// Existing output directory.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SystemArg {
    #[value(alias = "non-aggregated")]
    Nonagg,
    #[value(alias = "aggregated")]
    Agg,
}

#[derive(Debug, Args, Default)]
struct RunArgs {
    #[arg(long)]
    seed: Option<u64>,
    /// Requests per replication.
    #[arg(long)]
    requests: Option<usize>,
    /// Requests discarded per replication (default: 10% of --requests).
    #[arg(long)]
    warmup: Option<usize>,
    #[arg(long)]
    replications: Option<usize>,
}

/// Optional run settings from a file or the command line.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunOverrides {
    pub seed: Option<u64>,
    pub requests: Option<usize>,
    pub warmup: Option<usize>,
    pub replications: Option<usize>,
}

impl RunOverrides {
    /// Fields set in `other` win.
    fn overlay(self, other: RunOverrides) -> RunOverrides {
        RunOverrides {
            seed: other.seed.or(self.seed),
            requests: other.requests.or(self.requests),
            warmup: other.warmup.or(self.warmup),
            replications: other.replications.or(self.replications),
        }
    }

    /// Fills unset fields from the simulator defaults.
    pub fn resolve(self) -> Result<RunConfig, Error> {
        let d = RunConfig::default();
        let num_requests = self.requests.unwrap_or(d.num_requests);
        RunConfig::new(
            num_requests,
            self.warmup.unwrap_or_else(|| default_warmup(num_requests)),
            self.replications.unwrap_or(d.replications),
            self.seed.unwrap_or(d.master_seed),
        )
    }
}

impl From<&RunArgs> for RunOverrides {
    fn from(a: &RunArgs) -> Self {
        RunOverrides {
            seed: a.seed,
            requests: a.requests,
            warmup: a.warmup,
            replications: a.replications,
        }
    }
}

/// Flat key-value scenario document.
///
/// ```toml
/// lambda = 0.5
/// mu = 90
/// b1 = 50
/// b2 = 100
/// n = 1
/// # optional
/// alpha = 0.3
/// seed = 7
/// requests = 200000
/// warmup = 20000
/// replications = 20
/// ```
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub lambda: f64,
    pub mu: f64,
    pub b1: f64,
    pub b2: f64,
    pub n: u32,
    pub alpha: Option<f64>,
    pub seed: Option<u64>,
    pub requests: Option<usize>,
    pub warmup: Option<usize>,
    pub replications: Option<usize>,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn raw_params(&self) -> RawParams {
        RawParams::new(self.lambda, self.mu, self.b1, self.b2, self.n)
    }

    pub fn run_overrides(&self) -> RunOverrides {
        RunOverrides {
            seed: self.seed,
            requests: self.requests,
            warmup: self.warmup,
            replications: self.replications,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseOverrides {
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub b1: Option<f64>,
    pub b2: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridOverrides {
    pub lambda: Option<Vec<f64>>,
    pub mu: Option<Vec<f64>>,
    pub b1: Option<Vec<f64>>,
    pub b2: Option<Vec<f64>>,
}

impl GridOverrides {
    fn get(&self, p: VariedParam) -> Option<&Vec<f64>> {
        match p {
            VariedParam::Lambda => self.lambda.as_ref(),
            VariedParam::Mu => self.mu.as_ref(),
            VariedParam::B1 => self.b1.as_ref(),
            VariedParam::B2 => self.b2.as_ref(),
        }
    }
}

/// Sweep specification document. Everything except `metric` is optional.
///
/// ```toml
/// metric = "approx-penalty"        # or "agg-ratio"
/// varied = ["lambda", "mu"]        # default: all four
/// n_values = [1, 2, 5, 10]         # default: 1..=10
/// search_tolerance = 0.0001
/// replications = 20
/// [base]
/// lambda = 0.5
/// [grids]
/// lambda = [0.1, 0.2, 0.3]
/// ```
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub metric: Option<String>,
    pub varied: Option<Vec<String>>,
    pub n_values: Option<Vec<u32>>,
    pub search_tolerance: Option<f64>,
    #[serde(default)]
    pub base: BaseOverrides,
    #[serde(default)]
    pub grids: GridOverrides,
    pub seed: Option<u64>,
    pub requests: Option<usize>,
    pub warmup: Option<usize>,
    pub replications: Option<usize>,
}

impl SweepFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    /// One spec per varied parameter, in file order.
    pub fn specs(&self, metric_flag: Option<&str>, run_flags: RunOverrides) -> Result<Vec<SweepSpec>, String> {
        let metric: Metric = metric_flag
            .or(self.metric.as_deref())
            .ok_or("a metric is required (--metric or `metric` in the spec file)")?
            .parse()?;
        let varied: Vec<VariedParam> = match &self.varied {
            Some(names) => names.iter().map(|s| s.parse()).collect::<Result<_, _>>()?,
            None => VariedParam::ALL.to_vec(),
        };
        let file_run = RunOverrides {
            seed: self.seed,
            requests: self.requests,
            warmup: self.warmup,
            replications: self.replications,
        };
        let run = file_run.overlay(run_flags).resolve().map_err(|e| e.to_string())?;
        let d = default_base(1);
        let base = RawParams {
            lambda: self.base.lambda.unwrap_or(d.lambda),
            mu: self.base.mu.unwrap_or(d.mu),
            b1: self.base.b1.unwrap_or(d.b1),
            b2: self.base.b2.unwrap_or(d.b2),
            n: 1,
        };
        let n_values = self.n_values.clone().unwrap_or_else(default_n_values);
        if n_values.is_empty() {
            return Err("n_values must not be empty".into());
        }
        let search_tolerance = self.search_tolerance.unwrap_or(DEFAULT_SEARCH_TOLERANCE);
        if !(search_tolerance > 0.0) {
            return Err(format!("search_tolerance must be positive (got {search_tolerance})"));
        }
        Ok(varied
            .into_iter()
            .map(|v| SweepSpec {
                base,
                varied: v,
                values: self.grids.get(v).cloned().unwrap_or_else(|| v.default_grid()),
                n_values: n_values.clone(),
                run,
                metric,
                search_tolerance,
            })
            .collect())
    }
}

/// A failed command and the exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_instability() { EXIT_UNSTABLE } else { EXIT_INPUT },
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::input(e.to_string())
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Analyze { scenario } => cmd_analyze(&load_scenario(&scenario)?, out),
        Command::Simulate {
            scenario,
            system,
            alpha,
            run,
            out: csv_path,
        } => {
            let file = load_scenario(&scenario)?;
            let run = file.run_overrides().overlay(RunOverrides::from(&run)).resolve()?;
            let kind = match system {
                SystemArg::Nonagg => SystemKind::NonAggregated,
                SystemArg::Agg => SystemKind::Aggregated,
            };
            cmd_simulate(&file, kind, alpha.or(file.alpha), &run, csv_path.as_deref(), out)
        }
        Command::Optimize {
            scenario,
            run,
            tolerance,
        } => {
            let file = load_scenario(&scenario)?;
            let run = file.run_overrides().overlay(RunOverrides::from(&run)).resolve()?;
            cmd_optimize(&file, &run, tolerance.unwrap_or(DEFAULT_SEARCH_TOLERANCE), out)
        }
        Command::Sweep {
            spec,
            metric,
            run,
            out: dir,
        } => {
            let file = match spec {
                Some(path) => {
                    SweepFile::parse(&read(&path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?
                }
                None => SweepFile::default(),
            };
            let specs = file
                .specs(metric.as_deref(), RunOverrides::from(&run))
                .map_err(Failure::input)?;
            cmd_sweep(&specs, &dir, out)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn load_scenario(path: &Path) -> Result<ScenarioFile, Failure> {
    ScenarioFile::parse(&read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn cmd_analyze(file: &ScenarioFile, out: &mut dyn Write) -> Result<(), Failure> {
    let p = file.raw_params().validate()?;
    let iv = p.feasible_interval();
    let non = nonagg_optimal_alpha(&p)?;
    let agg = agg_split_ratio_approx(&p)?;

    write_scenario(&p, out)?;
    writeln!(out, "beta: {:.6}", p.beta())?;
    writeln!(out, "offered load: {:.6} Mb/s", p.offered_load())?;
    writeln!(out, "feasible alpha interval: ({:.6}, {:.6})", iv.lo, iv.hi)?;
    writeln!(out, "[non-aggregated]")?;
    let branch = match non.branch {
        NonAggBranch::BoundaryAllVlc => "boundary (all VLC)",
        NonAggBranch::Interior => "interior",
    };
    writeln!(out, "boundary condition: {:.6}", boundary_condition_value(&p))?;
    writeln!(
        out,
        "branch: {branch}{}",
        if non.clamped { " (clamped to endpoint)" } else { "" }
    )?;
    writeln!(out, "alpha_opt: {:.6}", non.alpha_opt.value())?;
    writeln!(out, "min delay: {:.6} s", non.min_delay)?;
    writeln!(out, "[aggregated]")?;
    writeln!(out, "alpha_approx: {:.6}", agg.alpha_approx.value())?;
    writeln!(out, "wifi mean delay: {:.6} s", agg.wifi_mean_delay)?;
    writeln!(out, "vlc mean delay: {:.6} s", agg.vlc_mean_delay)?;
    Ok(())
}

fn write_scenario(p: &SystemParams, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(
        out,
        "scenario: lambda={:.6} mu={:.6} b1={:.6} b2={:.6} n={}",
        p.lambda(),
        p.mu(),
        p.b1(),
        p.b2(),
        p.n()
    )
}

fn write_run(run: &RunConfig, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(
        out,
        "run: seed={} replications={} requests={} warmup={}",
        run.master_seed, run.replications, run.num_requests, run.warmup_requests
    )
}

fn cmd_simulate(
    file: &ScenarioFile,
    kind: SystemKind,
    alpha: Option<f64>,
    run: &RunConfig,
    csv_path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let p = file.raw_params().validate()?;
    let alpha = match alpha {
        Some(a) => a,
        None => match kind {
            SystemKind::NonAggregated => nonagg_optimal_alpha(&p)?.alpha_opt.value(),
            SystemKind::Aggregated => agg_split_ratio_approx(&p)?.alpha_approx.value(),
        },
    };
    let ratio = AllocationRatio::new(&p, alpha)?;
    if let Some(path) = csv_path {
        check_parent_dir(path)?;
    }
    let stats = WorkloadSet::generate(&p, run)?.stats(kind, ratio.value());

    let system = match kind {
        SystemKind::NonAggregated => "nonagg",
        SystemKind::Aggregated => "agg",
    };
    write_scenario(&p, out)?;
    write_run(run, out)?;
    writeln!(out, "system: {system}")?;
    writeln!(out, "alpha: {:.6}", ratio.value())?;
    writeln!(out, "requests measured: {}", stats.count)?;
    writeln!(out, "mean delay: {:.6} s", stats.mean)?;
    writeln!(out, "95% CI half-width: {:.6} s", stats.ci_halfwidth_95)?;
    writeln!(out, "delay variance: {:.6} s^2", stats.variance)?;

    if let Some(path) = csv_path {
        let mut w = csv::Writer::from_path(path).map_err(|e| Failure::input(e.to_string()))?;
        let record = [
            system.to_string(),
            format_sig9(ratio.value()),
            format_sig9(stats.mean),
            format_sig9(stats.variance),
            stats.count.to_string(),
            format_sig9(stats.ci_halfwidth_95),
        ];
        w.write_record(["system", "alpha", "mean", "variance", "count", "ci_halfwidth"])
            .and_then(|_| w.write_record(&record))
            .and_then(|_| w.flush().map_err(csv::Error::from))
            .map_err(|e| Failure::input(e.to_string()))?;
        writeln!(out, "wrote {}", path.display())?;
    }
    Ok(())
}

fn check_parent_dir(path: &Path) -> Result<(), Failure> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => Err(Failure::input(format!(
            "output directory {} does not exist",
            dir.display()
        ))),
        _ => Ok(()),
    }
}

fn cmd_optimize(file: &ScenarioFile, run: &RunConfig, tolerance: f64, out: &mut dyn Write) -> Result<(), Failure> {
    let p = file.raw_params().validate()?;
    let approx = agg_split_ratio_approx(&p)?.alpha_approx.value();
    let workloads = WorkloadSet::generate(&p, run)?;
    let best = optimize_alpha_on(&workloads, tolerance)?;
    let at_approx = workloads.stats(SystemKind::Aggregated, approx);
    let penalty = 100.0 * (at_approx.mean - best.stats.mean) / best.stats.mean;

    write_scenario(&p, out)?;
    write_run(run, out)?;
    writeln!(out, "alpha_star: {:.6}", best.alpha)?;
    writeln!(
        out,
        "delay at alpha_star: {:.6} s (+/- {:.6})",
        best.stats.mean, best.stats.ci_halfwidth_95
    )?;
    writeln!(out, "alpha_approx: {approx:.6}")?;
    writeln!(
        out,
        "delay at alpha_approx: {:.6} s (+/- {:.6})",
        at_approx.mean, at_approx.ci_halfwidth_95
    )?;
    writeln!(out, "approximation penalty: {penalty:.6} %")?;
    writeln!(out, "evaluations: {}", best.evaluations)?;
    Ok(())
}

fn cmd_sweep(specs: &[SweepSpec], dir: &Path, out: &mut dyn Write) -> Result<(), Failure> {
    if !dir.is_dir() {
        return Err(Failure::input(format!(
            "output directory {} does not exist",
            dir.display()
        )));
    }
    for spec in specs {
        let table = run_sweep(spec)?;
        let path = dir.join(table.file_name());
        let file = fs::File::create(&path)?;
        table.write_csv(file).map_err(|e| Failure::input(e.to_string()))?;
        let max = table
            .max_value()
            .map_or_else(|| "n/a".to_string(), |m| format!("{m:.6}"));
        writeln!(
            out,
            "wrote {} ({} rows, {} ok, max {max})",
            path.display(),
            table.rows.len(),
            table.ok_rows().count()
        )?;
    }
    Ok(())
}
