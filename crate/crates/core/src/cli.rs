//! Experiment orchestration behind the `randstop` binary.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{parse_sweep_list, Method, RunConfig, SweepConfig};
use crate::error::{Error, Result};
use crate::estimate::{format_f64, format_summary, lower_bound_estimate, summarize, EstimateReport, CSV_HEADER};
use crate::market::{simulate_paths, MarketModel};
use crate::optimize::{backward_fit, forward_fit, FitReport};
use crate::parallel::Moments;
use crate::policy::Policy;
use crate::rng::mix64;

#[derive(Debug, Parser)]
#[command(name = "randstop", version, about = "Price Bermudan options with fitted randomized stopping policies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a policy on training paths and re-estimate its value on fresh ones.
    Price(RunArgs),
    /// Repeat fits over increasing training sizes and report the gap to a reference fit.
    Sweep(RunArgs),
}

/// Flags override values from `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, value_parser = ["backward", "forward"])]
    pub method: Option<String>,
    #[arg(long, value_parser = ["logistic", "gumbel"])]
    pub link: Option<String>,
    #[arg(long, value_name = "G")]
    pub degree: Option<u32>,
    #[arg(long = "train-paths", value_name = "M")]
    pub train_paths: Option<usize>,
    #[arg(long = "eval-paths", value_name = "N")]
    pub eval_paths: Option<usize>,
    #[arg(long = "seed-train", value_name = "U64")]
    pub seed_train: Option<u64>,
    #[arg(long = "seed-eval", value_name = "U64")]
    pub seed_eval: Option<u64>,
    #[arg(long = "seed-opt", value_name = "U64")]
    pub seed_opt: Option<u64>,
    #[arg(long = "eval-mode", value_parser = ["expectation", "sampled", "hard"])]
    pub eval_mode: Option<String>,
    #[arg(long, value_name = "DIR")]
    pub output: Option<PathBuf>,
    /// Comma-separated training sizes for `sweep`.
    #[arg(long, value_name = "M1,M2,...")]
    pub sweep: Option<String>,
    #[arg(long, value_name = "R")]
    pub reps: Option<usize>,
    /// Caps the number of worker threads; results do not depend on it.
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
}

impl RunArgs {
    /// Loads `--config` (or defaults) and applies the flag overrides.
    pub fn to_config(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(m) = &self.method {
            c.method = m.parse()?;
        }
        if let Some(l) = &self.link {
            c.link = l.parse()?;
        }
        if let Some(g) = self.degree {
            c.degree = g;
        }
        if let Some(m) = self.train_paths {
            c.train_paths = m;
        }
        if let Some(n) = self.eval_paths {
            c.eval_paths = n;
        }
        if let Some(s) = self.seed_train {
            c.seeds.train = s;
        }
        if let Some(s) = self.seed_eval {
            c.seeds.eval = s;
        }
        if let Some(s) = self.seed_opt {
            c.seeds.optimizer = s;
        }
        if let Some(m) = &self.eval_mode {
            c.eval_mode = m.parse()?;
        }
        if let Some(o) = &self.output {
            c.output = Some(o.clone());
        }
        if let Some(t) = self.threads {
            c.threads = Some(t);
        }
        if self.sweep.is_some() || self.reps.is_some() {
            let mut s = c.sweep.clone().unwrap_or(SweepConfig {
                train_paths: vec![c.train_paths],
                reps: 1,
                reference_train_paths: None,
            });
            if let Some(list) = &self.sweep {
                s.train_paths = parse_sweep_list(list)?;
            }
            if let Some(r) = self.reps {
                s.reps = r;
            }
            c.sweep = Some(s);
        }
        Ok(c)
    }
}

/// Everything produced by one pricing run.
#[derive(Debug, Clone)]
pub struct PriceOutcome {
    pub config: RunConfig,
    pub policy: Policy,
    pub fit_reports: Vec<FitReport>,
    pub report: EstimateReport,
}

/// Fits a policy on `train_paths` paths simulated under `train_seed`.
pub fn fit_policy(
    config: &RunConfig,
    model: &MarketModel,
    train_paths: usize,
    train_seed: u64,
) -> Result<(Policy, Vec<FitReport>)> {
    let paths = simulate_paths(model, train_paths, train_seed)?;
    let opt = config.optimizer_config();
    match config.method {
        Method::Backward => {
            let template = Policy::per_date_template(config.link, config.degree, &paths)?
                .with_model_fingerprint(model.fingerprint());
            backward_fit(&paths, &template, &opt)
        }
        Method::Forward => {
            let template = Policy::time_dependent_template(config.link, config.degree, &paths)?
                .with_model_fingerprint(model.fingerprint());
            let (policy, report) = forward_fit(&paths, &template, &opt)?;
            Ok((policy, vec![report]))
        }
    }
}

fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::config("threads", e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Fit on `M` training paths, then estimate on `N` independent paths.
/// Artifacts are written when `config.output` is set.
pub fn run_price(config: &RunConfig) -> Result<PriceOutcome> {
    for w in config.validate()? {
        eprintln!("warning: {w}");
    }
    let resolved = config.resolved();
    let model = resolved.model.to_market()?;
    let start = Instant::now();
    let (policy, fit_reports, mut report) = with_threads(resolved.threads, || -> Result<_> {
        let (policy, fits) = fit_policy(&resolved, &model, resolved.train_paths, resolved.seeds.train)?;
        let report = lower_bound_estimate(&model, &policy, resolved.eval_paths, resolved.seeds.eval, resolved.eval_mode)?;
        Ok((policy, fits, report))
    })??;
    report.run_id = resolved.run_id();
    report.train_paths = resolved.train_paths;
    if resolved.record_wall_time {
        report.wall_time_s = Some(start.elapsed().as_secs_f64());
    }
    let outcome = PriceOutcome {
        config: resolved,
        policy,
        fit_reports,
        report,
    };
    if let Some(dir) = &outcome.config.output {
        write_price_artifacts(dir, &outcome)?;
    }
    Ok(outcome)
}

pub fn results_csv(reports: &[EstimateReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in reports {
        w.write_record(summarize(r))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
    Ok(())
}

fn write_price_artifacts(dir: &Path, outcome: &PriceOutcome) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut config = outcome.config.clone();
    config.output = None;
    write_json(&dir.join("resolved_config.json"), &config)?;
    std::fs::write(dir.join("policy.json"), outcome.policy.to_json()? + "\n")?;
    write_json(&dir.join("fit_reports.json"), &outcome.fit_reports)?;
    std::fs::write(dir.join("results.csv"), results_csv(std::slice::from_ref(&outcome.report))?)?;
    Ok(())
}

/// One repetition of a convergence sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub train_paths: usize,
    pub rep: usize,
    pub seed_train: u64,
    pub estimate: f64,
    pub std_error: f64,
    /// Reference estimate minus this estimate.
    pub gap: f64,
}

/// Mean and standard deviation of the gap at one training size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub train_paths: usize,
    pub reps: usize,
    pub mean_estimate: f64,
    pub mean_gap: f64,
    pub sd_gap: f64,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub config: RunConfig,
    pub reference: EstimateReport,
    pub rows: Vec<SweepRow>,
    pub summary: Vec<SweepSummary>,
}

/// Training seed for repetition `rep` at size `train_paths`.
pub fn sweep_seed(base: u64, train_paths: usize, rep: usize) -> u64 {
    mix64(base ^ mix64(train_paths as u64) ^ mix64(0x5eed_0000 + rep as u64))
}

/// For each training size, fits `reps` policies on independent training
/// samples and evaluates them on a common evaluation sample; the gap is
/// measured against a fit at the reference size.
pub fn run_convergence_sweep(config: &RunConfig) -> Result<SweepOutcome> {
    for w in config.validate()? {
        eprintln!("warning: {w}");
    }
    let resolved = config.resolved();
    let sweep = resolved
        .sweep
        .clone()
        .ok_or_else(|| Error::config("sweep", "no training sizes given"))?;
    let model = resolved.model.to_market()?;
    let (reference, rows) = with_threads(resolved.threads, || -> Result<_> {
        let (ref_policy, _) = fit_policy(&resolved, &model, sweep.reference_paths(), resolved.seeds.train)?;
        let reference = lower_bound_estimate(&model, &ref_policy, resolved.eval_paths, resolved.seeds.eval, resolved.eval_mode)?;
        let mut rows = Vec::new();
        for &m in &sweep.train_paths {
            for rep in 0..sweep.reps {
                let seed = sweep_seed(resolved.seeds.train, m, rep);
                let (policy, _) = fit_policy(&resolved, &model, m, seed)?;
                let r = lower_bound_estimate(&model, &policy, resolved.eval_paths, resolved.seeds.eval, resolved.eval_mode)?;
                rows.push(SweepRow {
                    train_paths: m,
                    rep,
                    seed_train: seed,
                    estimate: r.estimate,
                    std_error: r.std_error,
                    gap: reference.estimate - r.estimate,
                });
            }
        }
        Ok((reference, rows))
    })??;
    let summary = sweep
        .train_paths
        .iter()
        .map(|&m| {
            let mut gap = Moments::default();
            let mut est = Moments::default();
            for r in rows.iter().filter(|r| r.train_paths == m) {
                gap.push(r.gap);
                est.push(r.estimate);
            }
            SweepSummary {
                train_paths: m,
                reps: gap.count as usize,
                mean_estimate: est.mean,
                mean_gap: gap.mean,
                sd_gap: gap.variance().sqrt(),
            }
        })
        .collect();
    let outcome = SweepOutcome {
        config: resolved,
        reference,
        rows,
        summary,
    };
    if let Some(dir) = &outcome.config.output {
        std::fs::create_dir_all(dir)?;
        let mut config = outcome.config.clone();
        config.output = None;
        write_json(&dir.join("resolved_config.json"), &config)?;
        std::fs::write(dir.join("sweep.csv"), sweep_csv(&outcome)?)?;
    }
    Ok(outcome)
}

pub const SWEEP_HEADER: [&str; 9] = [
    "row_type", "M", "rep", "seed_train", "estimate", "std_error", "gap", "mean_gap", "sd_gap",
];

pub fn sweep_csv(outcome: &SweepOutcome) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_HEADER)?;
    let r = &outcome.reference;
    w.write_record([
        "reference".to_string(),
        outcome.config.sweep.as_ref().map_or(0, |s| s.reference_paths()).to_string(),
        String::new(),
        outcome.config.seeds.train.to_string(),
        format_f64(r.estimate),
        format_f64(r.std_error),
        String::new(),
        String::new(),
        String::new(),
    ])?;
    for row in &outcome.rows {
        w.write_record([
            "rep".to_string(),
            row.train_paths.to_string(),
            row.rep.to_string(),
            row.seed_train.to_string(),
            format_f64(row.estimate),
            format_f64(row.std_error),
            format_f64(row.gap),
            String::new(),
            String::new(),
        ])?;
    }
    for s in &outcome.summary {
        w.write_record([
            "summary".to_string(),
            s.train_paths.to_string(),
            s.reps.to_string(),
            String::new(),
            format_f64(s.mean_estimate),
            String::new(),
            String::new(),
            format_f64(s.mean_gap),
            format_f64(s.sd_gap),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Price(args) => args.to_config().and_then(|c| run_price(&c)).map(|o| {
            for f in &o.fit_reports {
                let label = f.date.map_or("joint".to_string(), |d| format!("date {d}"));
                println!(
                    "fit {label}: objective {:.4} -> {:.4} in {} iterations",
                    f.initial_objective, f.final_objective, f.iterations_used
                );
            }
            println!("{}", format_summary(&o.report));
        }),
        Command::Sweep(args) => args
            .to_config()
            .and_then(|c| {
                if c.sweep.is_none() {
                    return Err(Error::config("--sweep", "sweep needs --sweep M1,M2,... or a sweep section"));
                }
                run_convergence_sweep(&c)
            })
            .map(|o| {
                println!("reference estimate {:.3} (se {:.3})", o.reference.estimate, o.reference.std_error);
                for s in &o.summary {
                    println!(
                        "M = {:>9}  mean estimate {:.3}  mean gap {:.4}  sd {:.4}  ({} reps)",
                        s.train_paths, s.mean_estimate, s.mean_gap, s.sd_gap, s.reps
                    );
                }
            }),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
