//! Subcommand implementations.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use svnl_core::filter::{FilterResult, PosteriorSummary};
use svnl_core::hermite::{leverage_curve, CurvePoint};
use svnl_core::model::{reparam_to_uncorrelated, LinearLeverageParams};
use svnl_core::selection::{
    default_burn, lpdr_from_scores, select_order, LpdrSeries, SelectionConfig, SelectionReport,
};
use svnl_core::summary::quantile_sorted;
use svnl_core::{
    run_filter, simulate, Algorithm, FilterConfig, HermiteOrder, InitialState, LeverageSpec, PriorTemplate,
    SvParams,
};

use crate::error::{CliError, CliResult};
use crate::ingest::{ingest, IngestConfig, InputMode};
use crate::output::{fmt_sig, meta_path, write_csv, write_json};

#[derive(Debug, Parser)]
#[command(name = "svnl", version, about = "Stochastic volatility with nonlinear leverage")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a return series and write it as CSV (t, y, x, eps).
    Simulate(SimulateArgs),
    /// Learn the parameters of one leverage order and write the result as JSON.
    Fit(FitArgs),
    /// Score leverage orders 0..=kmax by predictive likelihood.
    Select(SelectArgs),
    /// Posterior leverage curve on a grid, from a fit result.
    Curve(CurveArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = InputMode::Prices)]
    pub mode: InputMode,
    /// Column that orders the rows; file order when absent from the header.
    #[arg(long, default_value = "date")]
    pub date_column: String,
    /// Price or return column [default: close for prices, y for returns].
    #[arg(long)]
    pub value_column: Option<String>,
    /// Multiplier applied to log price differences.
    #[arg(long, default_value_t = 100.0)]
    pub return_scale: f64,
}

impl InputArgs {
    fn config(&self) -> IngestConfig {
        let mut c = IngestConfig::new(self.mode);
        c.date_column = self.date_column.clone();
        if let Some(v) = &self.value_column {
            c.value_column = v.clone();
        }
        c.return_scale = self.return_scale;
        c
    }
}

#[derive(Debug, Args)]
pub struct EstimationArgs {
    #[arg(long, default_value_t = 10_000)]
    pub particles: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Prior override: JSON object with any of the prior template fields.
    #[arg(long)]
    pub prior: Option<PathBuf>,
    /// plav, pl or naive.
    #[arg(long, default_value = "plav")]
    pub algorithm: String,
}

impl EstimationArgs {
    fn template(&self) -> CliResult<PriorTemplate> {
        let Some(path) = &self.prior else { return Ok(PriorTemplate::default()) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("prior file {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("prior file {}: {e}", path.display())))
    }

    fn algorithm(&self) -> CliResult<Algorithm> {
        Ok(self.algorithm.parse()?)
    }

    fn check(&self) -> CliResult<()> {
        if self.particles < 2 {
            return Err(CliError::Config(format!("need at least 2 particles, got {}", self.particles)));
        }
        Ok(())
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 2000)]
    pub length: usize,
    #[arg(long, default_value_t = 1)]
    pub order: usize,
    #[arg(long, default_value_t = -0.026, allow_hyphen_values = true)]
    pub mu: f64,
    #[arg(long, default_value_t = 0.970)]
    pub beta: f64,
    /// Leverage coefficients, comma separated [default: -0.045 for order 1].
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub phi: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.143)]
    pub omega: f64,
    /// Total state noise sd; with --rho gives the correlated order-1 form, alone sets omega.
    #[arg(long, conflicts_with_all = ["omega", "phi"])]
    pub tau: Option<f64>,
    /// Return/volatility correlation, used with --tau.
    #[arg(long, requires = "tau", allow_hyphen_values = true)]
    pub rho: Option<f64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output CSV; metadata goes next to it as `.meta.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 1)]
    pub order: usize,
    #[command(flatten)]
    pub estimation: EstimationArgs,
    /// Observations used for learning only [default: 0].
    #[arg(long, default_value_t = 0)]
    pub burn: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 4)]
    pub kmax: usize,
    #[command(flatten)]
    pub estimation: EstimationArgs,
    /// Observations used for learning only [default: 20% of the series].
    #[arg(long)]
    pub burn: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    /// JSON written by `fit`.
    #[arg(long)]
    pub input: PathBuf,
    /// Grid as lo:hi:step.
    #[arg(long, default_value = "-3:3:0.1", allow_hyphen_values = true)]
    pub grid: String,
    /// Output CSV (z, mean, lo, hi); metadata goes next to it as `.meta.json`.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Fit(a) => cmd_fit(&a),
        Command::Select(a) => cmd_select(&a),
        Command::Curve(a) => cmd_curve(&a),
    }
}

/// Where a series came from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputSummary {
    pub path: String,
    pub mode: InputMode,
    pub return_scale: f64,
    pub usable_rows: usize,
    pub dropped_rows: usize,
    pub observations: usize,
}

fn load(args: &InputArgs) -> CliResult<(Vec<f64>, InputSummary)> {
    let ing = ingest(&args.input, &args.config())?;
    let summary = InputSummary {
        path: args.input.display().to_string(),
        mode: args.mode,
        return_scale: args.return_scale,
        usable_rows: ing.usable_rows,
        dropped_rows: ing.dropped_rows,
        observations: ing.series.len(),
    };
    Ok((ing.series.values().to_vec(), summary))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SimulationMeta {
    pub theta: SvParams,
    pub length: usize,
    pub seed: u64,
    pub initial_state: InitialState,
}

pub fn simulation_params(a: &SimulateArgs) -> CliResult<SvParams> {
    let theta = match (a.tau, a.rho) {
        (Some(tau), Some(rho)) => {
            if a.order != 1 {
                return Err(CliError::Config("--rho needs --order 1".into()));
            }
            reparam_to_uncorrelated(&LinearLeverageParams { mu: a.mu, beta: a.beta, rho, tau })?
        }
        (Some(tau), None) => {
            let order = HermiteOrder::new(a.order)?;
            SvParams::new(a.mu, a.beta, LeverageSpec::zeros(order), tau)?
        }
        _ => {
            let phi = match (&a.phi, a.order) {
                (Some(p), _) => p.clone(),
                (None, 0) => Vec::new(),
                (None, 1) => vec![-0.045],
                (None, k) => return Err(CliError::Config(format!("--order {k} needs --phi with {k} values"))),
            };
            if phi.len() != a.order {
                return Err(CliError::Config(format!("--order {} but {} --phi values", a.order, phi.len())));
            }
            SvParams::new(a.mu, a.beta, LeverageSpec::new(&phi)?, a.omega)?
        }
    };
    Ok(theta)
}

fn cmd_simulate(a: &SimulateArgs) -> CliResult<()> {
    let theta = simulation_params(a)?;
    let sim = simulate(&theta, a.length, InitialState::Stationary, a.seed)?;
    let rows = (0..a.length).map(|i| {
        vec![(i + 1).to_string(), fmt_sig(sim.returns.values()[i]), fmt_sig(sim.latent[i]), fmt_sig(sim.shocks[i])]
    });
    write_csv(&a.out, &["t", "y", "x", "eps"], rows)?;
    let meta = SimulationMeta { theta, length: a.length, seed: a.seed, initial_state: InitialState::Stationary };
    write_json(&meta_path(&a.out), &meta)?;
    log::info!("wrote {} observations to {}", a.length, a.out.display());
    Ok(())
}

/// Fit output: the filter result plus provenance and wall-clock time.
#[derive(Debug, Serialize, Deserialize)]
pub struct FitReport {
    pub input: InputSummary,
    #[serde(flatten)]
    pub result: FilterResult,
    pub timing_seconds: f64,
}

fn cmd_fit(a: &FitArgs) -> CliResult<()> {
    a.estimation.check()?;
    let (y, input) = load(&a.input)?;
    let order = HermiteOrder::new(a.order)?;
    let prior = a.estimation.template()?.for_order(order);
    let mut config = FilterConfig::new(order, a.estimation.particles, a.estimation.seed);
    config.burn = a.burn;
    config.algorithm = a.estimation.algorithm()?;
    let start = Instant::now();
    let result = run_filter(&y, &prior, &config)?;
    let timing_seconds = start.elapsed().as_secs_f64();
    log::info!("fit order {order} on {} observations in {timing_seconds:.2}s", y.len());
    write_json(&a.out, &FitReport { input, result, timing_seconds })
}

pub const TIE_BREAK_RULE: &str = "ties in cumulative log predictive likelihood go to the smallest order";

#[derive(Debug, Serialize, Deserialize)]
pub struct OrderRow {
    pub order: HermiteOrder,
    pub cum_log_marglik: f64,
    pub posterior: PosteriorSummary,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TieBreak {
    pub rule: String,
    pub applied: bool,
    pub tied_orders: Vec<HermiteOrder>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SelectOutput {
    pub input: InputSummary,
    pub burn: usize,
    pub best_order: HermiteOrder,
    pub tie_break: TieBreak,
    pub table: Vec<OrderRow>,
    /// Best of orders {0, 1} against best of {2..kmax}; absent when the second class is empty.
    pub lpdr: Option<LpdrSeries>,
    pub lpdr_notice: Option<String>,
    pub report: SelectionReport,
    pub timing_seconds: f64,
}

fn cmd_select(a: &SelectArgs) -> CliResult<()> {
    a.estimation.check()?;
    let (y, input) = load(&a.input)?;
    let burn = a.burn.unwrap_or_else(|| default_burn(y.len()));
    let mut config = SelectionConfig::new(a.kmax, a.estimation.particles, a.estimation.seed, burn);
    config.prior = a.estimation.template()?;
    config.algorithm = a.estimation.algorithm()?;
    let start = Instant::now();
    let report = select_order(&y, &config)?;
    let timing_seconds = start.elapsed().as_secs_f64();

    let linear: Vec<HermiteOrder> = report.per_order.iter().map(|s| s.order).filter(|k| k.get() <= 1).collect();
    let nonlinear: Vec<HermiteOrder> = report.per_order.iter().map(|s| s.order).filter(|k| k.get() >= 2).collect();
    let (lpdr, lpdr_notice) = if nonlinear.is_empty() {
        (None, Some(format!("no LPDR: the nonlinear class {{2..{}}} is empty", a.kmax)))
    } else {
        (Some(lpdr_from_scores(&report.per_order, &linear, &nonlinear)?), None)
    };
    let table = report
        .per_order
        .iter()
        .map(|s| OrderRow { order: s.order, cum_log_marglik: s.cum_log_marglik, posterior: s.posterior.clone() })
        .collect();
    let out = SelectOutput {
        input,
        burn,
        best_order: report.best_order,
        tie_break: TieBreak {
            rule: TIE_BREAK_RULE.into(),
            applied: !report.tied_orders.is_empty(),
            tied_orders: report.tied_orders.clone(),
        },
        table,
        lpdr,
        lpdr_notice,
        report,
        timing_seconds,
    };
    log::info!("best order {} of 0..={}", out.best_order, a.kmax);
    write_json(&a.out, &out)
}

pub fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::Config(format!("grid must be lo:hi:step with lo <= hi and step > 0, got {spec:?}"));
    let parts: Vec<f64> =
        spec.split(':').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    let [lo, hi, step] = parts[..] else { return Err(bad()) };
    if !(lo.is_finite() && hi.is_finite() && step.is_finite() && step > 0.0 && lo <= hi) {
        return Err(bad());
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| lo + i as f64 * step).collect())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CurveMeta {
    pub fit: String,
    pub order: HermiteOrder,
    pub draws: usize,
    pub grid: String,
    /// 2.5% and 97.5% quantiles of the filtered standardised shocks of the fitted series.
    pub shock_interval: [f64; 2],
}

fn read_fit(path: &Path) -> CliResult<FilterResult> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("fit file {}: {e}", path.display())))?;
    let report: FitReport = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("fit file {} is not a fit result: {e}", path.display())))?;
    Ok(report.result)
}

fn cmd_curve(a: &CurveArgs) -> CliResult<()> {
    let grid = parse_grid(&a.grid)?;
    let fit = read_fit(&a.input)?;
    if fit.samples.is_empty() {
        return Err(CliError::Input(format!("fit file {} has no posterior samples", a.input.display())));
    }
    let specs = fit.samples.leverage_specs()?;
    let curve: Vec<CurvePoint> = leverage_curve(&specs, &grid)?;
    let rows = curve.iter().map(|p| vec![fmt_sig(p.z), fmt_sig(p.mean), fmt_sig(p.lower), fmt_sig(p.upper)]);
    write_csv(&a.out, &["z", "mean", "lo", "hi"], rows)?;

    let mut shocks = fit.shock_mean.clone();
    shocks.sort_by(f64::total_cmp);
    let shock_interval = if shocks.is_empty() {
        [f64::NAN; 2]
    } else {
        [quantile_sorted(&shocks, 0.025), quantile_sorted(&shocks, 0.975)]
    };
    let meta = CurveMeta {
        fit: a.input.display().to_string(),
        order: fit.order,
        draws: specs.len(),
        grid: a.grid.clone(),
        shock_interval,
    };
    write_json(&meta_path(&a.out), &meta)
}
