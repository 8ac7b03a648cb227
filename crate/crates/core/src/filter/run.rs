use serde::{Deserialize, Serialize};

use crate::error::{Result, SvError};
use crate::exec::Execution;
use crate::hermite::{HermiteOrder, LeverageSpec};
use crate::model::SvParams;
use crate::series::check_finite;
use crate::summary::Interval;

use super::cloud::{init_cloud_fixed, init_cloud_with, ParticleCloud};
use super::prior::{InitialPrior, PriorSpec};
use super::resample::ResamplingScheme;
use super::stats::Design;
use super::step::{naive_pl_step, plav_step, StepContext, StepOutcome};

/// ESS below `N / DEGENERACY_RATIO` counts toward a degeneracy streak.
pub const DEGENERACY_RATIO: f64 = 100.0;
/// Consecutive low-ESS steps that trigger a warning record.
pub const DEGENERACY_STREAK: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    /// Two-stage auxiliary-variable particle learning.
    #[default]
    Plav,
    /// Extended-state filter that refreshes parameters from sufficient statistics.
    Pl,
    /// Extended-state filter with parameters fixed at their initial draws.
    Naive,
}

impl std::str::FromStr for Algorithm {
    type Err = SvError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "plav" => Ok(Algorithm::Plav),
            "pl" => Ok(Algorithm::Pl),
            "naive" => Ok(Algorithm::Naive),
            other => Err(SvError::InvalidParameter(format!("unknown algorithm {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterConfig {
    pub order: HermiteOrder,
    pub particles: usize,
    pub seed: u64,
    pub algorithm: Algorithm,
    /// Leading observations excluded from the predictive score.
    pub burn: usize,
    pub scheme: ResamplingScheme,
    pub execution: Execution,
    /// Time indices (1-based) at which to record posterior summaries.
    pub checkpoints: Vec<usize>,
    /// `(j, value)` pairs fixing `phi_j`.
    pub pinned: Vec<(usize, f64)>,
}

impl FilterConfig {
    pub fn new(order: HermiteOrder, particles: usize, seed: u64) -> Self {
        FilterConfig {
            order,
            particles,
            seed,
            algorithm: Algorithm::Plav,
            burn: 0,
            scheme: ResamplingScheme::Systematic,
            execution: Execution::default(),
            checkpoints: Vec::new(),
            pinned: Vec::new(),
        }
    }
}

/// Mean and 95% interval of each parameter over the particle cloud.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub mu: Interval,
    pub beta: Interval,
    pub phi: Vec<Interval>,
    pub omega: Interval,
}

/// Parameter draws of the final cloud, one entry per particle.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ThetaSamples {
    pub mu: Vec<f64>,
    pub beta: Vec<f64>,
    pub omega: Vec<f64>,
    /// `phi[j][i]` is `phi_{j+1}` of particle `i`.
    pub phi: Vec<Vec<f64>>,
}

impl ThetaSamples {
    pub fn from_params(params: &[SvParams], order: HermiteOrder) -> Self {
        let k = order.get();
        ThetaSamples {
            mu: params.iter().map(|p| p.mu).collect(),
            beta: params.iter().map(|p| p.beta).collect(),
            omega: params.iter().map(|p| p.omega).collect(),
            phi: (0..k).map(|j| params.iter().map(|p| p.leverage.coeffs()[j]).collect()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn leverage_specs(&self) -> Result<Vec<LeverageSpec>> {
        let mut coeffs = vec![0.0; self.phi.len()];
        (0..self.len())
            .map(|i| {
                for (c, col) in coeffs.iter_mut().zip(&self.phi) {
                    *c = *col.get(i).ok_or_else(|| {
                        SvError::InvalidParameter("ragged leverage samples".into())
                    })?;
                }
                LeverageSpec::new(&coeffs)
            })
            .collect()
    }

    pub fn summary(&self) -> PosteriorSummary {
        PosteriorSummary {
            mu: Interval::from_draws(&self.mu),
            beta: Interval::from_draws(&self.beta),
            phi: self.phi.iter().map(|c| Interval::from_draws(c)).collect(),
            omega: Interval::from_draws(&self.omega),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub t: usize,
    pub posterior: PosteriorSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyWarning {
    /// Step at which the streak reached its threshold.
    pub t: usize,
    pub ess: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    pub beta_clamps: u64,
    pub degeneracy_warnings: Vec<DegeneracyWarning>,
}

/// Everything a filtering run reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterResult {
    pub algorithm: Algorithm,
    pub order: HermiteOrder,
    pub particles: usize,
    pub seed: u64,
    pub burn: usize,
    pub observations: usize,
    pub posterior: PosteriorSummary,
    pub checkpoints: Vec<Checkpoint>,
    /// Log one-step predictive densities for `t = burn + 1 ..= T`.
    pub per_t_logpred: Vec<f64>,
    /// Sum of `per_t_logpred`.
    pub cum_log_marglik: f64,
    pub ess: Vec<f64>,
    /// Filtered mean of `x_t` for every `t`.
    pub state_mean: Vec<f64>,
    /// Filtered mean of the standardised shock for every `t`.
    pub shock_mean: Vec<f64>,
    pub diagnostics: Diagnostics,
    pub samples: ThetaSamples,
}

/// Steps a cloud through a series and collects the bookkeeping of [`FilterResult`].
pub struct ParticleFilter {
    cloud: ParticleCloud,
    ctx: StepContext,
    algorithm: Algorithm,
    prev: Option<f64>,
    low_ess_streak: usize,
    warnings: Vec<DegeneracyWarning>,
}

impl ParticleFilter {
    pub fn from_prior(prior: &PriorSpec, config: &FilterConfig) -> Result<Self> {
        let design = Design::with_pinned(config.order, &config.pinned)?;
        let cloud =
            init_cloud_with(prior, design, config.particles, config.seed, config.execution)?;
        let learn = config.algorithm != Algorithm::Naive;
        Ok(Self::with_cloud(cloud, config, learn))
    }

    /// Parameters frozen at a known `theta`.
    pub fn fixed(theta: &SvParams, x0: InitialPrior, config: &FilterConfig) -> Result<Self> {
        let cloud = init_cloud_fixed(theta, x0, config.particles, config.seed)?;
        Ok(Self::with_cloud(cloud, config, false))
    }

    fn with_cloud(cloud: ParticleCloud, config: &FilterConfig, learn: bool) -> Self {
        ParticleFilter {
            cloud,
            ctx: StepContext {
                seed: config.seed,
                execution: config.execution,
                scheme: config.scheme,
                learn,
            },
            algorithm: config.algorithm,
            prev: None,
            low_ess_streak: 0,
            warnings: Vec::new(),
        }
    }

    pub fn cloud(&self) -> &ParticleCloud {
        &self.cloud
    }

    pub fn step(&mut self, y: f64) -> Result<StepOutcome> {
        let out = match self.algorithm {
            Algorithm::Plav => plav_step(&mut self.cloud, y, self.prev, &self.ctx)?,
            Algorithm::Pl | Algorithm::Naive => naive_pl_step(&mut self.cloud, y, self.prev, &self.ctx)?,
        };
        self.prev = Some(y);
        if out.ess < self.cloud.len() as f64 / DEGENERACY_RATIO {
            self.low_ess_streak += 1;
            if self.low_ess_streak == DEGENERACY_STREAK {
                log::warn!("effective sample size below N/100 for {DEGENERACY_STREAK} steps at t = {}", self.cloud.t);
                self.warnings.push(DegeneracyWarning { t: self.cloud.t, ess: out.ess });
                self.low_ess_streak = 0;
            }
        } else {
            self.low_ess_streak = 0;
        }
        Ok(out)
    }

    pub fn samples(&self) -> ThetaSamples {
        let params: Vec<SvParams> = self.cloud.particles.iter().map(|p| p.theta).collect();
        ThetaSamples::from_params(&params, self.cloud.order())
    }

    /// Runs the whole series.
    pub fn run(mut self, y: &[f64], config: &FilterConfig) -> Result<FilterResult> {
        validate_series(y, config.burn)?;
        let mut per_t = Vec::with_capacity(y.len() - config.burn);
        let mut ess = Vec::with_capacity(y.len());
        let mut state_mean = Vec::with_capacity(y.len());
        let mut shock_mean = Vec::with_capacity(y.len());
        let mut checkpoints = Vec::new();
        for (i, &obs) in y.iter().enumerate() {
            let out = self.step(obs)?;
            let t = i + 1;
            if t > config.burn {
                per_t.push(out.log_pred);
            }
            ess.push(out.ess);
            state_mean.push(out.state_mean);
            shock_mean.push(out.shock_mean);
            if config.checkpoints.contains(&t) {
                checkpoints.push(Checkpoint { t, posterior: self.samples().summary() });
            }
        }
        let samples = self.samples();
        Ok(FilterResult {
            algorithm: config.algorithm,
            order: self.cloud.order(),
            particles: self.cloud.len(),
            seed: config.seed,
            burn: config.burn,
            observations: y.len(),
            posterior: samples.summary(),
            checkpoints,
            cum_log_marglik: per_t.iter().sum(),
            per_t_logpred: per_t,
            ess,
            state_mean,
            shock_mean,
            diagnostics: Diagnostics {
                beta_clamps: self.cloud.beta_clamps,
                degeneracy_warnings: self.warnings,
            },
            samples,
        })
    }
}

fn validate_series(y: &[f64], burn: usize) -> Result<()> {
    check_finite(y)?;
    if y.len() < 2 {
        return Err(SvError::InvalidSeries(format!("need at least 2 observations, got {}", y.len())));
    }
    if burn > y.len() {
        return Err(SvError::InvalidSeries(format!(
            "burn-in {burn} exceeds series length {}",
            y.len()
        )));
    }
    Ok(())
}

/// Sequential Bayesian estimation of the SV model of `config.order` on `y`.
pub fn run_filter(y: &[f64], prior: &PriorSpec, config: &FilterConfig) -> Result<FilterResult> {
    validate_series(y, config.burn)?;
    ParticleFilter::from_prior(prior, config)?.run(y, config)
}

/// Filtering with known parameters.
pub fn run_filter_fixed(
    y: &[f64],
    theta: &SvParams,
    x0: InitialPrior,
    config: &FilterConfig,
) -> Result<FilterResult> {
    validate_series(y, config.burn)?;
    ParticleFilter::fixed(theta, x0, config)?.run(y, config)
}
