//! One observation's worth of filtering: the two-stage auxiliary-variable
//! particle learning step and the plain extended-state baseline.

use std::sync::atomic::{AtomicU64, Ordering};

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Result, SvError};
use crate::exec::{self, Execution};
use crate::model::{obs_logdensity, shock_from_obs, SvParams};
use crate::rng::{self, Purpose};

use super::cloud::{Particle, ParticleCloud};
use super::resample::{effective_sample_size, normalize_log_weights, resample, ResamplingScheme};
use super::stats::{sample_factored, update_with_design, Design};

/// Settings shared by every step of a run.
#[derive(Debug, Clone, Copy)]
pub struct StepContext {
    pub seed: u64,
    pub execution: Execution,
    pub scheme: ResamplingScheme,
    /// Refresh sufficient statistics and redraw `theta` after each observation.
    pub learn: bool,
}

impl Default for StepContext {
    fn default() -> Self {
        StepContext {
            seed: 0,
            execution: Execution::default(),
            scheme: ResamplingScheme::default(),
            learn: true,
        }
    }
}

/// What a step reports besides the updated cloud.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    /// Log of the one-step predictive density estimate `p(y_t | y_{1:t-1})`.
    pub log_pred: f64,
    pub ess: f64,
    /// Filtered mean of `x_t`.
    pub state_mean: f64,
    /// Filtered mean of `eps_t = y_t exp(-x_t / 2)`.
    pub shock_mean: f64,
}

#[inline]
fn lookahead(theta: &SvParams, x_prev: f64, eps_prev: Option<f64>) -> f64 {
    let base = theta.mu + theta.beta * x_prev;
    match eps_prev {
        Some(e) => base + theta.leverage.eval(e),
        None => base,
    }
}

/// Log weight of state `x`; a particle whose state has left the floating-point
/// range gets zero weight instead of poisoning the normalisation.
#[inline]
fn log_weight(y: f64, x: f64) -> f64 {
    let lw = obs_logdensity(y, x);
    if lw.is_nan() || !x.is_finite() {
        f64::NEG_INFINITY
    } else {
        lw
    }
}

fn check_obs(y: f64, y_prev: Option<f64>) -> Result<()> {
    if !y.is_finite() || y_prev.is_some_and(|v| !v.is_finite()) {
        return Err(SvError::InvalidSeries("non-finite observation".into()));
    }
    Ok(())
}

fn degeneracy(t: usize) -> impl Fn(SvError) -> SvError {
    move |e| match e {
        SvError::InvalidWeights(_) => SvError::Degenerate { t },
        other => other,
    }
}

fn refreshed(
    p: &Particle,
    x_new: f64,
    eps_prev: Option<f64>,
    design: &Design,
    ctx: &StepContext,
    t: usize,
    slot: usize,
    clamps: &AtomicU64,
) -> Result<Particle> {
    if !ctx.learn {
        return Ok(Particle { x: x_new, ..*p });
    }
    let mut stats = p.stats;
    let post = update_with_design(&mut stats, design, x_new, p.x, eps_prev)?;
    let mut rng = rng::stream(ctx.seed, Purpose::SampleTheta, t as u64, slot as u64);
    let draw = sample_factored(&stats, &post, design, &mut rng)?;
    if draw.clamped {
        clamps.fetch_add(1, Ordering::Relaxed);
    }
    Ok(Particle { x: x_new, theta: draw.theta, stats })
}

/// Replaces the particles with `f(j)` for every slot `j`.
fn regenerate<F>(cloud: &mut ParticleCloud, execution: Execution, t: usize, f: F) -> Result<()>
where
    F: Fn(usize, &[Particle], &AtomicU64) -> Result<Particle> + Sync + Send,
{
    let clamps = AtomicU64::new(0);
    let parts = &cloud.particles;
    let next = exec::try_map_range(execution, parts.len(), |j| f(j, parts, &clamps))?;
    cloud.particles = next;
    cloud.beta_clamps += clamps.into_inner();
    cloud.t = t;
    Ok(())
}

/// `eps_{t-1}` implied by each particle's `x_{t-1}`.
fn previous_shocks(parts: &[Particle], y_prev: Option<f64>, execution: Execution) -> Option<Vec<f64>> {
    y_prev.map(|yp| exec::map_range(execution, parts.len(), |i| shock_from_obs(yp, parts[i].x)))
}

fn weighted_means(weights: &[f64], xs: &[f64], y: f64) -> (f64, f64) {
    let mut sx = 0.0;
    let mut se = 0.0;
    for (w, x) in weights.iter().zip(xs) {
        sx += w * x;
        se += w * shock_from_obs(y, *x);
    }
    (sx, se)
}

/// Particle learning with auxiliary variables.
///
/// 1. resample with weights `p(y_t | g)`, `g` the conditional mean of `x_t`;
/// 2. propagate `x_t ~ N(g, omega^2)`;
/// 3. resample with `p(y_t | x_t) / p(y_t | g)`;
/// 4. fold `(x_t, x_{t-1}, eps_{t-1})` into the sufficient statistics;
/// 5. draw `theta` from its conditional posterior.
///
/// The predictive estimate is the product of the mean first- and second-stage
/// weights. `y_prev` is `None` for the first observation.
pub fn plav_step(
    cloud: &mut ParticleCloud,
    y: f64,
    y_prev: Option<f64>,
    ctx: &StepContext,
) -> Result<StepOutcome> {
    check_obs(y, y_prev)?;
    let t = cloud.t + 1;
    let n = cloud.len();
    let parts = &cloud.particles;
    let design = cloud.design;
    let eps = previous_shocks(parts, y_prev, ctx.execution);
    let eps_of = |i: usize| eps.as_ref().map(|e| e[i]);

    let g = exec::map_range(ctx.execution, n, |i| lookahead(&parts[i].theta, parts[i].x, eps_of(i)));
    let logw1 = exec::map_range(ctx.execution, n, |i| log_weight(y, g[i]));
    let (w1, log_mean1) = normalize_log_weights(&logw1).map_err(degeneracy(t))?;
    let mut rng = rng::stream(ctx.seed, Purpose::Resample, t as u64, 0);
    let first = resample(&w1, n, ctx.scheme, &mut rng)?;

    let x_hat = exec::map_range(ctx.execution, n, |i| {
        let src = first[i];
        let mut rng = rng::stream(ctx.seed, Purpose::Propagate, t as u64, i as u64);
        let z: f64 = StandardNormal.sample(&mut rng);
        g[src] + parts[src].theta.omega * z
    });
    let logw2 =
        exec::map_range(ctx.execution, n, |i| match log_weight(y, x_hat[i]) {
            f64::NEG_INFINITY => f64::NEG_INFINITY,
            lw => lw - logw1[first[i]],
        });
    let (w2, log_mean2) = normalize_log_weights(&logw2).map_err(degeneracy(t))?;
    let ess = effective_sample_size(&w2);
    let (state_mean, shock_mean) = weighted_means(&w2, &x_hat, y);
    let mut rng = rng::stream(ctx.seed, Purpose::Resample, t as u64, 1);
    let second = resample(&w2, n, ctx.scheme, &mut rng)?;

    regenerate(cloud, ctx.execution, t, |j, parts, clamps| {
        let i = second[j];
        let src = first[i];
        refreshed(&parts[src], x_hat[i], eps_of(src), &design, ctx, t, j, clamps)
    })?;

    let log_pred = log_mean1 + log_mean2;
    if !log_pred.is_finite() {
        return Err(SvError::Degenerate { t });
    }
    cloud.ess = ess;
    cloud.cum_log_marglik += log_pred;
    Ok(StepOutcome { log_pred, ess, state_mean, shock_mean })
}

/// Extended-state particle filter: propagate each particle through the state
/// equation, weight by `p(y_t | x_t)`, resample.
///
/// Parameters ride along unchanged unless `ctx.learn` is set, in which case the
/// survivors refresh their sufficient statistics and redraw `theta`. The
/// predictive estimate is the plain average of `p(y_t | x_t)`.
pub fn naive_pl_step(
    cloud: &mut ParticleCloud,
    y: f64,
    y_prev: Option<f64>,
    ctx: &StepContext,
) -> Result<StepOutcome> {
    check_obs(y, y_prev)?;
    let t = cloud.t + 1;
    let n = cloud.len();
    let parts = &cloud.particles;
    let design = cloud.design;
    let eps = previous_shocks(parts, y_prev, ctx.execution);
    let eps_of = |i: usize| eps.as_ref().map(|e| e[i]);

    let x_hat = exec::map_range(ctx.execution, n, |i| {
        let p = &parts[i];
        let mut rng = rng::stream(ctx.seed, Purpose::Propagate, t as u64, i as u64);
        let z: f64 = StandardNormal.sample(&mut rng);
        lookahead(&p.theta, p.x, eps_of(i)) + p.theta.omega * z
    });
    let logw = exec::map_range(ctx.execution, n, |i| log_weight(y, x_hat[i]));
    let (w, log_pred) = normalize_log_weights(&logw).map_err(degeneracy(t))?;
    let ess = effective_sample_size(&w);
    let (state_mean, shock_mean) = weighted_means(&w, &x_hat, y);
    let mut rng = rng::stream(ctx.seed, Purpose::Resample, t as u64, 0);
    let picks = resample(&w, n, ctx.scheme, &mut rng)?;

    regenerate(cloud, ctx.execution, t, |j, parts, clamps| {
        let i = picks[j];
        refreshed(&parts[i], x_hat[i], eps_of(i), &design, ctx, t, j, clamps)
    })?;

    if !log_pred.is_finite() {
        return Err(SvError::Degenerate { t });
    }
    cloud.ess = ess;
    cloud.cum_log_marglik += log_pred;
    Ok(StepOutcome { log_pred, ess, state_mean, shock_mean })
}
