//! Deterministic filtering on a discretised state space, for known parameters.
//! Slow (quadratic in the grid size per step) but free of Monte Carlo error,
//! which makes it the reference for the particle filters.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SvError};
use crate::model::{obs_logdensity, shock_from_obs, SvParams};
use crate::series::check_finite;

use super::prior::InitialPrior;

/// Probability mass allowed on either edge cell before the grid is declared too narrow.
pub const BOUNDARY_MASS_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl GridSpec {
    /// Centred on the stationary mean, `half_width` stationary standard deviations each side.
    pub fn stationary(theta: &SvParams, half_width: f64, points: usize) -> Result<Self> {
        let (m, v) = theta.stationary_moments()?;
        let s = v.sqrt();
        Ok(GridSpec { lo: m - half_width * s, hi: m + half_width * s, points })
    }

    fn nodes(&self) -> Vec<f64> {
        let h = (self.hi - self.lo) / (self.points - 1) as f64;
        (0..self.points).map(|i| self.lo + i as f64 * h).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFilterOutput {
    pub nodes: Vec<f64>,
    /// Filtered probability mass per node, per time step.
    pub masses: Vec<Vec<f64>>,
    pub means: Vec<f64>,
    pub log_pred: Vec<f64>,
}

fn log_normalize(logp: &mut [f64]) -> f64 {
    let max = logp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in logp.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in logp.iter_mut() {
        *v /= sum;
    }
    max + sum.ln()
}

/// Filters `y` under known `theta` on `grid`, starting from `x0` one step before `y_1`.
///
/// Each source node's transition kernel is the Gaussian density at the nodes,
/// renormalised to unit mass, with `eps_{t-1}` recomputed from that node.
pub fn grid_filter_oracle(
    y: &[f64],
    theta: &SvParams,
    grid: GridSpec,
    x0: InitialPrior,
) -> Result<GridFilterOutput> {
    theta.validate()?;
    check_finite(y)?;
    if grid.points < 3 || !(grid.hi > grid.lo) {
        return Err(SvError::InvalidParameter("grid needs lo < hi and at least 3 points".into()));
    }
    let nodes = grid.nodes();
    let g = nodes.len();

    let (m0, v0) = match x0 {
        InitialPrior::Stationary => theta.stationary_moments()?,
        InitialPrior::Gaussian { mean, variance } => (mean, variance),
    };
    let mut mass: Vec<f64> = nodes.iter().map(|x| -0.5 * (x - m0).powi(2) / v0).collect();
    if v0 == 0.0 {
        let nearest = nodes.iter().map(|x| (x - m0).abs()).enumerate().min_by(|a, b| a.1.total_cmp(&b.1));
        mass = vec![f64::NEG_INFINITY; g];
        mass[nearest.expect("non-empty grid").0] = 0.0;
    }
    log_normalize(&mut mass);

    let inv_two_var = 0.5 / (theta.omega * theta.omega);
    let mut predicted = vec![0.0; g];
    let mut kernel = vec![0.0; g];
    let mut out = GridFilterOutput {
        nodes: nodes.clone(),
        masses: Vec::with_capacity(y.len()),
        means: Vec::with_capacity(y.len()),
        log_pred: Vec::with_capacity(y.len()),
    };

    for (t, &obs) in y.iter().enumerate() {
        let prev = if t == 0 { None } else { Some(y[t - 1]) };
        predicted.fill(0.0);
        for (j, &xj) in nodes.iter().enumerate() {
            if mass[j] < 1e-300 {
                continue;
            }
            let mean = match prev {
                Some(yp) => theta.mu + theta.beta * xj + theta.leverage.eval(shock_from_obs(yp, xj)),
                None => theta.mu + theta.beta * xj,
            };
            for (k, x) in kernel.iter_mut().zip(&nodes) {
                *k = -(x - mean).powi(2) * inv_two_var;
            }
            log_normalize(&mut kernel);
            for (p, k) in predicted.iter_mut().zip(&kernel) {
                *p += mass[j] * k;
            }
        }
        let mut post: Vec<f64> = predicted
            .iter()
            .zip(&nodes)
            .map(|(p, x)| p.ln() + obs_logdensity(obs, *x))
            .collect();
        let log_norm = log_normalize(&mut post);
        let edge = post[0].max(post[g - 1]);
        if edge > BOUNDARY_MASS_LIMIT {
            return Err(SvError::GridTooNarrow { t: t + 1, mass: edge });
        }
        out.log_pred.push(log_norm);
        out.means.push(post.iter().zip(&nodes).map(|(p, x)| p * x).sum());
        out.masses.push(post.clone());
        mass = post;
    }
    Ok(out)
}
