//! The stochastic volatility family
//!
//! ```text
//! y_t = exp(x_t / 2) eps_t
//! x_t = mu + beta x_{t-1} + l(eps_{t-1}) + omega u_t
//! ```
//!
//! with `eps_t, u_t` independent standard normals and `l` a Hermite leverage
//! function. Order 0 is the plain SV model, order 1 the linear-leverage model.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SvError};
use crate::hermite::LeverageSpec;
use crate::rng::{self, Purpose};
use crate::series::ReturnSeries;

pub(crate) const HALF_LN_2PI: f64 = 0.918_938_533_204_672_7;

/// `theta = (mu, beta, phi_1..phi_k, omega)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvParams {
    pub mu: f64,
    pub beta: f64,
    pub leverage: LeverageSpec,
    pub omega: f64,
}

impl SvParams {
    pub fn new(mu: f64, beta: f64, leverage: LeverageSpec, omega: f64) -> Result<Self> {
        let p = SvParams { mu, beta, leverage, omega };
        p.validate()?;
        Ok(p)
    }

    /// Plain SV with state noise scale `tau`.
    pub fn no_leverage(mu: f64, beta: f64, tau: f64) -> Result<Self> {
        Self::new(mu, beta, LeverageSpec::none(), tau)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu.is_finite() && self.beta.is_finite()) {
            return Err(SvError::InvalidParameter("mu and beta must be finite".into()));
        }
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(SvError::InvalidParameter(format!("omega must be > 0, got {}", self.omega)));
        }
        Ok(())
    }

    /// Mean and variance of the stationary no-leverage skeleton.
    pub fn stationary_moments(&self) -> Result<(f64, f64)> {
        if self.beta.abs() >= 1.0 {
            return Err(SvError::InvalidParameter(format!(
                "stationary initialisation needs |beta| < 1, got {}",
                self.beta
            )));
        }
        Ok((
            self.mu / (1.0 - self.beta),
            self.omega * self.omega / (1.0 - self.beta * self.beta),
        ))
    }
}

/// Correlated-noise parameterisation: `corr(eps_t, eta_t) = rho`, `sd(eta_t) = tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearLeverageParams {
    pub mu: f64,
    pub beta: f64,
    pub rho: f64,
    pub tau: f64,
}

pub fn reparam_to_uncorrelated(p: &LinearLeverageParams) -> Result<SvParams> {
    if !(p.rho.abs() < 1.0) {
        return Err(SvError::InvalidParameter(format!("|rho| must be < 1, got {}", p.rho)));
    }
    if !(p.tau > 0.0 && p.tau.is_finite()) {
        return Err(SvError::InvalidParameter(format!("tau must be > 0, got {}", p.tau)));
    }
    let phi = p.rho * p.tau;
    let omega = (1.0 - p.rho * p.rho).sqrt() * p.tau;
    SvParams::new(p.mu, p.beta, LeverageSpec::new(&[phi])?, omega)
}

pub fn reparam_from_uncorrelated(p: &SvParams) -> Result<LinearLeverageParams> {
    if p.leverage.order().get() != 1 {
        return Err(SvError::InvalidParameter(format!(
            "correlated form needs order 1, got {}",
            p.leverage.order()
        )));
    }
    p.validate()?;
    let phi = p.leverage.coeffs()[0];
    let tau = phi.hypot(p.omega);
    Ok(LinearLeverageParams { mu: p.mu, beta: p.beta, rho: phi / tau, tau })
}

/// `log N(y; 0, exp(x))`.
#[inline]
pub fn obs_logdensity(y: f64, x: f64) -> f64 {
    let e = shock_from_obs(y, x);
    -HALF_LN_2PI - 0.5 * x - 0.5 * e * e
}

/// Conditional mean of `x_t` given `x_{t-1}` and the previous shock.
#[inline]
pub fn state_mean(theta: &SvParams, x_prev: f64, eps_prev: f64) -> f64 {
    theta.mu + theta.beta * x_prev + theta.leverage.eval(eps_prev)
}

/// `eps_t = y_t exp(-x_t / 2)`.
#[inline]
pub fn shock_from_obs(y: f64, x: f64) -> f64 {
    // exact zero even where exp(-x / 2) overflows
    if y == 0.0 {
        return 0.0;
    }
    y * (-0.5 * x).exp()
}

/// How `x_1` is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialState {
    /// Stationary law of the no-leverage skeleton.
    Stationary,
    Fixed(f64),
}

/// A simulated path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutput {
    pub returns: ReturnSeries,
    pub latent: Vec<f64>,
    pub shocks: Vec<f64>,
}

/// Simulates `T` steps. Identical `(theta, T, x0, seed)` give identical paths.
pub fn simulate(theta: &SvParams, len: usize, x0: InitialState, seed: u64) -> Result<SimOutput> {
    theta.validate()?;
    if len == 0 {
        return Err(SvError::InvalidParameter("simulation length must be >= 1".into()));
    }
    let (x1_mean, x1_sd) = match x0 {
        InitialState::Stationary => {
            let (m, v) = theta.stationary_moments()?;
            (m, v.sqrt())
        }
        InitialState::Fixed(x) => (x, 0.0),
    };
    let mut eps_rng = rng::stream(seed, Purpose::Simulate, 0, 0);
    let mut u_rng = rng::stream(seed, Purpose::Simulate, 1, 0);
    let eps: Vec<f64> = (0..len).map(|_| StandardNormal.sample(&mut eps_rng)).collect();
    let u: Vec<f64> = (0..len).map(|_| StandardNormal.sample(&mut u_rng)).collect();
    let x1 = x1_mean + x1_sd * u[0];
    simulate_from_shocks(theta, x1, &eps, &u[1..])
}

/// Builds a path from given shocks: `x_1` as passed, then one `u` per later step.
///
/// The leverage term first acts on `x_2` through `eps_1`.
pub fn simulate_from_shocks(
    theta: &SvParams,
    x1: f64,
    eps: &[f64],
    u: &[f64],
) -> Result<SimOutput> {
    if eps.is_empty() || u.len() + 1 != eps.len() {
        return Err(SvError::InvalidParameter(format!(
            "need T >= 1 observation shocks and T - 1 state shocks, got {} and {}",
            eps.len(),
            u.len()
        )));
    }
    let mut latent = Vec::with_capacity(eps.len());
    latent.push(x1);
    for t in 1..eps.len() {
        let x = state_mean(theta, latent[t - 1], eps[t - 1]) + theta.omega * u[t - 1];
        latent.push(x);
    }
    let y: Vec<f64> = latent.iter().zip(eps).map(|(x, e)| (0.5 * x).exp() * e).collect();
    if y.iter().chain(&latent).any(|v| !v.is_finite()) {
        return Err(SvError::InvalidParameter("simulated path diverged".into()));
    }
    // a one-point path is still a valid simulation, so skip the length check
    let returns = ReturnSeries::from_values_unchecked(y);
    Ok(SimOutput { returns, latent, shocks: eps.to_vec() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear(phi: f64, omega: f64) -> SvParams {
        SvParams::new(-0.026, 0.97, LeverageSpec::new(&[phi]).unwrap(), omega).unwrap()
    }

    #[test]
    fn reparam_examples() {
        let p = reparam_to_uncorrelated(&LinearLeverageParams { mu: 0.0, beta: 0.9, rho: 0.0, tau: 0.15 })
            .unwrap();
        assert_eq!(p.leverage.coeffs(), &[0.0]);
        assert!((p.omega - 0.15).abs() < 1e-15);

        let p = reparam_to_uncorrelated(&LinearLeverageParams {
            mu: -0.026,
            beta: 0.97,
            rho: -0.3,
            tau: 0.15,
        })
        .unwrap();
        assert!((p.leverage.coeffs()[0] + 0.045).abs() < 1e-15);
        assert!((p.omega - 0.143_090_880_212_541_85).abs() < 1e-12);

        assert!(reparam_to_uncorrelated(&LinearLeverageParams { mu: 0.0, beta: 0.0, rho: 1.0, tau: 0.1 })
            .is_err());
        assert!(reparam_to_uncorrelated(&LinearLeverageParams { mu: 0.0, beta: 0.0, rho: 0.1, tau: 0.0 })
            .is_err());
    }

    #[test]
    fn inverse_reparam_examples() {
        let back = reparam_from_uncorrelated(&linear(0.0, 0.15)).unwrap();
        assert_eq!((back.rho, back.tau), (0.0, 0.15));

        let back = reparam_from_uncorrelated(&linear(-0.045, 0.143)).unwrap();
        assert!((back.tau - 0.149_913_308_281_819_98).abs() < 1e-12);
        assert!((back.rho + 0.300_173_483_700_360_46).abs() < 1e-12);

        let back = reparam_from_uncorrelated(&linear(-0.3, 1e-12)).unwrap();
        assert!((back.rho + 1.0).abs() < 1e-10);

        let k0 = SvParams::no_leverage(0.0, 0.9, 0.1).unwrap();
        assert!(reparam_from_uncorrelated(&k0).is_err());
    }

    #[test]
    fn reparam_roundtrip() {
        for &(rho, tau) in &[(-0.3, 0.15), (0.7, 2.0), (-0.99, 0.01), (0.0, 1.0)] {
            let p = LinearLeverageParams { mu: 0.1, beta: 0.5, rho, tau };
            let back = reparam_from_uncorrelated(&reparam_to_uncorrelated(&p).unwrap()).unwrap();
            assert!((back.rho - rho).abs() < 1e-12 && (back.tau - tau).abs() < 1e-12);
        }
    }

    #[test]
    fn logdensity_examples() {
        assert!((obs_logdensity(0.0, 0.0) + 0.918_938_533_204_672_7).abs() < 1e-15);
        assert!((obs_logdensity(1.0, 0.0) + 1.418_938_533_204_672_7).abs() < 1e-15);
        assert!((obs_logdensity(2.0, 2.0) + 2.189_609_099_677_898).abs() < 1e-14);
    }

    #[test]
    fn logdensity_integrates_to_one() {
        for &x in &[-2.0, 0.0, 2.0] {
            let sd = (0.5 * f64::exp(x)).exp();
            let (lo, hi) = (-50.0 * sd, 50.0 * sd);
            let n = 200_000;
            let h = (hi - lo) / n as f64;
            let mut sum = 0.5 * (obs_logdensity(lo, x).exp() + obs_logdensity(hi, x).exp());
            for i in 1..n {
                sum += obs_logdensity(lo + i as f64 * h, x).exp();
            }
            assert!((sum * h - 1.0).abs() < 1e-8, "x = {x}: {}", sum * h);
        }
    }

    #[test]
    fn state_mean_examples() {
        let k0 = SvParams::no_leverage(-0.026, 0.97, 0.15).unwrap();
        let fixed = -0.026 / 0.03;
        assert!((state_mean(&k0, fixed, 0.3) - fixed).abs() < 1e-14);
        assert_eq!(state_mean(&k0, 0.0, 123.0), -0.026);
        let lin = SvParams::new(0.0, 0.0, LeverageSpec::new(&[-0.045]).unwrap(), 0.1).unwrap();
        assert_eq!(state_mean(&lin, 0.0, 1.0), -0.045);
    }

    #[test]
    fn shock_examples() {
        assert_eq!(shock_from_obs(0.0, 5.0), 0.0);
        assert_eq!(shock_from_obs(1.0, 0.0), 1.0);
        assert!((shock_from_obs(2.0, 2.0 * 2f64.ln()) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn noiseless_state_stays_at_mu() {
        let p = SvParams::no_leverage(-0.4, 0.0, 1e-300).unwrap();
        let sim = simulate(&p, 100, InitialState::Fixed(-0.4), 9).unwrap();
        assert!(sim.latent.iter().all(|&x| x == -0.4));
    }

    #[test]
    fn simulation_is_consistent_and_deterministic() {
        let p = SvParams::new(-0.026, 0.97, LeverageSpec::new(&[-0.045, 0.02]).unwrap(), 0.143).unwrap();
        let a = simulate(&p, 500, InitialState::Stationary, 3).unwrap();
        let b = simulate(&p, 500, InitialState::Stationary, 3).unwrap();
        assert_eq!(a, b);
        for t in 0..500 {
            let y = a.returns.values()[t];
            assert!((shock_from_obs(y, a.latent[t]) - a.shocks[t]).abs() <= 1e-12 * a.shocks[t].abs().max(1.0));
        }
    }

    #[test]
    fn order_zero_equals_zero_linear_coefficient() {
        let k0 = SvParams::no_leverage(-0.026, 0.97, 0.15).unwrap();
        let k1 = linear(0.0, 0.15);
        let a = simulate(&k0, 300, InitialState::Stationary, 17).unwrap();
        let b = simulate(&k1, 300, InitialState::Stationary, 17).unwrap();
        assert_eq!(a.latent, b.latent);
        assert_eq!(a.returns, b.returns);
    }

    #[test]
    fn correlated_form_gives_same_path() {
        let corr = LinearLeverageParams { mu: -0.026, beta: 0.97, rho: -0.3, tau: 0.15 };
        let theta = reparam_to_uncorrelated(&corr).unwrap();
        let sim = simulate(&theta, 1000, InitialState::Fixed(-0.8), 5).unwrap();
        // recover u from the uncorrelated path, then rebuild with eta = rho tau eps + sqrt(1-rho^2) tau u
        let x = &sim.latent;
        let eps = &sim.shocks;
        let mut rebuilt = vec![x[0]];
        for t in 1..x.len() {
            let u = (x[t] - state_mean(&theta, x[t - 1], eps[t - 1])) / theta.omega;
            let eta = corr.rho * corr.tau * eps[t - 1] + (1.0 - corr.rho * corr.rho).sqrt() * corr.tau * u;
            rebuilt.push(corr.mu + corr.beta * rebuilt[t - 1] + eta);
        }
        for (a, b) in x.iter().zip(&rebuilt) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn simulate_errors() {
        let p = SvParams::no_leverage(0.0, 1.0, 0.1).unwrap();
        assert!(simulate(&p, 0, InitialState::Fixed(0.0), 1).is_err());
        assert!(simulate(&p, 10, InitialState::Stationary, 1).is_err());
        assert!(SvParams::no_leverage(0.0, 0.5, 0.0).is_err());
    }
}
