use rand_distr::{Distribution, StandardNormal};

use crate::error::{Result, SvError};
use crate::exec::{self, Execution};
use crate::hermite::HermiteOrder;
use crate::model::SvParams;
use crate::rng::{self, Purpose};

use super::prior::{InitialPrior, PriorSpec};
use super::stats::{sample_with_design, Design, SufficientStats};

/// One hypothesis `(x_t, theta)` together with the statistics `theta` is drawn from.
#[derive(Debug, Clone, Copy)]
pub struct Particle {
    pub x: f64,
    pub theta: SvParams,
    pub stats: SufficientStats,
}

/// `N` equally weighted particles after the most recent resampling.
#[derive(Debug, Clone)]
pub struct ParticleCloud {
    pub particles: Vec<Particle>,
    /// Number of observations absorbed so far.
    pub t: usize,
    pub cum_log_marglik: f64,
    /// Effective sample size of the last weighting.
    pub ess: f64,
    /// Parameter draws whose `beta` had to be clamped.
    pub beta_clamps: u64,
    pub(crate) design: Design,
}

impl ParticleCloud {
    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    pub fn order(&self) -> HermiteOrder {
        self.design.order()
    }

    pub fn design(&self) -> &Design {
        &self.design
    }
}

/// Draws `N` particles from the prior: `theta` from the conjugate prior, then `x_0`.
pub fn init_cloud(prior: &PriorSpec, order: HermiteOrder, n: usize, seed: u64) -> Result<ParticleCloud> {
    init_cloud_with(prior, Design::new(order), n, seed, Execution::default())
}

pub(crate) fn init_cloud_with(
    prior: &PriorSpec,
    design: Design,
    n: usize,
    seed: u64,
    execution: Execution,
) -> Result<ParticleCloud> {
    if n < 2 {
        return Err(SvError::InvalidParameter(format!("need at least 2 particles, got {n}")));
    }
    prior.validate(design.order())?;
    let stats = SufficientStats::from_conjugate(&prior.conjugate(&design.kept_indices())?)?;
    let x0 = prior.x0;
    let drawn = exec::map_range(execution, n, |i| {
        let mut rng = rng::stream(seed, Purpose::Init, 0, i as u64);
        let draw = sample_with_design(&stats, &design, &mut rng)?;
        let x = draw_x0(&draw.theta, x0, &mut rng)?;
        Ok((Particle { x, theta: draw.theta, stats }, draw.clamped))
    });
    collect_cloud(drawn, design)
}

/// Particles that all share a known `theta`; used when parameters are not learned.
pub fn init_cloud_fixed(
    theta: &SvParams,
    x0: InitialPrior,
    n: usize,
    seed: u64,
) -> Result<ParticleCloud> {
    if n < 1 {
        return Err(SvError::InvalidParameter("need at least 1 particle".into()));
    }
    theta.validate()?;
    let order = theta.leverage.order();
    let design = Design::new(order);
    // the statistics are never read when parameters are frozen
    let stats = SufficientStats::from_prior(&PriorSpec::standard(order), order)?;
    let drawn = (0..n).map(|i| {
        let mut rng = rng::stream(seed, Purpose::Init, 0, i as u64);
        let x = draw_x0(theta, x0, &mut rng)?;
        Ok((Particle { x, theta: *theta, stats }, false))
    });
    collect_cloud(drawn.collect(), design)
}

fn draw_x0(theta: &SvParams, x0: InitialPrior, rng: &mut rng::StreamRng) -> Result<f64> {
    let z: f64 = StandardNormal.sample(rng);
    Ok(match x0 {
        InitialPrior::Stationary => {
            let (m, v) = theta.stationary_moments()?;
            m + v.sqrt() * z
        }
        InitialPrior::Gaussian { mean, variance } => mean + variance.sqrt() * z,
    })
}

fn collect_cloud(drawn: Vec<Result<(Particle, bool)>>, design: Design) -> Result<ParticleCloud> {
    let mut particles = Vec::with_capacity(drawn.len());
    let mut clamps = 0;
    for d in drawn {
        let (p, clamped) = d?;
        clamps += clamped as u64;
        particles.push(p);
    }
    let n = particles.len() as f64;
    Ok(ParticleCloud { particles, t: 0, cum_log_marglik: 0.0, ess: n, beta_clamps: clamps, design })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn needs_two_particles() {
        let order = HermiteOrder::new(1).unwrap();
        assert!(init_cloud(&PriorSpec::standard(order), order, 1, 0).is_err());
    }

    #[test]
    fn same_seed_same_cloud() {
        let order = HermiteOrder::new(2).unwrap();
        let prior = PriorSpec::standard(order);
        let a = init_cloud(&prior, order, 300, 5).unwrap();
        let b = init_cloud(&prior, order, 300, 5).unwrap();
        for (p, q) in a.particles.iter().zip(&b.particles) {
            assert_eq!(p.x.to_bits(), q.x.to_bits());
            assert_eq!(p.theta, q.theta);
        }
        let c = init_cloud(&prior, order, 300, 6).unwrap();
        assert_ne!(a.particles[0].x, c.particles[0].x);
    }

    /// `E[beta]` under `omega^2 ~ IG(c, d)`, `beta | omega^2 ~ N(b, a omega^2)` truncated to the
    /// stationarity bound, by quadrature over `omega^2`.
    fn truncated_prior_mean(b: f64, a: f64, c: f64, d: f64) -> f64 {
        use statrs::distribution::{Continuous, ContinuousCDF, Normal};
        let std = Normal::new(0.0, 1.0).unwrap();
        let bound = super::super::stats::BETA_BOUND;
        let log_norm = c * d.ln() - statrs::function::gamma::ln_gamma(c);
        let (n, hi) = (400_000, 20.0);
        let h = hi / n as f64;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 1..n {
            let v = i as f64 * h;
            let dens = (log_norm - (c + 1.0) * v.ln() - d / v).exp();
            let s = (a * v).sqrt();
            let (lo, up) = ((-bound - b) / s, (bound - b) / s);
            let mass = std.cdf(up) - std.cdf(lo);
            let mean = b + s * (std.pdf(lo) - std.pdf(up)) / mass;
            num += dens * mean;
            den += dens;
        }
        num / den
    }

    #[test]
    fn prior_mean_of_beta() {
        let order = HermiteOrder::new(1).unwrap();
        let prior = PriorSpec::standard(order);
        let n = 100_000;
        let cloud = init_cloud(&prior, order, n, 21).unwrap();
        let betas: Vec<f64> = cloud.particles.iter().map(|p| p.theta.beta).collect();
        let mean = betas.iter().sum::<f64>() / n as f64;
        let var = betas.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        // the stationarity truncation pulls the mean a little below b0 = 0.95
        let want = truncated_prior_mean(0.95, 0.01, 5.0, 0.4);
        assert!(want < 0.95 && want > 0.94);
        assert!((mean - want).abs() < 3.0 * se, "mean {mean} want {want} se {se}");
    }

    #[test]
    fn fixed_cloud_shares_theta() {
        let theta = SvParams::no_leverage(-0.026, 0.97, 0.15).unwrap();
        let cloud = init_cloud_fixed(&theta, InitialPrior::Stationary, 10, 1).unwrap();
        assert!(cloud.particles.iter().all(|p| p.theta == theta));
        let xs: Vec<f64> = cloud.particles.iter().map(|p| p.x).collect();
        assert!(xs.windows(2).any(|w| w[0] != w[1]));
    }
}
