//! Conjugate sufficient statistics of the state-equation regression
//!
//! ```text
//! x_t = w_t' gamma + omega u_t,   w_t = (1, x_{t-1}, H_1(eps_{t-1}), ..., H_k(eps_{t-1}))
//! ```
//!
//! Given `omega^2` the coefficients are Gaussian and `omega^2` itself is
//! inverse gamma, so each particle only needs `(A, Ab, c, d)`.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::Serialize;

use crate::error::{Result, SvError};
use crate::hermite::{fill_basis, HermiteOrder, LeverageSpec, MAX_ORDER};
use crate::linalg::{Cholesky, SymMatrix, Vector, MAX_DIM};
use crate::model::SvParams;

use super::prior::{ConjugatePrior, PriorSpec};

/// Posterior draws of `beta` are kept strictly inside this bound.
pub const BETA_BOUND: f64 = 0.999;
/// Redraws allowed before an out-of-bound `beta` is clamped.
pub const BETA_MAX_ATTEMPTS: usize = 100;

/// Which leverage coefficients are learned and which are pinned to fixed values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Design {
    order: HermiteOrder,
    pinned: [Option<f64>; MAX_ORDER],
    free: [usize; MAX_ORDER],
    n_free: usize,
}

impl Design {
    pub fn new(order: HermiteOrder) -> Self {
        Self::with_pinned(order, &[]).expect("no pins")
    }

    /// `pinned` holds `(j, value)` with `1 <= j <= k`, fixing `phi_j = value`.
    pub fn with_pinned(order: HermiteOrder, pinned: &[(usize, f64)]) -> Result<Self> {
        let mut slots = [None; MAX_ORDER];
        for &(j, v) in pinned {
            if j == 0 || j > order.get() || !v.is_finite() {
                return Err(SvError::InvalidParameter(format!(
                    "cannot pin coefficient {j} of an order-{order} leverage function"
                )));
            }
            slots[j - 1] = Some(v);
        }
        let mut free = [0; MAX_ORDER];
        let mut n_free = 0;
        for j in 0..order.get() {
            if slots[j].is_none() {
                free[n_free] = j;
                n_free += 1;
            }
        }
        Ok(Design { order, pinned: slots, free, n_free })
    }

    #[inline]
    pub fn order(&self) -> HermiteOrder {
        self.order
    }

    /// Number of regression coefficients actually learned.
    #[inline]
    pub fn dim(&self) -> usize {
        2 + self.n_free
    }

    /// Indices into the full `(mu, beta, phi_1..phi_k)` vector that are learned.
    pub fn kept_indices(&self) -> Vec<usize> {
        let mut keep = vec![0, 1];
        keep.extend(self.free[..self.n_free].iter().map(|j| j + 2));
        keep
    }

    /// Fills the learned regressors into `w` and returns the pinned part of the leverage term.
    ///
    /// Without a previous shock the leverage regressors are zero.
    #[inline]
    pub fn regressor(&self, x_prev: f64, eps_prev: Option<f64>, w: &mut Vector) -> f64 {
        w[0] = 1.0;
        w[1] = x_prev;
        let k = self.order.get();
        let Some(eps) = eps_prev else {
            w[2..2 + self.n_free].fill(0.0);
            return 0.0;
        };
        let mut basis = [0.0; MAX_ORDER];
        fill_basis(eps, &mut basis[..k]);
        for (slot, &j) in w[2..].iter_mut().zip(&self.free[..self.n_free]) {
            *slot = basis[j];
        }
        self.pinned[..k]
            .iter()
            .zip(&basis[..k])
            .filter_map(|(p, h)| p.map(|v| v * h))
            .sum()
    }

    /// Puts learned coefficients and pinned values back into model parameters.
    fn assemble(&self, gamma: &[f64], omega: f64) -> SvParams {
        let mut leverage = LeverageSpec::zeros(self.order);
        let coeffs = leverage.coeffs_mut();
        for (j, c) in coeffs.iter_mut().enumerate() {
            if let Some(v) = self.pinned[j] {
                *c = v;
            }
        }
        for (i, &j) in self.free[..self.n_free].iter().enumerate() {
            coeffs[j] = gamma[2 + i];
        }
        SvParams { mu: gamma[0], beta: gamma[1], leverage, omega }
    }
}

/// `(A, Ab, c, d, n)` of the Normal / inverse-gamma regression posterior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SufficientStats {
    /// Accumulated precision `A`.
    pub precision: SymMatrix,
    /// Accumulated precision-weighted mean `Ab`.
    pub precision_mean: Vector,
    pub c: f64,
    pub d: f64,
    pub n: u64,
}

#[derive(Serialize)]
struct StatsRepr {
    precision: Vec<Vec<f64>>,
    precision_mean: Vec<f64>,
    c: f64,
    d: f64,
    n: u64,
}

impl Serialize for SufficientStats {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StatsRepr {
            precision: self.precision.to_dense(),
            precision_mean: self.precision_mean[..self.dim()].to_vec(),
            c: self.c,
            d: self.d,
            n: self.n,
        }
        .serialize(s)
    }
}

impl SufficientStats {
    /// Prior statistics for the full regression of the given order.
    pub fn from_prior(prior: &PriorSpec, order: HermiteOrder) -> Result<Self> {
        prior.validate(order)?;
        Self::from_conjugate(&prior.conjugate(&Design::new(order).kept_indices())?)
    }

    pub(crate) fn from_conjugate(prior: &ConjugatePrior) -> Result<Self> {
        Ok(SufficientStats {
            precision: prior.precision,
            precision_mean: prior.precision_mean,
            c: prior.c,
            d: prior.d,
            n: 0,
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.precision.dim()
    }

    /// `A^{-1} Ab`.
    pub fn posterior_mean(&self) -> Result<Vector> {
        let mut m = self.precision_mean;
        self.precision.cholesky()?.solve_in_place(&mut m[..self.dim()]);
        Ok(m)
    }

    /// Folds one `(regressor, response)` pair.
    ///
    /// `d` grows by half the squared prediction error scaled by `1 + w' A^{-1} w`,
    /// which equals the batch form `d0 + (y'y + b0'A0 b0 - bn'An bn) / 2`.
    pub fn fold(&mut self, w: &[f64], y: f64) -> Result<()> {
        self.fold_factored(w, y).map(|_| ())
    }

    /// As [`fold`](Self::fold), returning the factorisation of the updated precision.
    #[inline]
    pub(crate) fn fold_factored(&mut self, w: &[f64], y: f64) -> Result<Factored> {
        let n = self.dim();
        debug_assert_eq!(w.len(), n);
        let old = *self;
        self.precision.rank_one_update(w, 1.0);
        for (acc, wi) in self.precision_mean.iter_mut().zip(w) {
            *acc += wi * y;
        }
        self.c += 0.5;
        self.n += 1;
        let post = self.factor()?;
        // with h = w' A_new^{-1} w and r = y - w' m_new:
        // y - w' m_old = r / (1 - h) and 1 + w' A_old^{-1} w = 1 / (1 - h)
        let mut z = [0.0; MAX_DIM];
        z[..n].copy_from_slice(w);
        post.chol.forward_in_place(&mut z[..n]);
        let h: f64 = z[..n].iter().map(|v| v * v).sum();
        let r = y - w.iter().zip(&post.mean[..n]).map(|(a, b)| a * b).sum::<f64>();
        self.d += if 1.0 - h > 1e-3 { 0.5 * r * r / (1.0 - h) } else { old.innovation(w, y)? };
        Ok(post)
    }

    /// `(y - w' m)^2 / (2 (1 + w' A^{-1} w))` under the current statistics.
    fn innovation(&self, w: &[f64], y: f64) -> Result<f64> {
        let n = self.dim();
        let post = self.factor()?;
        let mut z = [0.0; MAX_DIM];
        z[..n].copy_from_slice(w);
        post.chol.forward_in_place(&mut z[..n]);
        let h: f64 = z[..n].iter().map(|v| v * v).sum();
        let r = y - w.iter().zip(&post.mean[..n]).map(|(a, b)| a * b).sum::<f64>();
        Ok(0.5 * r * r / (1.0 + h))
    }

    #[inline]
    pub(crate) fn factor(&self) -> Result<Factored> {
        let chol = self.precision.cholesky()?;
        let mut mean = self.precision_mean;
        chol.solve_in_place(&mut mean[..self.dim()]);
        Ok(Factored { chol, mean })
    }
}

/// Cholesky factor of `A` and the posterior mean `A^{-1} Ab`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Factored {
    chol: Cholesky,
    mean: Vector,
}

/// Streaming update with regressor `(1, x_prev, H_1(eps_prev), ..., H_k(eps_prev))` and response `x_new`.
pub fn update_stats(
    stats: &SufficientStats,
    order: HermiteOrder,
    x_new: f64,
    x_prev: f64,
    eps_prev: Option<f64>,
) -> Result<SufficientStats> {
    let design = Design::new(order);
    if stats.dim() != design.dim() {
        return Err(SvError::InvalidParameter(format!(
            "statistics of dimension {} do not match order {order}",
            stats.dim()
        )));
    }
    let mut out = *stats;
    update_with_design(&mut out, &design, x_new, x_prev, eps_prev)?;
    Ok(out)
}

#[inline]
pub(crate) fn update_with_design(
    stats: &mut SufficientStats,
    design: &Design,
    x_new: f64,
    x_prev: f64,
    eps_prev: Option<f64>,
) -> Result<Factored> {
    let mut w = [0.0; MAX_DIM];
    let pinned = design.regressor(x_prev, eps_prev, &mut w);
    stats.fold_factored(&w[..design.dim()], x_new - pinned)
}

/// A parameter draw and whether `beta` had to be clamped.
#[derive(Debug, Clone, Copy)]
pub struct ThetaDraw {
    pub theta: SvParams,
    pub clamped: bool,
}

/// `omega^2 ~ IG(c, d)`, `gamma | omega^2 ~ N(A^{-1} Ab, omega^2 A^{-1})`.
pub fn sample_theta<R: Rng + ?Sized>(
    stats: &SufficientStats,
    order: HermiteOrder,
    rng: &mut R,
) -> Result<ThetaDraw> {
    sample_with_design(stats, &Design::new(order), rng)
}

pub(crate) fn sample_with_design<R: Rng + ?Sized>(
    stats: &SufficientStats,
    design: &Design,
    rng: &mut R,
) -> Result<ThetaDraw> {
    sample_factored(stats, &stats.factor()?, design, rng)
}

#[inline]
pub(crate) fn sample_factored<R: Rng + ?Sized>(
    stats: &SufficientStats,
    post: &Factored,
    design: &Design,
    rng: &mut R,
) -> Result<ThetaDraw> {
    let n = stats.dim();
    debug_assert_eq!(n, design.dim());
    let (chol, mean) = (&post.chol, &post.mean);

    let gamma_dist = Gamma::new(stats.c, 1.0)
        .map_err(|e| SvError::InvalidParameter(format!("inverse gamma shape {}: {e}", stats.c)))?;
    let g: f64 = gamma_dist.sample(rng);
    let omega = (stats.d / g).sqrt();
    if !(omega.is_finite() && omega > 0.0) {
        return Err(SvError::NotPositiveDefinite);
    }

    let mut gamma = [0.0; MAX_DIM];
    let mut clamped = false;
    for attempt in 0..BETA_MAX_ATTEMPTS {
        let mut z = [0.0; MAX_DIM];
        for v in z[..n].iter_mut() {
            *v = StandardNormal.sample(rng);
        }
        // L^T v = z gives v ~ N(0, A^{-1})
        chol.backward_in_place(&mut z[..n]);
        for i in 0..n {
            gamma[i] = mean[i] + omega * z[i];
        }
        if gamma[1].abs() < BETA_BOUND {
            break;
        }
        if attempt + 1 == BETA_MAX_ATTEMPTS {
            gamma[1] = gamma[1].clamp(-BETA_BOUND, BETA_BOUND);
            clamped = true;
        }
    }
    Ok(ThetaDraw { theta: design.assemble(&gamma[..n], omega), clamped })
}
