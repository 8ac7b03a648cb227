use serde::{Deserialize, Serialize};

use crate::error::{Result, SvError};
use crate::hermite::HermiteOrder;
use crate::linalg::{SymMatrix, Vector, MAX_DIM};

/// How the `A0` block of the prior is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriorScale {
    /// `gamma | omega^2 ~ N(b0, omega^2 A0)`.
    #[default]
    Covariance,
    /// `gamma | omega^2 ~ N(b0, omega^2 A0^{-1})`.
    Precision,
}

/// How `(c0, d0)` parameterise the inverse gamma prior on `omega^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaConvention {
    /// `IG(c0, d0)`: shape `c0`, scale `d0`.
    #[default]
    ShapeScale,
    /// `IG(c0 / 2, d0 / 2)`.
    Halved,
}

/// Distribution of the log volatility before the first observation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum InitialPrior {
    /// Stationary law implied by each particle's own parameters.
    #[default]
    Stationary,
    Gaussian { mean: f64, variance: f64 },
}

/// Normal / inverse-gamma prior on `gamma = (mu, beta, phi_1..phi_k)` and `omega^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub a0: Vec<Vec<f64>>,
    pub b0: Vec<f64>,
    pub c0: f64,
    pub d0: f64,
    #[serde(default)]
    pub x0: InitialPrior,
    #[serde(default)]
    pub scale: PriorScale,
    #[serde(default)]
    pub gamma: GammaConvention,
}

impl PriorSpec {
    /// `A0 = diag(1, 0.01, 1, ..., 1)`, `b0 = (0, 0.95, 0, ..., 0)`, `c0 = 5`, `d0 = 0.4`.
    pub fn standard(order: HermiteOrder) -> Self {
        PriorTemplate::default().for_order(order)
    }

    pub fn dim(&self) -> usize {
        self.b0.len()
    }

    pub fn validate(&self, order: HermiteOrder) -> Result<()> {
        let dim = order.regression_dim();
        if self.b0.len() != dim || self.a0.len() != dim {
            return Err(SvError::InvalidPrior(format!(
                "order {order} needs a {dim}-dimensional prior, got b0 of length {} and A0 with {} rows",
                self.b0.len(),
                self.a0.len()
            )));
        }
        if self.b0.iter().any(|b| !b.is_finite()) {
            return Err(SvError::InvalidPrior("b0 must be finite".into()));
        }
        if !(self.c0 > 0.0 && self.c0.is_finite() && self.d0 > 0.0 && self.d0.is_finite()) {
            return Err(SvError::InvalidPrior(format!(
                "c0 and d0 must be positive, got {} and {}",
                self.c0, self.d0
            )));
        }
        if let InitialPrior::Gaussian { mean, variance } = self.x0 {
            if !(mean.is_finite() && variance >= 0.0 && variance.is_finite()) {
                return Err(SvError::InvalidPrior("x0 needs a finite mean and variance >= 0".into()));
            }
        }
        SymMatrix::from_dense(&self.a0)?
            .cholesky()
            .map_err(|_| SvError::InvalidPrior("A0 must be positive definite".into()))?;
        Ok(())
    }

    /// Conjugate hyperparameters restricted to the regressors in `keep`.
    pub(crate) fn conjugate(&self, keep: &[usize]) -> Result<ConjugatePrior> {
        let a0 = SymMatrix::from_dense(&self.a0)?.select(keep);
        let precision = match self.scale {
            PriorScale::Covariance => a0.inverse()?,
            PriorScale::Precision => a0,
        };
        let mut b0 = [0.0; MAX_DIM];
        for (slot, &i) in b0.iter_mut().zip(keep) {
            *slot = self.b0[i];
        }
        let mut precision_mean = [0.0; MAX_DIM];
        precision.mul_vec(&b0, &mut precision_mean);
        let (c, d) = match self.gamma {
            GammaConvention::ShapeScale => (self.c0, self.d0),
            GammaConvention::Halved => (0.5 * self.c0, 0.5 * self.d0),
        };
        Ok(ConjugatePrior { precision, precision_mean, c, d })
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct ConjugatePrior {
    pub precision: SymMatrix,
    pub precision_mean: Vector,
    pub c: f64,
    pub d: f64,
}

/// Order-independent prior description; expands to a [`PriorSpec`] for any order.
///
/// This is the format of prior override files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorTemplate {
    /// `A0` diagonal entries for the intercept, persistence and each leverage coefficient.
    pub a0_intercept: f64,
    pub a0_persistence: f64,
    pub a0_leverage: f64,
    pub b0_intercept: f64,
    pub b0_persistence: f64,
    pub b0_leverage: f64,
    pub c0: f64,
    pub d0: f64,
    pub x0: InitialPrior,
    pub scale: PriorScale,
    pub gamma: GammaConvention,
}

impl Default for PriorTemplate {
    fn default() -> Self {
        PriorTemplate {
            a0_intercept: 1.0,
            a0_persistence: 0.01,
            a0_leverage: 1.0,
            b0_intercept: 0.0,
            b0_persistence: 0.95,
            b0_leverage: 0.0,
            c0: 5.0,
            d0: 0.4,
            x0: InitialPrior::Stationary,
            scale: PriorScale::Covariance,
            gamma: GammaConvention::ShapeScale,
        }
    }
}

impl PriorTemplate {
    pub fn for_order(&self, order: HermiteOrder) -> PriorSpec {
        let dim = order.regression_dim();
        let mut diag = vec![self.a0_leverage; dim];
        diag[0] = self.a0_intercept;
        diag[1] = self.a0_persistence;
        let a0 = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { diag[i] } else { 0.0 }).collect())
            .collect();
        let mut b0 = vec![self.b0_leverage; dim];
        b0[0] = self.b0_intercept;
        b0[1] = self.b0_persistence;
        PriorSpec { a0, b0, c0: self.c0, d0: self.d0, x0: self.x0, scale: self.scale, gamma: self.gamma }
    }
}
