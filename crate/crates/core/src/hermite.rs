//! Probabilists' Hermite polynomials and the polynomial leverage function
//! `l(z) = phi_1 H_1(z) + ... + phi_k H_k(z)`.
//!
//! Under a standard normal `z`, every `H_k` with `k >= 1` has zero mean and
//! `E[H_j H_k] = k! 1{j = k}`, so a leverage function built from them never
//! shifts the mean of the log-volatility process.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SvError};
use crate::summary::quantile_sorted;

/// Largest leverage order the particle storage is sized for.
pub const MAX_ORDER: usize = 6;

/// Order bound applied when none is configured.
pub const DEFAULT_ORDER_BOUND: usize = 6;

/// Order `k` of a Hermite leverage expansion. `k = 0` means no leverage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct HermiteOrder(usize);

impl HermiteOrder {
    pub const ZERO: HermiteOrder = HermiteOrder(0);

    pub fn new(k: usize) -> Result<Self> {
        Self::with_bound(k, DEFAULT_ORDER_BOUND)
    }

    /// Accepts `k <= bound`; the bound itself may not exceed [`MAX_ORDER`].
    pub fn with_bound(k: usize, bound: usize) -> Result<Self> {
        let bound = bound.min(MAX_ORDER);
        if k > bound {
            return Err(SvError::OrderOutOfRange { order: k, bound });
        }
        Ok(HermiteOrder(k))
    }

    #[inline]
    pub fn get(self) -> usize {
        self.0
    }

    /// Dimension of the state-equation regression: intercept, persistence and `k` coefficients.
    #[inline]
    pub fn regression_dim(self) -> usize {
        self.0 + 2
    }
}

impl TryFrom<usize> for HermiteOrder {
    type Error = SvError;
    fn try_from(k: usize) -> Result<Self> {
        HermiteOrder::new(k)
    }
}

impl From<HermiteOrder> for usize {
    fn from(k: HermiteOrder) -> usize {
        k.0
    }
}

impl std::fmt::Display for HermiteOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `H_k(z)` via `H_{k+1} = z H_k - k H_{k-1}`.
pub fn hermite_eval(k: usize, z: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = z;
    for j in 1..k {
        let next = z * cur - j as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Writes `(H_1(z), ..., H_n(z))` into `out`, where `n = out.len()`.
#[inline]
pub fn fill_basis(z: f64, out: &mut [f64]) {
    let mut prev = 1.0;
    let mut cur = z;
    for (j, slot) in out.iter_mut().enumerate() {
        *slot = cur;
        let next = z * cur - (j + 1) as f64 * prev;
        prev = cur;
        cur = next;
    }
}

/// `(H_1(z), ..., H_k(z))`; empty for `k = 0`.
pub fn hermite_basis(k: usize, z: f64) -> Vec<f64> {
    let mut out = vec![0.0; k];
    fill_basis(z, &mut out);
    out
}

/// Leverage function coefficients `(phi_1, ..., phi_k)`.
///
/// Stored inline so that particles stay `Copy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LeverageRepr", into = "LeverageRepr")]
pub struct LeverageSpec {
    order: HermiteOrder,
    coeffs: [f64; MAX_ORDER],
}

#[derive(Serialize, Deserialize)]
struct LeverageRepr {
    order: usize,
    coeffs: Vec<f64>,
}

impl TryFrom<LeverageRepr> for LeverageSpec {
    type Error = SvError;
    fn try_from(r: LeverageRepr) -> Result<Self> {
        let spec = LeverageSpec::new(&r.coeffs)?;
        if spec.order.get() != r.order {
            return Err(SvError::InvalidParameter(format!(
                "leverage order {} does not match {} coefficients",
                r.order,
                r.coeffs.len()
            )));
        }
        Ok(spec)
    }
}

impl From<LeverageSpec> for LeverageRepr {
    fn from(s: LeverageSpec) -> Self {
        LeverageRepr { order: s.order.get(), coeffs: s.coeffs().to_vec() }
    }
}

impl LeverageSpec {
    /// No leverage (`k = 0`).
    pub fn none() -> Self {
        LeverageSpec { order: HermiteOrder::ZERO, coeffs: [0.0; MAX_ORDER] }
    }

    /// Order is the number of coefficients.
    pub fn new(coeffs: &[f64]) -> Result<Self> {
        let order = HermiteOrder::with_bound(coeffs.len(), MAX_ORDER)?;
        if let Some(bad) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(SvError::InvalidParameter(format!("non-finite leverage coefficient {bad}")));
        }
        let mut stored = [0.0; MAX_ORDER];
        stored[..coeffs.len()].copy_from_slice(coeffs);
        Ok(LeverageSpec { order, coeffs: stored })
    }

    /// All-zero coefficients of the given order.
    pub fn zeros(order: HermiteOrder) -> Self {
        LeverageSpec { order, coeffs: [0.0; MAX_ORDER] }
    }

    #[inline]
    pub fn order(&self) -> HermiteOrder {
        self.order
    }

    #[inline]
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs[..self.order.get()]
    }

    #[inline]
    pub(crate) fn coeffs_mut(&mut self) -> &mut [f64] {
        let k = self.order.get();
        &mut self.coeffs[..k]
    }

    /// `sum_j phi_j H_j(z)`, zero when `k = 0`.
    #[inline]
    pub fn eval(&self, z: f64) -> f64 {
        let mut acc = 0.0;
        let mut prev = 1.0;
        let mut cur = z;
        for (j, phi) in self.coeffs().iter().enumerate() {
            acc += phi * cur;
            let next = z * cur - (j + 1) as f64 * prev;
            prev = cur;
            cur = next;
        }
        acc
    }
}

pub fn leverage_eval(spec: &LeverageSpec, z: f64) -> f64 {
    spec.eval(z)
}

/// One grid point of a news impact curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub z: f64,
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Posterior mean and 2.5%/97.5% quantiles of `l(z)` over parameter draws, per grid point.
pub fn leverage_curve(samples: &[LeverageSpec], grid: &[f64]) -> Result<Vec<CurvePoint>> {
    let first = samples.first().ok_or(SvError::EmptySamples)?;
    let order = first.order();
    if let Some(other) = samples.iter().find(|s| s.order() != order) {
        return Err(SvError::MixedOrders { expected: order.get(), found: other.order().get() });
    }
    if grid.iter().any(|z| !z.is_finite()) {
        return Err(SvError::InvalidParameter("non-finite grid point".into()));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(SvError::InvalidParameter("grid must be sorted".into()));
    }

    let mut values = vec![0.0; samples.len()];
    let points = grid
        .iter()
        .map(|&z| {
            for (v, s) in values.iter_mut().zip(samples) {
                *v = s.eval(z);
            }
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            values.sort_by(f64::total_cmp);
            CurvePoint {
                z,
                mean,
                lower: quantile_sorted(&values, 0.025),
                upper: quantile_sorted(&values, 0.975),
            }
        })
        .collect();
    Ok(points)
}
