//! Choosing the leverage order by one-step predictive likelihood, and the log
//! predictive density ratio between the best models of two order classes.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SvError};
use crate::exec::Execution;
use crate::filter::{
    run_filter, Algorithm, FilterConfig, PosteriorSummary, PriorSpec, PriorTemplate,
    ResamplingScheme,
};
use crate::hermite::{HermiteOrder, DEFAULT_ORDER_BOUND};
use crate::rng::sub_seed;

/// Accumulated log predictive density over `t > burn` and its per-step terms.
pub fn log_marglik(
    y: &[f64],
    order: HermiteOrder,
    prior: &PriorSpec,
    particles: usize,
    seed: u64,
    burn: usize,
) -> Result<(f64, Vec<f64>)> {
    let mut config = FilterConfig::new(order, particles, seed);
    config.burn = burn;
    let res = run_filter(y, prior, &config)?;
    Ok((res.cum_log_marglik, res.per_t_logpred))
}

/// Default scoring window: the first 20% of the series is used for learning only.
pub fn default_burn(len: usize) -> usize {
    len / 5
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionConfig {
    pub k_max: usize,
    pub order_bound: usize,
    pub particles: usize,
    pub seed: u64,
    pub burn: usize,
    pub prior: PriorTemplate,
    pub algorithm: Algorithm,
    pub scheme: ResamplingScheme,
    pub execution: Execution,
}

impl SelectionConfig {
    pub fn new(k_max: usize, particles: usize, seed: u64, burn: usize) -> Self {
        SelectionConfig {
            k_max,
            order_bound: DEFAULT_ORDER_BOUND,
            particles,
            seed,
            burn,
            prior: PriorTemplate::default(),
            algorithm: Algorithm::Plav,
            scheme: ResamplingScheme::Systematic,
            execution: Execution::default(),
        }
    }

    fn filter_config(&self, order: HermiteOrder) -> FilterConfig {
        let mut c = FilterConfig::new(order, self.particles, order_seed(self.seed, order));
        c.burn = self.burn;
        c.algorithm = self.algorithm;
        c.scheme = self.scheme;
        c.execution = self.execution;
        c
    }
}

/// Seed of order `k`'s run within a sweep; independent of which other orders run.
pub fn order_seed(seed: u64, order: HermiteOrder) -> u64 {
    sub_seed(seed, order.get() as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderScore {
    pub order: HermiteOrder,
    pub cum_log_marglik: f64,
    pub per_t_logpred: Vec<f64>,
    pub posterior: PosteriorSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    /// Ascending by order.
    pub per_order: Vec<OrderScore>,
    pub best_order: HermiteOrder,
    pub burn: usize,
    /// Orders that tied for the maximum, when more than one did.
    pub tied_orders: Vec<HermiteOrder>,
}

impl SelectionReport {
    pub fn score(&self, order: HermiteOrder) -> Option<&OrderScore> {
        self.per_order.iter().find(|s| s.order == order)
    }

    /// Best order using only the first `steps` scored observations.
    pub fn best_order_at(&self, steps: usize) -> HermiteOrder {
        let scores: Vec<(HermiteOrder, f64)> = self
            .per_order
            .iter()
            .map(|s| (s.order, s.per_t_logpred.iter().take(steps).sum()))
            .collect();
        best_order(&scores).0
    }
}

/// Arg-max of the scores; ties go to the smallest order. Also returns the tied set.
pub fn best_order(scores: &[(HermiteOrder, f64)]) -> (HermiteOrder, Vec<HermiteOrder>) {
    let mut sorted = scores.to_vec();
    sorted.sort_by_key(|s| s.0);
    let (mut best, mut best_score) = sorted[0];
    for &(k, s) in &sorted[1..] {
        if s > best_score {
            best = k;
            best_score = s;
        }
    }
    let tied: Vec<HermiteOrder> =
        sorted.iter().filter(|s| s.1 == best_score).map(|s| s.0).collect();
    (best, if tied.len() > 1 { tied } else { Vec::new() })
}

fn score_orders(y: &[f64], orders: &[HermiteOrder], config: &SelectionConfig) -> Result<Vec<OrderScore>> {
    orders
        .iter()
        .map(|&order| {
            let prior = config.prior.for_order(order);
            let res = run_filter(y, &prior, &config.filter_config(order))?;
            Ok(OrderScore {
                order,
                cum_log_marglik: res.cum_log_marglik,
                per_t_logpred: res.per_t_logpred,
                posterior: res.posterior,
            })
        })
        .collect()
}

fn report_from(per_order: Vec<OrderScore>, burn: usize) -> SelectionReport {
    let scores: Vec<(HermiteOrder, f64)> =
        per_order.iter().map(|s| (s.order, s.cum_log_marglik)).collect();
    let (best_order, tied_orders) = best_order(&scores);
    SelectionReport { per_order, best_order, burn, tied_orders }
}

/// Scores orders `0..=k_max` and picks the one with the largest predictive likelihood.
pub fn select_order(y: &[f64], config: &SelectionConfig) -> Result<SelectionReport> {
    let orders: Vec<HermiteOrder> = (0..=config.k_max)
        .map(|k| HermiteOrder::with_bound(k, config.order_bound))
        .collect::<Result<_>>()?;
    Ok(report_from(score_orders(y, &orders, config)?, config.burn))
}

/// Cumulative log predictive density ratio of class `b`'s best model over class `a`'s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpdrSeries {
    pub order_a: HermiteOrder,
    pub order_b: HermiteOrder,
    pub values: Vec<f64>,
}

impl LpdrSeries {
    pub fn final_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

fn best_in(report: &[OrderScore], class: &[HermiteOrder]) -> Result<HermiteOrder> {
    if class.is_empty() {
        return Err(SvError::InvalidParameter("order class is empty".into()));
    }
    let scores: Vec<(HermiteOrder, f64)> = class
        .iter()
        .map(|k| {
            report
                .iter()
                .find(|s| s.order == *k)
                .map(|s| (*k, s.cum_log_marglik))
                .ok_or_else(|| SvError::InvalidParameter(format!("order {k} was not scored")))
        })
        .collect::<Result<_>>()?;
    Ok(best_order(&scores).0)
}

/// LPDR from already scored orders.
pub fn lpdr_from_scores(
    scores: &[OrderScore],
    class_a: &[HermiteOrder],
    class_b: &[HermiteOrder],
) -> Result<LpdrSeries> {
    let order_a = best_in(scores, class_a)?;
    let order_b = best_in(scores, class_b)?;
    let find = |k: HermiteOrder| &scores.iter().find(|s| s.order == k).expect("scored").per_t_logpred;
    let (pa, pb) = (find(order_a), find(order_b));
    let mut acc = 0.0;
    let values = pb
        .iter()
        .zip(pa)
        .map(|(b, a)| {
            acc += b - a;
            acc
        })
        .collect();
    Ok(LpdrSeries { order_a, order_b, values })
}

/// Runs every order in both classes, then forms the LPDR of `b` over `a`.
pub fn lpdr(
    y: &[f64],
    class_a: &[HermiteOrder],
    class_b: &[HermiteOrder],
    config: &SelectionConfig,
) -> Result<LpdrSeries> {
    let mut orders: Vec<HermiteOrder> = class_a.iter().chain(class_b).copied().collect();
    orders.sort();
    orders.dedup();
    let scores = score_orders(y, &orders, config)?;
    lpdr_from_scores(&scores, class_a, class_b)
}
