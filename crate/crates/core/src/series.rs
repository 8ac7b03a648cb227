use serde::{Deserialize, Serialize};

use crate::error::{Result, SvError};

/// Ordered log returns with their row labels (dates or integer indices).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    labels: Vec<String>,
    values: Vec<f64>,
}

impl ReturnSeries {
    /// Labels `1..=T`.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let labels = (1..=values.len()).map(|i| i.to_string()).collect();
        Self::new(labels, values)
    }

    pub(crate) fn from_values_unchecked(values: Vec<f64>) -> Self {
        let labels = (1..=values.len()).map(|i| i.to_string()).collect();
        ReturnSeries { labels, values }
    }

    pub fn new(labels: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if labels.len() != values.len() {
            return Err(SvError::InvalidSeries(format!(
                "{} labels for {} values",
                labels.len(),
                values.len()
            )));
        }
        if values.len() < 2 {
            return Err(SvError::InvalidSeries(format!(
                "need at least 2 observations, got {}",
                values.len()
            )));
        }
        check_finite(&values)?;
        Ok(ReturnSeries { labels, values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub(crate) fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(SvError::InvalidSeries(format!("non-finite value at position {}", i + 1))),
        None => Ok(()),
    }
}
