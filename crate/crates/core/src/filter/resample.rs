use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SvError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResamplingScheme {
    #[default]
    Systematic,
    Multinomial,
}

/// Normalised weights from log weights, plus `log(mean(exp(logw)))`.
///
/// Fails if every entry is `-inf` or any is NaN.
pub fn normalize_log_weights(logw: &[f64]) -> Result<(Vec<f64>, f64)> {
    let mut max = f64::NEG_INFINITY;
    for &lw in logw {
        if lw.is_nan() {
            return Err(SvError::InvalidWeights("NaN log weight".into()));
        }
        max = max.max(lw);
    }
    if max == f64::NEG_INFINITY {
        return Err(SvError::InvalidWeights("all weights are zero".into()));
    }
    if max == f64::INFINITY {
        return Err(SvError::InvalidWeights("infinite log weight".into()));
    }
    let mut w: Vec<f64> = logw.iter().map(|lw| (lw - max).exp()).collect();
    let sum: f64 = w.iter().sum();
    let inv = 1.0 / sum;
    for v in w.iter_mut() {
        *v *= inv;
    }
    let log_mean = max + sum.ln() - (logw.len() as f64).ln();
    Ok((w, log_mean))
}

/// `1 / sum(w_i^2)` for normalised weights.
pub fn effective_sample_size(weights: &[f64]) -> f64 {
    1.0 / weights.iter().map(|w| w * w).sum::<f64>()
}

/// Draws `n` ancestor indices from normalised `weights`.
pub fn resample<R: Rng + ?Sized>(
    weights: &[f64],
    n: usize,
    scheme: ResamplingScheme,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let mut total = 0.0;
    for &w in weights {
        if w.is_nan() || w < 0.0 {
            return Err(SvError::InvalidWeights(format!("weight {w} is not a probability")));
        }
        total += w;
    }
    if total == 0.0 {
        return Err(SvError::InvalidWeights("all weights are zero".into()));
    }
    if (total - 1.0).abs() > 1e-9 {
        return Err(SvError::InvalidWeights(format!("weights sum to {total}, not 1")));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let last = weights.len() - 1;
    let mut out = Vec::with_capacity(n);
    match scheme {
        ResamplingScheme::Systematic => {
            let step = 1.0 / n as f64;
            let mut u = rng.random::<f64>() * step;
            let mut cum = weights[0];
            let mut i = 0;
            for _ in 0..n {
                while u >= cum && i < last {
                    i += 1;
                    cum += weights[i];
                }
                out.push(i);
                u += step;
            }
        }
        ResamplingScheme::Multinomial => {
            let mut cdf = Vec::with_capacity(weights.len());
            let mut cum = 0.0;
            for &w in weights {
                cum += w;
                cdf.push(cum);
            }
            for _ in 0..n {
                let u = rng.random::<f64>() * cum;
                let i = cdf.partition_point(|&c| c <= u).min(last);
                out.push(i);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{self, Purpose};

    fn counts(idx: &[usize], m: usize) -> Vec<usize> {
        let mut c = vec![0; m];
        for &i in idx {
            c[i] += 1;
        }
        c
    }

    #[test]
    fn uniform_systematic_hits_each_index_once() {
        let w = vec![0.01; 100];
        let mut rng = rng::stream(0, Purpose::Resample, 0, 0);
        let idx = resample(&w, 100, ResamplingScheme::Systematic, &mut rng).unwrap();
        assert!(counts(&idx, 100).iter().all(|&c| c == 1));
    }

    #[test]
    fn point_mass() {
        let mut w = vec![0.0; 10];
        w[7] = 1.0;
        let mut rng = rng::stream(0, Purpose::Resample, 0, 0);
        for scheme in [ResamplingScheme::Systematic, ResamplingScheme::Multinomial] {
            let idx = resample(&w, 50, scheme, &mut rng).unwrap();
            assert!(idx.iter().all(|&i| i == 7));
        }
    }

    #[test]
    fn multinomial_frequencies() {
        let w = [0.5, 0.3, 0.2];
        let n = 100_000;
        let mut rng = rng::stream(3, Purpose::Resample, 0, 0);
        let idx = resample(&w, n, ResamplingScheme::Multinomial, &mut rng).unwrap();
        for (c, p) in counts(&idx, 3).iter().zip(w) {
            let freq = *c as f64 / n as f64;
            assert!((freq - p).abs() < 4.0 * (p * (1.0 - p) / n as f64).sqrt());
        }
    }

    #[test]
    fn rejects_bad_weights() {
        let mut rng = rng::stream(0, Purpose::Resample, 0, 0);
        let sys = ResamplingScheme::Systematic;
        assert!(resample(&[0.0, 0.0], 2, sys, &mut rng).is_err());
        assert!(resample(&[f64::NAN, 1.0], 2, sys, &mut rng).is_err());
        assert!(resample(&[0.5, 0.6], 2, sys, &mut rng).is_err());
        assert!(normalize_log_weights(&[f64::NEG_INFINITY; 3]).is_err());
        assert!(normalize_log_weights(&[0.0, f64::NAN]).is_err());
    }

    #[test]
    fn log_normalisation() {
        let (w, lm) = normalize_log_weights(&[-1000.0, -1000.0 + 2f64.ln()]).unwrap();
        assert!((w[0] - 1.0 / 3.0).abs() < 1e-12 && (w[1] - 2.0 / 3.0).abs() < 1e-12);
        assert!((lm - (-1000.0 + 1.5f64.ln())).abs() < 1e-12);
        assert_eq!(effective_sample_size(&[0.25; 4]), 4.0);
    }

    proptest::proptest! {
        #[test]
        fn systematic_counts_are_floor_or_ceil(
            raw in proptest::collection::vec(0.0f64..1.0, 1..40),
            n in 1usize..300,
            seed in 0u64..1000,
        ) {
            let total: f64 = raw.iter().sum();
            proptest::prop_assume!(total > 1e-6);
            let w: Vec<f64> = raw.iter().map(|r| r / total).collect();
            let mut rng = rng::stream(seed, Purpose::Resample, 0, 0);
            let idx = resample(&w, n, ResamplingScheme::Systematic, &mut rng).unwrap();
            proptest::prop_assert_eq!(idx.len(), n);
            for (c, wi) in counts(&idx, w.len()).iter().zip(&w) {
                let expected = n as f64 * wi;
                proptest::prop_assert!(
                    (*c as f64) >= expected.floor() - 1e-9 && (*c as f64) <= expected.ceil() + 1e-9,
                    "count {} for expected {}", c, expected
                );
            }
        }
    }
}
