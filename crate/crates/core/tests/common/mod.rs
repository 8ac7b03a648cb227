//! Oracles shared by the integration tests and the acceptance run.
#![allow(dead_code)]

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use svnl_core::hermite::{fill_basis, MAX_ORDER};
use svnl_core::rng::{stream, Purpose, StreamRng};

pub fn rng(seed: u64) -> StreamRng {
    stream(seed, Purpose::Simulate, u64::MAX, 0)
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

/// Monte Carlo moments of the Hermite basis under `z ~ N(0, 1)`.
pub struct HermiteMoments {
    pub draws: usize,
    /// `mean[k - 1]` estimates `E[H_k(z)]`.
    pub mean: [f64; MAX_ORDER],
    /// `cross[j - 1][k - 1]` estimates `E[H_j(z) H_k(z)]`.
    pub cross: [[f64; MAX_ORDER]; MAX_ORDER],
    /// Standard error of each `cross` entry.
    pub cross_se: [[f64; MAX_ORDER]; MAX_ORDER],
}

pub fn hermite_moments(draws: usize, seed: u64) -> HermiteMoments {
    let mut r = rng(seed);
    let mut sum = [0.0; MAX_ORDER];
    let mut sum_p = [[0.0; MAX_ORDER]; MAX_ORDER];
    let mut sum_p2 = [[0.0; MAX_ORDER]; MAX_ORDER];
    let mut h = [0.0; MAX_ORDER];
    for _ in 0..draws {
        let z: f64 = StandardNormal.sample(&mut r);
        fill_basis(z, &mut h);
        for j in 0..MAX_ORDER {
            sum[j] += h[j];
            for k in 0..MAX_ORDER {
                let p = h[j] * h[k];
                sum_p[j][k] += p;
                sum_p2[j][k] += p * p;
            }
        }
    }
    let m = draws as f64;
    let mut out = HermiteMoments {
        draws,
        mean: [0.0; MAX_ORDER],
        cross: [[0.0; MAX_ORDER]; MAX_ORDER],
        cross_se: [[0.0; MAX_ORDER]; MAX_ORDER],
    };
    for j in 0..MAX_ORDER {
        out.mean[j] = sum[j] / m;
        for k in 0..MAX_ORDER {
            let mean = sum_p[j][k] / m;
            let var = (sum_p2[j][k] / m - mean * mean) * m / (m - 1.0);
            out.cross[j][k] = mean;
            out.cross_se[j][k] = (var / m).sqrt();
        }
    }
    out
}

/// Closed forms of `H_0..H_6`.
pub fn hermite_closed(k: usize, z: f64) -> f64 {
    let z2 = z * z;
    match k {
        0 => 1.0,
        1 => z,
        2 => z2 - 1.0,
        3 => z * z2 - 3.0 * z,
        4 => z2 * z2 - 6.0 * z2 + 3.0,
        5 => z * z2 * z2 - 10.0 * z * z2 + 15.0 * z,
        6 => z2 * z2 * z2 - 15.0 * z2 * z2 + 45.0 * z2 - 15.0,
        _ => unreachable!(),
    }
}

/// Dense solve of `a x = b` by Gaussian elimination with partial pivoting.
pub fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(row, &bi)| {
        let mut r = row.clone();
        r.push(bi);
        r
    }).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs())).unwrap();
        m.swap(col, piv);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for c in col..=n {
                m[row][c] -= f * m[col][c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[i][j] * x[j]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    x
}

/// Batch Normal / inverse-gamma posterior from the normal equations.
pub struct BatchPosterior {
    pub precision: Vec<Vec<f64>>,
    pub precision_mean: Vec<f64>,
    pub mean: Vec<f64>,
    pub c: f64,
    pub d: f64,
}

/// `Ln = L0 + W'W`, `bn = Ln^{-1}(L0 b0 + W'y)`, `dn = d0 + (y'y + b0'L0 b0 - bn'Ln bn) / 2`.
pub fn batch_posterior(
    prior_precision: &[Vec<f64>],
    b0: &[f64],
    c0: f64,
    d0: f64,
    rows: &[Vec<f64>],
    y: &[f64],
) -> BatchPosterior {
    let n = b0.len();
    let quad = |m: &[Vec<f64>], v: &[f64]| -> f64 {
        (0..n).map(|i| (0..n).map(|j| v[i] * m[i][j] * v[j]).sum::<f64>()).sum()
    };
    let mut precision = prior_precision.to_vec();
    let mut pm: Vec<f64> = (0..n).map(|i| (0..n).map(|j| prior_precision[i][j] * b0[j]).sum()).collect();
    for (w, &yi) in rows.iter().zip(y) {
        for i in 0..n {
            pm[i] += w[i] * yi;
            for j in 0..n {
                precision[i][j] += w[i] * w[j];
            }
        }
    }
    let mean = dense_solve(&precision, &pm);
    let yy: f64 = y.iter().map(|v| v * v).sum();
    let d = d0 + 0.5 * (yy + quad(prior_precision, b0) - quad(&precision, &mean));
    BatchPosterior { precision, precision_mean: pm, mean, c: c0 + 0.5 * y.len() as f64, d }
}

/// Largest absolute difference, relative to the largest magnitude in `want`.
pub fn rel_err(got: &[f64], want: &[f64]) -> f64 {
    let scale = want.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    got.iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

/// 1% critical value of the two-sample KS statistic.
pub fn ks_critical_1pct(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    1.628 * ((n + m) / (n * m)).sqrt()
}

pub fn mean_and_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

pub fn uniform<R: Rng>(r: &mut R, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * r.random::<f64>()
}
