//! Fixed-capacity symmetric matrices in packed lower-triangular storage.
//!
//! The regression dimension never exceeds `MAX_ORDER + 2`, so everything lives
//! on the stack and particles stay `Copy`.

use crate::error::{Result, SvError};
use crate::hermite::MAX_ORDER;

pub const MAX_DIM: usize = MAX_ORDER + 2;
pub const PACKED_LEN: usize = MAX_DIM * (MAX_DIM + 1) / 2;

pub type Vector = [f64; MAX_DIM];

#[inline(always)]
pub const fn idx(i: usize, j: usize) -> usize {
    // caller guarantees i >= j
    i * (i + 1) / 2 + j
}

/// Symmetric `dim x dim` matrix, lower triangle packed row by row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: [f64; PACKED_LEN],
}

impl SymMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim <= MAX_DIM, "dimension {dim} exceeds {MAX_DIM}");
        SymMatrix { dim, data: [0.0; PACKED_LEN] }
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, d) in diag.iter().enumerate() {
            m.data[idx(i, i)] = *d;
        }
        m
    }

    /// From a dense row-major square matrix; fails if it is not symmetric.
    pub fn from_dense(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        if dim > MAX_DIM {
            return Err(SvError::InvalidPrior(format!("dimension {dim} exceeds {MAX_DIM}")));
        }
        let mut m = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(SvError::InvalidPrior("matrix is not square".into()));
            }
            for j in 0..=i {
                let (a, b) = (rows[i][j], rows[j][i]);
                if !a.is_finite() || (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(SvError::InvalidPrior("matrix is not symmetric and finite".into()));
                }
                m.data[idx(i, j)] = a;
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i >= j {
            self.data[idx(i, j)]
        } else {
            self.data[idx(j, i)]
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.dim).map(|i| (0..self.dim).map(|j| self.get(i, j)).collect()).collect()
    }

    /// `self += scale * w w^T`.
    #[inline]
    pub fn rank_one_update(&mut self, w: &[f64], scale: f64) {
        debug_assert_eq!(w.len(), self.dim);
        for i in 0..self.dim {
            let wi = scale * w[i];
            let row = idx(i, 0);
            for j in 0..=i {
                self.data[row + j] += wi * w[j];
            }
        }
    }

    /// `x^T A x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.dim {
            let row = idx(i, 0);
            let mut s = 0.0;
            for j in 0..i {
                s += self.data[row + j] * x[j];
            }
            acc += x[i] * (2.0 * s + self.data[row + i] * x[i]);
        }
        acc
    }

    /// `A x` into `out[..dim]`.
    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..self.dim {
            out[i] = (0..self.dim).map(|j| self.get(i, j) * x[j]).sum();
        }
    }

    /// Principal submatrix on the given indices.
    pub fn select(&self, keep: &[usize]) -> SymMatrix {
        let mut m = SymMatrix::zeros(keep.len());
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate().take(a + 1) {
                m.data[idx(a, b)] = self.get(i, j);
            }
        }
        m
    }

    pub fn cholesky(&self) -> Result<Cholesky> {
        let n = self.dim;
        let mut l = [0.0; PACKED_LEN];
        let mut inv_diag = [0.0; MAX_DIM];
        for i in 0..n {
            let ri = idx(i, 0);
            for j in 0..=i {
                let rj = idx(j, 0);
                let mut s = self.data[ri + j];
                for p in 0..j {
                    s -= l[ri + p] * l[rj + p];
                }
                if i == j {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(SvError::NotPositiveDefinite);
                    }
                    l[ri + i] = s.sqrt();
                    inv_diag[i] = 1.0 / l[ri + i];
                } else {
                    l[ri + j] = s * inv_diag[j];
                }
            }
        }
        Ok(Cholesky { dim: n, l, inv_diag })
    }

    /// Inverse of a positive definite matrix.
    pub fn inverse(&self) -> Result<SymMatrix> {
        let chol = self.cholesky()?;
        let mut inv = SymMatrix::zeros(self.dim);
        let mut col = [0.0; MAX_DIM];
        for j in 0..self.dim {
            col[..self.dim].fill(0.0);
            col[j] = 1.0;
            chol.solve_in_place(&mut col[..self.dim]);
            for i in j..self.dim {
                inv.data[idx(i, j)] = col[i];
            }
        }
        Ok(inv)
    }
}

/// `A = L L^T` with `L` lower triangular.
#[derive(Debug, Clone, Copy)]
pub struct Cholesky {
    dim: usize,
    l: [f64; PACKED_LEN],
    inv_diag: Vector,
}

impl Cholesky {
    /// `L z = b` in place.
    #[inline]
    pub fn forward_in_place(&self, b: &mut [f64]) {
        for i in 0..self.dim {
            let ri = idx(i, 0);
            let mut s = b[i];
            for j in 0..i {
                s -= self.l[ri + j] * b[j];
            }
            b[i] = s * self.inv_diag[i];
        }
    }

    /// `L^T x = z` in place.
    #[inline]
    pub fn backward_in_place(&self, z: &mut [f64]) {
        for i in (0..self.dim).rev() {
            let mut s = z[i];
            for j in i + 1..self.dim {
                s -= self.l[idx(j, i)] * z[j];
            }
            z[i] = s * self.inv_diag[i];
        }
    }

    /// `A x = b` in place.
    #[inline]
    pub fn solve_in_place(&self, b: &mut [f64]) {
        self.forward_in_place(b);
        self.backward_in_place(b);
    }
}
