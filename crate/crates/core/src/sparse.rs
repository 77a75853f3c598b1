use alloc::vec;
use alloc::vec::Vec;

use crate::C64;

/// Real matrix in compressed-row form. Exact zeros are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseMatrix {
    pub(crate) fn from_fn(dim: usize, mut entry: impl FnMut(usize, usize) -> f64) -> Self {
        let mut row_start = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_start.push(0);
        for i in 0..dim {
            for j in 0..dim {
                let v = entry(i, j);
                if v != 0.0 {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_start.push(cols.len());
        }
        Self {
            dim,
            row_start,
            cols,
            vals,
        }
    }

    pub(crate) fn square(&self) -> Self {
        let mut acc = vec![0.0; self.dim];
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(self.dim);
        for i in 0..self.dim {
            acc.iter_mut().for_each(|a| *a = 0.0);
            for (k, wik) in self.row(i) {
                for (j, wkj) in self.row(k) {
                    acc[j] += wik * wkj;
                }
            }
            rows.push(acc.clone());
        }
        Self::from_fn(self.dim, |i, j| rows[i][j])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_start[i]..self.row_start[i + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let span = self.row_start[i]..self.row_start[i + 1];
        match self.cols[span.clone()].binary_search(&j) {
            Ok(p) => self.vals[span.start + p],
            Err(_) => 0.0,
        }
    }

    /// `out[i] += scale · Σ_j A_ij x_j`
    pub(crate) fn mul_add(&self, scale: f64, x: &[C64], out: &mut [C64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let mut s = C64::new(0.0, 0.0);
            for (j, a) in self.row(i) {
                s += x[j] * a;
            }
            *o += s * scale;
        }
    }
}
