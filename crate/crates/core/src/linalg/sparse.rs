//! Block compressed-sparse-row matrix with dense `m x m` blocks.

use rayon::prelude::*;

#[derive(Clone, Debug)]
pub struct BlockCsr {
    /// Number of block rows (and columns).
    pub n: usize,
    /// Block size.
    pub m: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl BlockCsr {
    /// Zero matrix with the given block sparsity; `adjacency[r]` lists the
    /// block columns of row `r` (any order, duplicates allowed).
    pub fn from_pattern(m: usize, adjacency: &[Vec<usize>]) -> Self {
        let n = adjacency.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        row_ptr.push(0);
        for row in adjacency {
            let mut r = row.clone();
            r.sort_unstable();
            r.dedup();
            cols.extend(r);
            row_ptr.push(cols.len());
        }
        let vals = vec![0.0; cols.len() * m * m];
        Self {
            n,
            m,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn identity(n: usize, m: usize) -> Self {
        let adj: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        let mut a = Self::from_pattern(m, &adj);
        for i in 0..n {
            let b = a.block_mut(i);
            for k in 0..m {
                b[k * m + k] = 1.0;
            }
        }
        a
    }

    pub fn dim(&self) -> usize {
        self.n * self.m
    }

    pub fn nnz_blocks(&self) -> usize {
        self.cols.len()
    }

    pub fn block_index(&self, r: usize, c: usize) -> Option<usize> {
        let s = &self.cols[self.row_ptr[r]..self.row_ptr[r + 1]];
        s.binary_search(&c).ok().map(|k| self.row_ptr[r] + k)
    }

    pub fn block(&self, k: usize) -> &[f64] {
        let mm = self.m * self.m;
        &self.vals[k * mm..(k + 1) * mm]
    }

    pub fn block_mut(&mut self, k: usize) -> &mut [f64] {
        let mm = self.m * self.m;
        &mut self.vals[k * mm..(k + 1) * mm]
    }

    pub fn zero(&mut self) {
        self.vals.iter_mut().for_each(|v| *v = 0.0);
    }

    /// `y = A x`
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let m = self.m;
        let mm = m * m;
        y.par_chunks_mut(m).enumerate().for_each(|(r, yr)| {
            yr.iter_mut().for_each(|v| *v = 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.cols[k];
                let b = &self.vals[k * mm..(k + 1) * mm];
                let xc = &x[c * m..(c + 1) * m];
                for i in 0..m {
                    let mut s = 0.0;
                    for j in 0..m {
                        s += b[i * m + j] * xc[j];
                    }
                    yr[i] += s;
                }
            }
        });
    }

    /// Scalar entry `(i, j)` of the expanded matrix.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let m = self.m;
        match self.block_index(i / m, j / m) {
            Some(k) => self.block(k)[(i % m) * m + j % m],
            None => 0.0,
        }
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let d = self.dim();
        let m = self.m;
        let mut out = nalgebra::DMatrix::zeros(d, d);
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.cols[k];
                let b = self.block(k);
                for i in 0..m {
                    for j in 0..m {
                        out[(r * m + i, c * m + j)] = b[i * m + j];
                    }
                }
            }
        }
        out
    }
}
