//! Stack-allocated dense matrices of runtime size up to [`MAX_M`].
//!
//! The system matrices are `(n_sd + 2) x (n_sd + 2)`, at most 5x5. Keeping
//! them on the stack and generic over [`Scalar`] lets the same code run on
//! `f64` and on dual numbers.

use crate::ad::Scalar;
use crate::error::{Error, Result};
use std::ops::{Index, IndexMut};

pub const MAX_M: usize = 5;

pub type SVec<T> = [T; MAX_M];

#[derive(Clone, Copy, Debug)]
pub struct SMat<T> {
    pub n: usize,
    pub a: [[T; MAX_M]; MAX_M],
}

impl<T: Scalar> SMat<T> {
    pub fn zeros(n: usize) -> Self {
        debug_assert!(n <= MAX_M);
        Self {
            n,
            a: [[T::zero(); MAX_M]; MAX_M],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.a[i][i] = T::one();
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.a[i][j] = f(i, j);
            }
        }
        m
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.a[i][k];
                for j in 0..n {
                    out.a[i][j] += aik * rhs.a[k][j];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &SVec<T>) -> SVec<T> {
        let mut out = [T::zero(); MAX_M];
        for i in 0..self.n {
            let mut s = T::zero();
            for j in 0..self.n {
                s += self.a[i][j] * v[j];
            }
            out[i] = s;
        }
        out
    }

    pub fn add_scaled(&mut self, rhs: &Self, s: T) {
        for i in 0..self.n {
            for j in 0..self.n {
                self.a[i][j] += rhs.a[i][j] * s;
            }
        }
    }

    pub fn add_scaled_f64(&mut self, rhs: &Self, s: f64) {
        for i in 0..self.n {
            for j in 0..self.n {
                self.a[i][j] += rhs.a[i][j] * s;
            }
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = *self;
        for i in 0..self.n {
            for j in 0..self.n {
                out.a[i][j] += rhs.a[i][j];
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.a[j][i])
    }

    pub fn re(&self) -> SMat<f64> {
        let mut m = SMat::<f64>::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m.a[i][j] = self.a[i][j].re();
            }
        }
        m
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting on the real part.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.n;
        let mut a = *self;
        let mut inv = Self::identity(n);
        let scale = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| self.a[i][j].re().abs())
            .fold(0.0_f64, f64::max);
        if scale == 0.0 {
            return Err(Error::SingularA0);
        }
        for col in 0..n {
            let mut piv = col;
            for r in col + 1..n {
                if a.a[r][col].re().abs() > a.a[piv][col].re().abs() {
                    piv = r;
                }
            }
            if a.a[piv][col].re().abs() <= 1e-300_f64.max(scale * 1e-15) {
                return Err(Error::SingularA0);
            }
            a.a.swap(col, piv);
            inv.a.swap(col, piv);
            let d = a.a[col][col];
            for j in 0..n {
                a.a[col][j] = a.a[col][j] / d;
                inv.a[col][j] = inv.a[col][j] / d;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a.a[r][col];
                for j in 0..n {
                    let t = a.a[col][j];
                    a.a[r][j] -= f * t;
                    let t = inv.a[col][j];
                    inv.a[r][j] -= f * t;
                }
            }
        }
        Ok(inv)
    }
}

impl SMat<f64> {
    pub fn frobenius(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                s += self.a[i][j] * self.a[i][j];
            }
        }
        s.sqrt()
    }

    pub fn to_dmatrix(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.n, self.n, |i, j| self.a[i][j])
    }

    pub fn from_dmatrix(m: &nalgebra::DMatrix<f64>) -> Self {
        assert!(m.is_square() && m.nrows() <= MAX_M);
        Self::from_fn(m.nrows(), |i, j| m[(i, j)])
    }
}

impl<T> Index<(usize, usize)> for SMat<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.a[i][j]
    }
}

impl<T> IndexMut<(usize, usize)> for SMat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.a[i][j]
    }
}
