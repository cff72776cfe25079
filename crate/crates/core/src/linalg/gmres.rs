//! Restarted GMRES with right preconditioning.

use crate::error::{Error, Result};
use crate::linalg::small::SMat;
use crate::linalg::sparse::BlockCsr;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preconditioner {
    BlockJacobi,
    None,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GmresStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

struct Pc {
    m: usize,
    inv: Option<Vec<f64>>,
}

impl Pc {
    fn new(a: &BlockCsr, kind: Preconditioner) -> Self {
        let m = a.m;
        if kind == Preconditioner::None {
            return Self { m, inv: None };
        }
        let mut inv = vec![0.0; a.n * m * m];
        for r in 0..a.n {
            let block = a.block_index(r, r).map(|k| a.block(k));
            let sm = block.map(|b| SMat::<f64>::from_fn(m, |i, j| b[i * m + j]));
            let bi = sm.and_then(|s| s.inverse().ok()).unwrap_or_else(|| SMat::identity(m));
            for i in 0..m {
                for j in 0..m {
                    inv[r * m * m + i * m + j] = bi[(i, j)];
                }
            }
        }
        Self { m, inv: Some(inv) }
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        match &self.inv {
            None => y.copy_from_slice(x),
            Some(inv) => {
                let m = self.m;
                for r in 0..x.len() / m {
                    let b = &inv[r * m * m..(r + 1) * m * m];
                    for i in 0..m {
                        let mut s = 0.0;
                        for j in 0..m {
                            s += b[i * m + j] * x[r * m + j];
                        }
                        y[r * m + i] = s;
                    }
                }
            }
        }
    }
}

/// Solves `A x = b` starting from the given `x`. Converged when
/// `||b - A x|| <= tol ||b||`.
pub fn gmres(
    a: &BlockCsr,
    b: &[f64],
    x: &mut [f64],
    restart: usize,
    max_iter: usize,
    tol: f64,
    pc: Preconditioner,
) -> Result<GmresStats> {
    let n = a.dim();
    let restart = restart.max(1);
    let bnorm = norm(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(GmresStats::default());
    }
    let pc = Pc::new(a, pc);
    let mut r = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut total = 0;
    let residual = |x: &[f64], r: &mut [f64], tmp: &mut [f64]| {
        a.matvec(x, tmp);
        for i in 0..n {
            r[i] = b[i] - tmp[i];
        }
        norm(r)
    };
    let mut rnorm = residual(x, &mut r, &mut w);
    loop {
        if rnorm <= tol * bnorm {
            return Ok(GmresStats {
                iterations: total,
                relative_residual: rnorm / bnorm,
            });
        }
        if total >= max_iter {
            return Err(Error::KrylovStagnation {
                iterations: total,
                relative_residual: rnorm / bnorm,
            });
        }
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|e| e / rnorm).collect()];
        let mut h = vec![vec![0.0; restart]; restart + 1];
        let mut cs = vec![0.0; restart];
        let mut sn = vec![0.0; restart];
        let mut g = vec![0.0; restart + 1];
        g[0] = rnorm;
        let mut k = 0;
        while k < restart && total < max_iter {
            pc.apply(&v[k], &mut z);
            a.matvec(&z, &mut w);
            for (i, vi) in v.iter().enumerate() {
                let hik = dot(&w, vi);
                h[i][k] = hik;
                for (wj, vj) in w.iter_mut().zip(vi) {
                    *wj -= hik * vj;
                }
            }
            let hn = norm(&w);
            h[k + 1][k] = hn;
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let d = h[k][k].hypot(h[k + 1][k]);
            if d == 0.0 {
                break;
            }
            cs[k] = h[k][k] / d;
            sn[k] = h[k + 1][k] / d;
            h[k][k] = d;
            h[k + 1][k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            k += 1;
            total += 1;
            if g[k].abs() <= tol * bnorm || hn <= 1e-14 * d {
                break;
            }
            v.push(w.iter().map(|e| e / hn).collect());
        }
        if k == 0 {
            return Err(Error::KrylovStagnation {
                iterations: total,
                relative_residual: rnorm / bnorm,
            });
        }
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for j in i + 1..k {
                s -= h[i][j] * y[j];
            }
            y[i] = s / h[i][i];
        }
        let mut upd = vec![0.0; n];
        for (j, yj) in y.iter().enumerate() {
            for (u, vj) in upd.iter_mut().zip(&v[j]) {
                *u += yj * vj;
            }
        }
        pc.apply(&upd, &mut z);
        for i in 0..n {
            x[i] += z[i];
        }
        let prev = rnorm;
        rnorm = residual(x, &mut r, &mut w);
        if !(rnorm < prev * (1.0 - 1e-12)) && rnorm > tol * bnorm {
            return Err(Error::KrylovStagnation {
                iterations: total,
                relative_residual: rnorm / bnorm,
            });
        }
    }
}
