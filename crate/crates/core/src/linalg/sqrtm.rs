//! Principal matrix square root of small dense matrices.
//!
//! General matrices go through a complex Schur form `A = V T V^{-1}`
//! (balancing, Householder Hessenberg reduction, shifted QR) followed by the
//! column recurrence for the square root of an upper-triangular matrix.
//! Symmetric matrices take a Jacobi eigendecomposition instead.
//!
//! The same factorization also gives the Fréchet derivative of the square
//! root: `S dS + dS S = dA` is a Sylvester equation that becomes triangular
//! in the Schur basis.

use crate::ad::Scalar;
use crate::error::{Error, Result};
use crate::linalg::small::{SMat, MAX_M};
use nalgebra::DMatrix;
use num_complex::Complex64 as C;

type CMat = [[C; MAX_M]; MAX_M];

const ZERO: C = C { re: 0.0, im: 0.0 };
const ONE: C = C { re: 1.0, im: 0.0 };
const MAX_QR_SWEEPS: usize = 60;
/// Largest number of dual directions handled by [`inv_sqrt`].
pub const MAX_NDIR: usize = 32;

fn failure(reason: impl Into<String>) -> Error {
    Error::SquareRootFailure {
        element: None,
        reason: reason.into(),
    }
}

fn cmat_identity(n: usize) -> CMat {
    let mut m = [[ZERO; MAX_M]; MAX_M];
    for (i, row) in m.iter_mut().enumerate().take(n) {
        row[i] = ONE;
    }
    m
}

fn cmat_mul(n: usize, a: &CMat, b: &CMat) -> CMat {
    let mut out = [[ZERO; MAX_M]; MAX_M];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik == ZERO {
                continue;
            }
            for j in 0..n {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

/// `A = V R^2 V^{-1}` with `R` upper triangular and its diagonal in the open
/// right half-plane, so that `V R V^{-1}` is the principal square root.
#[derive(Clone, Debug)]
pub struct SqrtFactors {
    n: usize,
    v: CMat,
    vinv: CMat,
    r: CMat,
}

impl SqrtFactors {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn sqrt(&self) -> SMat<f64> {
        let s = cmat_mul(self.n, &cmat_mul(self.n, &self.v, &self.r), &self.vinv);
        SMat::from_fn(self.n, |i, j| s[i][j].re)
    }

    /// Directional derivative of the square root along `da`.
    pub fn sqrt_derivative(&self, da: &SMat<f64>) -> SMat<f64> {
        let n = self.n;
        let mut dc = [[ZERO; MAX_M]; MAX_M];
        for i in 0..n {
            for j in 0..n {
                dc[i][j] = C::new(da[(i, j)], 0.0);
            }
        }
        let c = cmat_mul(n, &cmat_mul(n, &self.vinv, &dc), &self.v);
        let x = triangular_sylvester(n, &self.r, &c);
        let ds = cmat_mul(n, &cmat_mul(n, &self.v, &x), &self.vinv);
        SMat::from_fn(n, |i, j| ds[i][j].re)
    }
}

/// Solves `R X + X R = C` for upper-triangular `R`.
fn triangular_sylvester(n: usize, r: &CMat, c: &CMat) -> CMat {
    let mut x = [[ZERO; MAX_M]; MAX_M];
    for j in 0..n {
        for i in (0..n).rev() {
            let mut s = c[i][j];
            for k in i + 1..n {
                s -= r[i][k] * x[k][j];
            }
            for k in 0..j {
                s -= x[i][k] * r[k][j];
            }
            x[i][j] = s / (r[i][i] + r[j][j]);
        }
    }
    x
}

fn is_symmetric(a: &SMat<f64>) -> bool {
    let scale = a.frobenius();
    for i in 0..a.n {
        for j in i + 1..a.n {
            if (a[(i, j)] - a[(j, i)]).abs() > 1e-14 * scale {
                return false;
            }
        }
    }
    true
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
/// Returns eigenvalues and the orthogonal matrix of eigenvectors (columns).
pub fn symmetric_eigen(a: &SMat<f64>) -> (Vec<f64>, SMat<f64>) {
    let n = a.n;
    let mut m = *a;
    let mut v = SMat::<f64>::identity(n);
    let scale = a.frobenius().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += m[(i, j)] * m[(i, j)];
            }
        }
        if off.sqrt() <= 1e-17 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| m[(i, i)]).collect(), v)
}

/// Diagonal similarity scaling by powers of two; returns `(D^{-1} A D, d)`.
fn balance(a: &SMat<f64>) -> (SMat<f64>, [f64; MAX_M]) {
    const RADIX: f64 = 2.0;
    let n = a.n;
    let mut m = *a;
    let mut d = [1.0; MAX_M];
    let mut done = false;
    let mut sweeps = 0;
    while !done && sweeps < 100 {
        done = true;
        sweeps += 1;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                d[i] *= f;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
    }
    (m, d)
}

/// Householder reduction to upper Hessenberg form: `A = Q H Q^H`.
fn hessenberg(n: usize, mut h: CMat) -> (CMat, CMat) {
    let mut q = cmat_identity(n);
    for k in 0..n.saturating_sub(2) {
        let norm: f64 = (k + 1..n).map(|i| h[i][k].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = h[k + 1][k];
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { ONE };
        let alpha = -phase * norm;
        let mut v = [ZERO; MAX_M];
        for i in k + 1..n {
            v[i] = h[i][k];
        }
        v[k + 1] -= alpha;
        let vnorm: f64 = (k + 1..n).map(|i| v[i].norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for vi in v.iter_mut().take(n).skip(k + 1) {
            *vi /= vnorm;
        }
        // H <- (I - 2 v v^H) H
        for j in 0..n {
            let mut s = ZERO;
            for i in k + 1..n {
                s += v[i].conj() * h[i][j];
            }
            for i in k + 1..n {
                h[i][j] -= v[i] * s * 2.0;
            }
        }
        // H <- H (I - 2 v v^H), Q <- Q (I - 2 v v^H)
        for row in h.iter_mut().take(n) {
            let mut s = ZERO;
            for i in k + 1..n {
                s += row[i] * v[i];
            }
            for i in k + 1..n {
                row[i] -= s * v[i].conj() * 2.0;
            }
        }
        for row in q.iter_mut().take(n) {
            let mut s = ZERO;
            for i in k + 1..n {
                s += row[i] * v[i];
            }
            for i in k + 1..n {
                row[i] -= s * v[i].conj() * 2.0;
            }
        }
        for hi in h.iter_mut().take(n).skip(k + 2) {
            hi[k] = ZERO;
        }
    }
    (h, q)
}

/// Complex Givens rotation `G = [[c, s], [-conj(s), c]]` with `G [a; b] = [r; 0]`.
fn givens(a: C, b: C) -> (f64, C) {
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return (1.0, ZERO);
    }
    if na == 0.0 {
        return (0.0, ONE);
    }
    let r = na.hypot(nb);
    (na / r, (a / na) * b.conj() / r)
}

/// Shifted QR iteration on a Hessenberg matrix, reducing it to upper
/// triangular (complex Schur) form while accumulating the unitary factor.
fn schur_from_hessenberg(n: usize, mut h: CMat, mut q: CMat) -> Result<(CMat, CMat)> {
    let eps = f64::EPSILON;
    let hnorm: f64 = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| h[i][j].norm_sqr())
        .sum::<f64>()
        .sqrt();
    if n <= 1 || hnorm == 0.0 {
        return Ok((h, q));
    }
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    while hi > 0 {
        let mut lo = hi;
        while lo > 0 {
            let s = h[lo][lo].norm() + h[lo - 1][lo - 1].norm();
            let s = if s == 0.0 { hnorm } else { s };
            if h[lo][lo - 1].norm() <= eps * s {
                h[lo][lo - 1] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > MAX_QR_SWEEPS * n {
            return Err(failure("Schur QR iteration did not converge"));
        }
        let shift = if iter % 11 == 10 {
            // exceptional shift
            h[hi][hi] + C::new(h[hi][hi - 1].norm(), 0.0) * 0.75
        } else {
            let a = h[hi - 1][hi - 1];
            let b = h[hi - 1][hi];
            let c = h[hi][hi - 1];
            let d = h[hi][hi];
            let half = (a - d) * 0.5;
            let disc = (half * half + b * c).sqrt();
            let mu1 = (a + d) * 0.5 + disc;
            let mu2 = (a + d) * 0.5 - disc;
            if (mu1 - d).norm() <= (mu2 - d).norm() {
                mu1
            } else {
                mu2
            }
        };
        for k in lo..=hi {
            h[k][k] -= shift;
        }
        let mut rots = [(0.0, ZERO); MAX_M];
        for k in lo..hi {
            let (c, s) = givens(h[k][k], h[k + 1][k]);
            rots[k] = (c, s);
            for j in k..n {
                let x = h[k][j];
                let y = h[k + 1][j];
                h[k][j] = x * c + s * y;
                h[k + 1][j] = -s.conj() * x + y * c;
            }
        }
        for k in lo..hi {
            let (c, s) = rots[k];
            let top = (k + 2).min(hi + 1);
            for row in h.iter_mut().take(top) {
                let x = row[k];
                let y = row[k + 1];
                row[k] = x * c + y * s.conj();
                row[k + 1] = -x * s + y * c;
            }
            for row in q.iter_mut().take(n) {
                let x = row[k];
                let y = row[k + 1];
                row[k] = x * c + y * s.conj();
                row[k + 1] = -x * s + y * c;
            }
        }
        for k in lo..=hi {
            h[k][k] += shift;
        }
    }
    for i in 0..n {
        for j in 0..i {
            h[i][j] = ZERO;
        }
    }
    Ok((h, q))
}

/// Square root of an upper-triangular matrix by the column recurrence.
fn triangular_sqrt(n: usize, t: &CMat) -> Result<CMat> {
    let scale = (0..n).map(|i| t[i][i].norm()).fold(0.0, f64::max);
    let mut r = [[ZERO; MAX_M]; MAX_M];
    for i in 0..n {
        let d = t[i][i];
        if d.norm() <= 1e-300 || (d.re <= 0.0 && d.im.abs() <= 1e-13 * scale.max(d.norm())) {
            return Err(failure(format!(
                "eigenvalue {d} lies on the closed negative real axis"
            )));
        }
        r[i][i] = d.sqrt();
    }
    for j in 0..n {
        for i in (0..j).rev() {
            let mut s = t[i][j];
            for k in i + 1..j {
                s -= r[i][k] * r[k][j];
            }
            r[i][j] = s / (r[i][i] + r[j][j]);
        }
    }
    Ok(r)
}

/// Factorizes `a` for square-root evaluation.
pub fn sqrt_factors(a: &SMat<f64>) -> Result<SqrtFactors> {
    let n = a.n;
    for i in 0..n {
        for j in 0..n {
            if !a[(i, j)].is_finite() {
                return Err(failure("non-finite matrix entry"));
            }
        }
    }
    if is_symmetric(a) {
        let (vals, vecs) = symmetric_eigen(a);
        let mut v = [[ZERO; MAX_M]; MAX_M];
        let mut vinv = [[ZERO; MAX_M]; MAX_M];
        let mut r = [[ZERO; MAX_M]; MAX_M];
        for i in 0..n {
            for j in 0..n {
                v[i][j] = C::new(vecs[(i, j)], 0.0);
                vinv[j][i] = C::new(vecs[(i, j)], 0.0);
            }
            if vals[i] <= 0.0 {
                return Err(failure(format!(
                    "symmetric matrix has non-positive eigenvalue {}",
                    vals[i]
                )));
            }
            r[i][i] = C::new(vals[i].sqrt(), 0.0);
        }
        return Ok(SqrtFactors { n, v, vinv, r });
    }
    let (bal, d) = balance(a);
    let mut h = [[ZERO; MAX_M]; MAX_M];
    for i in 0..n {
        for j in 0..n {
            h[i][j] = C::new(bal[(i, j)], 0.0);
        }
    }
    let (h, q) = hessenberg(n, h);
    let (t, q) = schur_from_hessenberg(n, h, q)?;
    let r = triangular_sqrt(n, &t)?;
    // A = D Q T Q^H D^{-1}
    let mut v = [[ZERO; MAX_M]; MAX_M];
    let mut vinv = [[ZERO; MAX_M]; MAX_M];
    for i in 0..n {
        for j in 0..n {
            v[i][j] = q[i][j] * d[i];
            vinv[i][j] = q[j][i].conj() / d[j];
        }
    }
    Ok(SqrtFactors { n, v, vinv, r })
}

/// Principal square root `S` with `S^2 = A` and spectrum in the open right
/// half-plane.
pub fn matrix_sqrt_principal(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !a.is_square() || a.nrows() == 0 || a.nrows() > MAX_M {
        return Err(failure(format!(
            "expected a square matrix of size 1..={MAX_M}, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(sqrt_factors(&SMat::from_dmatrix(a))?.sqrt().to_dmatrix())
}

/// Inverse principal square root `B^{-1/2}`, differentiated through dual
/// directions when `T` carries them.
pub fn inv_sqrt<T: Scalar>(b: &SMat<T>) -> Result<SMat<T>> {
    let n = b.n;
    let b0 = b.re();
    let f = sqrt_factors(&b0)?;
    let s = f.sqrt();
    let tau0 = s.inverse().map_err(|_| failure("square root is singular"))?;
    if T::NDIR == 0 {
        return Ok(SMat::from_fn(n, |i, j| T::cst(tau0[(i, j)])));
    }
    assert!(T::NDIR <= MAX_NDIR);
    let mut dtau = [[[0.0; MAX_NDIR]; MAX_M]; MAX_M];
    for k in 0..T::NDIR {
        let db = SMat::<f64>::from_fn(n, |i, j| b[(i, j)].eps(k));
        if db.frobenius() == 0.0 {
            continue;
        }
        let ds = f.sqrt_derivative(&db);
        let d = tau0.mul(&ds).mul(&tau0);
        for i in 0..n {
            for j in 0..n {
                dtau[i][j][k] = -d[(i, j)];
            }
        }
    }
    Ok(SMat::from_fn(n, |i, j| {
        T::from_parts(tau0[(i, j)], &dtau[i][j][..T::NDIR])
    }))
}
