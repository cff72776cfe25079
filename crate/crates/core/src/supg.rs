//! SUPG stabilization: hatted matrices, the stabilization matrix `tau`, and
//! the block metric of flat space-time prisms.

use crate::ad::Scalar;
use crate::error::{Error, Result};
use crate::geometry::{MetricTensor, MAX_DIM};
use crate::linalg::small::SMat;
use crate::linalg::sqrtm;
use crate::physics::{SystemMatrices, MAX_SD};
use nalgebra::DMatrix;

#[derive(Clone, Copy, Debug)]
pub struct HattedMatrices<T> {
    pub nsd: usize,
    pub a_hat: [SMat<T>; MAX_SD],
    pub k_hat: [[SMat<T>; MAX_SD]; MAX_SD],
    pub viscous: bool,
}

impl<T: Scalar> HattedMatrices<T> {
    /// `A_hat_t`, always the identity.
    pub fn a_hat_t(&self) -> SMat<T> {
        SMat::identity(self.nsd + 2)
    }
}

pub fn hatted_matrices<T: Scalar>(sm: &SystemMatrices<T>) -> Result<HattedMatrices<T>> {
    let a0inv = sm.a0.inverse()?;
    let nsd = sm.nsd;
    let zero = SMat::zeros(nsd + 2);
    let mut a_hat = [zero; MAX_SD];
    let mut k_hat = [[zero; MAX_SD]; MAX_SD];
    let viscous = sm.viscous();
    for i in 0..nsd {
        a_hat[i] = sm.a_advnp[i].add(&sm.a_p[i]).add(&sm.a_sp[i]).mul(&a0inv);
        if viscous {
            for j in 0..nsd {
                k_hat[i][j] = sm.k[i][j].mul(&a0inv);
            }
        }
    }
    Ok(HattedMatrices {
        nsd,
        a_hat,
        k_hat,
        viscous,
    })
}

pub fn c_inv(nsd: usize) -> f64 {
    let n = nsd as f64;
    (n + 1.0).powi(2) * (n + 2.0)
}

/// Argument of the inverse square root,
/// `G_mp A_m A_p + C_inv^2 G_ij G_kl K_ik K_lj`.
///
/// `g` is the space-time metric with time as the last index; in steady mode
/// the time row and column are ignored.
pub fn tau_argument<T: Scalar>(
    hm: &HattedMatrices<T>,
    g: &[[f64; MAX_DIM]; MAX_DIM],
    cinv: f64,
    transient: bool,
) -> SMat<T> {
    let nsd = hm.nsd;
    let m = nsd + 2;
    let nm = if transient { nsd + 1 } else { nsd };
    let ident = SMat::<T>::identity(m);
    let a = |k: usize| if k == nsd { &ident } else { &hm.a_hat[k] };
    let mut b = SMat::<T>::zeros(m);
    for mi in 0..nm {
        let mut comb = SMat::<T>::zeros(m);
        for p in 0..nm {
            if g[mi][p] != 0.0 {
                comb.add_scaled_f64(a(p), g[mi][p]);
            }
        }
        let prod = if mi == nsd { comb } else { a(mi).mul(&comb) };
        b = b.add(&prod);
    }
    if hm.viscous {
        let c2 = cinv * cinv;
        for i in 0..nsd {
            for k in 0..nsd {
                let mut comb = SMat::<T>::zeros(m);
                for l in 0..nsd {
                    for j in 0..nsd {
                        let c = g[i][j] * g[k][l];
                        if c != 0.0 {
                            comb.add_scaled_f64(&hm.k_hat[l][j], c);
                        }
                    }
                }
                let prod = hm.k_hat[i][k].mul(&comb);
                b.add_scaled_f64(&prod, c2);
            }
        }
    }
    b
}

pub fn tau_element<T: Scalar>(
    hm: &HattedMatrices<T>,
    g: &[[f64; MAX_DIM]; MAX_DIM],
    cinv: f64,
    transient: bool,
) -> Result<SMat<T>> {
    sqrtm::inv_sqrt(&tau_argument(hm, g, cinv, transient))
}

/// Space-time metric of a flat prism: spatial block plus `4/dt^2`.
pub fn fst_metric(spatial: &MetricTensor, dt: f64) -> Result<MetricTensor> {
    if !(dt > 0.0) {
        return Err(Error::NonPositiveTimeStep { t_lo: 0.0, t_hi: dt });
    }
    let n = spatial.g.nrows();
    let mut g = DMatrix::zeros(n + 1, n + 1);
    let mut g_inv = DMatrix::zeros(n + 1, n + 1);
    g.view_mut((0, 0), (n, n)).copy_from(&spatial.g);
    g_inv.view_mut((0, 0), (n, n)).copy_from(&spatial.g_inv);
    g[(n, n)] = 4.0 / (dt * dt);
    g_inv[(n, n)] = dt * dt / 4.0;
    Ok(MetricTensor { g, g_inv })
}

pub fn metric_array(g: &DMatrix<f64>) -> [[f64; MAX_DIM]; MAX_DIM] {
    let mut out = [[0.0; MAX_DIM]; MAX_DIM];
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            out[i][j] = g[(i, j)];
        }
    }
    out
}
