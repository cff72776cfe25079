//! The generalized advective-diffusive system in pressure-primitive
//! variables `Y = (p, u_1..u_n, T)`.
//!
//! Matrices are written generically over [`Scalar`] so that the assembler can
//! evaluate them on dual numbers. [`flux_oracle`] evaluates the flux vectors
//! directly and is used to check the matrices.

use crate::ad::Scalar;
use crate::error::Result;
use crate::gas::{GasProperties, PrimitiveState};
use crate::linalg::small::{SMat, SVec, MAX_M};

pub const MAX_SD: usize = 3;

#[derive(Clone, Copy, Debug)]
pub struct SystemMatrices<T> {
    pub nsd: usize,
    pub a0: SMat<T>,
    pub a_advnp: [SMat<T>; MAX_SD],
    pub a_p: [SMat<T>; MAX_SD],
    pub a_sp: [SMat<T>; MAX_SD],
    pub k: [[SMat<T>; MAX_SD]; MAX_SD],
    pub mu: T,
    pub kappa: T,
}

impl<T: Scalar> SystemMatrices<T> {
    pub fn m(&self) -> usize {
        self.nsd + 2
    }

    pub fn viscous(&self) -> bool {
        self.mu.re() != 0.0 || self.kappa.re() != 0.0
    }
}

/// Spatial gradients `dy[c][i] = dY_c/dx_i` and time derivative of `Y`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateGradient {
    pub dy: Vec<Vec<f64>>,
    pub dydt: Vec<f64>,
}

impl StateGradient {
    pub fn zero(nsd: usize) -> Self {
        Self {
            dy: vec![vec![0.0; nsd]; nsd + 2],
            dydt: vec![0.0; nsd + 2],
        }
    }

    /// Gradient packed by direction: `out[i][c] = dY_c/dx_i`.
    pub fn by_direction(&self) -> [SVec<f64>; MAX_SD] {
        let mut out = [[0.0; MAX_M]; MAX_SD];
        for (c, row) in self.dy.iter().enumerate() {
            for (i, v) in row.iter().enumerate() {
                out[i][c] = *v;
            }
        }
        out
    }
}

pub fn pack_state(y: &PrimitiveState) -> SVec<f64> {
    let mut v = [0.0; MAX_M];
    for (k, x) in y.to_vec().into_iter().enumerate() {
        v[k] = x;
    }
    v
}

/// Viscous stress `tau_ij` from the gradient packed by direction.
pub fn viscous_stress<T: Scalar>(nsd: usize, mu: T, dy: &[SVec<T>; MAX_SD]) -> [[T; MAX_SD]; MAX_SD] {
    let lambda = mu * (-2.0 / 3.0);
    let mut div = T::zero();
    for i in 0..nsd {
        div += dy[i][1 + i];
    }
    let mut tau = [[T::zero(); MAX_SD]; MAX_SD];
    for i in 0..nsd {
        for j in 0..nsd {
            // u_i,j = dy[j][1+i]
            let mut v = mu * (dy[j][1 + i] + dy[i][1 + j]);
            if i == j {
                v += lambda * div;
            }
            tau[i][j] = v;
        }
    }
    tau
}

pub fn system_matrices_s<T: Scalar>(
    nsd: usize,
    y: &SVec<T>,
    dy: &[SVec<T>; MAX_SD],
    g: &GasProperties,
) -> SystemMatrices<T> {
    let m = nsd + 2;
    let last = m - 1;
    let p = y[0];
    let t = y[last];
    let rho = p / (t * g.r);
    let rho_p = rho / p;
    let rho_t = -(rho / t);
    let rho_e = p / (g.gamma - 1.0);

    let mut a0 = SMat::zeros(m);
    a0[(0, 0)] = rho_p;
    a0[(0, last)] = rho_t;
    for j in 0..nsd {
        let u = y[1 + j];
        a0[(1 + j, 0)] = u * rho_p;
        a0[(1 + j, 1 + j)] = rho;
        a0[(1 + j, last)] = u * rho_t;
    }
    a0[(last, 0)] = T::cst(1.0 / (g.gamma - 1.0));

    let mut u_cons = [T::zero(); MAX_M];
    u_cons[0] = rho;
    for j in 0..nsd {
        u_cons[1 + j] = rho * y[1 + j];
    }
    u_cons[last] = rho_e;

    let mu = g.mu(t);
    let kappa = g.kappa(mu);
    let lambda = mu * (-2.0 / 3.0);
    let tau = viscous_stress(nsd, mu, dy);

    let zero = SMat::zeros(m);
    let mut a_advnp = [zero; MAX_SD];
    let mut a_p = [zero; MAX_SD];
    let mut a_sp = [zero; MAX_SD];
    let mut k = [[zero; MAX_SD]; MAX_SD];
    for i in 0..nsd {
        let ui = y[1 + i];
        let mut a = zero;
        for r in 0..m {
            for c in 0..m {
                a[(r, c)] = ui * a0[(r, c)];
            }
            a[(r, 1 + i)] += u_cons[r];
        }
        a_advnp[i] = a;
        a_p[i][(1 + i, 0)] = T::one();
        for j in 0..nsd {
            let mut v = -tau[i][j];
            if i == j {
                v += p;
            }
            a_sp[i][(last, 1 + j)] = v;
        }
        for j in 0..nsd {
            let mut kij = zero;
            for kk in 0..nsd {
                for l in 0..nsd {
                    let mut v = T::zero();
                    if i == j && kk == l {
                        v += mu;
                    }
                    if kk == j && i == l {
                        v += mu;
                    }
                    if kk == i && j == l {
                        v += lambda;
                    }
                    kij[(1 + kk, 1 + l)] = v;
                }
            }
            if i == j {
                kij[(last, last)] = kappa;
            }
            k[i][j] = kij;
        }
    }
    SystemMatrices {
        nsd,
        a0,
        a_advnp,
        a_p,
        a_sp,
        k,
        mu,
        kappa,
    }
}

/// Checked evaluation for a single physical state.
pub fn system_matrices(y: &PrimitiveState, grad: &StateGradient, g: &GasProperties) -> Result<SystemMatrices<f64>> {
    y.check()?;
    Ok(system_matrices_s(y.u.len(), &pack_state(y), &grad.by_direction(), g))
}

/// Pointwise quantities entering the weak form.
#[derive(Clone, Copy, Debug)]
pub struct Pointwise<T> {
    pub sm: SystemMatrices<T>,
    /// `A0 Y_t + (A_advnp_i + A_sp_i) Y_,i - S`, tested against `W`.
    pub f0: SVec<T>,
    /// `K_ij Y_,j - F^p_i`, tested against `W_,i`.
    pub f1: [SVec<T>; MAX_SD],
    /// Strong residual.
    pub res: SVec<T>,
}

pub fn pointwise<T: Scalar>(
    nsd: usize,
    y: &SVec<T>,
    dy: &[SVec<T>; MAX_SD],
    dyt: &SVec<T>,
    source: &SVec<f64>,
    g: &GasProperties,
) -> Pointwise<T> {
    let m = nsd + 2;
    let sm = system_matrices_s(nsd, y, dy, g);
    let mut f0 = sm.a0.mul_vec(dyt);
    let mut res = f0;
    for i in 0..nsd {
        let adv = sm.a_advnp[i].mul_vec(&dy[i]);
        let sp = sm.a_sp[i].mul_vec(&dy[i]);
        for r in 0..m {
            f0[r] += adv[r] + sp[r];
            res[r] += adv[r] + sp[r];
        }
        res[1 + i] += dy[i][0];
    }
    for r in 0..m {
        f0[r] = f0[r] - source[r];
        res[r] = res[r] - source[r];
    }
    let mut f1 = [[T::zero(); MAX_M]; MAX_SD];
    if sm.viscous() {
        for (i, f1i) in f1.iter_mut().enumerate().take(nsd) {
            for j in 0..nsd {
                let v = sm.k[i][j].mul_vec(&dy[j]);
                for r in 0..m {
                    f1i[r] += v[r];
                }
            }
        }
    }
    for (i, f1i) in f1.iter_mut().enumerate().take(nsd) {
        f1i[1 + i] -= y[0];
    }
    Pointwise { sm, f0, f1, res }
}

/// Strong residual at a point; the second-derivative diffusive term vanishes
/// for P1 interpolation and is not included.
pub fn strong_residual(y: &PrimitiveState, grad: &StateGradient, s: &[f64], g: &GasProperties) -> Result<Vec<f64>> {
    y.check()?;
    let nsd = y.u.len();
    let mut src = [0.0; MAX_M];
    src[..s.len()].copy_from_slice(s);
    let mut dyt = [0.0; MAX_M];
    dyt[..grad.dydt.len()].copy_from_slice(&grad.dydt);
    let pw = pointwise(nsd, &pack_state(y), &grad.by_direction(), &dyt, &src, g);
    Ok(pw.res[..nsd + 2].to_vec())
}

/// Directly evaluated conservation variables and flux vectors.
#[derive(Clone, Debug)]
pub struct Fluxes {
    pub u: Vec<f64>,
    pub f_advnp: Vec<Vec<f64>>,
    pub f_p: Vec<Vec<f64>>,
    pub f_sp: Vec<f64>,
    pub f_diff: Vec<Vec<f64>>,
}

pub fn flux_oracle(y: &PrimitiveState, grad: &StateGradient, g: &GasProperties) -> Result<Fluxes> {
    y.check()?;
    let nsd = y.u.len();
    let m = nsd + 2;
    let rho = y.p / (g.r * y.t);
    let rho_e = y.p / (g.gamma - 1.0);
    let mut u = vec![rho];
    u.extend(y.u.iter().map(|v| rho * v));
    u.push(rho_e);
    let f_advnp = (0..nsd).map(|i| u.iter().map(|c| c * y.u[i]).collect()).collect();
    let f_p = (0..nsd)
        .map(|i| {
            let mut f = vec![0.0; m];
            f[1 + i] = y.p;
            f
        })
        .collect();
    let mu = g.mu(y.t);
    let kappa = g.kappa(mu);
    let du = |i: usize, j: usize| grad.dy[1 + i][j];
    let div: f64 = (0..nsd).map(|k| du(k, k)).sum();
    let tau = |i: usize, j: usize| {
        mu * (du(i, j) + du(j, i)) + if i == j { -2.0 / 3.0 * mu * div } else { 0.0 }
    };
    let q = |i: usize| -kappa * grad.dy[m - 1][i];
    let mut f_sp = vec![0.0; m];
    let mut sp = y.p * div;
    for i in 0..nsd {
        for j in 0..nsd {
            sp -= tau(i, j) * du(j, i);
        }
    }
    f_sp[m - 1] = sp;
    let f_diff = (0..nsd)
        .map(|i| {
            let mut f = vec![0.0; m];
            for k in 0..nsd {
                f[1 + k] = tau(k, i);
            }
            f[m - 1] = -q(i);
            f
        })
        .collect();
    Ok(Fluxes {
        u,
        f_advnp,
        f_p,
        f_sp,
        f_diff,
    })
}

/// Neumann vector `h = (0, -p n + tau n, -q n)`; with `viscous = false`
/// only the pressure entries remain.
pub fn neumann_flux_s(
    nsd: usize,
    y: &SVec<f64>,
    dy: &[SVec<f64>; MAX_SD],
    n: &[f64],
    g: &GasProperties,
    viscous: bool,
) -> SVec<f64> {
    let m = nsd + 2;
    let mut h = [0.0; MAX_M];
    for k in 0..nsd {
        h[1 + k] = -y[0] * n[k];
    }
    if viscous {
        let mu = g.mu(y[m - 1]);
        let kappa = g.kappa(mu);
        let tau = viscous_stress(nsd, mu, dy);
        for k in 0..nsd {
            for i in 0..nsd {
                h[1 + k] += tau[k][i] * n[i];
                // -q_i n_i = kappa T_,i n_i
                if k == 0 {
                    h[m - 1] += kappa * dy[i][m - 1] * n[i];
                }
            }
        }
    }
    h
}

pub fn neumann_flux(y: &PrimitiveState, grad: &StateGradient, n: &[f64], g: &GasProperties, viscous: bool) -> Vec<f64> {
    let nsd = y.u.len();
    neumann_flux_s(nsd, &pack_state(y), &grad.by_direction(), n, g, viscous)[..nsd + 2].to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rest_state_structure() {
        let g = GasProperties::air();
        let y = PrimitiveState::new(1e5, &[0.0, 0.0], 300.0);
        let sm = system_matrices(&y, &StateGradient::zero(2), &g).unwrap();
        for i in 0..2 {
            for r in 0..4 {
                for c in 0..4 {
                    let e = if r == 1 + i && c == 0 { 1.0 } else { 0.0 };
                    assert_eq!(sm.a_p[i][(r, c)], e);
                }
            }
            for r in 1..3 {
                for c in 0..4 {
                    assert_eq!(sm.a_advnp[i][(r, c)], 0.0);
                }
            }
        }
        let f = flux_oracle(&y, &StateGradient::zero(2), &g).unwrap();
        assert!(f.f_advnp.iter().flatten().all(|v| *v == 0.0));
        assert!(f.f_sp.iter().all(|v| *v == 0.0));
        assert_eq!(f.f_p[1], vec![0.0, 0.0, 1e5, 0.0]);
    }

    #[test]
    fn shear_and_dilation() {
        let g = GasProperties::air();
        let mu = g.mu(300.0);
        let y = PrimitiveState::new(1e5, &[1.0, 0.0], 300.0);
        let mut gr = StateGradient::zero(2);
        gr.dy[1][1] = 3.0;
        let f = flux_oracle(&y, &gr, &g).unwrap();
        assert!((f.f_diff[1][1] - mu * 3.0).abs() < 1e-18);
        assert!((f.f_diff[0][2] - mu * 3.0).abs() < 1e-18);
        assert_eq!(f.f_diff[0][1], 0.0);
        assert_eq!(f.f_diff[1][2], 0.0);
        let mut gr = StateGradient::zero(2);
        gr.dy[1][0] = 0.5;
        gr.dy[2][1] = 0.5;
        let f = flux_oracle(&y, &gr, &g).unwrap();
        let tr = f.f_diff[0][1] + f.f_diff[1][2];
        assert!((tr - 2.0 * mu * 1.0 * (1.0 - 2.0 / 3.0)).abs() < 1e-18);
    }

    #[test]
    fn neumann_examples() {
        let g = GasProperties::air();
        let y = PrimitiveState::new(1e5, &[0.0, 0.0], 300.0);
        let h = neumann_flux(&y, &StateGradient::zero(2), &[1.0, 0.0], &g, true);
        assert_eq!(h, vec![0.0, -1e5, 0.0, 0.0]);
        let mut gr = StateGradient::zero(2);
        gr.dy[1][1] = 2.0;
        gr.dy[3][1] = 5.0;
        let off = neumann_flux(&y, &gr, &[0.0, 1.0], &g, false);
        assert_eq!(off, vec![0.0, 0.0, -1e5, 0.0]);
        let on = neumann_flux(&y, &gr, &[0.0, 1.0], &g, true);
        let mu = g.mu(300.0);
        assert!((on[1] - mu * 2.0).abs() < 1e-18);
        assert!((on[3] - g.kappa(mu) * 5.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_flow_zero_residual() {
        let g = GasProperties::air();
        let y = PrimitiveState::new(1e5, &[30.0, -4.0], 300.0);
        let r = strong_residual(&y, &StateGradient::zero(2), &[0.0; 4], &g).unwrap();
        assert!(r.iter().all(|v| *v == 0.0));
    }
}
