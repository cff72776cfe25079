//! Newton-Raphson iteration on one slab with a restarted Krylov linear solver.

use crate::assembly::SlabAssembler;
use crate::dirichlet::apply_dirichlet;
use crate::error::{Error, Result};
use crate::linalg::{gmres, BlockCsr, GmresStats, Preconditioner};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonConfig {
    pub max_iter: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KrylovConfig {
    pub restart: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub preconditioner: Preconditioner,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub newton: NewtonConfig,
    pub krylov: KrylovConfig,
    pub quad_degree: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            newton: NewtonConfig {
                max_iter: 15,
                abs_tol: 1e-10,
                rel_tol: 1e-8,
            },
            krylov: KrylovConfig {
                restart: 60,
                max_iter: 3000,
                tol: 1e-10,
                preconditioner: Preconditioner::BlockJacobi,
            },
            quad_degree: 2,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let n = &self.newton;
        let k = &self.krylov;
        if !(n.abs_tol > 0.0 && n.rel_tol > 0.0 && k.tol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if k.restart < 1 || n.max_iter < 1 || k.max_iter < 1 {
            return Err(Error::Config("restart and iteration limits must be at least 1".into()));
        }
        if !(1..=3).contains(&self.quad_degree) {
            return Err(Error::UnsupportedRule {
                dim: 0,
                degree: self.quad_degree,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationLog {
    pub iteration: usize,
    pub residual: f64,
    pub linear_iterations: usize,
    pub linear_residual: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct NewtonReport {
    pub log: Vec<IterationLog>,
    pub clipped: bool,
}

impl NewtonReport {
    /// Residual evaluations until convergence.
    pub fn iterations(&self) -> usize {
        self.log.len()
    }

    pub fn linear_iterations(&self) -> usize {
        self.log.iter().map(|l| l.linear_iterations).sum()
    }
}

impl fmt::Display for NewtonReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.log {
            writeln!(f, "  newton {:2}  residual {:.6e}  gmres {:4}  linear residual {:.3e}", l.iteration, l.residual, l.linear_iterations, l.linear_residual)?;
        }
        Ok(())
    }
}

pub fn krylov_solve(a: &BlockCsr, b: &[f64], cfg: &KrylovConfig) -> Result<(Vec<f64>, GmresStats)> {
    let mut x = vec![0.0; b.len()];
    let stats = gmres(a, b, &mut x, cfg.restart, cfg.max_iter, cfg.tol, cfg.preconditioner)?;
    Ok((x, stats))
}

fn check_physical(y: &[f64], m: usize) -> Result<()> {
    for (v, s) in y.chunks(m).enumerate() {
        if !(s[0] > 0.0 && s[m - 1] > 0.0) {
            return Err(Error::NonPhysicalState(format!("initial guess has p = {:e}, T = {:e} at node {v}", s[0], s[m - 1])));
        }
    }
    Ok(())
}

/// Raises nodal pressure and temperature to `1e-10` times the reference
/// values; returns whether any entry changed.
fn clip(y: &mut [f64], m: usize, p_ref: f64, t_ref: f64) -> bool {
    let mut hit = false;
    for s in y.chunks_mut(m) {
        if !(s[0] >= 1e-10 * p_ref) {
            s[0] = 1e-10 * p_ref;
            hit = true;
        }
        if !(s[m - 1] >= 1e-10 * t_ref) {
            s[m - 1] = 1e-10 * t_ref;
            hit = true;
        }
    }
    hit
}

pub fn newton_solve_slab(asm: &SlabAssembler, y0: &[f64], cfg: &SolverConfig) -> Result<(Vec<f64>, NewtonReport)> {
    let m = asm.m;
    check_physical(y0, m)?;
    let mut y = y0.to_vec();
    for (&dof, &g) in &asm.constraints {
        y[dof] = g;
    }
    let p_ref = y.chunks(m).map(|s| s[0]).fold(0.0, f64::max);
    let t_ref = y.chunks(m).map(|s| s[m - 1]).fold(0.0, f64::max);
    let mut report = NewtonReport::default();
    let mut r0 = 0.0;
    let mut prev = f64::INFINITY;
    let mut growth = 0;
    for it in 1..=cfg.newton.max_iter {
        let clipped = clip(&mut y, m, p_ref, t_ref);
        report.clipped |= clipped;
        let mut sys = asm.assemble(&y)?;
        let norm = asm.free_norm(&sys.residual);
        if !norm.is_finite() {
            return Err(Error::NewtonDiverged { iterations: it, residual: norm });
        }
        if it == 1 {
            r0 = norm;
        }
        let mut entry = IterationLog {
            iteration: it,
            residual: norm,
            linear_iterations: 0,
            linear_residual: 0.0,
        };
        if norm <= cfg.newton.abs_tol || (it > 1 && norm <= cfg.newton.rel_tol * r0) {
            report.log.push(entry);
            if clipped {
                return Err(Error::NonPhysicalState("converged state required clipping of pressure or temperature".into()));
            }
            return Ok((y, report));
        }
        growth = if norm > prev { growth + 1 } else { 0 };
        if growth >= 3 {
            report.log.push(entry);
            return Err(Error::NewtonDiverged { iterations: it, residual: norm });
        }
        prev = norm;
        let mut rhs: Vec<f64> = sys.residual.iter().map(|v| -v).collect();
        apply_dirichlet(&mut sys.matrix, &mut rhs, &y, &asm.constraints);
        let (dx, stats) = krylov_solve(&sys.matrix, &rhs, &cfg.krylov)?;
        entry.linear_iterations = stats.iterations;
        entry.linear_residual = stats.relative_residual;
        report.log.push(entry);
        log::debug!("newton {it}: residual {norm:.6e}, gmres {} ({:.2e})", stats.iterations, stats.relative_residual);
        for (yi, d) in y.iter_mut().zip(&dx) {
            *yi += d;
        }
    }
    let last = report.log.last().map_or(f64::NAN, |l| l.residual);
    Err(Error::NewtonDiverged {
        iterations: cfg.newton.max_iter,
        residual: last,
    })
}
