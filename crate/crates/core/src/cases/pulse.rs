//! Nonlinear acoustic pressure pulse in a quasi one-dimensional strip.

use crate::dirichlet::{BoundaryCondition, DirichletSpec};
use crate::error::{Error, Result};
use crate::gas::{GasProperties, PrimitiveState};
use crate::march::{Problem, RefineFn, SlabSource};
use crate::mesh::{SpaceTimeSlabMesh, SpatialMesh};
use crate::trace::Trace;
use std::f64::consts::PI;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WaveReference {
    pub lambda: f64,
    pub alpha: f64,
    pub p0: f64,
    pub t0: f64,
}

impl Default for WaveReference {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            alpha: 1.0 / (24.0 * PI),
            p0: 1.0e5,
            t0: 273.15,
        }
    }
}

impl WaveReference {
    pub fn c0(&self, g: &GasProperties) -> f64 {
        (g.gamma * g.r * self.t0).sqrt()
    }

    /// Time for head and tail to travel one wavelength, `lambda / c0`.
    pub fn t_final(&self, g: &GasProperties) -> f64 {
        self.lambda / self.c0(g)
    }

    /// Speed-of-sound perturbation `S(x)`, nonzero on `[lambda, 2 lambda]`.
    pub fn perturbation(&self, x: f64) -> f64 {
        let s = x / self.lambda;
        if (1.0..=2.0).contains(&s) {
            self.alpha * (1.0 - (2.0 * PI * s).cos())
        } else {
            0.0
        }
    }
}

pub fn pulse_initial_condition(x: f64, r: &WaveReference, g: &GasProperties) -> PrimitiveState {
    let s = r.perturbation(x);
    let c0 = r.c0(g);
    PrimitiveState::new(
        r.p0 * (1.0 + s).powf(2.0 * g.gamma / (g.gamma - 1.0)),
        &[2.0 / (g.gamma - 1.0) * s * c0],
        r.t0 * (1.0 + s).powi(2),
    )
}

pub fn shock_formation_time(r: &WaveReference, g: &GasProperties) -> f64 {
    (g.gamma - 1.0) / (g.gamma + 1.0) / (2.0 * PI * r.alpha) * r.lambda / r.c0(g)
}

/// Pressure of the simple-wave solution at time `t`: every initial point
/// `xi` carries its state to `xi + (u + c) t`.
pub fn pulse_reference_solution(xs: &[f64], t: f64, r: &WaveReference, g: &GasProperties) -> Result<Vec<f64>> {
    let t_star = shock_formation_time(r, g);
    if t >= t_star {
        return Err(Error::ShockFormed { t, t_star });
    }
    let c0 = r.c0(g);
    let speed = |xi: f64| {
        let s = r.perturbation(xi);
        c0 * (1.0 + s) + 2.0 / (g.gamma - 1.0) * s * c0
    };
    let foot = |x: f64| {
        // x(xi) = xi + speed(xi) t is increasing for t < t*
        let smax = c0 * (1.0 + 2.0 * r.alpha * (g.gamma + 1.0) / (g.gamma - 1.0));
        let (mut a, mut b) = (x - smax * t - r.lambda, x);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid + speed(mid) * t < x {
                a = mid;
            } else {
                b = mid;
            }
            if b - a < 1e-15 * r.lambda.max(x.abs()) {
                break;
            }
        }
        0.5 * (a + b)
    };
    Ok(xs.iter().map(|&x| pulse_initial_condition(foot(x), r, g).p).collect())
}

/// Checks that the discrete characteristic map is increasing on `n` samples.
pub fn characteristic_map_monotone(t: f64, n: usize, r: &WaveReference, g: &GasProperties) -> bool {
    let c0 = r.c0(g);
    let mut prev = f64::NEG_INFINITY;
    for k in 0..=n {
        let xi = 4.0 * r.lambda * k as f64 / n as f64;
        let s = r.perturbation(xi);
        let x = xi + (c0 * (1.0 + s) + 2.0 / (g.gamma - 1.0) * s * c0) * t;
        if x <= prev {
            return false;
        }
        prev = x;
    }
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Fst,
    Sst,
    Ust,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fst" => Ok(Method::Fst),
            "sst" => Ok(Method::Sst),
            "ust" => Ok(Method::Ust),
            other => Err(Error::Config(format!("unknown method '{other}' (expected fst, sst or ust)"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Fst => "fst",
            Method::Sst => "sst",
            Method::Ust => "ust",
        })
    }
}

pub fn strip_mesh(r: &WaveReference, elems_per_lambda: usize) -> SpatialMesh {
    let l = r.lambda;
    let (x1, y1) = (4.0 * l, l / 100.0);
    SpatialMesh::rectangle(0.0, x1, 0.0, y1, 4 * elems_per_lambda, 1, move |c| {
        if c[0] < 1e-9 * l {
            "left".into()
        } else if c[0] > x1 - 1e-9 * l {
            "right".into()
        } else if c[1] < 0.5 * y1 {
            "bottom".into()
        } else {
            "top".into()
        }
    })
}

/// Refinement level 1 at nodes where the entering pressure deviates from
/// `p0` by more than `1e-4 p0`, and at their neighbours.
pub fn wave_refinement(p0: f64) -> RefineFn {
    Arc::new(move |m: &SpatialMesh, tr: &Trace| {
        let mut lv = vec![0u32; m.nodes.len()];
        for (v, p) in m.nodes.iter().enumerate() {
            if let Ok(y) = tr.eval(p.as_slice()) {
                if (y[0] - p0).abs() > 1e-4 * p0 {
                    lv[v] = 1;
                }
            }
        }
        let mut out = lv.clone();
        for (a, b) in m.edges() {
            if lv[a] == 1 || lv[b] == 1 {
                out[a] = 1;
                out[b] = 1;
            }
        }
        out
    })
}

/// Pressure pulse run: CFL `cfl` based on `c0` and the element size, slabs
/// up to `t_f`. For UST the slab mesh is given and stacked until `t_f`.
pub fn build_pulse_case(method: Method, cfl: f64, elems_per_lambda: usize, ust: Option<SpaceTimeSlabMesh>) -> Result<Problem> {
    let r = WaveReference::default();
    let gas = GasProperties::inviscid_air();
    let c0 = r.c0(&gas);
    let tf = r.t_final(&gas);
    let dx = r.lambda / elems_per_lambda as f64;
    let dt = cfl * dx / c0;
    let n_slabs = (tf / dt).round().max(1.0) as usize;
    let dt = tf / n_slabs as f64;
    let (bc, slabs, nsd) = match method {
        Method::Fst | Method::Sst => {
            let spatial = strip_mesh(&r, elems_per_lambda);
            let rest = [r.p0, 0.0, 0.0, r.t0];
            let bc = DirichletSpec {
                conditions: vec![
                    BoundaryCondition::free("bottom", 4, false).with(2, 0.0),
                    BoundaryCondition::free("top", 4, false).with(2, 0.0),
                    BoundaryCondition::full("left", &rest),
                    BoundaryCondition::full("right", &rest),
                ],
                pure_neumann: false,
            };
            let slabs = if method == Method::Fst {
                SlabSource::Fst { spatial, dt, n_slabs }
            } else {
                SlabSource::Sst {
                    spatial,
                    dt,
                    n_slabs,
                    refine: Some(wave_refinement(r.p0)),
                }
            };
            (bc, slabs, 2)
        }
        Method::Ust => {
            let mesh = ust.ok_or_else(|| Error::Config("the UST pulse needs a space-time mesh".into()))?;
            let h = mesh.t_hi - mesh.t_lo;
            let n = (tf / h).round().max(1.0) as usize;
            if ((n as f64) * h - tf).abs() > 1e-6 * tf {
                return Err(Error::Config(format!("UST slab height {h:e} does not divide t_f = {tf:e}")));
            }
            let rest = [r.p0, 0.0, r.t0];
            let bc = DirichletSpec {
                conditions: vec![BoundaryCondition::full("left", &rest), BoundaryCondition::full("right", &rest)],
                pure_neumann: false,
            };
            (bc, SlabSource::Ust { mesh, n_slabs: n }, 1)
        }
    };
    let ic = move |x: &[f64]| {
        let s = pulse_initial_condition(x[0], &r, &GasProperties::inviscid_air());
        let mut y = vec![s.p, s.u[0]];
        if nsd == 2 {
            y.push(0.0);
        }
        y.push(s.t);
        y
    };
    Ok(Problem {
        gas,
        bc,
        initial: Arc::new(ic),
        t0: 0.0,
        slabs,
        steady_tol: None,
    })
}

/// Centerline sample positions: 401 points over the strip, at mid-height in 2D.
pub fn centerline_points(r: &WaveReference, space_dim: usize) -> Vec<Vec<f64>> {
    (0..=400)
        .map(|k| {
            let x = k as f64 * 4.0 * r.lambda / 400.0;
            if space_dim == 1 {
                vec![x]
            } else {
                vec![x, r.lambda / 200.0]
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PulseMetrics {
    pub xs: Vec<f64>,
    pub p: Vec<f64>,
    pub p_ref: Vec<f64>,
    /// `||p - p_ref|| / ||p_ref - p0||` over the samples.
    pub l2_rel: f64,
    /// `(p0 - min p) / p0` ahead of the wave center (`x > 2.5 lambda`).
    pub undershoot: f64,
}

/// Compares a pulse solution at time `t` with the analytic reference.
pub fn pulse_metrics(field: &Trace, t: f64, r: &WaveReference, g: &GasProperties) -> Result<PulseMetrics> {
    let pts = centerline_points(r, field.mesh.dim);
    let xs: Vec<f64> = pts.iter().map(|x| x[0]).collect();
    let p_ref = pulse_reference_solution(&xs, t, r, g)?;
    let p = pts.iter().map(|x| field.eval(x).map(|y| y[0])).collect::<Result<Vec<_>>>()?;
    let err: f64 = p.iter().zip(&p_ref).map(|(a, b)| (a - b) * (a - b)).sum();
    let nrm: f64 = p_ref.iter().map(|b| (b - r.p0) * (b - r.p0)).sum();
    let min_p = xs.iter().zip(&p).filter(|(x, _)| **x > 2.5 * r.lambda).map(|(_, p)| *p).fold(f64::INFINITY, f64::min);
    Ok(PulseMetrics {
        l2_rel: (err / nrm).sqrt(),
        undershoot: ((r.p0 - min_p) / r.p0).max(0.0),
        xs,
        p,
        p_ref,
    })
}
