//! Supersonic laminar flow over a flat plate (nondimensional units).

use crate::dirichlet::{BoundaryCondition, DirichletSpec};
use crate::error::{Error, Result};
use crate::gas::{GasProperties, ViscosityLaw};
use crate::march::{Problem, SlabSource};
use crate::mesh::SpatialMesh;
use crate::trace::Trace;
use std::sync::Arc;

pub const Y_IN: [f64; 4] = [7.937e-2, 1.0, 0.0, 2.769e-4];
pub const T_WALL: f64 = 7.754e-4;
pub const MACH: f64 = 3.0;
pub const X_MIN: f64 = -0.2;
pub const X_MAX: f64 = 1.2;
pub const Y_MAX: f64 = 0.8;

pub fn flat_plate_gas() -> GasProperties {
    GasProperties {
        viscosity: ViscosityLaw::FlatPlate,
        ..GasProperties::air()
    }
}

/// Squares per unit length of the named uniform meshes.
pub fn mesh_resolution(name: &str) -> Result<usize> {
    match name {
        "coarse" => Ok(100),
        "medium" => Ok(200),
        "fine" => Ok(400),
        other => Err(Error::Config(format!("unknown flat-plate mesh '{other}' (expected coarse, medium or fine)"))),
    }
}

pub fn flat_plate_mesh(per_unit: usize) -> SpatialMesh {
    let nx = (per_unit as f64 * (X_MAX - X_MIN)).round() as usize;
    let ny = (per_unit as f64 * Y_MAX).round() as usize;
    let eps = 1e-9;
    SpatialMesh::rectangle(X_MIN, X_MAX, 0.0, Y_MAX, nx, ny, move |c| {
        if c[0] < X_MIN + eps {
            "inflow".into()
        } else if c[0] > X_MAX - eps {
            "outflow".into()
        } else if c[1] > Y_MAX - eps {
            "top".into()
        } else if c[0] < 0.0 {
            "symmetry".into()
        } else {
            "wall".into()
        }
    })
}

/// Wall stagnation temperature `T_inf (1 + (gamma - 1)/2 Ma^2)`.
pub fn stagnation_temperature(g: &GasProperties) -> f64 {
    Y_IN[3] * (1.0 + 0.5 * (g.gamma - 1.0) * MACH * MACH)
}

pub fn flat_plate_bc() -> DirichletSpec {
    DirichletSpec {
        conditions: vec![
            BoundaryCondition::free("symmetry", 4, false).with(2, 0.0),
            BoundaryCondition::free("outflow", 4, true),
            BoundaryCondition::free("wall", 4, false).with(1, 0.0).with(2, 0.0).with(3, T_WALL),
            BoundaryCondition::full("top", &Y_IN),
            BoundaryCondition::full("inflow", &Y_IN),
        ],
        pure_neumann: false,
    }
}

/// Pseudo-time marching of the flat plate on FST slabs of height `dt`.
pub fn build_flat_plate_case(mesh: &str, dt: f64, max_slabs: usize) -> Result<Problem> {
    let spatial = flat_plate_mesh(mesh_resolution(mesh)?);
    Ok(Problem {
        gas: flat_plate_gas(),
        bc: flat_plate_bc(),
        initial: Arc::new(|_| Y_IN.to_vec()),
        t0: 0.0,
        slabs: SlabSource::Fst {
            spatial,
            dt,
            n_slabs: max_slabs,
        },
        steady_tol: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FreeStream {
    pub p: f64,
    pub rho: f64,
    pub speed: f64,
}

impl FreeStream {
    pub fn flat_plate() -> Self {
        let g = flat_plate_gas();
        Self {
            p: Y_IN[0],
            rho: Y_IN[0] / (g.r * Y_IN[3]),
            speed: (Y_IN[1] * Y_IN[1] + Y_IN[2] * Y_IN[2]).sqrt(),
        }
    }
}

pub fn pressure_coefficient(p: f64, fs: &FreeStream) -> f64 {
    2.0 * (p - fs.p) / (fs.rho * fs.speed * fs.speed)
}

/// `(x, C_p)` at the wall nodes (`y = 0`, `x >= 0`), sorted by `x`.
pub fn wall_pressure_coefficient(field: &Trace) -> Vec<(f64, f64)> {
    let fs = FreeStream::flat_plate();
    let mut out: Vec<(f64, f64)> = field
        .mesh
        .nodes
        .iter()
        .enumerate()
        .filter(|(_, p)| p.coords[1].abs() < 1e-12 && p.coords[0] >= -1e-12)
        .map(|(v, p)| (p.coords[0], pressure_coefficient(field.node(v)[0], &fs)))
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// True when the profile has its maximum within `x <= x_peak` and does not
/// rise again afterwards by more than `tol` times the peak value.
pub fn single_peak_then_decay(cp: &[(f64, f64)], x_peak: f64, tol: f64) -> bool {
    let Some(k) = (0..cp.len()).max_by(|&a, &b| cp[a].1.total_cmp(&cp[b].1)) else {
        return false;
    };
    let peak = cp[k].1;
    if cp[k].0 > x_peak || peak <= 0.0 {
        return false;
    }
    let mut low = peak;
    for &(_, c) in &cp[k..] {
        if c > low + tol * peak {
            return false;
        }
        low = low.min(c);
    }
    true
}
