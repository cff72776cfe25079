//! Sequential time marching over space-time slabs.

use crate::assembly::SlabAssembler;
use crate::dirichlet::DirichletSpec;
use crate::error::Result;
use crate::gas::GasProperties;
use crate::mesh::{extrude_fst, subdivide_sst, SpaceTimeSlabMesh, SpatialMesh};
use crate::newton::{newton_solve_slab, NewtonReport, SolverConfig};
use crate::trace::{interface_mesh, Trace};
use std::sync::Arc;
use std::time::Instant;

/// Refinement level per spatial node, from the state entering the slab.
pub type RefineFn = Arc<dyn Fn(&SpatialMesh, &Trace) -> Vec<u32> + Send + Sync>;
pub type InitialFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
pub enum SlabSource {
    Fst {
        spatial: SpatialMesh,
        dt: f64,
        n_slabs: usize,
    },
    Sst {
        spatial: SpatialMesh,
        dt: f64,
        n_slabs: usize,
        refine: Option<RefineFn>,
    },
    /// An unstructured slab, repeated `n_slabs` times by shifting in time.
    Ust {
        mesh: SpaceTimeSlabMesh,
        n_slabs: usize,
    },
}

impl SlabSource {
    pub fn n_slabs(&self) -> usize {
        match self {
            SlabSource::Fst { n_slabs, .. } | SlabSource::Sst { n_slabs, .. } | SlabSource::Ust { n_slabs, .. } => *n_slabs,
        }
    }

    pub fn space_dim(&self) -> usize {
        match self {
            SlabSource::Fst { spatial, .. } | SlabSource::Sst { spatial, .. } => spatial.dim,
            SlabSource::Ust { mesh, .. } => mesh.space_dim,
        }
    }

    fn slab(&self, n: usize, t0: f64, trace: &Trace) -> Result<SpaceTimeSlabMesh> {
        match self {
            SlabSource::Fst { spatial, dt, .. } => extrude_fst(spatial, t0 + n as f64 * dt, t0 + (n + 1) as f64 * dt),
            SlabSource::Sst { spatial, dt, refine, .. } => {
                let levels = match refine {
                    Some(f) => f(spatial, trace),
                    None => vec![0; spatial.nodes.len()],
                };
                subdivide_sst(spatial, t0 + n as f64 * dt, t0 + (n + 1) as f64 * dt, &levels)
            }
            SlabSource::Ust { mesh, .. } => {
                let h = mesh.t_hi - mesh.t_lo;
                Ok(mesh.shifted(t0 + n as f64 * h - mesh.t_lo))
            }
        }
    }
}

#[derive(Clone)]
pub struct Problem {
    pub gas: GasProperties,
    pub bc: DirichletSpec,
    pub initial: InitialFn,
    pub t0: f64,
    pub slabs: SlabSource,
    /// Stop early once the relative change of the upper trace between
    /// consecutive slabs falls below this value.
    pub steady_tol: Option<f64>,
}

/// Solution of one slab.
#[derive(Clone, Debug)]
pub struct SlabResult {
    pub index: usize,
    pub mesh: SpaceTimeSlabMesh,
    /// Nodal primitive unknowns, `m` per slab node.
    pub y: Vec<f64>,
    pub report: NewtonReport,
    pub seconds: f64,
}

impl SlabResult {
    pub fn upper_trace(&self) -> Trace {
        let m = self.mesh.space_dim + 2;
        Trace::from_interface(&self.mesh, &self.mesh.upper, m, &self.y)
    }
}

/// `||b - a|| / ||a||`, or infinity when the lengths differ.
pub fn relative_change(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let n: f64 = a.iter().map(|x| x * x).sum();
    (d / n.max(f64::MIN_POSITIVE)).sqrt()
}

/// Solves the slabs in sequence; the upper trace of each slab is the
/// lower-interface data and initial guess of the next. Returns the final
/// upper trace.
pub fn march_slabs(problem: &Problem, cfg: &SolverConfig, mut on_slab: impl FnMut(&SlabResult) -> Result<()>) -> Result<Trace> {
    cfg.validate()?;
    problem.gas.validate()?;
    let m = problem.slabs.space_dim() + 2;
    let ic = |x: &[f64]| problem.initial.as_ref()(x);
    let mut trace = match &problem.slabs {
        SlabSource::Fst { spatial, .. } | SlabSource::Sst { spatial, .. } => Trace::from_fn(spatial.clone(), m, ic),
        SlabSource::Ust { mesh, .. } => Trace::from_fn(interface_mesh(mesh, &mesh.lower), m, ic),
    };
    for n in 0..problem.slabs.n_slabs() {
        let clock = Instant::now();
        let mesh = problem.slabs.slab(n, problem.t0, &trace)?;
        let asm = SlabAssembler::new(mesh, &problem.gas, &problem.bc, cfg.quad_degree, &trace)?;
        let y0 = trace.extend(&asm.mesh)?;
        let (y, report) = newton_solve_slab(&asm, &y0, cfg)?;
        let res = SlabResult {
            index: n,
            mesh: asm.mesh,
            y,
            report,
            seconds: clock.elapsed().as_secs_f64(),
        };
        on_slab(&res)?;
        let next = res.upper_trace();
        let change = relative_change(&trace.values, &next.values);
        log::info!(
            "slab {n}: t = [{:.6e}, {:.6e}], {} elements, {} newton, {} gmres, residual {:.3e}, change {change:.3e}, {:.2}s",
            res.mesh.t_lo,
            res.mesh.t_hi,
            res.mesh.elements.len(),
            res.report.iterations(),
            res.report.linear_iterations(),
            res.report.log.last().map_or(0.0, |l| l.residual),
            res.seconds
        );
        trace = next;
        if problem.steady_tol.is_some_and(|tol| n > 0 && change < tol) {
            log::info!("steady state reached after {} slabs (change {change:.3e})", n + 1);
            break;
        }
    }
    Ok(trace)
}
