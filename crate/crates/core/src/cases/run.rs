//! End-to-end case execution from a [`Config`].

use super::config::{parse_numbers, Config};
use super::flat_plate::{build_flat_plate_case, single_peak_then_decay, wall_pressure_coefficient};
use super::pulse::{build_pulse_case, pulse_metrics, Method, WaveReference};
use crate::dirichlet::{BcValue, BoundaryCondition, DirichletSpec};
use crate::error::{Error, Result};
use crate::export::{sample_line, slice_at, write_line_csv, write_vtk};
use crate::gas::{GasProperties, ViscosityLaw};
use crate::linalg::Preconditioner;
use crate::march::{march_slabs, Problem, SlabSource};
use crate::mesh::{import_ust, read_spatial_mesh};
use crate::newton::SolverConfig;
use crate::trace::Trace;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

/// Slab mesh stacked by the UST pressure pulse when no file is configured.
pub const DEFAULT_UST_PULSE_MESH: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/pulse_ust_slab.stmesh");

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseName {
    PressurePulse,
    FlatPlate,
    Custom,
}

impl std::str::FromStr for CaseName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pressure-pulse" => Ok(CaseName::PressurePulse),
            "flat-plate" => Ok(CaseName::FlatPlate),
            "custom" => Ok(CaseName::Custom),
            other => Err(Error::Config(format!("unknown case '{other}' (expected pressure-pulse, flat-plate or custom)"))),
        }
    }
}

impl std::fmt::Display for CaseName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CaseName::PressurePulse => "pressure-pulse",
            CaseName::FlatPlate => "flat-plate",
            CaseName::Custom => "custom",
        })
    }
}

/// Key-value results of a run, in output order.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub entries: Vec<(String, String)>,
    pub final_field: Trace,
    pub files: Vec<PathBuf>,
}

impl RunSummary {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

fn require<T: std::str::FromStr>(cfg: &Config, key: &str) -> Result<T> {
    cfg.get(key)?.ok_or_else(|| Error::Config(format!("missing '{key}'")))
}

fn existing(path: &str) -> Result<PathBuf> {
    let p = PathBuf::from(path);
    if !p.is_file() {
        return Err(Error::Config(format!("mesh file '{path}' does not exist")));
    }
    Ok(p)
}

/// Applies `gas.*` overrides to `base`.
pub fn gas_from_config(cfg: &Config, base: GasProperties) -> Result<GasProperties> {
    let mut g = base;
    g.r = cfg.get_or("gas.r", g.r)?;
    g.gamma = cfg.get_or("gas.gamma", g.gamma)?;
    g.pr = cfg.get_or("gas.pr", g.pr)?;
    if let Some(law) = cfg.entry("gas.viscosity") {
        g.viscosity = match law.value.as_str() {
            "sutherland" => GasProperties::air().viscosity,
            "flat-plate" => ViscosityLaw::FlatPlate,
            "inviscid" => ViscosityLaw::Constant(0.0),
            "constant" => ViscosityLaw::Constant(require(cfg, "gas.mu")?),
            other => {
                return Err(Error::Parse {
                    line: law.line,
                    reason: format!("unknown viscosity law '{other}'"),
                })
            }
        };
    } else if let Some(mu) = cfg.get::<f64>("gas.mu")? {
        g.viscosity = ViscosityLaw::Constant(mu);
    }
    g.validate()?;
    Ok(g)
}

pub fn solver_from_config(cfg: &Config) -> Result<SolverConfig> {
    let mut s = SolverConfig::default();
    s.newton.max_iter = cfg.get_or("newton.max_iter", s.newton.max_iter)?;
    s.newton.abs_tol = cfg.get_or("newton.abs_tol", s.newton.abs_tol)?;
    s.newton.rel_tol = cfg.get_or("newton.rel_tol", s.newton.rel_tol)?;
    s.krylov.restart = cfg.get_or("krylov.restart", s.krylov.restart)?;
    s.krylov.max_iter = cfg.get_or("krylov.max_iter", s.krylov.max_iter)?;
    s.krylov.tol = cfg.get_or("krylov.tol", s.krylov.tol)?;
    if let Some(e) = cfg.entry("krylov.preconditioner") {
        s.krylov.preconditioner = match e.value.as_str() {
            "block-jacobi" => Preconditioner::BlockJacobi,
            "none" => Preconditioner::None,
            other => {
                return Err(Error::Parse {
                    line: e.line,
                    reason: format!("unknown preconditioner '{other}'"),
                })
            }
        };
    }
    s.quad_degree = cfg.get_or("solver.quad_degree", s.quad_degree)?;
    s.validate()?;
    Ok(s)
}

/// `bc.<tag> = v0 v1 ...` with `-` for a free component and
/// `bc.<tag>.viscous = true|false`. Later lines win on shared nodes.
pub fn boundary_from_config(cfg: &Config, m: usize) -> Result<DirichletSpec> {
    let mut conditions: Vec<BoundaryCondition> = Vec::new();
    for (key, e) in cfg.boundary_entries() {
        let err = |reason: String| Error::Parse { line: e.line, reason };
        if let Some(tag) = key.strip_suffix(".viscous") {
            let v: bool = e.value.parse().map_err(|_| err(format!("expected true or false, got '{}'", e.value)))?;
            match conditions.iter_mut().find(|c| c.tag == tag) {
                Some(c) => c.viscous = v,
                None => conditions.push(BoundaryCondition::free(tag, m, v)),
            }
            continue;
        }
        let words: Vec<&str> = e.value.split_whitespace().collect();
        if words.len() != m {
            return Err(err(format!("expected {m} values for boundary '{key}', got {}", words.len())));
        }
        let mut values = Vec::with_capacity(m);
        for w in words {
            values.push(if w == "-" {
                None
            } else {
                Some(BcValue::Const(w.parse().map_err(|_| err(format!("invalid number '{w}'")))?))
            });
        }
        let viscous = conditions.iter().find(|c| c.tag == *key).map_or(true, |c| c.viscous);
        conditions.retain(|c| c.tag != *key);
        conditions.push(BoundaryCondition {
            tag: key.clone(),
            values,
            viscous,
        });
    }
    Ok(DirichletSpec {
        conditions,
        pure_neumann: cfg.get_or("bc.pure_neumann", false)?,
    })
}

struct Resolved {
    problem: Problem,
    t_end: f64,
}

fn resolve(cfg: &Config, case: CaseName, method: Method) -> Result<Resolved> {
    match case {
        CaseName::PressurePulse => {
            let cfl = cfg.get_or("case.cfl", 2.0)?;
            let epl = cfg.get_or("case.elems_per_lambda", 100usize)?;
            let ust = if method == Method::Ust {
                let path = cfg.str("case.ust_mesh").unwrap_or(DEFAULT_UST_PULSE_MESH);
                Some(import_ust(&existing(path)?)?)
            } else {
                None
            };
            let mut problem = build_pulse_case(method, cfl, epl, ust)?;
            if let SlabSource::Sst { refine, .. } = &mut problem.slabs {
                match cfg.str("case.refine").unwrap_or("wave") {
                    "wave" => {}
                    "none" => *refine = None,
                    other => return Err(Error::Config(format!("unknown refinement '{other}' (expected wave or none)"))),
                }
            }
            problem.gas = gas_from_config(cfg, problem.gas)?;
            let t_end = WaveReference::default().t_final(&GasProperties::inviscid_air());
            Ok(Resolved { problem, t_end })
        }
        CaseName::FlatPlate => {
            let dt = cfg.get_or("case.dt", 0.2)?;
            let slabs = cfg.get_or("case.slabs", 60usize)?;
            let mesh = cfg.str("case.mesh").unwrap_or("coarse");
            let mut problem = build_flat_plate_case(mesh, dt, slabs)?;
            problem.steady_tol = Some(cfg.get_or("case.steady_tol", 1e-4)?);
            match method {
                Method::Fst => {}
                Method::Sst => {
                    if let SlabSource::Fst { spatial, dt, n_slabs } = problem.slabs {
                        problem.slabs = SlabSource::Sst { spatial, dt, n_slabs, refine: None };
                    }
                }
                Method::Ust => return Err(Error::Config("the flat plate runs on fst or sst slabs".into())),
            }
            problem.gas = gas_from_config(cfg, problem.gas)?;
            Ok(Resolved { problem, t_end: dt * slabs as f64 })
        }
        CaseName::Custom => {
            let gas = gas_from_config(cfg, GasProperties::air())?;
            let n_slabs: usize = require(cfg, "case.slabs")?;
            let t0 = cfg.get_or("case.t0", 0.0)?;
            let (slabs, t_end) = match method {
                Method::Ust => {
                    let path: String = require(cfg, "case.ust_mesh")?;
                    let mesh = import_ust(&existing(&path)?)?;
                    let t_end = t0 + n_slabs as f64 * (mesh.t_hi - mesh.t_lo);
                    (SlabSource::Ust { mesh, n_slabs }, t_end)
                }
                _ => {
                    let path: String = require(cfg, "case.mesh")?;
                    let spatial = read_spatial_mesh(&existing(&path)?)?;
                    let dt: f64 = require(cfg, "case.dt")?;
                    let t_end = t0 + n_slabs as f64 * dt;
                    let s = if method == Method::Fst {
                        SlabSource::Fst { spatial, dt, n_slabs }
                    } else {
                        SlabSource::Sst { spatial, dt, n_slabs, refine: None }
                    };
                    (s, t_end)
                }
            };
            let m = slabs.space_dim() + 2;
            let state = cfg.numbers("initial.state")?.ok_or_else(|| Error::Config("missing 'initial.state'".into()))?;
            if state.len() != m {
                let line = cfg.entry("initial.state").map_or(0, |e| e.line);
                return Err(Error::Parse {
                    line,
                    reason: format!("expected {m} values for 'initial.state', got {}", state.len()),
                });
            }
            let problem = Problem {
                gas,
                bc: boundary_from_config(cfg, m)?,
                initial: Arc::new(move |_| state.clone()),
                t0,
                slabs,
                steady_tol: cfg.get("case.steady_tol")?,
            };
            Ok(Resolved { problem, t_end })
        }
    }
}

/// Runs the configured case and writes its outputs into `out`:
/// `summary.txt`, `convergence.log`, `final.vtk`, optional slab slices and
/// case-specific CSV samples.
pub fn run_case(cfg: &Config, out: &Path) -> Result<RunSummary> {
    let case: CaseName = require(cfg, "case.name")?;
    let method: Method = cfg.get_or("case.method", Method::Fst)?;
    let solver = solver_from_config(cfg)?;
    let Resolved { problem, t_end } = resolve(cfg, case, method)?;
    let vtk_every = cfg.get_or("output.vtk_every", 0usize)?;
    let write_final = cfg.get_or("output.vtk", true)?;
    let line = match cfg.entry("output.line") {
        Some(e) => {
            let d = problem.slabs.space_dim();
            let v = parse_numbers(&e.value, e.line)?;
            if v.len() != 2 * d + 1 || v[2 * d] < 1.0 {
                return Err(Error::Parse {
                    line: e.line,
                    reason: format!("expected {} start coordinates, {} end coordinates and a point count", d, d),
                });
            }
            Some((v[..d].to_vec(), v[d..2 * d].to_vec(), v[2 * d] as usize))
        }
        None => None,
    };
    std::fs::create_dir_all(out)?;
    let mut files = Vec::new();
    let mut log = String::from("# slab iteration residual linear_iterations linear_residual\n");
    let (mut newton, mut gmres, mut slabs, mut max_newton, mut max_elems) = (0usize, 0usize, 0usize, 0usize, 0usize);
    let mut t_last = problem.t0;
    let clock = Instant::now();
    log::info!("running {case} with {method} slabs into {}", out.display());
    let final_field = march_slabs(&problem, &solver, |r| {
        for it in &r.report.log {
            let _ = writeln!(
                log,
                "{} {} {:.6e} {} {:.6e}",
                r.index, it.iteration, it.residual, it.linear_iterations, it.linear_residual
            );
        }
        slabs += 1;
        newton += r.report.iterations();
        gmres += r.report.linear_iterations();
        max_newton = max_newton.max(r.report.iterations());
        max_elems = max_elems.max(r.mesh.elements.len());
        t_last = r.mesh.t_hi;
        if vtk_every > 0 && (r.index + 1) % vtk_every == 0 {
            let path = out.join(format!("slab_{:05}.vtk", r.index));
            write_vtk(&path, &slice_at(r, r.mesh.t_hi)?, &problem.gas, &format!("t = {:.9e}", r.mesh.t_hi))?;
            files.push(path);
        }
        Ok(())
    })?;
    let seconds = clock.elapsed().as_secs_f64();
    let path = out.join("convergence.log");
    std::fs::write(&path, &log)?;
    files.push(path);
    if write_final {
        let path = out.join("final.vtk");
        write_vtk(&path, &final_field, &problem.gas, &format!("t = {t_last:.9e}"))?;
        files.push(path);
    }

    let mut entries: Vec<(String, String)> = vec![
        ("case".into(), case.to_string()),
        ("method".into(), method.to_string()),
        ("slabs".into(), slabs.to_string()),
        ("t_final".into(), format!("{t_last:.9e}")),
        ("max_slab_elements".into(), max_elems.to_string()),
        ("newton_iterations".into(), newton.to_string()),
        ("max_newton_per_slab".into(), max_newton.to_string()),
        ("gmres_iterations".into(), gmres.to_string()),
        ("wall_seconds".into(), format!("{seconds:.3}")),
    ];
    match case {
        CaseName::PressurePulse => {
            let r = WaveReference::default();
            let m = pulse_metrics(&final_field, t_end, &r, &GasProperties::inviscid_air())?;
            let path = out.join("centerline.csv");
            let samples = sample_line(&final_field, &line_start(&final_field), &line_end(&final_field, 4.0 * r.lambda), 401)?;
            write_line_csv(&path, &samples, &[("p_ref", m.p_ref.clone())])?;
            files.push(path);
            entries.push(("l2_error_relative".into(), format!("{:.6e}", m.l2_rel)));
            entries.push(("undershoot_percent_p0".into(), format!("{:.6e}", 100.0 * m.undershoot)));
        }
        CaseName::FlatPlate => {
            let cp = wall_pressure_coefficient(&final_field);
            let mut s = String::from("x,cp\n");
            for (x, c) in &cp {
                let _ = writeln!(s, "{x:.10e},{c:.10e}");
            }
            let path = out.join("wall_cp.csv");
            std::fs::write(&path, s)?;
            files.push(path);
            let peak = cp.iter().copied().fold((0.0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
            entries.push(("cp_peak".into(), format!("{:.6e}", peak.1)));
            entries.push(("cp_peak_x".into(), format!("{:.6e}", peak.0)));
            entries.push(("cp_single_peak_then_decay".into(), single_peak_then_decay(&cp, 0.1, 1e-2).to_string()));
            entries.push(("steady".into(), (slabs < problem.slabs.n_slabs()).to_string()));
        }
        CaseName::Custom => {}
    }
    if let Some((a, b, n)) = line {
        let path = out.join("line.csv");
        write_line_csv(&path, &sample_line(&final_field, &a, &b, n)?, &[])?;
        files.push(path);
    }
    let mut s = String::new();
    for (k, v) in &entries {
        let _ = writeln!(s, "{k} = {v}");
    }
    let path = out.join("summary.txt");
    std::fs::write(&path, s)?;
    files.push(path);
    Ok(RunSummary { entries, final_field, files })
}

fn line_start(f: &Trace) -> Vec<f64> {
    if f.mesh.dim == 1 {
        vec![0.0]
    } else {
        vec![0.0, WaveReference::default().lambda / 200.0]
    }
}

fn line_end(f: &Trace, x: f64) -> Vec<f64> {
    let mut v = line_start(f);
    v[0] = x;
    v
}
