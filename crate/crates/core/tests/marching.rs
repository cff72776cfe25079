mod common;

use common::*;
use rand::Rng;
use std::path::Path;
use std::sync::Arc;
use stfem_core::assembly::SlabAssembler;
use stfem_core::cases::pulse::{build_pulse_case, Method, WaveReference};
use stfem_core::dirichlet::{BoundaryCondition, DirichletSpec};
use stfem_core::error::Error;
use stfem_core::export::slice_at;
use stfem_core::gas::GasProperties;
use stfem_core::march::{march_slabs, Problem, SlabResult, SlabSource};
use stfem_core::mesh::{extrude_fst, import_ust, subdivide_sst, validate_conformity, SpaceTimeSlabMesh};
use stfem_core::newton::SolverConfig;
use stfem_core::trace::Trace;

const COARSE_UST: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/pulse_ust_coarse.stmesh");

fn smooth_state(x: &[f64]) -> Vec<f64> {
    let s = (3.0 * x[0]).sin() * (2.0 * x[1]).cos();
    vec![1e5 * (1.0 + 0.05 * s), 20.0 * s, -10.0 * s, 300.0 * (1.0 + 0.02 * s)]
}

fn wall_bc() -> DirichletSpec {
    DirichletSpec {
        conditions: vec![BoundaryCondition::free("wall", 4, true).with(1, 0.0).with(2, 0.0)],
        pure_neumann: false,
    }
}

fn slab_and_trace(sst: bool) -> (SpaceTimeSlabMesh, Trace) {
    let m = random_spatial(2, 5, 21);
    let mut r = rng(5);
    let levels: Vec<u32> = (0..m.nodes.len()).map(|_| r.gen_range(0..3)).collect();
    let st = if sst { subdivide_sst(&m, 0.0, 1e-3, &levels).unwrap() } else { extrude_fst(&m, 0.0, 1e-3).unwrap() };
    let tr = Trace::from_fn(m, 4, smooth_state);
    (st, tr)
}

#[test]
fn assembly_is_deterministic_across_thread_counts() {
    let (st, tr) = slab_and_trace(true);
    let asm = SlabAssembler::new(st, &GasProperties::air(), &wall_bc(), 2, &tr).unwrap();
    let mut y = tr.extend(&asm.mesh).unwrap();
    let mut r = rng(9);
    for v in y.iter_mut() {
        *v *= 1.0 + 1e-3 * r.gen_range(-1.0..1.0);
    }
    let norm_with = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let a = asm.assemble(&y).unwrap();
            (asm.free_norm(&a.residual), a.matrix.to_dense().norm())
        })
    };
    let one = norm_with(1);
    assert_eq!(one, norm_with(1));
    let two = norm_with(2);
    assert!((one.0 - two.0).abs() <= 1e-12 * one.0 && (one.1 - two.1).abs() <= 1e-12 * one.1);
}

#[test]
fn jump_vanishes_for_copied_traces() {
    for sst in [false, true] {
        let (st, tr) = slab_and_trace(sst);
        let asm = SlabAssembler::new(st, &GasProperties::air(), &wall_bc(), 2, &tr).unwrap();
        let y = tr.extend(&asm.mesh).unwrap();
        let perturbed: Vec<f64> = y.iter().map(|v| v * 1.01).collect();
        let n = |v: Vec<f64>| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let reference = n(asm.jump_residual(&perturbed));
        assert!(reference > 0.0);
        assert!(n(asm.jump_residual(&y)) < 1e-12 * reference, "sst = {sst}");
    }
    let mesh = import_ust(Path::new(COARSE_UST)).unwrap();
    let tr = Trace::from_fn(stfem_core::trace::interface_mesh(&mesh, &mesh.lower), 3, |x| vec![1e5 + 100.0 * x[0], 1.0, 300.0]);
    let bc = DirichletSpec {
        conditions: vec![BoundaryCondition::full("left", &[1e5, 1.0, 300.0])],
        pure_neumann: false,
    };
    let asm = SlabAssembler::new(mesh, &GasProperties::air(), &bc, 2, &tr).unwrap();
    let y = tr.extend(&asm.mesh).unwrap();
    assert!(asm.jump_residual(&y).iter().all(|v| v.abs() < 1e-9));
}

#[test]
fn coarse_ust_single_slab_covers_the_run() {
    let mesh = import_ust(Path::new(COARSE_UST)).unwrap();
    let g = GasProperties::inviscid_air();
    let r = WaveReference::default();
    assert!((mesh.t_hi - mesh.t_lo - r.t_final(&g)).abs() < 1e-9 * r.t_final(&g));
    let p = build_pulse_case(Method::Ust, 2.0, 100, Some(mesh)).unwrap();
    assert_eq!(p.slabs.n_slabs(), 1);
    let mut slabs: Vec<SlabResult> = Vec::new();
    let end = march_slabs(&p, &SolverConfig::default(), |s| {
        slabs.push(s.clone());
        Ok(())
    })
    .unwrap();
    assert_eq!(slabs.len(), 1);
    let (x_peak, _) = end.mesh.nodes.iter().enumerate().map(|(v, x)| (x.coords[0], end.node(v)[0])).fold((0.0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
    assert!(x_peak > 2.0 && x_peak < 3.0, "peak at {x_peak}");
    let mid = slice_at(&slabs[0], 0.5 * r.t_final(&g)).unwrap();
    let (x_mid, _) = mid.mesh.nodes.iter().enumerate().map(|(v, x)| (x.coords[0], mid.node(v)[0])).fold((0.0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
    assert!(x_mid > 1.5 && x_mid < x_peak, "mid peak at {x_mid}");
}

#[test]
fn sst_marching_keeps_interfaces_and_conformity() {
    let mut p = build_pulse_case(Method::Sst, 2.0, 100, None).unwrap();
    if let SlabSource::Sst { n_slabs, .. } = &mut p.slabs {
        *n_slabs = 3;
    }
    let mut prev: Option<SpaceTimeSlabMesh> = None;
    march_slabs(&p, &SolverConfig::default(), |s| {
        let rep = validate_conformity(&s.mesh);
        assert_eq!(rep.defects(), 0);
        assert!(rep.volume_error() < 1e-12);
        assert!(s.mesh.node_level.iter().any(|&l| l > 0));
        if let Some(a) = &prev {
            assert_eq!(a.upper.nodes.len(), s.mesh.lower.nodes.len());
            for (&u, &l) in a.upper.nodes.iter().zip(&s.mesh.lower.nodes) {
                for k in 0..3 {
                    assert!((a.nodes[u].coords[k] - s.mesh.nodes[l].coords[k]).abs() < 1e-12);
                }
            }
        }
        prev = Some(s.mesh.clone());
        Ok(())
    })
    .unwrap();
}

#[test]
fn nonphysical_initial_state_is_rejected() {
    let p = Problem {
        gas: GasProperties::air(),
        bc: wall_bc(),
        initial: Arc::new(|x| vec![if x[0] > 0.5 { -1.0 } else { 1e5 }, 0.0, 0.0, 300.0]),
        t0: 0.0,
        slabs: SlabSource::Fst {
            spatial: random_spatial(2, 3, 1),
            dt: 1e-3,
            n_slabs: 1,
        },
        steady_tol: None,
    };
    assert!(matches!(march_slabs(&p, &SolverConfig::default(), |_| Ok(())), Err(Error::NonPhysicalState(_))));
}
