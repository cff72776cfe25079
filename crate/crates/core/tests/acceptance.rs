//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are always printed.

mod common;

use common::*;
use nalgebra::DMatrix;
use rand::Rng;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;
use stfem_core::cases::flat_plate::{self, single_peak_then_decay, wall_pressure_coefficient};
use stfem_core::cases::pulse::{build_pulse_case, pulse_metrics, Method, WaveReference};
use stfem_core::cases::run::DEFAULT_UST_PULSE_MESH;
use stfem_core::dirichlet::{BoundaryCondition, DirichletSpec};
use stfem_core::gas::{GasProperties, PrimitiveState};
use stfem_core::geometry::{covariant_metric, regular_simplex_gram, Simplex};
use stfem_core::linalg::sqrtm::matrix_sqrt_principal;
use stfem_core::march::{march_slabs, Problem, SlabSource};
use stfem_core::mesh::{import_ust, subdivide_sst, validate_conformity};
use stfem_core::newton::SolverConfig;
use stfem_core::physics::{flux_oracle, system_matrices, StateGradient};
use stfem_core::quadrature::quadrature_rule;
use stfem_core::supg::{c_inv, hatted_matrices, metric_array, tau_element};

type Outcome = (bool, String);

fn metric_invariance() -> Outcome {
    let clock = Instant::now();
    let mut r = rng(1);
    let g = viscous_air();
    let (mut worst_g, mut worst_tau) = (0.0f64, 0.0f64);
    for d in 2..=4 {
        let perms = permutations(d + 1);
        for _ in 0..1000 {
            let s = random_simplex(d, &mut r);
            let nsd = d - 1;
            let y = random_state(nsd, &mut r);
            let grad = random_gradient(nsd, &mut r);
            let hm = hatted_matrices(&system_matrices(&y, &grad, &g).unwrap()).unwrap();
            let tau = |s: &Simplex| {
                let gm = covariant_metric(s).unwrap();
                let t = tau_element(&hm, &metric_array(&gm.g), c_inv(nsd), true).unwrap();
                (gm.g, t.to_dmatrix())
            };
            let (g0, t0) = tau(&s);
            for p in &perms[1..] {
                let sp = Simplex::new(p.iter().map(|&k| s.nodes[k]).collect());
                let (gp, tp) = tau(&sp);
                worst_g = worst_g.max(rel_frobenius(&gp, &g0));
                worst_tau = worst_tau.max(rel_frobenius(&tp, &t0));
            }
        }
    }
    let secs = clock.elapsed().as_secs_f64();
    (
        worst_g < 1e-10 && worst_tau < 1e-10 && secs < 10.0,
        format!("max rel diff G {worst_g:.2e}, tau {worst_tau:.2e}, {secs:.1}s"),
    )
}

fn m_matrix() -> Outcome {
    let mut worst = 0.0f64;
    for d in 2..=4usize {
        let scale = ((d + 1) as f64).powf(-1.0 / d as f64);
        let expected = DMatrix::from_fn(d, d, |i, j| scale * if i == j { 2.0 } else { 1.0 });
        worst = worst.max((regular_simplex_gram(d) - expected).abs().max());
    }
    (worst < 1e-14, format!("max entry deviation {worst:.2e}"))
}

fn fd_jacobian(f: impl Fn(&[f64]) -> Vec<f64>, y: &[f64]) -> DMatrix<f64> {
    let f0 = f(y);
    let mut j = DMatrix::zeros(f0.len(), y.len());
    for k in 0..y.len() {
        let h = f64::EPSILON.cbrt() * y[k].abs().max(1.0);
        let mut yp = y.to_vec();
        let mut ym = y.to_vec();
        yp[k] += h;
        ym[k] -= h;
        let (a, b) = (f(&yp), f(&ym));
        for r in 0..f0.len() {
            j[(r, k)] = (a[r] - b[r]) / (2.0 * h);
        }
    }
    j
}

fn jacobian_consistency() -> Outcome {
    let mut r = rng(3);
    let g = viscous_air();
    let (mut fd, mut cons) = (0.0f64, 0.0f64);
    let rel = |a: &DMatrix<f64>, b: &DMatrix<f64>| (a - b).norm() / b.norm().max(1e-300);
    for k in 0..100 {
        let nsd = 1 + k % 3;
        let m = nsd + 2;
        let y = random_state(nsd, &mut r);
        let grad = random_gradient(nsd, &mut r);
        let sm = system_matrices(&y, &grad, &g).unwrap();
        let v = y.to_vec();
        let oracle = |w: &[f64]| flux_oracle(&PrimitiveState::from_slice(w), &StateGradient::zero(nsd), &g).unwrap();
        fd = fd.max(rel(&sm.a0.to_dmatrix(), &fd_jacobian(|w| oracle(w).u, &v)));
        for i in 0..nsd {
            fd = fd.max(rel(&sm.a_advnp[i].to_dmatrix(), &fd_jacobian(|w| oracle(w).f_advnp[i].clone(), &v)));
            fd = fd.max(rel(&sm.a_p[i].to_dmatrix(), &fd_jacobian(|w| oracle(w).f_p[i].clone(), &v)));
        }
        let fl = flux_oracle(&y, &grad, &g).unwrap();
        let dy = grad.by_direction();
        let mut sp = vec![0.0; m];
        for i in 0..nsd {
            let t = sm.a_sp[i].mul_vec(&dy[i]);
            for c in 0..m {
                sp[c] += t[c];
            }
        }
        let vnorm = |a: &[f64], b: &[f64]| {
            let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
            let n: f64 = b.iter().map(|x| x * x).sum();
            (d / n.max(1e-300)).sqrt()
        };
        cons = cons.max(vnorm(&sp, &fl.f_sp));
        for i in 0..nsd {
            let mut kd = vec![0.0; m];
            for j in 0..nsd {
                let t = sm.k[i][j].mul_vec(&dy[j]);
                for c in 0..m {
                    kd[c] += t[c];
                }
            }
            cons = cons.max(vnorm(&kd, &fl.f_diff[i]));
        }
    }
    (fd < 1e-6 && cons < 1e-12, format!("finite-difference {fd:.2e}, construction {cons:.2e}"))
}

fn matrix_sqrt() -> Outcome {
    let mut r = rng(4);
    let (mut res, mut sym) = (0.0f64, 0.0f64);
    for k in 0..1000 {
        let n = 1 + k % 5;
        let a = admissible_matrix(n, &mut r);
        let s = matrix_sqrt_principal(&a).unwrap();
        res = res.max(rel_frobenius(&(&s * &s), &a));
    }
    for k in 0..1000 {
        let (a, oracle) = spd_with_sqrt(1 + k % 5, &mut r);
        sym = sym.max(rel_frobenius(&matrix_sqrt_principal(&a).unwrap(), &oracle));
    }
    (res < 1e-10 && sym < 1e-11, format!("max residual {res:.2e}, symmetric vs eigendecomposition {sym:.2e}"))
}

fn free_stream() -> Outcome {
    let air = GasProperties::air();
    let rest = [1e5, 0.0, 0.0, 300.0];
    let c = (air.gamma * air.r * 300.0).sqrt();
    let cfg = SolverConfig::default();
    let mut notes = Vec::new();
    let mut ok = true;
    let mut check = |name: &str, p: Problem, m: usize| {
        let mut iters = Vec::new();
        let mut drift = 0.0f64;
        let scale: Vec<f64> = if m == 3 { vec![1e5, c, 300.0] } else { vec![1e5, c, c, 300.0] };
        let run = march_slabs(&p, &cfg, |s| {
            iters.push(s.report.iterations());
            for (k, v) in s.y.iter().enumerate() {
                let c = k % m;
                let y0 = if m == 3 { [rest[0], rest[1], rest[3]][c] } else { rest[c] };
                drift = drift.max((v - y0).abs() / scale[c]);
            }
            Ok(())
        });
        let good = run.is_ok() && iters.len() == 10 && iters.iter().all(|&i| i == 1) && drift < 1e-10;
        ok &= good;
        notes.push(format!("{name}: drift {drift:.1e}, newton {:?}", iters.iter().max()));
    };
    let bc = DirichletSpec {
        conditions: vec![BoundaryCondition::free("wall", 4, true).with(1, 0.0)],
        pure_neumann: false,
    };
    let spatial = random_spatial(2, 6, 11);
    check(
        "fst",
        Problem {
            gas: air,
            bc: bc.clone(),
            initial: Arc::new(move |_| rest.to_vec()),
            t0: 0.0,
            slabs: SlabSource::Fst { spatial: spatial.clone(), dt: 1e-3, n_slabs: 10 },
            steady_tol: None,
        },
        4,
    );
    check(
        "sst",
        Problem {
            gas: air,
            bc,
            initial: Arc::new(move |_| rest.to_vec()),
            t0: 0.0,
            slabs: SlabSource::Sst {
                spatial,
                dt: 1e-3,
                n_slabs: 10,
                refine: Some(Arc::new(|m, _| {
                    let mut r = rng(m.nodes.len() as u64);
                    (0..m.nodes.len()).map(|_| r.gen_range(0..3)).collect()
                })),
            },
            steady_tol: None,
        },
        4,
    );
    let mesh = import_ust(Path::new(DEFAULT_UST_PULSE_MESH)).unwrap();
    let rest1 = [rest[0], 0.0, rest[3]];
    check(
        "ust",
        Problem {
            gas: air,
            bc: DirichletSpec {
                conditions: vec![BoundaryCondition::full("left", &rest1)],
                pure_neumann: false,
            },
            initial: Arc::new(move |_| rest1.to_vec()),
            t0: 0.0,
            slabs: SlabSource::Ust { mesh, n_slabs: 10 },
            steady_tol: None,
        },
        3,
    );
    (ok, notes.join("; "))
}

fn pressure_pulse() -> Outcome {
    let r = WaveReference::default();
    let g = GasProperties::inviscid_air();
    let tf = r.t_final(&g);
    let cfg = SolverConfig::default();
    let run = |method: Method| -> (stfem_core::trace::Trace, f64) {
        let ust = (method == Method::Ust).then(|| import_ust(Path::new(DEFAULT_UST_PULSE_MESH)).unwrap());
        let p = build_pulse_case(method, 2.0, 100, ust).unwrap();
        let clock = Instant::now();
        let tr = march_slabs(&p, &cfg, |_| Ok(())).unwrap();
        (tr, clock.elapsed().as_secs_f64())
    };
    let (fst, secs) = run(Method::Fst);
    let mf = pulse_metrics(&fst, tf, &r, &g).unwrap();
    let (sst, _) = run(Method::Sst);
    let ms = pulse_metrics(&sst, tf, &r, &g).unwrap();
    let diff = mf.p.iter().zip(&ms.p).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / r.p0;
    let (ust, _) = run(Method::Ust);
    let mu = pulse_metrics(&ust, tf, &r, &g).unwrap();
    let ok = mf.l2_rel < 0.01 && mf.undershoot <= 0.005 && diff <= 0.001 && secs < 900.0 && mu.undershoot < mf.undershoot;
    (
        ok,
        format!(
            "fst L2 {:.2e}, undershoot {:.3}% p0, {secs:.0}s; sst-fst max {:.3}% p0; ust undershoot {:.4}% p0",
            mf.l2_rel,
            100.0 * mf.undershoot,
            100.0 * diff,
            100.0 * mu.undershoot
        ),
    )
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn quadrature() -> Outcome {
    let mut worst = 0.0f64;
    for d in 2..=4 {
        let rule = quadrature_rule(d, 2).unwrap();
        let mut exps: Vec<Vec<usize>> = vec![vec![0; d]];
        for i in 0..d {
            let mut e = vec![0; d];
            e[i] = 1;
            exps.push(e.clone());
            for j in i..d {
                let mut e2 = e.clone();
                e2[j] += 1;
                exps.push(e2);
            }
        }
        for e in exps {
            let exact = e.iter().map(|&k| factorial(k)).product::<f64>() / factorial(d + e.iter().sum::<usize>());
            let q: f64 = rule
                .points
                .iter()
                .zip(&rule.weights)
                .map(|(x, w)| w * x.iter().zip(&e).map(|(x, &k)| x.powi(k as i32)).product::<f64>())
                .sum();
            worst = worst.max((q - exact).abs());
        }
    }
    (worst < 1e-12, format!("max error {worst:.2e}"))
}

fn mesh_validity() -> Outcome {
    let mut r = rng(8);
    let (mut defects, mut vol) = (0usize, 0.0f64);
    for k in 0..50 {
        let m = if k < 35 { random_spatial(2, r.gen_range(3..9), k) } else { random_spatial(3, r.gen_range(2..4), k) };
        let levels: Vec<u32> = (0..m.nodes.len()).map(|_| r.gen_range(0..4)).collect();
        let st = subdivide_sst(&m, 0.5, 0.75, &levels).unwrap();
        let rep = validate_conformity(&st);
        defects += rep.defects();
        vol = vol.max(rep.volume_error());
    }
    (defects == 0 && vol < 1e-12, format!("{defects} defects, max volume error {vol:.2e}"))
}

const PLATE_RECORD: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../results/flat_plate_coarse");

fn flat_plate_check(cp: &[(f64, f64)], steady: bool) -> bool {
    steady && single_peak_then_decay(cp, 0.1, 1e-2)
}

fn flat_plate() -> Option<Outcome> {
    if std::env::var("STFEM_ACCEPT_FLAT_PLATE").is_ok_and(|v| v == "1") {
        let mut p = flat_plate::build_flat_plate_case("coarse", 0.2, 60).unwrap();
        p.steady_tol = Some(1e-4);
        let mut cfg = SolverConfig::default();
        cfg.newton.rel_tol = 1e-3;
        cfg.krylov.tol = 1e-3;
        let mut n = 0;
        let tr = march_slabs(&p, &cfg, |_| {
            n += 1;
            Ok(())
        })
        .unwrap();
        let cp = wall_pressure_coefficient(&tr);
        return Some((flat_plate_check(&cp, n < 60), format!("in-process run, {n} slabs")));
    }
    let dir = Path::new(PLATE_RECORD);
    let summary = std::fs::read_to_string(dir.join("summary.txt")).ok()?;
    let csv = std::fs::read_to_string(dir.join("wall_cp.csv")).ok()?;
    let cp: Vec<(f64, f64)> = csv
        .lines()
        .skip(1)
        .filter_map(|l| {
            let (x, c) = l.split_once(',')?;
            Some((x.parse().ok()?, c.parse().ok()?))
        })
        .collect();
    let steady = summary.lines().any(|l| l.replace(' ', "") == "steady=true");
    let slabs = summary.lines().find(|l| l.starts_with("slabs")).unwrap_or("").to_string();
    Some((flat_plate_check(&cp, steady), format!("recorded run in results/flat_plate_coarse ({slabs})")))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 metric invariance", metric_invariance),
        ("2 M-matrix reproduction", m_matrix),
        ("3 Jacobian/flux consistency", jacobian_consistency),
        ("4 matrix square root", matrix_sqrt),
        ("5 free-stream preservation", free_stream),
        ("6 pressure pulse vs analytic reference", pressure_pulse),
        ("7 quadrature exactness", quadrature),
        ("8 mesh validity", mesh_validity),
    ];
    let only: Option<Vec<String>> = std::env::var("STFEM_CRITERIA").ok().map(|s| s.split(',').map(str::to_string).collect());
    let selected = |name: &str| only.as_ref().is_none_or(|o| o.iter().any(|k| name.split(' ').next() == Some(k.as_str())));
    let mut failed = 0;
    for (name, f) in criteria {
        if !selected(name) {
            continue;
        }
        let (ok, detail) = f();
        println!("criterion {name}: {} ({detail})", if ok { "PASS" } else { "FAIL" });
        failed += usize::from(!ok);
    }
    if selected("9") {
        match flat_plate() {
            Some((ok, detail)) => {
                println!("criterion 9 flat plate: {} ({detail})", if ok { "PASS" } else { "FAIL" });
                failed += usize::from(!ok);
            }
            None => {
                println!("criterion 9 flat plate: FAIL (no recorded run; see scripts/flat_plate.sh or set STFEM_ACCEPT_FLAT_PLATE=1)");
                failed += 1;
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
