//! Field output: legacy ASCII VTK slices and CSV line samples.

use crate::error::{Error, Result};
use crate::gas::GasProperties;
use crate::geometry::Point;
use crate::march::SlabResult;
use crate::mesh::{locate, ElementKind, SpatialMesh};
use crate::trace::{interface_mesh, Trace};
use std::fmt::Write as _;
use std::io;
use std::path::Path;

/// Spatial field of a solved slab at time `t`.
pub fn slice_at(slab: &SlabResult, t: f64) -> Result<Trace> {
    let mesh = &slab.mesh;
    let m = mesh.space_dim + 2;
    let tol = 1e-12 * (mesh.t_hi - mesh.t_lo);
    if t < mesh.t_lo - tol || t > mesh.t_hi + tol {
        return Err(Error::Io(io::Error::new(
            io::ErrorKind::InvalidInput,
            format!("slice time {t:e} outside slab range [{:e}, {:e}]", mesh.t_lo, mesh.t_hi),
        )));
    }
    let t = t.clamp(mesh.t_lo, mesh.t_hi);
    let (sp, d) = match &mesh.spatial {
        Some(s) => (s.clone(), s.dim),
        None => (interface_mesh(mesh, &mesh.lower), mesh.space_dim),
    };
    let mut values = Vec::with_capacity(sp.nodes.len() * m);
    if mesh.kind == ElementKind::Prism {
        let n = sp.nodes.len();
        let th = (t - mesh.t_lo) / (mesh.t_hi - mesh.t_lo);
        for v in 0..n {
            for c in 0..m {
                values.push((1.0 - th) * slab.y[v * m + c] + th * slab.y[(n + v) * m + c]);
            }
        }
    } else {
        let st = SpatialMesh {
            dim: d + 1,
            nodes: mesh.nodes.clone(),
            elements: mesh.simplices(),
            boundary: vec![],
        };
        for p in &sp.nodes {
            let mut x = p.as_slice().to_vec();
            x.push(t);
            let (e, l) = locate(&st, &x, 1e-9).ok_or_else(|| Error::Output(format!("point {x:?} not found in the slab")))?;
            for c in 0..m {
                values.push(st.elements[e].iter().zip(&l).map(|(&v, w)| w * slab.y[v * m + c]).sum());
            }
        }
    }
    Ok(Trace::new(sp, m, values))
}

fn cell_type(d: usize) -> u8 {
    match d {
        1 => 3,
        2 => 5,
        _ => 10,
    }
}

/// Writes a spatial field with point data `p`, `u`, `T` and `rho`.
pub fn write_vtk(path: &Path, field: &Trace, gas: &GasProperties, title: &str) -> Result<()> {
    let mesh = &field.mesh;
    let m = field.m;
    let d = mesh.dim;
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", mesh.nodes.len());
    for p in &mesh.nodes {
        let c = p.as_slice();
        let _ = writeln!(s, "{:.12e} {:.12e} {:.12e}", c[0], c.get(1).copied().unwrap_or(0.0), c.get(2).copied().unwrap_or(0.0));
    }
    let ne = mesh.elements.len();
    let _ = writeln!(s, "CELLS {ne} {}", ne * (d + 2));
    for el in &mesh.elements {
        let _ = write!(s, "{}", el.len());
        for v in el {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "CELL_TYPES {ne}");
    for _ in 0..ne {
        let _ = writeln!(s, "{}", cell_type(d));
    }
    let n = mesh.nodes.len();
    let _ = writeln!(s, "POINT_DATA {n}");
    let mut scalar = |name: &str, f: &dyn Fn(&[f64]) -> f64| {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for v in 0..n {
            let _ = writeln!(s, "{:.12e}", f(field.node(v)));
        }
    };
    scalar("p", &|y| y[0]);
    scalar("T", &|y| y[m - 1]);
    scalar("rho", &|y| y[0] / (gas.r * y[m - 1]));
    let _ = writeln!(s, "VECTORS u double");
    for v in 0..n {
        let y = field.node(v);
        let u: Vec<f64> = (0..3).map(|i| if i < m - 2 { y[1 + i] } else { 0.0 }).collect();
        let _ = writeln!(s, "{:.12e} {:.12e} {:.12e}", u[0], u[1], u[2]);
    }
    std::fs::write(path, s)?;
    Ok(())
}

/// Samples `n` points on the segment `a`-`b` (inclusive).
pub fn sample_line(field: &Trace, a: &[f64], b: &[f64], n: usize) -> Result<Vec<(Point, Vec<f64>)>> {
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let s = if n > 1 { k as f64 / (n - 1) as f64 } else { 0.0 };
        let x: Vec<f64> = a.iter().zip(b).map(|(p, q)| p + s * (q - p)).collect();
        let y = field.eval(&x)?;
        out.push((Point::new(&x), y[..field.m].to_vec()));
    }
    Ok(out)
}

/// CSV with columns `x, p, u1, T` and optional extra named columns.
pub fn write_line_csv(path: &Path, samples: &[(Point, Vec<f64>)], extra: &[(&str, Vec<f64>)]) -> Result<()> {
    let mut s = String::from("x,p,u1,T");
    for (name, _) in extra {
        s.push(',');
        s.push_str(name);
    }
    s.push('\n');
    for (k, (x, y)) in samples.iter().enumerate() {
        let m = y.len();
        let _ = write!(s, "{:.10e},{:.10e},{:.10e},{:.10e}", x.coords[0], y[0], y[1], y[m - 1]);
        for (_, col) in extra {
            let _ = write!(s, ",{:.10e}", col[k]);
        }
        s.push('\n');
    }
    std::fs::write(path, s)?;
    Ok(())
}
