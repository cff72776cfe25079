//! Geometric kernels for d-simplices, d = 1..4.
//!
//! The covariant metric `G = J^{-T} M J^{-1}` is built through the regular
//! simplex of unit Jacobian determinant, which makes it independent of the
//! node numbering.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use std::sync::OnceLock;

pub const MAX_DIM: usize = 4;

/// A point in up to four coordinates. In a slab context the last
/// coordinate is time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub coords: [f64; MAX_DIM],
    pub dim: usize,
}

impl Point {
    pub fn new(c: &[f64]) -> Self {
        assert!(!c.is_empty() && c.len() <= MAX_DIM);
        let mut coords = [0.0; MAX_DIM];
        coords[..c.len()].copy_from_slice(c);
        Self {
            coords,
            dim: c.len(),
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords[..self.dim]
    }

    pub fn dist(&self, other: &Point) -> f64 {
        self.as_slice()
            .iter()
            .zip(other.as_slice())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// A d-simplex given by its d+1 vertices.
#[derive(Clone, Debug)]
pub struct Simplex {
    pub nodes: Vec<Point>,
}

impl Simplex {
    pub fn new(nodes: Vec<Point>) -> Self {
        Self { nodes }
    }

    pub fn from_coords(coords: &[&[f64]]) -> Self {
        Self {
            nodes: coords.iter().map(|c| Point::new(c)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn max_edge(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.nodes.len() {
            for j in i + 1..self.nodes.len() {
                m = m.max(self.nodes[i].dist(&self.nodes[j]));
            }
        }
        m
    }
}

/// Covariant metric tensor and its inverse.
#[derive(Clone, Debug)]
pub struct MetricTensor {
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
}

/// P1 basis values at reference coordinates `xi`.
pub fn p1_basis(xi: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(xi.len() + 1);
    out.push(1.0 - xi.iter().sum::<f64>());
    out.extend_from_slice(xi);
    out
}

/// Reference gradients of the P1 basis, one row per basis function.
pub fn p1_basis_grad(d: usize) -> Vec<Vec<f64>> {
    let mut rows = vec![vec![-1.0; d]];
    for j in 0..d {
        let mut r = vec![0.0; d];
        r[j] = 1.0;
        rows.push(r);
    }
    rows
}

fn factorial(d: usize) -> f64 {
    (1..=d).map(|k| k as f64).product()
}

/// Jacobian of the affine map from the reference simplex, column i = x_{i+1} - x_1.
pub fn element_jacobian(s: &Simplex) -> Result<DMatrix<f64>> {
    let d = s.dim();
    let x0 = s.nodes[0].as_slice();
    let j = DMatrix::from_fn(d, d, |r, c| s.nodes[c + 1].as_slice()[r] - x0[r]);
    let det = j.determinant();
    let threshold = 1e-14 * s.max_edge().powi(d as i32);
    if !(det.abs() >= threshold) || det == 0.0 {
        return Err(Error::DegenerateElement { det, threshold });
    }
    Ok(j)
}

pub fn simplex_volume(s: &Simplex) -> f64 {
    let d = s.dim();
    let x0 = s.nodes[0].as_slice();
    let j = DMatrix::from_fn(d, d, |r, c| s.nodes[c + 1].as_slice()[r] - x0[r]);
    j.determinant().abs() / factorial(d)
}

/// Edge length of the regular simplex with unit Jacobian determinant.
pub fn regular_edge_length(d: usize) -> f64 {
    (2.0 * ((d + 1) as f64).powf(-1.0 / d as f64)).sqrt()
}

/// Vertices of a regular d-simplex whose Jacobian has determinant one.
pub fn regular_simplex_nodes(d: usize) -> Vec<Point> {
    assert!((1..=MAX_DIM).contains(&d));
    // unit edge, built by stacking each new vertex above the previous centroid
    let mut verts: Vec<Vec<f64>> = vec![vec![0.0; d], {
        let mut v = vec![0.0; d];
        v[0] = 1.0;
        v
    }];
    for k in 1..d {
        let n = verts.len() as f64;
        let mut c = vec![0.0; d];
        for v in &verts {
            for i in 0..d {
                c[i] += v[i] / n;
            }
        }
        let r2: f64 = verts[0].iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum();
        c[k] = (1.0 - r2).sqrt();
        verts.push(c);
    }
    let det = DMatrix::from_fn(d, d, |r, c| verts[c + 1][r] - verts[0][r]).determinant();
    let s = det.powf(-1.0 / d as f64);
    verts
        .iter()
        .map(|v| Point::new(&v.iter().map(|x| x * s).collect::<Vec<_>>()))
        .collect()
}

/// Gram matrix `M = J_r^T J_r` of the regular simplex.
pub fn regular_simplex_gram(d: usize) -> DMatrix<f64> {
    static CACHE: OnceLock<Vec<DMatrix<f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| {
        (0..=MAX_DIM)
            .map(|d| {
                let l2 = if d == 0 { 0.0 } else { regular_edge_length(d).powi(2) };
                DMatrix::from_fn(d, d, |i, j| if i == j { l2 } else { 0.5 * l2 })
            })
            .collect()
    });
    cache[d].clone()
}

/// `G = J^{-T} M J^{-1}` together with `G^{-1} = J M^{-1} J^T`.
pub fn covariant_metric(s: &Simplex) -> Result<MetricTensor> {
    let j = element_jacobian(s)?;
    let d = s.dim();
    let jinv = j.clone().try_inverse().ok_or(Error::DegenerateElement {
        det: 0.0,
        threshold: 0.0,
    })?;
    let m = regular_simplex_gram(d);
    let g = jinv.transpose() * &m * &jinv;
    let minv = m.try_inverse().expect("regular gram is invertible");
    let g_inv = &j * minv * j.transpose();
    Ok(MetricTensor { g, g_inv })
}

/// Affine data of a simplex needed by the assembler: physical gradients of
/// the P1 basis, the determinant, and the covariant metric.
#[derive(Clone, Copy, Debug)]
pub struct AffineSimplex {
    pub d: usize,
    pub det: f64,
    /// `grads[a][i]` = d N_a / d x_i
    pub grads: [[f64; MAX_DIM]; MAX_DIM + 1],
    pub g: [[f64; MAX_DIM]; MAX_DIM],
}

impl AffineSimplex {
    pub fn new(coords: &[[f64; MAX_DIM]], d: usize) -> Result<Self> {
        let x0 = coords[0];
        let j = DMatrix::from_fn(d, d, |r, c| coords[c + 1][r] - x0[r]);
        let det = j.determinant();
        let mut max_edge: f64 = 0.0;
        for a in 0..=d {
            for b in a + 1..=d {
                let e: f64 = (0..d).map(|k| (coords[a][k] - coords[b][k]).powi(2)).sum();
                max_edge = max_edge.max(e.sqrt());
            }
        }
        let threshold = 1e-14 * max_edge.powi(d as i32);
        if !(det.abs() >= threshold) || det == 0.0 {
            return Err(Error::DegenerateElement { det, threshold });
        }
        let jinv = j.try_inverse().ok_or(Error::DegenerateElement { det, threshold })?;
        let mut grads = [[0.0; MAX_DIM]; MAX_DIM + 1];
        for i in 0..d {
            let mut s = 0.0;
            for r in 0..d {
                grads[r + 1][i] = jinv[(r, i)];
                s += jinv[(r, i)];
            }
            grads[0][i] = -s;
        }
        let gm = jinv.transpose() * regular_simplex_gram(d) * &jinv;
        let mut g = [[0.0; MAX_DIM]; MAX_DIM];
        for r in 0..d {
            for c in 0..d {
                g[r][c] = gm[(r, c)];
            }
        }
        Ok(Self { d, det, grads, g })
    }

    pub fn volume(&self) -> f64 {
        self.det.abs() / factorial(self.d)
    }
}
