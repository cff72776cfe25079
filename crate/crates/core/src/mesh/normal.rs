//! Facet normals by the generalized cross product.

use super::SpaceTimeSlabMesh;
use crate::error::{Error, Result};
use crate::geometry::MAX_DIM;
use nalgebra::DMatrix;

/// Unit outward normal and measure of a facet with `d` vertices in `R^d`,
/// oriented away from `owner_centroid`.
pub fn facet_normal_coords(facet: &[[f64; MAX_DIM]], owner_centroid: &[f64]) -> Result<(Vec<f64>, f64)> {
    let d = facet.len();
    let mut fc = vec![0.0; d];
    for x in facet {
        for k in 0..d {
            fc[k] += x[k] / d as f64;
        }
    }
    let mut n = vec![0.0; d];
    if d == 1 {
        n[0] = 1.0;
    } else {
        let e = DMatrix::from_fn(d - 1, d, |r, c| facet[r + 1][c] - facet[0][c]);
        for i in 0..d {
            let minor = e.clone().remove_column(i);
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            n[i] = sign * minor.determinant();
        }
    }
    let norm = n.iter().map(|v| v * v).sum::<f64>().sqrt();
    let scale: f64 = if d == 1 {
        1.0
    } else {
        (1..d).flat_map(|r| (0..d).map(move |c| (r, c))).map(|(r, c)| (facet[r][c] - facet[0][c]).abs()).fold(0.0, f64::max).powi(d as i32 - 1)
    };
    if !(norm > 1e-14 * scale) {
        return Err(Error::DegenerateFacet { norm });
    }
    let outward: f64 = (0..d).map(|k| n[k] * (fc[k] - owner_centroid[k])).sum();
    let s = if outward < 0.0 { -1.0 } else { 1.0 };
    let measure = norm / (1..d).map(|k| k as f64).product::<f64>();
    Ok((n.iter().map(|v| s * v / norm).collect(), measure))
}

/// Outward unit normal of facet `f` of element `owner` (given as a node list).
pub fn facet_normal(facet_nodes: &[usize], owner_nodes: &[usize], m: &SpaceTimeSlabMesh) -> Result<Vec<f64>> {
    let d = m.st_dim();
    let mut oc = vec![0.0; d];
    for &v in owner_nodes {
        for k in 0..d {
            oc[k] += m.nodes[v].coords[k] / owner_nodes.len() as f64;
        }
    }
    Ok(facet_normal_coords(&m.coords(facet_nodes), &oc)?.0)
}
