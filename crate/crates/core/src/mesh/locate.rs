//! Point location in spatial meshes.

use super::SpatialMesh;
use nalgebra::{DMatrix, DVector};

/// Barycentric coordinates of `x` in element `e`.
pub fn barycentric(m: &SpatialMesh, e: usize, x: &[f64]) -> Option<Vec<f64>> {
    let d = m.dim;
    let el = &m.elements[e];
    let x0 = m.nodes[el[0]].coords;
    let j = DMatrix::from_fn(d, d, |r, c| m.nodes[el[c + 1]].coords[r] - x0[r]);
    let xi = j.lu().solve(&DVector::from_fn(d, |r, _| x[r] - x0[r]))?;
    let mut l = vec![1.0 - xi.sum()];
    l.extend(xi.iter());
    Some(l)
}

/// Element containing `x` and its barycentric coordinates, with tolerance
/// `tol` on negative coordinates.
pub fn locate(m: &SpatialMesh, x: &[f64], tol: f64) -> Option<(usize, Vec<f64>)> {
    (0..m.elements.len()).find_map(|e| {
        barycentric(m, e, x).filter(|l| l.iter().all(|&v| v >= -tol)).map(|l| (e, l))
    })
}
