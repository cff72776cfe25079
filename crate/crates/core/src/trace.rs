//! Piecewise linear fields on a slab interface.

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::linalg::{SVec, MAX_M};
use crate::mesh::{locate, Interface, SpaceTimeSlabMesh, SpatialMesh};
use std::collections::{HashMap, HashSet};

fn key(x: &[f64]) -> Vec<u64> {
    x.iter().map(|v| (v + 0.0).to_bits()).collect()
}

/// A P1 field over a spatial simplex mesh, `m` values per node.
#[derive(Clone, Debug)]
pub struct Trace {
    pub mesh: SpatialMesh,
    pub m: usize,
    pub values: Vec<f64>,
    index: HashMap<Vec<u64>, usize>,
    cells: HashSet<Vec<usize>>,
}

impl Trace {
    pub fn new(mesh: SpatialMesh, m: usize, values: Vec<f64>) -> Self {
        let index = mesh.nodes.iter().enumerate().map(|(i, p)| (key(p.as_slice()), i)).collect();
        let cells = mesh
            .elements
            .iter()
            .map(|e| {
                let mut e = e.clone();
                e.sort_unstable();
                e
            })
            .collect();
        Self {
            mesh,
            m,
            values,
            index,
            cells,
        }
    }

    pub fn from_fn(mesh: SpatialMesh, m: usize, f: impl Fn(&[f64]) -> Vec<f64>) -> Self {
        let values = mesh.nodes.iter().flat_map(|p| f(p.as_slice())).collect();
        Self::new(mesh, m, values)
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.values[i * self.m..(i + 1) * self.m]
    }

    /// Value at `x`: exact nodal value when `x` is a node, otherwise linear
    /// interpolation in the containing element.
    pub fn eval(&self, x: &[f64]) -> Result<SVec<f64>> {
        let mut out = [0.0; MAX_M];
        if let Some(&i) = self.index.get(&key(x)) {
            out[..self.m].copy_from_slice(self.node(i));
            return Ok(out);
        }
        let (e, l) = locate(&self.mesh, x, 1e-9)
            .ok_or_else(|| Error::InterfaceMismatch(format!("point {x:?} outside the trace mesh")))?;
        for (a, &v) in self.mesh.elements[e].iter().enumerate() {
            for c in 0..self.m {
                out[c] += l[a] * self.values[v * self.m + c];
            }
        }
        Ok(out)
    }

    /// Trace nodes of the simplex with vertices `verts` when it is an element
    /// of the trace mesh, in the order of `verts`.
    pub fn element_nodes(&self, verts: &[&[f64]]) -> Option<Vec<usize>> {
        let ids = verts.iter().map(|x| self.index.get(&key(x)).copied()).collect::<Option<Vec<_>>>()?;
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        self.cells.contains(&sorted).then_some(ids)
    }

    /// Extracts the field on an interface of a solved slab.
    pub fn from_interface(slab: &SpaceTimeSlabMesh, iface: &Interface, m: usize, y: &[f64]) -> Self {
        let values = iface.nodes.iter().flat_map(|&v| y[v * m..(v + 1) * m].to_vec()).collect();
        Self::new(interface_mesh(slab, iface), m, values)
    }

    /// Nodal values of the field at every node of `slab` (constant in time).
    pub fn extend(&self, slab: &SpaceTimeSlabMesh) -> Result<Vec<f64>> {
        let mut y = Vec::with_capacity(slab.nodes.len() * self.m);
        for v in 0..slab.nodes.len() {
            y.extend_from_slice(&self.eval(slab.spatial_coords(v))?[..self.m]);
        }
        Ok(y)
    }
}

/// Spatial simplex mesh of a slab interface, nodes in interface order.
pub fn interface_mesh(slab: &SpaceTimeSlabMesh, iface: &Interface) -> SpatialMesh {
    let local: HashMap<usize, usize> = iface.nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    SpatialMesh {
        dim: slab.space_dim,
        nodes: iface.nodes.iter().map(|&v| Point::new(slab.spatial_coords(v))).collect(),
        elements: iface.facets.iter().map(|f| f.iter().map(|v| local[v]).collect()).collect(),
        boundary: vec![],
    }
}
