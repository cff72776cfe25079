//! Spatial meshes and space-time slab meshes.

pub mod conformity;
pub mod extrude;
pub mod io;
pub mod locate;
pub mod normal;
pub mod sst;

pub use conformity::{validate_conformity, ConformityReport};
pub use extrude::extrude_fst;
pub use io::{import_ust, read_gmsh_spatial, read_spatial_mesh, write_spatial_stmesh, write_stmesh};
pub use normal::{facet_normal, facet_normal_coords};
pub use sst::{smooth_levels, subdivide_sst};
pub use locate::{barycentric, locate};

use crate::error::{Error, Result};
use crate::geometry::{Point, MAX_DIM};
use nalgebra::DMatrix;
use std::collections::HashMap;

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryFacet {
    pub nodes: Vec<usize>,
    pub tag: String,
}

/// A conforming simplex mesh of the spatial domain.
#[derive(Clone, Debug, Default)]
pub struct SpatialMesh {
    pub dim: usize,
    pub nodes: Vec<Point>,
    pub elements: Vec<Vec<usize>>,
    pub boundary: Vec<BoundaryFacet>,
}

/// Signed determinant of the edge matrix `x_k - x_0` of a simplex.
pub fn det_of(coords: &[[f64; MAX_DIM]], d: usize) -> f64 {
    DMatrix::from_fn(d, d, |r, c| coords[c + 1][r] - coords[0][r]).determinant()
}

pub(crate) fn factorial(d: usize) -> f64 {
    (1..=d).map(|k| k as f64).product()
}

/// Faces of a simplex given by its vertex list: face `k` omits vertex `k`.
pub fn simplex_faces(el: &[usize]) -> Vec<Vec<usize>> {
    (0..el.len())
        .map(|k| el.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, v)| *v).collect())
        .collect()
}

pub(crate) fn sorted(v: &[usize]) -> Vec<usize> {
    let mut s = v.to_vec();
    s.sort_unstable();
    s
}

impl SpatialMesh {
    pub fn coords(&self, el: &[usize]) -> Vec<[f64; MAX_DIM]> {
        el.iter().map(|&v| self.nodes[v].coords).collect()
    }

    pub fn element_volume(&self, e: usize) -> f64 {
        det_of(&self.coords(&self.elements[e]), self.dim).abs() / factorial(self.dim)
    }

    pub fn volume(&self) -> f64 {
        (0..self.elements.len()).map(|e| self.element_volume(e)).sum()
    }

    /// Reorders element nodes to positive orientation.
    pub fn orient(&mut self) -> Result<()> {
        for e in 0..self.elements.len() {
            let det = det_of(&self.coords(&self.elements[e]), self.dim);
            if det == 0.0 {
                return Err(Error::NegativeVolumeElement { element: e });
            }
            if det < 0.0 {
                self.elements[e].swap(0, 1);
            }
        }
        Ok(())
    }

    pub fn tags(&self) -> Vec<String> {
        let mut t: Vec<String> = self.boundary.iter().map(|f| f.tag.clone()).collect();
        t.sort();
        t.dedup();
        t
    }

    /// Node adjacency through element edges.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e = Vec::new();
        for el in &self.elements {
            for a in 0..el.len() {
                for b in a + 1..el.len() {
                    e.push((el[a].min(el[b]), el[a].max(el[b])));
                }
            }
        }
        e.sort_unstable();
        e.dedup();
        e
    }

    /// Faces with exactly one owning element.
    pub fn exterior_faces(&self) -> Vec<Vec<usize>> {
        let mut count: HashMap<Vec<usize>, usize> = HashMap::new();
        for el in &self.elements {
            for f in simplex_faces(el) {
                *count.entry(sorted(&f)).or_default() += 1;
            }
        }
        let mut out: Vec<Vec<usize>> = count.into_iter().filter(|(_, c)| *c == 1).map(|(f, _)| f).collect();
        out.sort();
        out
    }

    /// Tags every exterior face by the label returned for its centroid.
    pub fn tag_boundary(&mut self, tagger: impl Fn(&[f64]) -> String) {
        let d = self.dim;
        self.boundary = self
            .exterior_faces()
            .into_iter()
            .map(|f| {
                let mut c = vec![0.0; d];
                for &v in &f {
                    for k in 0..d {
                        c[k] += self.nodes[v].coords[k] / f.len() as f64;
                    }
                }
                BoundaryFacet {
                    tag: tagger(&c),
                    nodes: f,
                }
            })
            .collect();
    }

    /// Uniform 1D mesh of `[x0, x1]` with end tags `left` and `right`.
    pub fn interval(x0: f64, x1: f64, n: usize) -> Self {
        let nodes = (0..=n).map(|i| Point::new(&[x0 + (x1 - x0) * i as f64 / n as f64])).collect();
        let elements = (0..n).map(|i| vec![i, i + 1]).collect();
        Self {
            dim: 1,
            nodes,
            elements,
            boundary: vec![
                BoundaryFacet { nodes: vec![0], tag: "left".into() },
                BoundaryFacet { nodes: vec![n], tag: "right".into() },
            ],
        }
    }

    /// `nx x ny` squares on `[x0,x1] x [y0,y1]`, each split into two right
    /// triangles along the diagonal from lower-left to upper-right. Boundary
    /// faces are labelled by `tagger(centroid)`.
    pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize, tagger: impl Fn(&[f64]) -> String) -> Self {
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                nodes.push(Point::new(&[
                    x0 + (x1 - x0) * i as f64 / nx as f64,
                    y0 + (y1 - y0) * j as f64 / ny as f64,
                ]));
            }
        }
        let mut elements = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                elements.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                elements.push(vec![id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
            }
        }
        let mut m = Self {
            dim: 2,
            nodes,
            elements,
            boundary: vec![],
        };
        m.tag_boundary(tagger);
        m
    }

    /// `n^3` cubes of `[0,1]^3`, each split into six Kuhn tetrahedra.
    pub fn unit_cube(n: usize, tagger: impl Fn(&[f64]) -> String) -> Self {
        let id = |i: usize, j: usize, k: usize| (k * (n + 1) + j) * (n + 1) + i;
        let h = 1.0 / n as f64;
        let mut nodes = Vec::new();
        for k in 0..=n {
            for j in 0..=n {
                for i in 0..=n {
                    nodes.push(Point::new(&[i as f64 * h, j as f64 * h, k as f64 * h]));
                }
            }
        }
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let mut elements = Vec::new();
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    for p in perms {
                        let mut c = [i, j, k];
                        let mut el = vec![id(c[0], c[1], c[2])];
                        for ax in p {
                            c[ax] += 1;
                            el.push(id(c[0], c[1], c[2]));
                        }
                        elements.push(el);
                    }
                }
            }
        }
        let mut m = Self {
            dim: 3,
            nodes,
            elements,
            boundary: vec![],
        };
        m.orient().expect("Kuhn tetrahedra are non-degenerate");
        m.tag_boundary(tagger);
        m
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElementKind {
    Simplex,
    /// Extruded spatial simplex: lower nodes followed by upper nodes.
    Prism,
}

/// A facet on the slab boundary, with the element that owns it.
#[derive(Clone, Debug, PartialEq)]
pub struct Facet {
    pub nodes: Vec<usize>,
    pub tag: String,
    pub owner: usize,
}

/// Nodes and facets of the lower or upper slab interface.
#[derive(Clone, Debug, Default)]
pub struct Interface {
    pub nodes: Vec<usize>,
    pub facets: Vec<Vec<usize>>,
}

#[derive(Clone, Debug)]
pub struct SpaceTimeSlabMesh {
    pub space_dim: usize,
    pub nodes: Vec<Point>,
    pub kind: ElementKind,
    pub elements: Vec<Vec<usize>>,
    pub lower: Interface,
    pub upper: Interface,
    pub lateral: Vec<Facet>,
    pub node_level: Vec<u32>,
    /// Whether canonical reordering flipped the element's node order.
    pub parity: Vec<bool>,
    pub t_lo: f64,
    pub t_hi: f64,
    /// The extruded spatial mesh, for FST and SST slabs.
    pub spatial: Option<SpatialMesh>,
}

impl SpaceTimeSlabMesh {
    pub fn st_dim(&self) -> usize {
        self.space_dim + 1
    }

    pub fn coords(&self, el: &[usize]) -> Vec<[f64; MAX_DIM]> {
        el.iter().map(|&v| self.nodes[v].coords).collect()
    }

    /// Simplices used for integration: the element itself, or the staircase
    /// split of a prism ordered by global node index.
    pub fn integration_simplices(&self, e: usize) -> Vec<Vec<usize>> {
        let el = &self.elements[e];
        match self.kind {
            ElementKind::Simplex => vec![el.clone()],
            ElementKind::Prism => {
                let n = self.space_dim + 1;
                let lower = &el[..n];
                let upper = &el[n..];
                sst::staircase(lower, &vec![0; n])
                    .into_iter()
                    .map(|step| {
                        step.nodes
                            .iter()
                            .map(|&(vi, k)| if k == 0 { lower[vi] } else { upper[vi] })
                            .collect()
                    })
                    .collect()
            }
        }
    }

    /// All integration simplices, positively oriented.
    pub fn simplices(&self) -> Vec<Vec<usize>> {
        let d = self.st_dim();
        let mut out = Vec::new();
        for e in 0..self.elements.len() {
            for mut s in self.integration_simplices(e) {
                if det_of(&self.coords(&s), d) < 0.0 {
                    s.swap(0, 1);
                }
                out.push(s);
            }
        }
        out
    }

    pub fn element_volume(&self, e: usize) -> f64 {
        let d = self.st_dim();
        self.integration_simplices(e)
            .iter()
            .map(|s| det_of(&self.coords(s), d).abs() / factorial(d))
            .sum()
    }

    pub fn volume(&self) -> f64 {
        (0..self.elements.len()).map(|e| self.element_volume(e)).sum()
    }

    /// Spatial coordinates of a node.
    pub fn spatial_coords(&self, v: usize) -> &[f64] {
        &self.nodes[v].coords[..self.space_dim]
    }

    pub fn time(&self, v: usize) -> f64 {
        self.nodes[v].coords[self.space_dim]
    }

    pub fn lateral_tags(&self) -> Vec<String> {
        let mut t: Vec<String> = self.lateral.iter().map(|f| f.tag.clone()).collect();
        t.sort();
        t.dedup();
        t
    }

    /// Copy of the slab shifted in time by `dt`.
    pub fn shifted(&self, dt: f64) -> Self {
        let mut m = self.clone();
        let d = self.space_dim;
        for p in &mut m.nodes {
            p.coords[d] += dt;
        }
        m.t_lo += dt;
        m.t_hi += dt;
        m
    }

    /// Nodes of the element, counted once each, in element order.
    pub fn element_nodes(&self, e: usize) -> &[usize] {
        &self.elements[e]
    }
}

#[cfg(test)]
pub(crate) mod testmesh {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Jittered structured mesh with random diagonals (2D) and a random
    /// permutation of the node numbering.
    pub fn random_spatial(dim: usize, n: usize, seed: u64) -> SpatialMesh {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = match dim {
            1 => SpatialMesh::interval(0.0, 1.0, n),
            2 => {
                let mut m = SpatialMesh::rectangle(0.0, 1.0, 0.0, 1.0, n, n, |_| "wall".into());
                for e in (0..m.elements.len()).step_by(2) {
                    if rng.gen_bool(0.5) {
                        let a = m.elements[e].clone();
                        let b = m.elements[e + 1].clone();
                        // a = (ll, lr, ur), b = (ll, ur, ul) -> split along the other diagonal
                        m.elements[e] = vec![a[0], a[1], b[2]];
                        m.elements[e + 1] = vec![a[1], a[2], b[2]];
                    }
                }
                m
            }
            _ => SpatialMesh::unit_cube(n, |_| "wall".into()),
        };
        let h = 1.0 / n as f64;
        for p in &mut m.nodes {
            for k in 0..dim {
                let x = p.coords[k];
                if x > 1e-12 && x < 1.0 - 1e-12 {
                    p.coords[k] += rng.gen_range(-0.2..0.2) * h;
                }
            }
        }
        let nn = m.nodes.len();
        let mut perm: Vec<usize> = (0..nn).collect();
        for i in (1..nn).rev() {
            let j = rng.gen_range(0..=i);
            perm.swap(i, j);
        }
        let mut nodes = vec![m.nodes[0]; nn];
        for (old, &new) in perm.iter().enumerate() {
            nodes[new] = m.nodes[old];
        }
        m.nodes = nodes;
        for el in &mut m.elements {
            for v in el.iter_mut() {
                *v = perm[*v];
            }
        }
        for f in &mut m.boundary {
            for v in f.nodes.iter_mut() {
                *v = perm[*v];
            }
        }
        m.orient().unwrap();
        m
    }
}
