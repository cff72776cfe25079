//! Flat space-time slabs: one prism per spatial element.

use super::sst::{boundary_map, staircase};
use super::{sorted, simplex_faces, ElementKind, Facet, Interface, SpaceTimeSlabMesh, SpatialMesh};
use crate::error::{Error, Result};
use crate::geometry::Point;

pub fn extrude_fst(m: &SpatialMesh, t_lo: f64, t_hi: f64) -> Result<SpaceTimeSlabMesh> {
    if !(t_hi > t_lo) {
        return Err(Error::NonPositiveTimeStep { t_lo, t_hi });
    }
    let n = m.nodes.len();
    let mut nodes = Vec::with_capacity(2 * n);
    for t in [t_lo, t_hi] {
        for p in &m.nodes {
            let mut c = p.as_slice().to_vec();
            c.push(t);
            nodes.push(Point::new(&c));
        }
    }
    let elements: Vec<Vec<usize>> = m
        .elements
        .iter()
        .map(|el| el.iter().copied().chain(el.iter().map(|v| v + n)).collect())
        .collect();
    let bmap = boundary_map(m);
    let mut lateral = Vec::new();
    for (e, el) in m.elements.iter().enumerate() {
        for f in simplex_faces(el) {
            if let Some(tag) = bmap.get(&sorted(&f)) {
                for step in staircase(&f, &vec![0; f.len()]) {
                    // the staircase step over the face vertices is itself the facet
                    let nodes = step
                        .nodes
                        .iter()
                        .map(|&(vi, k)| if k == 0 { f[vi] } else { f[vi] + n })
                        .collect::<Vec<_>>();
                    lateral.push(Facet {
                        nodes,
                        tag: tag.clone(),
                        owner: e,
                    });
                }
            }
        }
    }
    Ok(SpaceTimeSlabMesh {
        space_dim: m.dim,
        nodes,
        kind: ElementKind::Prism,
        elements,
        lower: Interface {
            nodes: (0..n).collect(),
            facets: m.elements.clone(),
        },
        upper: Interface {
            nodes: (n..2 * n).collect(),
            facets: m.elements.iter().map(|el| el.iter().map(|v| v + n).collect()).collect(),
        },
        lateral,
        node_level: vec![0; 2 * n],
        parity: vec![false; m.elements.len()],
        t_lo,
        t_hi,
        spatial: Some(m.clone()),
    })
}
