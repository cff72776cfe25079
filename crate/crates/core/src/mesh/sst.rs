//! Simplex space-time slabs: staircase subdivision of extruded prisms with
//! node-wise temporal refinement.
//!
//! Each spatial vertex `v` carries `2^L_v` time intervals. Inside a prism
//! the vertex whose next time level is earliest advances first, ties broken
//! by ascending global index; each advance emits one simplex. The order of
//! moves on a shared face depends only on that face's vertices, so
//! neighbouring prisms split their common faces identically.

use super::{det_of, sorted, simplex_faces, ElementKind, Facet, Interface, SpaceTimeSlabMesh, SpatialMesh};
use crate::error::{Error, Result};
use crate::geometry::Point;
use std::collections::HashMap;

pub const MAX_LEVEL: u32 = 12;

/// One staircase step: the front before the move (one entry per vertex,
/// `(vertex position, time index)`) followed by the advanced point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StairStep {
    pub nodes: Vec<(usize, u32)>,
    pub moved: usize,
}

pub fn staircase(verts: &[usize], levels: &[u32]) -> Vec<StairStep> {
    let n = verts.len();
    let lmax = levels.iter().copied().max().unwrap_or(0);
    let mut k = vec![0u32; n];
    let mut out = Vec::new();
    loop {
        let mut best: Option<(u64, usize, usize)> = None;
        for v in 0..n {
            if k[v] < (1 << levels[v]) {
                let t = (k[v] as u64 + 1) << (lmax - levels[v]);
                let key = (t, verts[v], v);
                if best.map_or(true, |b| key < b) {
                    best = Some(key);
                }
            }
        }
        let Some((_, _, v)) = best else { break };
        let mut nodes: Vec<(usize, u32)> = (0..n).map(|i| (i, k[i])).collect();
        nodes.push((v, k[v] + 1));
        out.push(StairStep { nodes, moved: v });
        k[v] += 1;
    }
    out
}

/// Raises levels until neighbouring nodes differ by at most one.
pub fn smooth_levels(m: &SpatialMesh, levels: &[u32]) -> Result<Vec<u32>> {
    if levels.len() != m.nodes.len() {
        return Err(Error::RefinementConflict(format!(
            "{} refinement levels for {} nodes",
            levels.len(),
            m.nodes.len()
        )));
    }
    if let Some(l) = levels.iter().find(|&&l| l > MAX_LEVEL) {
        return Err(Error::RefinementConflict(format!("level {l} exceeds maximum {MAX_LEVEL}")));
    }
    let mut lv = levels.to_vec();
    let edges = m.edges();
    loop {
        let mut changed = false;
        for &(a, b) in &edges {
            if lv[a] > lv[b] + 1 {
                lv[b] = lv[a] - 1;
                changed = true;
            } else if lv[b] > lv[a] + 1 {
                lv[a] = lv[b] - 1;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(lv)
}

pub(crate) fn boundary_map(m: &SpatialMesh) -> HashMap<Vec<usize>, String> {
    m.boundary.iter().map(|f| (sorted(&f.nodes), f.tag.clone())).collect()
}

pub fn subdivide_sst(m: &SpatialMesh, t_lo: f64, t_hi: f64, refine_level: &[u32]) -> Result<SpaceTimeSlabMesh> {
    if !(t_hi > t_lo) {
        return Err(Error::NonPositiveTimeStep { t_lo, t_hi });
    }
    let levels = smooth_levels(m, refine_level)?;
    let n = m.nodes.len();
    let d = m.dim;
    let dt = t_hi - t_lo;
    let mut nodes = Vec::with_capacity(2 * n);
    let mut node_level = Vec::with_capacity(2 * n);
    let with_time = |p: &Point, t: f64| {
        let mut c = p.as_slice().to_vec();
        c.push(t);
        Point::new(&c)
    };
    for t in [t_lo, t_hi] {
        for (v, p) in m.nodes.iter().enumerate() {
            nodes.push(with_time(p, t));
            node_level.push(levels[v]);
        }
    }
    let mut offset = vec![0usize; n];
    for v in 0..n {
        offset[v] = nodes.len();
        let steps = 1u32 << levels[v];
        for k in 1..steps {
            nodes.push(with_time(&m.nodes[v], t_lo + dt * k as f64 / steps as f64));
            node_level.push(levels[v]);
        }
    }
    let node_id = |v: usize, k: u32| {
        if k == 0 {
            v
        } else if k == 1 << levels[v] {
            n + v
        } else {
            offset[v] + k as usize - 1
        }
    };
    let bmap = boundary_map(m);
    let mut elements = Vec::new();
    let mut parity = Vec::new();
    let mut lateral = Vec::new();
    for el in &m.elements {
        let lv: Vec<u32> = el.iter().map(|&v| levels[v]).collect();
        let faces: Vec<Option<&String>> = simplex_faces(el).iter().map(|f| bmap.get(&sorted(f))).collect();
        for step in staircase(el, &lv) {
            let mut s: Vec<usize> = step.nodes.iter().map(|&(vi, k)| node_id(el[vi], k)).collect();
            let coords: Vec<_> = s.iter().map(|&i| nodes[i].coords).collect();
            let flip = det_of(&coords, d + 1) < 0.0;
            let owner = elements.len();
            for (j, tag) in faces.iter().enumerate() {
                if let Some(tag) = tag {
                    if j != step.moved {
                        let f: Vec<usize> = s.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, &v)| v).collect();
                        lateral.push(Facet {
                            nodes: f,
                            tag: (*tag).clone(),
                            owner,
                        });
                    }
                }
            }
            if flip {
                s.swap(0, 1);
            }
            elements.push(s);
            parity.push(flip);
        }
    }
    Ok(SpaceTimeSlabMesh {
        space_dim: d,
        nodes,
        kind: ElementKind::Simplex,
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
        node_level,
        parity,
        t_lo,
        t_hi,
        spatial: Some(m.clone()),
    })
}
