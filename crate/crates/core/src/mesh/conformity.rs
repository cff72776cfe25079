//! Conformity checks on the simplices of a slab.

use super::normal::facet_normal_coords;
use super::{det_of, factorial, simplex_faces, sorted, SpaceTimeSlabMesh};
use std::collections::{HashMap, HashSet};

#[derive(Clone, Debug, Default)]
pub struct ConformityReport {
    pub n_simplices: usize,
    /// Facets shared by more than two simplices.
    pub overshared: Vec<Vec<usize>>,
    /// Single-owner facets that are not part of the declared boundary.
    pub open_facets: Vec<Vec<usize>>,
    /// Declared boundary facets that are not single-owner facets.
    pub stray_boundary: Vec<Vec<usize>>,
    pub dangling_nodes: Vec<usize>,
    pub volume_sum: f64,
    /// Volume enclosed by the single-owner facets (divergence theorem).
    pub boundary_volume: f64,
    /// Spatial volume times slab height, when the spatial mesh is known.
    pub expected_volume: Option<f64>,
}

impl ConformityReport {
    pub fn defects(&self) -> usize {
        self.overshared.len() + self.open_facets.len() + self.stray_boundary.len() + self.dangling_nodes.len()
    }

    /// Largest relative deviation between the volume sum and the reference volumes.
    pub fn volume_error(&self) -> f64 {
        if self.volume_sum == 0.0 {
            return 0.0;
        }
        let mut e = (self.volume_sum - self.boundary_volume).abs() / self.volume_sum;
        if let Some(v) = self.expected_volume {
            e = e.max((self.volume_sum - v).abs() / self.volume_sum);
        }
        e
    }
}

pub fn validate_conformity(m: &SpaceTimeSlabMesh) -> ConformityReport {
    let d = m.st_dim();
    let simplices = m.simplices();
    let mut rep = ConformityReport {
        n_simplices: simplices.len(),
        ..Default::default()
    };
    if simplices.is_empty() {
        return rep;
    }
    let mut owners: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
    let mut used = vec![false; m.nodes.len()];
    for (s, el) in simplices.iter().enumerate() {
        rep.volume_sum += det_of(&m.coords(el), d).abs() / factorial(d);
        for &v in el {
            used[v] = true;
        }
        for f in simplex_faces(el) {
            owners.entry(sorted(&f)).or_default().push(s);
        }
    }
    rep.dangling_nodes = (0..m.nodes.len()).filter(|&v| !used[v]).collect();
    let declared: HashSet<Vec<usize>> = m
        .lower
        .facets
        .iter()
        .chain(m.upper.facets.iter())
        .chain(m.lateral.iter().map(|f| &f.nodes))
        .map(|f| sorted(f))
        .collect();
    let mut bvol = 0.0;
    for (f, o) in &owners {
        if o.len() > 2 {
            rep.overshared.push(f.clone());
        }
        if o.len() == 1 {
            if !declared.contains(f) {
                rep.open_facets.push(f.clone());
            }
            let owner = &simplices[o[0]];
            let mut oc = vec![0.0; d];
            for &v in owner {
                for k in 0..d {
                    oc[k] += m.nodes[v].coords[k] / (d + 1) as f64;
                }
            }
            if let Ok((n, a)) = facet_normal_coords(&m.coords(f), &oc) {
                let x0 = m.nodes[f[0]].coords;
                bvol += (0..d).map(|k| x0[k] * n[k]).sum::<f64>() * a / d as f64;
            }
        }
    }
    for f in &declared {
        if owners.get(f).map_or(true, |o| o.len() != 1) {
            rep.stray_boundary.push(f.clone());
        }
    }
    rep.overshared.sort();
    rep.open_facets.sort();
    rep.stray_boundary.sort();
    rep.boundary_volume = bvol;
    rep.expected_volume = m.spatial.as_ref().map(|s| s.volume() * (m.t_hi - m.t_lo));
    rep
}
