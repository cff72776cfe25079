//! Symmetric quadrature rules on the reference d-simplex.

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub dim: usize,
    /// Reference coordinates `xi` (d entries each).
    pub points: Vec<Vec<f64>>,
    /// Weights summing to the reference volume 1/d!.
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// Barycentric coordinates of point `q` (d+1 entries).
    pub fn barycentric(&self, q: usize) -> Vec<f64> {
        crate::geometry::p1_basis(&self.points[q])
    }
}

fn reference_volume(d: usize) -> f64 {
    1.0 / (1..=d).map(|k| k as f64).product::<f64>()
}

/// Points given by barycentric coordinates with one distinguished entry.
fn permuted(d: usize, special: f64, other: f64) -> Vec<Vec<f64>> {
    (0..=d)
        .map(|s| {
            let bary: Vec<f64> = (0..=d).map(|k| if k == s { special } else { other }).collect();
            bary[1..].to_vec()
        })
        .collect()
}

pub fn quadrature_rule(d: usize, degree: usize) -> Result<QuadratureRule> {
    if !(1..=4).contains(&d) || !(1..=3).contains(&degree) {
        return Err(Error::UnsupportedRule { dim: d, degree });
    }
    let v = reference_volume(d);
    let df = d as f64;
    let (points, weights) = match degree {
        1 => (vec![vec![1.0 / (df + 1.0); d]], vec![v]),
        2 => {
            let a = (df + 2.0 - (df + 2.0).sqrt()) / ((df + 1.0) * (df + 2.0));
            let b = 1.0 - df * a;
            (permuted(d, b, a), vec![v / (df + 1.0); d + 1])
        }
        _ if d == 1 => {
            let h = 0.5 / 3f64.sqrt();
            (vec![vec![0.5 - h], vec![0.5 + h]], vec![0.5, 0.5])
        }
        _ => {
            let mut pts = vec![vec![1.0 / (df + 1.0); d]];
            let mut w = vec![-(df + 1.0).powi(2) / (4.0 * (df + 2.0)) * v];
            pts.extend(permuted(d, 3.0 / (df + 3.0), 1.0 / (df + 3.0)));
            let wp = (df + 3.0).powi(2) / (4.0 * (df + 1.0) * (df + 2.0)) * v;
            w.extend(std::iter::repeat(wp).take(d + 1));
            (pts, w)
        }
    };
    Ok(QuadratureRule {
        dim: d,
        points,
        weights,
    })
}
