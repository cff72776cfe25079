#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stfem_core::gas::{GasProperties, PrimitiveState};
use stfem_core::geometry::{Point, Simplex};
use stfem_core::mesh::SpatialMesh;
use stfem_core::physics::StateGradient;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Jittered structured mesh (random diagonals in 2D) with a random node
/// numbering.
pub fn random_spatial(dim: usize, n: usize, seed: u64) -> SpatialMesh {
    let mut r = rng(seed);
    let mut m = match dim {
        1 => SpatialMesh::interval(0.0, 1.0, n),
        2 => {
            let mut m = SpatialMesh::rectangle(0.0, 1.0, 0.0, 1.0, n, n, |_| "wall".into());
            for e in (0..m.elements.len()).step_by(2) {
                if r.gen_bool(0.5) {
                    let a = m.elements[e].clone();
                    let b = m.elements[e + 1].clone();
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
                p.coords[k] += r.gen_range(-0.2..0.2) * h;
            }
        }
    }
    let nn = m.nodes.len();
    let mut perm: Vec<usize> = (0..nn).collect();
    for i in (1..nn).rev() {
        perm.swap(i, r.gen_range(0..=i));
    }
    let mut nodes = m.nodes.clone();
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

/// Random simplex in `[-1, 1]^d` with volume bounded away from zero.
pub fn random_simplex(d: usize, r: &mut ChaCha8Rng) -> Simplex {
    loop {
        let pts: Vec<Point> = (0..=d).map(|_| Point::new(&(0..d).map(|_| r.gen_range(-1.0..1.0)).collect::<Vec<_>>())).collect();
        let e = DMatrix::from_fn(d, d, |i, k| pts[k + 1].coords[i] - pts[0].coords[i]);
        let scale = (1..=d).map(|k| k as f64).product::<f64>().recip();
        if e.determinant().abs() * scale > 0.02 {
            return Simplex::new(pts);
        }
    }
}

pub fn random_state(nsd: usize, r: &mut ChaCha8Rng) -> PrimitiveState {
    let u: Vec<f64> = (0..nsd).map(|_| r.gen_range(-300.0..300.0)).collect();
    PrimitiveState::new(r.gen_range(1e4..1e6), &u, r.gen_range(150.0..1500.0))
}

pub fn random_gradient(nsd: usize, r: &mut ChaCha8Rng) -> StateGradient {
    let scale = [1e4, 100.0, 100.0, 100.0, 50.0];
    let m = nsd + 2;
    StateGradient {
        dy: (0..m).map(|c| (0..nsd).map(|_| r.gen_range(-1.0..1.0) * scale[if c == m - 1 { 4 } else { c }]).collect()).collect(),
        dydt: (0..m).map(|c| r.gen_range(-1.0..1.0) * scale[if c == m - 1 { 4 } else { c }]).collect(),
    }
}

pub fn viscous_air() -> GasProperties {
    GasProperties::air()
}

/// All permutations of `0..n`.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..rest.len() {
            let v = rest.remove(i);
            prefix.push(v);
            rec(prefix, rest, out);
            prefix.pop();
            rest.insert(i, v);
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut (0..n).collect(), &mut out);
    out
}

pub fn rel_frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm()
}

/// Random diagonalizable matrix of size `n` with spectrum in the open right
/// half-plane, including complex pairs.
pub fn admissible_matrix(n: usize, r: &mut ChaCha8Rng) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(n, n);
    let mut k = 0;
    while k < n {
        let re = 10f64.powf(r.gen_range(-2.0..2.0));
        if k + 1 < n && r.gen_bool(0.4) {
            let im = re * r.gen_range(-2.0..2.0);
            d[(k, k)] = re;
            d[(k + 1, k + 1)] = re;
            d[(k, k + 1)] = im;
            d[(k + 1, k)] = -im;
            k += 2;
        } else {
            d[(k, k)] = re;
            k += 1;
        }
    }
    let v = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 } + r.gen_range(-0.4..0.4));
    let vinv = v.clone().try_inverse().unwrap();
    v * d * vinv
}

/// Random symmetric positive definite matrix and its eigendecomposition
/// square root.
pub fn spd_with_sqrt(n: usize, r: &mut ChaCha8Rng) -> (DMatrix<f64>, DMatrix<f64>) {
    let q = DMatrix::from_fn(n, n, |_, _| r.gen_range(-1.0..1.0)).qr().q();
    let l: Vec<f64> = (0..n).map(|_| 10f64.powf(r.gen_range(-2.0..2.0))).collect();
    let a = &q * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(l.clone())) * q.transpose();
    let a = (&a + a.transpose()) * 0.5;
    let e = a.clone().symmetric_eigen();
    let s = &e.eigenvectors * DMatrix::from_diagonal(&e.eigenvalues.map(f64::sqrt)) * e.eigenvectors.transpose();
    (a, s)
}
