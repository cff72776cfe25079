//! Residual and consistent tangent of the stabilized space-time weak form
//! on one slab.
//!
//! Per quadrature point the state, its spatial gradient and its time
//! derivative are seeded as dual variables, so the tangent of every volume
//! term (including the dependence of `tau` on the state) is exact. The
//! lateral boundary flux is evaluated at the current iterate and carries no
//! tangent.

use crate::ad::{Dual, Scalar};
use crate::dirichlet::{Constraints, DirichletSpec};
use crate::error::{Error, Result};
use crate::gas::GasProperties;
use crate::geometry::{AffineSimplex, MAX_DIM};
use crate::linalg::{BlockCsr, SMat, SVec, MAX_M};
use crate::mesh::{det_of, facet_normal_coords, ElementKind, SpaceTimeSlabMesh};
use crate::physics::{neumann_flux_s, pointwise, system_matrices_s, MAX_SD};
use crate::quadrature::quadrature_rule;
use crate::supg::{c_inv, hatted_matrices, tau_element};
use crate::trace::Trace;
use rayon::prelude::*;

pub const MAX_LOC: usize = 2 * (MAX_SD + 1);
/// Value, spatial derivatives and time derivative.
const NQ: usize = MAX_SD + 2;
const CHUNK: usize = 2048;

type Phi = [[f64; NQ]; MAX_LOC];

#[derive(Clone, Copy, Debug)]
struct QPoint {
    w: f64,
    phi: Phi,
}

#[derive(Clone, Debug)]
struct ElemData {
    nodes: Vec<usize>,
    g: [[f64; MAX_DIM]; MAX_DIM],
    qps: Vec<QPoint>,
    blocks: Vec<usize>,
}

#[derive(Clone, Debug)]
struct FacetData {
    nodes: Vec<usize>,
    qps: Vec<QPoint>,
    normal: [f64; MAX_SD],
    viscous: bool,
}

#[derive(Clone, Debug)]
struct JumpData {
    nodes: Vec<usize>,
    /// Weight, facet barycentrics, previous-slab state.
    qps: Vec<(f64, [f64; MAX_SD + 1], SVec<f64>)>,
    blocks: Vec<usize>,
}

/// Basis of an element evaluated at arbitrary points.
enum Basis {
    Simplex {
        d: usize,
        x0: [f64; MAX_DIM],
        grads: [[f64; MAX_DIM]; MAX_DIM + 1],
    },
    Prism {
        nsd: usize,
        x0: [f64; MAX_DIM],
        grads: [[f64; MAX_DIM]; MAX_DIM + 1],
        t_lo: f64,
        dt: f64,
    },
}

impl Basis {
    fn eval(&self, x: &[f64; MAX_DIM]) -> Phi {
        let mut phi = [[0.0; NQ]; MAX_LOC];
        match self {
            Basis::Simplex { d, x0, grads } => {
                let nsd = d - 1;
                for a in 0..=*d {
                    let mut v = if a == 0 { 1.0 } else { 0.0 };
                    for k in 0..*d {
                        v += grads[a][k] * (x[k] - x0[k]);
                    }
                    phi[a][0] = v;
                    for i in 0..nsd {
                        phi[a][1 + i] = grads[a][i];
                    }
                    phi[a][nsd + 1] = grads[a][nsd];
                }
            }
            Basis::Prism { nsd, x0, grads, t_lo, dt } => {
                let nsd = *nsd;
                let th = (x[nsd] - t_lo) / dt;
                for a in 0..=nsd {
                    let mut l = if a == 0 { 1.0 } else { 0.0 };
                    for k in 0..nsd {
                        l += grads[a][k] * (x[k] - x0[k]);
                    }
                    let up = nsd + 1 + a;
                    phi[a][0] = l * (1.0 - th);
                    phi[up][0] = l * th;
                    for i in 0..nsd {
                        phi[a][1 + i] = grads[a][i] * (1.0 - th);
                        phi[up][1 + i] = grads[a][i] * th;
                    }
                    phi[a][nsd + 1] = -l / dt;
                    phi[up][nsd + 1] = l / dt;
                }
            }
        }
        phi
    }
}

/// Residual vector and tangent matrix of a slab.
#[derive(Clone, Debug)]
pub struct Assembled {
    pub residual: Vec<f64>,
    pub matrix: BlockCsr,
}

pub struct SlabAssembler {
    pub mesh: SpaceTimeSlabMesh,
    pub gas: GasProperties,
    pub nsd: usize,
    pub m: usize,
    pub constraints: Constraints,
    pub source: SVec<f64>,
    elems: Vec<ElemData>,
    facets: Vec<FacetData>,
    jumps: Vec<JumpData>,
    pattern: BlockCsr,
}

fn lerp(l: &[f64], coords: &[[f64; MAX_DIM]]) -> [f64; MAX_DIM] {
    let mut x = [0.0; MAX_DIM];
    for (k, c) in coords.iter().enumerate() {
        for i in 0..MAX_DIM {
            x[i] += l[k] * c[i];
        }
    }
    x
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

impl SlabAssembler {
    /// Precomputes geometry, quadrature and sparsity. `lower` is the
    /// previous-slab state on the lower interface.
    pub fn new(mesh: SpaceTimeSlabMesh, gas: &GasProperties, bc: &DirichletSpec, degree: usize, lower: &Trace) -> Result<Self> {
        let nsd = mesh.space_dim;
        if !(1..=MAX_SD).contains(&nsd) {
            return Err(Error::Config(format!("unsupported spatial dimension {nsd}")));
        }
        let m = nsd + 2;
        if lower.m != m {
            return Err(Error::InterfaceMismatch(format!("trace has {} components, expected {m}", lower.m)));
        }
        let d = nsd + 1;
        let constraints = bc.constraints(&mesh, m)?;
        let vol_rule = quadrature_rule(d, degree)?;
        let fac_rule = quadrature_rule(d - 1, degree).or_else(|_| quadrature_rule(1, degree))?;
        let int_rule = quadrature_rule(nsd, degree)?;

        let mut bases = Vec::with_capacity(mesh.elements.len());
        let mut elems = Vec::with_capacity(mesh.elements.len());
        for (e, el) in mesh.elements.iter().enumerate() {
            let (basis, g) = match mesh.kind {
                ElementKind::Simplex => {
                    let c = mesh.coords(el);
                    let aff = AffineSimplex::new(&c, d)?;
                    (
                        Basis::Simplex {
                            d,
                            x0: c[0],
                            grads: aff.grads,
                        },
                        aff.g,
                    )
                }
                ElementKind::Prism => {
                    let c = mesh.coords(&el[..d]);
                    let aff = AffineSimplex::new(&c, nsd)?;
                    let dt = mesh.time(el[d]) - mesh.time(el[0]);
                    if !(dt > 0.0) {
                        return Err(Error::NonPositiveTimeStep {
                            t_lo: mesh.time(el[0]),
                            t_hi: mesh.time(el[d]),
                        });
                    }
                    let mut g = aff.g;
                    g[nsd][nsd] = 4.0 / (dt * dt);
                    (
                        Basis::Prism {
                            nsd,
                            x0: c[0],
                            grads: aff.grads,
                            t_lo: mesh.time(el[0]),
                            dt,
                        },
                        g,
                    )
                }
            };
            let mut qps = Vec::new();
            for s in mesh.integration_simplices(e) {
                let c = mesh.coords(&s);
                let det = det_of(&c, d).abs();
                if det == 0.0 {
                    return Err(Error::DegenerateElement { det, threshold: 0.0 });
                }
                for q in 0..vol_rule.weights.len() {
                    let x = lerp(&vol_rule.barycentric(q), &c);
                    qps.push(QPoint {
                        w: vol_rule.weights[q] * det,
                        phi: basis.eval(&x),
                    });
                }
            }
            elems.push(ElemData {
                nodes: el.clone(),
                g,
                qps,
                blocks: vec![],
            });
            bases.push(basis);
        }

        let mut facets = Vec::new();
        for f in &mesh.lateral {
            if bc.condition(&f.tag).is_some_and(|c| c.fully_prescribed()) {
                continue;
            }
            let owner = &mesh.elements[f.owner];
            let oc: Vec<f64> = {
                let c = mesh.coords(owner);
                (0..d).map(|k| c.iter().map(|x| x[k]).sum::<f64>() / c.len() as f64).collect()
            };
            let c = mesh.coords(&f.nodes);
            let (n, measure) = facet_normal_coords(&c, &oc)?;
            let mut normal = [0.0; MAX_SD];
            normal[..nsd].copy_from_slice(&n[..nsd]);
            let qps = (0..fac_rule.weights.len())
                .map(|q| {
                    let x = lerp(&fac_rule.barycentric(q), &c);
                    QPoint {
                        w: fac_rule.weights[q] * factorial(d - 1) * measure,
                        phi: bases[f.owner].eval(&x),
                    }
                })
                .collect();
            facets.push(FacetData {
                nodes: owner.clone(),
                qps,
                normal,
                viscous: bc.viscous(&f.tag),
            });
        }

        let mut jumps = Vec::new();
        for f in &mesh.lower.facets {
            let c = mesh.coords(f);
            let det = det_of(&c, nsd).abs();
            let verts: Vec<&[f64]> = f.iter().map(|&v| mesh.spatial_coords(v)).collect();
            let cell = lower.element_nodes(&verts);
            let mut qps = Vec::new();
            for q in 0..int_rule.weights.len() {
                let l = int_rule.barycentric(q);
                let mut lb = [0.0; MAX_SD + 1];
                lb[..l.len()].copy_from_slice(&l);
                let ym = match &cell {
                    Some(ids) => {
                        let mut y = [0.0; MAX_M];
                        for (a, &v) in ids.iter().enumerate() {
                            for (c, yc) in y.iter_mut().enumerate().take(lower.m) {
                                *yc += l[a] * lower.node(v)[c];
                            }
                        }
                        y
                    }
                    None => lower.eval(&lerp(&l, &c)[..nsd])?,
                };
                qps.push((int_rule.weights[q] * det, lb, ym));
            }
            jumps.push(JumpData {
                nodes: f.clone(),
                qps,
                blocks: vec![],
            });
        }

        let mut adj = vec![Vec::new(); mesh.nodes.len()];
        for el in &mesh.elements {
            for &a in el {
                adj[a].extend_from_slice(el);
            }
        }
        for (v, a) in adj.iter_mut().enumerate() {
            a.push(v);
        }
        let pattern = BlockCsr::from_pattern(m, &adj);
        let blocks = |nodes: &[usize]| -> Vec<usize> {
            nodes
                .iter()
                .flat_map(|&a| nodes.iter().map(move |&b| (a, b)))
                .map(|(a, b)| pattern.block_index(a, b).expect("pattern covers element pairs"))
                .collect()
        };
        for e in &mut elems {
            e.blocks = blocks(&e.nodes);
        }
        for j in &mut jumps {
            j.blocks = blocks(&j.nodes);
        }
        Ok(Self {
            gas: gas.clone(),
            nsd,
            m,
            constraints,
            source: [0.0; MAX_M],
            elems,
            facets,
            jumps,
            pattern,
            mesh,
        })
    }

    pub fn n_dofs(&self) -> usize {
        self.mesh.nodes.len() * self.m
    }

    pub fn pattern(&self) -> &BlockCsr {
        &self.pattern
    }

    fn element<const N: usize>(&self, e: usize, y: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let ed = &self.elems[e];
        let (nsd, m) = (self.nsd, self.m);
        let nq = nsd + 2;
        let nl = ed.nodes.len();
        let mm = m * m;
        let mut r = vec![0.0; nl * m];
        let mut k = vec![0.0; nl * nl * mm];
        let cinv = c_inv(nsd);
        let zero = Dual::<N>::zero();
        for qp in &ed.qps {
            let mut z = [[0.0; MAX_M]; NQ];
            for (a, &v) in ed.nodes.iter().enumerate() {
                let ya = &y[v * m..(v + 1) * m];
                for s in 0..nq {
                    let f = qp.phi[a][s];
                    for c in 0..m {
                        z[s][c] += f * ya[c];
                    }
                }
            }
            if !(z[0][0] > 0.0 && z[0][m - 1] > 0.0) {
                return Err(Error::NonPhysicalState(format!(
                    "p = {:e}, T = {:e} at a quadrature point of element {e}",
                    z[0][0],
                    z[0][m - 1]
                )));
            }
            let var = |s: usize| -> SVec<Dual<N>> { std::array::from_fn(|c| if c < m { Dual::variable(z[s][c], s * m + c) } else { zero }) };
            let yv = var(0);
            let mut dy = [[zero; MAX_M]; MAX_SD];
            for (i, dyi) in dy.iter_mut().enumerate().take(nsd) {
                *dyi = var(1 + i);
            }
            let dyt = var(nsd + 1);
            let pw = pointwise(nsd, &yv, &dy, &dyt, &self.source, &self.gas);
            let hm = hatted_matrices(&pw.sm)?;
            let tau = tau_element(&hm, &ed.g, cinv, true).map_err(|err| match err {
                Error::SquareRootFailure { reason, .. } => Error::SquareRootFailure { element: Some(e), reason },
                other => other,
            })?;
            let tr = tau.mul_vec(&pw.res);
            let mut gq = [[zero; MAX_M]; NQ];
            gq[0] = pw.f0;
            for i in 0..nsd {
                let v = hm.a_hat[i].mul_vec(&tr);
                for c in 0..m {
                    gq[1 + i][c] = pw.f1[i][c] + v[c];
                }
            }
            gq[nsd + 1] = tr;
            for a in 0..nl {
                for q in 0..nq {
                    let f = qp.w * qp.phi[a][q];
                    for c in 0..m {
                        r[a * m + c] += f * gq[q][c].re;
                    }
                }
            }
            for b in 0..nl {
                let mut eb = [[[0.0; MAX_M]; MAX_M]; NQ];
                for q in 0..nq {
                    for rr in 0..m {
                        let eps = &gq[q][rr].eps;
                        for s in 0..nq {
                            let f = qp.phi[b][s];
                            if f != 0.0 {
                                for c in 0..m {
                                    eb[q][rr][c] += f * eps[s * m + c];
                                }
                            }
                        }
                    }
                }
                for a in 0..nl {
                    let base = (a * nl + b) * mm;
                    for q in 0..nq {
                        let f = qp.w * qp.phi[a][q];
                        if f != 0.0 {
                            for rr in 0..m {
                                for c in 0..m {
                                    k[base + rr * m + c] += f * eb[q][rr][c];
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok((r, k))
    }

    fn element_dispatch(&self, e: usize, y: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        match self.nsd {
            1 => self.element::<9>(e, y),
            2 => self.element::<16>(e, y),
            _ => self.element::<25>(e, y),
        }
    }

    fn facet(&self, f: &FacetData, y: &[f64], r: &mut [f64]) {
        let (nsd, m) = (self.nsd, self.m);
        for qp in &f.qps {
            let mut ys = [0.0; MAX_M];
            let mut dy = [[0.0; MAX_M]; MAX_SD];
            for (a, &v) in f.nodes.iter().enumerate() {
                for c in 0..m {
                    let yc = y[v * m + c];
                    ys[c] += qp.phi[a][0] * yc;
                    for i in 0..nsd {
                        dy[i][c] += qp.phi[a][1 + i] * yc;
                    }
                }
            }
            let h = neumann_flux_s(nsd, &ys, &dy, &f.normal[..nsd], &self.gas, f.viscous);
            for (a, &v) in f.nodes.iter().enumerate() {
                let s = qp.w * qp.phi[a][0];
                for c in 0..m {
                    r[v * m + c] -= s * h[c];
                }
            }
        }
    }

    fn jump(&self, j: &JumpData, y: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (nsd, m) = (self.nsd, self.m);
        let nl = j.nodes.len();
        let mm = m * m;
        let mut r = vec![0.0; nl * m];
        let mut k = vec![0.0; nl * nl * mm];
        let zero = Dual::<MAX_M>::zero();
        for (w, l, ym) in &j.qps {
            let mut yp = [zero; MAX_M];
            for c in 0..m {
                let v: f64 = j.nodes.iter().enumerate().map(|(a, &v)| l[a] * y[v * m + c]).sum();
                yp[c] = Dual::variable(v, c);
            }
            let a0: SMat<Dual<MAX_M>> = system_matrices_s(nsd, &yp, &[[zero; MAX_M]; MAX_SD], &self.gas).a0;
            let mut diff = [zero; MAX_M];
            for c in 0..m {
                diff[c] = yp[c] - ym[c];
            }
            let jv = a0.mul_vec(&diff);
            for a in 0..nl {
                for rr in 0..m {
                    r[a * m + rr] += w * l[a] * jv[rr].re;
                }
                for b in 0..nl {
                    let s = w * l[a] * l[b];
                    for rr in 0..m {
                        for c in 0..m {
                            k[(a * nl + b) * mm + rr * m + c] += s * jv[rr].eps[c];
                        }
                    }
                }
            }
        }
        (r, k)
    }

    fn scatter(nodes: &[usize], blocks: &[usize], m: usize, rl: &[f64], kl: &[f64], res: &mut [f64], mat: &mut BlockCsr) {
        let mm = m * m;
        for (a, &v) in nodes.iter().enumerate() {
            for c in 0..m {
                res[v * m + c] += rl[a * m + c];
            }
        }
        for (ab, &bk) in blocks.iter().enumerate() {
            let dst = mat.block_mut(bk);
            for (x, s) in dst.iter_mut().zip(&kl[ab * mm..(ab + 1) * mm]) {
                *x += s;
            }
        }
    }

    /// Residual `R(y)` and its tangent, before Dirichlet rows are applied.
    pub fn assemble(&self, y: &[f64]) -> Result<Assembled> {
        let m = self.m;
        let mut residual = vec![0.0; self.n_dofs()];
        let mut matrix = self.pattern.clone();
        let ne = self.elems.len();
        let mut start = 0;
        while start < ne {
            let end = (start + CHUNK).min(ne);
            let local: Vec<(Vec<f64>, Vec<f64>)> = (start..end).into_par_iter().map(|e| self.element_dispatch(e, y)).collect::<Result<_>>()?;
            for (e, (rl, kl)) in (start..end).zip(local) {
                let ed = &self.elems[e];
                Self::scatter(&ed.nodes, &ed.blocks, m, &rl, &kl, &mut residual, &mut matrix);
            }
            start = end;
        }
        for j in &self.jumps {
            let (rl, kl) = self.jump(j, y);
            Self::scatter(&j.nodes, &j.blocks, m, &rl, &kl, &mut residual, &mut matrix);
        }
        for f in &self.facets {
            self.facet(f, y, &mut residual);
        }
        Ok(Assembled { residual, matrix })
    }

    /// Lower-interface jump contribution to the residual alone.
    pub fn jump_residual(&self, y: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut res = vec![0.0; self.n_dofs()];
        for j in &self.jumps {
            let (rl, _) = self.jump(j, y);
            for (a, &v) in j.nodes.iter().enumerate() {
                for c in 0..m {
                    res[v * m + c] += rl[a * m + c];
                }
            }
        }
        res
    }

    /// Euclidean norm of the residual over unconstrained entries.
    pub fn free_norm(&self, r: &[f64]) -> f64 {
        r.iter()
            .enumerate()
            .filter(|(i, _)| !self.constraints.contains_key(i))
            .map(|(_, v)| v * v)
            .sum::<f64>()
            .sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::BoundaryCondition;
    use crate::gas::{PrimitiveState, ViscosityLaw};
    use crate::geometry::Point;
    use crate::mesh::{extrude_fst, subdivide_sst, Interface, SpatialMesh};
    use crate::physics::{strong_residual, StateGradient};
    use crate::quadrature::quadrature_rule;
    use crate::supg::{hatted_matrices, tau_element};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_gas(mu: f64) -> GasProperties {
        GasProperties {
            r: 1.0,
            gamma: 1.4,
            pr: 0.72,
            viscosity: ViscosityLaw::Constant(mu),
        }
    }

    fn square() -> SpatialMesh {
        SpatialMesh::rectangle(0.0, 1.0, 0.0, 1.0, 1, 1, |_| "w".into())
    }

    fn all_fixed(st: &SpaceTimeSlabMesh, y: &[f64]) -> DirichletSpec {
        DirichletSpec {
            conditions: st.lateral_tags().iter().map(|t| BoundaryCondition::full(t, y)).collect(),
            pure_neumann: false,
        }
    }

    #[test]
    fn free_stream_residual_vanishes() {
        let rest = [1.0e5, 0.0, 0.0, 273.15];
        let gas = GasProperties::air();
        let s = SpatialMesh::rectangle(0.0, 0.3, 0.0, 0.2, 3, 2, |c| if c[1] > 1e-12 && c[1] < 0.2 - 1e-12 { "ends".into() } else { "sides".into() });
        let bc = DirichletSpec {
            conditions: vec![BoundaryCondition::full("ends", &rest), BoundaryCondition::free("sides", 4, true).with(2, 0.0)],
            pure_neumann: false,
        };
        for st in [extrude_fst(&s, 0.0, 1e-4).unwrap(), subdivide_sst(&s, 0.0, 1e-4, &vec![0; s.nodes.len()]).unwrap()] {
            let tr = Trace::from_fn(s.clone(), 4, |_| rest.to_vec());
            let asm = SlabAssembler::new(st, &gas, &bc, 2, &tr).unwrap();
            let y = tr.extend(&asm.mesh).unwrap();
            let r = asm.assemble(&y).unwrap().residual;
            let scale = 1e5 * 0.3 * 0.2 * 1e-4;
            assert!(asm.free_norm(&r) < 1e-10 * scale, "{}", asm.free_norm(&r));
        }
    }

    fn fd_check(st: SpaceTimeSlabMesh, gas: &GasProperties, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nsd = st.space_dim;
        let m = nsd + 2;
        let base: Vec<f64> = (0..m).map(|c| if c == 0 || c == m - 1 { 1.0 } else { 0.3 }).collect();
        let sp = st.spatial.clone().unwrap();
        let tr = Trace::from_fn(sp, m, |_| base.iter().map(|v| v * 1.05).collect());
        let bc = all_fixed(&st, &base);
        let asm = SlabAssembler::new(st, gas, &bc, 2, &tr).unwrap();
        let n = asm.n_dofs();
        let y: Vec<f64> = (0..n).map(|i| base[i % m] + 0.2 * (rng.gen::<f64>() - 0.5)).collect();
        let sys = asm.assemble(&y).unwrap();
        let kd = sys.matrix.to_dense();
        for _ in 0..20 {
            let dir: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() - 0.5).collect();
            let h = 1e-6;
            let yp: Vec<f64> = y.iter().zip(&dir).map(|(a, b)| a + h * b).collect();
            let ym: Vec<f64> = y.iter().zip(&dir).map(|(a, b)| a - h * b).collect();
            let rp = asm.assemble(&yp).unwrap().residual;
            let rm = asm.assemble(&ym).unwrap().residual;
            let fd: Vec<f64> = rp.iter().zip(&rm).map(|(a, b)| (a - b) / (2.0 * h)).collect();
            let kv = &kd * nalgebra::DVector::from_vec(dir);
            let err: f64 = fd.iter().zip(kv.iter()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            let nrm: f64 = fd.iter().map(|a| a * a).sum::<f64>().sqrt();
            assert!(err < 1e-5 * nrm, "relative tangent error {}", err / nrm);
        }
    }

    #[test]
    fn tangent_matches_finite_differences() {
        fd_check(extrude_fst(&square(), 0.0, 0.5).unwrap(), &unit_gas(0.05), 1);
        fd_check(subdivide_sst(&square(), 0.0, 0.5, &[0; 4]).unwrap(), &unit_gas(0.05), 2);
        fd_check(extrude_fst(&SpatialMesh::interval(0.0, 1.0, 2), 0.0, 0.5).unwrap(), &unit_gas(0.0), 3);
    }

    /// One space-time triangle with a linear state: the assembled residual
    /// equals the quadrature of the weak-form integrand built from the
    /// pointwise strong terms.
    #[test]
    fn single_element_hand_quadrature() {
        let gas = unit_gas(0.02);
        let pts = [[0.0, 0.0], [1.0, 0.1], [0.2, 0.8]];
        let st = SpaceTimeSlabMesh {
            space_dim: 1,
            nodes: pts.iter().map(|p| Point::new(p)).collect(),
            kind: ElementKind::Simplex,
            elements: vec![vec![0, 1, 2]],
            lower: Interface::default(),
            upper: Interface::default(),
            lateral: vec![],
            node_level: vec![0; 3],
            parity: vec![false],
            t_lo: 0.0,
            t_hi: 0.8,
            spatial: None,
        };
        let bc = DirichletSpec {
            conditions: vec![],
            pure_neumann: true,
        };
        let tr = Trace::from_fn(SpatialMesh::interval(0.0, 1.0, 1), 3, |_| vec![1.0, 0.0, 1.0]);
        let asm = SlabAssembler::new(st, &gas, &bc, 2, &tr).unwrap();
        let lin = |x: f64, t: f64| [1.0 + 0.1 * x - 0.05 * t, 0.2 + 0.3 * x + 0.1 * t, 1.1 - 0.2 * x + 0.07 * t];
        let y: Vec<f64> = pts.iter().flat_map(|p| lin(p[0], p[1])).collect();
        let r = asm.assemble(&y).unwrap().residual;

        // oracle
        let grad = StateGradient {
            dy: vec![vec![0.1], vec![0.3], vec![-0.2]],
            dydt: vec![-0.05, 0.1, 0.07],
        };
        let j = nalgebra::Matrix2::new(1.0, 0.2, 0.1, 0.8);
        let det = j.determinant();
        let jinv = j.try_inverse().unwrap();
        let dn = [[-jinv[(0, 0)] - jinv[(1, 0)], -jinv[(0, 1)] - jinv[(1, 1)]], [jinv[(0, 0)], jinv[(0, 1)]], [jinv[(1, 0)], jinv[(1, 1)]]];
        let g = crate::geometry::covariant_metric(&crate::geometry::Simplex::from_coords(&[&pts[0], &pts[1], &pts[2]])).unwrap();
        let garr = crate::supg::metric_array(&g.g);
        let rule = quadrature_rule(2, 2).unwrap();
        let mut want = vec![0.0; 9];
        for q in 0..rule.weights.len() {
            let l = rule.barycentric(q);
            let x = l[1] * 1.0 + l[2] * 0.2;
            let t = l[1] * 0.1 + l[2] * 0.8;
            let yq = lin(x, t);
            let ps = PrimitiveState::new(yq[0], &[yq[1]], yq[2]);
            let res = strong_residual(&ps, &grad, &[0.0; 3], &gas).unwrap();
            let sm = crate::physics::system_matrices(&ps, &grad, &gas).unwrap();
            let fl = crate::physics::flux_oracle(&ps, &grad, &gas).unwrap();
            let hm = hatted_matrices(&sm).unwrap();
            let tau = tau_element(&hm, &garr, c_inv(1), true).unwrap();
            let mut rv = [0.0; MAX_M];
            rv[..3].copy_from_slice(&res);
            let tr = tau.mul_vec(&rv);
            let v = hm.a_hat[0].mul_vec(&tr);
            // f0 = res - pressure gradient; f1 = diffusive flux - pressure flux
            let mut f0 = res.clone();
            f0[1] -= grad.dy[0][0];
            let w = rule.weights[q] * det;
            for a in 0..3 {
                for c in 0..3 {
                    let f1 = fl.f_diff[0][c] - fl.f_p[0][c];
                    want[a * 3 + c] += w * (l[a] * f0[c] + dn[a][0] * (f1 + v[c]) + dn[a][1] * tr[c]);
                }
            }
        }
        for k in 0..9 {
            assert!((r[k] - want[k]).abs() < 1e-10 * (1.0 + want[k].abs()), "{k}: {} vs {}", r[k], want[k]);
        }
    }
}
