//! Boundary data: prescribed components per tag and viscous-boundary flags.

use crate::error::{Error, Result};
use crate::linalg::BlockCsr;
use crate::mesh::SpaceTimeSlabMesh;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

pub type ValueFn = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;

/// Prescribed value of one primitive component.
#[derive(Clone)]
pub enum BcValue {
    Const(f64),
    /// Function of spatial position and time.
    Func(ValueFn),
}

impl BcValue {
    pub fn eval(&self, x: &[f64], t: f64) -> f64 {
        match self {
            BcValue::Const(v) => *v,
            BcValue::Func(f) => f(x, t),
        }
    }
}

impl fmt::Debug for BcValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BcValue::Const(v) => write!(f, "Const({v})"),
            BcValue::Func(_) => write!(f, "Func"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct BoundaryCondition {
    pub tag: String,
    /// One entry per primitive component; `None` leaves it free.
    pub values: Vec<Option<BcValue>>,
    /// Include viscous stress and heat flux in the boundary integral.
    pub viscous: bool,
}

impl BoundaryCondition {
    pub fn free(tag: &str, m: usize, viscous: bool) -> Self {
        Self {
            tag: tag.into(),
            values: vec![None; m],
            viscous,
        }
    }

    pub fn full(tag: &str, y: &[f64]) -> Self {
        Self {
            tag: tag.into(),
            values: y.iter().map(|&v| Some(BcValue::Const(v))).collect(),
            viscous: false,
        }
    }

    pub fn with(mut self, comp: usize, v: f64) -> Self {
        self.values[comp] = Some(BcValue::Const(v));
        self
    }

    pub fn fully_prescribed(&self) -> bool {
        self.values.iter().all(|v| v.is_some())
    }
}

#[derive(Clone, Debug, Default)]
pub struct DirichletSpec {
    /// Later entries override earlier ones on shared nodes.
    pub conditions: Vec<BoundaryCondition>,
    /// Allow problems without any prescribed component.
    pub pure_neumann: bool,
}

/// Constrained degrees of freedom of a slab: `(node * m + comp) -> value`.
pub type Constraints = BTreeMap<usize, f64>;

impl DirichletSpec {
    pub fn condition(&self, tag: &str) -> Option<&BoundaryCondition> {
        self.conditions.iter().rev().find(|c| c.tag == tag)
    }

    /// Whether boundary integrals on `tag` include viscous terms. Tags without
    /// a condition are treated as free, viscous boundaries.
    pub fn viscous(&self, tag: &str) -> bool {
        self.condition(tag).map_or(true, |c| c.viscous)
    }

    pub fn constraints(&self, mesh: &SpaceTimeSlabMesh, m: usize) -> Result<Constraints> {
        let tags = mesh.lateral_tags();
        for c in &self.conditions {
            if !tags.contains(&c.tag) {
                return Err(Error::UnknownBoundaryTag(c.tag.clone()));
            }
            if c.values.len() != m {
                return Err(Error::Config(format!("boundary '{}' has {} components, expected {m}", c.tag, c.values.len())));
            }
        }
        let mut out = Constraints::new();
        for c in &self.conditions {
            for f in mesh.lateral.iter().filter(|f| f.tag == c.tag) {
                for &v in &f.nodes {
                    let x = mesh.spatial_coords(v);
                    let t = mesh.time(v);
                    for (k, val) in c.values.iter().enumerate() {
                        if let Some(val) = val {
                            out.insert(v * m + k, val.eval(x, t));
                        }
                    }
                }
            }
        }
        if out.is_empty() && !self.pure_neumann {
            return Err(Error::Config("no Dirichlet data prescribed and the problem is not flagged pure-Neumann".into()));
        }
        Ok(out)
    }
}

/// Replaces constrained rows by identity rows with right-hand side
/// `g - y` and eliminates the constrained columns from the other rows.
pub fn apply_dirichlet(a: &mut BlockCsr, rhs: &mut [f64], y: &[f64], cons: &Constraints) {
    let m = a.m;
    let mm = m * m;
    let mut inc = vec![None; rhs.len()];
    for (&dof, &g) in cons {
        inc[dof] = Some(g - y[dof]);
    }
    for r in 0..a.n {
        for k in a.row_ptr[r]..a.row_ptr[r + 1] {
            let c = a.cols[k];
            let blk = &mut a.vals[k * mm..(k + 1) * mm];
            for j in 0..m {
                if let Some(d) = inc[c * m + j] {
                    for i in 0..m {
                        if inc[r * m + i].is_none() {
                            rhs[r * m + i] -= blk[i * m + j] * d;
                        }
                        blk[i * m + j] = 0.0;
                    }
                }
            }
            for i in 0..m {
                if inc[r * m + i].is_some() {
                    for j in 0..m {
                        blk[i * m + j] = 0.0;
                    }
                    if c == r {
                        blk[i * m + i] = 1.0;
                    }
                }
            }
        }
    }
    for (dof, d) in inc.iter().enumerate() {
        if let Some(d) = d {
            rhs[dof] = *d;
        }
    }
}
