//! Simplex space-time finite elements for the compressible Navier-Stokes
//! equations in pressure-primitive variables.

pub mod ad;
pub mod assembly;
pub mod cases;
pub mod dirichlet;
pub mod error;
pub mod export;
pub mod gas;
pub mod geometry;
pub mod linalg;
pub mod march;
pub mod mesh;
pub mod newton;
pub mod physics;
pub mod quadrature;
pub mod supg;
pub mod trace;

pub use error::{Error, Result};
