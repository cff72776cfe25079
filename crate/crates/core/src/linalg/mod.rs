//! Dense small-matrix kernels, the matrix square root, block-sparse storage
//! and the restarted GMRES solver.

pub mod gmres;
pub mod small;
pub mod sparse;
pub mod sqrtm;

pub use gmres::{gmres, GmresStats, Preconditioner};
pub use small::{SMat, SVec, MAX_M};
pub use sparse::BlockCsr;
pub use sqrtm::{inv_sqrt, matrix_sqrt_principal, sqrt_factors, symmetric_eigen, SqrtFactors};
