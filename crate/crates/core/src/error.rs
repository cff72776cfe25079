use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate element: |det J| = {det:e} below threshold {threshold:e}")]
    DegenerateElement { det: f64, threshold: f64 },

    #[error("degenerate facet: generalized cross product norm {norm:e}")]
    DegenerateFacet { norm: f64 },

    #[error("non-positive time step: t_lo = {t_lo}, t_hi = {t_hi}")]
    NonPositiveTimeStep { t_lo: f64, t_hi: f64 },

    #[error("refinement conflict: {0}")]
    RefinementConflict(String),

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("non-conforming mesh: {0}")]
    NonConformingMesh(String),

    #[error("element {element} has non-positive volume or is inverted relative to its neighbours")]
    NegativeVolumeElement { element: usize },

    #[error("non-physical state: {0}")]
    NonPhysicalState(String),

    #[error("singular A0 matrix")]
    SingularA0,

    #[error("matrix square root failed{}: {reason}", element.map(|e| format!(" in element {e}")).unwrap_or_default())]
    SquareRootFailure { element: Option<usize>, reason: String },

    #[error("unsupported quadrature rule: dimension {dim}, degree {degree}")]
    UnsupportedRule { dim: usize, degree: usize },

    #[error("quadrature error: {0}")]
    Quadrature(String),

    #[error("unknown boundary tag '{0}'")]
    UnknownBoundaryTag(String),

    #[error("Newton iteration diverged after {iterations} iterations (residual {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },

    #[error("Krylov solver stagnated after {iterations} iterations (relative residual {relative_residual:e})")]
    KrylovStagnation { iterations: usize, relative_residual: f64 },

    #[error("shock formed: characteristic map is not monotone at t = {t} (t* = {t_star})")]
    ShockFormed { t: f64, t_star: f64 },

    #[error("interface mismatch between consecutive slabs: {0}")]
    InterfaceMismatch(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("output error: {0}")]
    Output(String),
}

pub type Result<T> = std::result::Result<T, Error>;
