//! Numerical verification of the bundle calculus on complex Grassmannians and
//! of the link between parallel second fundamental forms and holomorphic
//! pinching for compact Kaehler submanifolds embedded through projectively
//! flat frame bundles.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`] — dense matrices over a generic scalar, Gram–Schmidt
//!   orthonormalization, frame completion and a Jacobi eigensolver;
//! * [`jet`] — second-order Wirtinger jets (forward-mode differentiation in
//!   `z` and `z̄` simultaneously);
//! * [`grassmann`] — points of `Gr_p(C^n)` as adapted unitary frames, tangent
//!   vectors, the bundle-valued forms `H` and `K`, and the curvature of the
//!   tautological and quotient bundles;
//! * [`immersion`] — polynomial chart maps, atlases, frame fields along an
//!   immersion and their derivatives (jet or finite-difference backend);
//! * [`catalog`] — the built-in family of holomorphic isometric immersions;
//! * [`submanifold`] — second fundamental form, shape operator, covariant
//!   derivatives, induced and normal curvature;
//! * [`flatness`] — projective-flatness diagnostics for the pulled-back
//!   quotient bundle;
//! * [`pinching`] — minimal holomorphic sectional curvature, parallelism
//!   defect, and the equivalence verdict between the two;
//! * [`integrate`] — quadrature over the base and the unit tangent bundle,
//!   with jackknife error estimates;
//! * [`report`] — run configuration, machine-readable reports, CSV export.

pub mod catalog;
pub mod flatness;
pub mod grassmann;
pub mod immersion;
pub mod integrate;
pub mod jet;
pub mod linalg;
pub mod pinching;
pub mod report;
pub mod submanifold;
#[cfg(test)]
pub(crate) mod testutil;
pub mod tol;

use thiserror::Error;

/// Crate-wide error type.
///
/// Numerical routines distinguish between caller mistakes (dimension and
/// base-point mismatches, invalid parameters) and data-driven failures
/// (degenerate frames, non-immersive chart maps, missing catalog entries).
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("degenerate frame: column {col} has residual norm {norm:.3e} after orthogonalization")]
    DegenerateFrame { col: usize, norm: f64 },
    #[error("matrix is not Hermitian/symmetric within tolerance: asymmetry {0:.3e}")]
    NotHermitian(f64),
    #[error("eigensolver failed to converge after {0} sweeps")]
    NoConvergence(usize),
    #[error("singular linear system (pivot {0:.3e})")]
    SingularSystem(f64),
    #[error("tangent vectors live at different base points or on different Grassmannians")]
    BaseMismatch,
    #[error("expected a unit vector, got squared norm {0:.6e}")]
    NotUnit(f64),
    #[error("expected a normal vector, got tangential component of norm {0:.3e}")]
    NotNormal(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("chart map is not immersive at the sampled point (pushforward rank {rank}, expected {expected})")]
    NotImmersive { rank: usize, expected: usize },
    #[error("chart map is not holomorphic: antiholomorphic residual {0:.3e}")]
    NotHolomorphic(f64),
    #[error("unknown catalog entry `{0}`")]
    CatalogMiss(String),
    #[error("malformed immersion description: {0}")]
    MalformedImmersion(String),
    #[error("malformed configuration: {0}")]
    MalformedConfig(String),
    #[error("empty sampling plan")]
    EmptyPlan,
    #[error("atlas does not cover the base manifold: {0}")]
    NonCoveringAtlas(String),
    #[error("integrand is not phase-invariant: drift {0:.3e} under fiber phase rotation")]
    PhaseVariant(f64),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
