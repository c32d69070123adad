//! Centralized numerical tolerances.
//!
//! Every check in the crate pulls its threshold from here so that the test
//! suite, the CLI and the report generator agree on what "passes".  The tiers
//! reflect how many numerical derivatives feed a quantity: algebraic identities
//! evaluated from closed-form frames are near machine precision, each
//! differentiation layer loses roughly four orders of magnitude.

/// Frames must be unitary to this tolerance after orthonormalization.
pub const FRAME_TOL: f64 = 1e-12;

/// Algebraic identities with no differentiation (metric symmetry, curvature
/// contractions, trace identities).
pub const ALGEBRAIC_TOL: f64 = 1e-10;

/// One analytic derivative evaluated through exact jets, or closed-form
/// comparisons of first-derivative quantities (pushforwards, induced metrics,
/// flatness residuals).
pub const FIRST_ORDER_TOL: f64 = 1e-8;

/// First covariant derivatives that mix jets with one finite-difference layer
/// (covariant derivative of the second fundamental form, Codazzi symmetry).
pub const DERIVATIVE_TOL: f64 = 1e-6;

/// Curvature-level identities: two derivative layers (Gauss equation cross
/// checks, normal curvature, induced curvature tensors).
pub const CURVATURE_TOL: f64 = 1e-4;

/// Spectral-decomposition identity for the quotient curvature along an
/// immersion with flat pulled-back bundle.
pub const SPECTRAL_TOL: f64 = 1e-5;

/// Contracted (Ricci-type) identities accumulate more cancellation error.
pub const RICCI_TOL: f64 = 1e-3;

/// Threshold on the pinching gap: minimal holomorphic sectional curvature is
/// considered to reach `1/q` when it is above `1/q - PINCH_TOL`.
pub const PINCH_TOL: f64 = 1e-3;

/// Threshold on the sup-norm of the covariant derivative of the second
/// fundamental form below which the form counts as parallel.
pub const PARALLEL_TOL: f64 = 1e-3;

/// Relative error allowed on closed-form volumes under the default quadrature.
pub const VOLUME_REL_TOL: f64 = 1e-3;

/// Relative cancellation allowed in the integrated two-term curvature balance.
pub const BALANCE_REL_TOL: f64 = 0.02;

/// Default finite-difference step for first derivatives of smooth frame data.
pub const FD_STEP: f64 = 1e-5;

/// Coarser outer step used when a finite difference is taken of a quantity
/// that itself carries derivative noise (second covariant derivatives).
pub const FD_OUTER_STEP: f64 = 2e-3;

/// Residual norm below which a column counts as linearly dependent.
pub const DEGENERATE_TOL: f64 = 1e-12;

/// Slack permitted in eigenvalue-based inequality chains before a violation
/// is reported.
pub const CHAIN_SLACK: f64 = 1e-6;
