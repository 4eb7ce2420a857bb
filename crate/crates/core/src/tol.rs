//! Centralized numeric gates and solver defaults.
//!
//! Every threshold used by an operation postcondition or by the verification
//! suite lives here, so a reviewer can match a failing gate to the constant
//! that defines it.

/// Relative null-quadric residual: |c1^2+c2^2+c3^2| <= NULL_RESIDUAL_REL * |c|^2.
///
/// Datum constructors produce exactly null triples up to rounding in a handful
/// of multiplications, so this sits a little above f64 epsilon accumulation.
pub const NULL_RESIDUAL_REL: f64 = 1e-12;

/// Contour-integral agreement with the residue oracle, and homotopy invariance
/// of flux. Ring quadrature is trapezoidal on uniform angular samples, which is
/// spectrally accurate for smooth integrands; 1e-8 leaves margin for charts
/// that are themselves solver output.
pub const FLUX_TOL: f64 = 1e-8;

/// Plane Beltrami solve vs. the constant-coefficient closed form.
pub const BELTRAMI_PLANE_TOL: f64 = 1e-6;

/// mu == 0 must reproduce the identity chart to rounding.
pub const BELTRAMI_IDENTITY_TOL: f64 = 1e-12;

/// Disc solve: boundary samples must stay on the unit circle within this.
pub const DISC_BOUNDARY_TOL: f64 = 1e-6;

/// Fixed-point iteration target for the Beltrami solvers.
pub const BELTRAMI_FP_TOL: f64 = 1e-8;

/// Iteration cap for the Beltrami fixed point.
pub const BELTRAMI_MAX_ITER: usize = 500;

/// Convex integration: derivative-constraint residual at every path sample.
/// The oscillation is built inside a rational parameterization of the
/// constraint manifold, so membership is structural; the gate catches
/// bookkeeping errors, not analysis error.
pub const CI_CONSTRAINT_TOL: f64 = 1e-10;

/// Convex integration: endpoint C^1 matching.
pub const CI_ENDPOINT_TOL: f64 = 1e-10;

/// Fundamental-theorem consistency of a path and its stored derivative.
pub const CI_FTC_TOL: f64 = 1e-9;

/// Default sample count per convex-integration arc; doubled on residual
/// failure.
pub const ARC_SAMPLES: usize = 512;

/// Period-killing residual per fiber: ||P(b, h_b) - target||.
pub const PERIOD_KILL_TOL: f64 = 1e-8;

/// Final flux match against the prescribed family.
pub const FLUX_MATCH_TOL: f64 = 1e-6;

/// Conformality residual of final immersions on a 256^2 grid. Derivatives are
/// spectral in the angular direction and high-order in the radial one, so the
/// floor is set by grid truncation of analytic data.
pub const CONFORMALITY_TOL: f64 = 1e-6;

/// Harmonicity residual of final immersions (second-derivative stencils lose
/// two orders against the first-derivative ones).
pub const HARMONICITY_TOL: f64 = 1e-4;

/// Complex periods of an exported null curve.
pub const NULL_CURVE_PERIOD_TOL: f64 = 1e-8;

/// A datum refuses to integrate when some cycle period exceeds this factor
/// times the domain diameter.
pub const EXACTNESS_REL: f64 = 1e-6;

/// Degree ladder for least-squares polynomial / Laurent refits.
pub const REFIT_DEGREE_START: usize = 8;
pub const REFIT_DEGREE_MAX: usize = 64;

/// Spray escalation: double N until sigma_min > SPRAY_SVAL_RATIO * sigma_max,
/// capped at SPRAY_N_MAX seed directions.
pub const SPRAY_N_MAX: usize = 64;
pub const SPRAY_SVAL_RATIO: f64 = 1e-6;

/// Relative step for finite-difference period Jacobians (central differences).
pub const FD_JACOBIAN_STEP: f64 = 1e-6;

/// Junction-derivative floor for division compatibility is this factor times
/// the median boundary derivative magnitude.
pub const DERIV_FLOOR_REL: f64 = 1e-6;

/// Retry cap when the adaptive push size tau fails an inequality gate.
pub const TAU_MAX_RETRIES: usize = 5;
