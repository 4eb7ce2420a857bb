//! The induction: exhaustions, boundary divisions and compatibility, the
//! three-deformation noncritical step, critical-step bookkeeping, and the
//! limit assembly with escape certificates.

pub mod decoration;
pub mod division;
pub mod refit;

pub use division::{
    check_compatible, critical_merge, critical_split, synthesize_division, AbstractArc,
    AbstractDivision, CircleCurve, CompatReport, ComponentDivision, Division, DivisionError,
};
pub use refit::{runge_refit, RefitError, RefitInput, RefitReport, RefitTarget};
