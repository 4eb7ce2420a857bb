//! Numerical toolkit for continuous families of conformal minimal immersions
//! of disc and annulus models into R^3 whose first two components escape to
//! infinity together.
//!
//! The pipeline, bottom to top:
//!
//! * [`families`] — containers for data indexed by a sampled compact
//!   parameter box, with a measured continuity diagnostic.
//! * [`riemann`] — model domains, complex structures as Beltrami fields,
//!   normalized quasiconformal charts, nonvanishing 1-forms, homology cycles.
//! * [`weierstrass`] — the punctured null quadric, Weierstrass data,
//!   integration to immersions and null curves, flux, residual diagnostics.
//! * [`convex_integration`] — one-dimensional convex integration: paths whose
//!   derivatives live on the null quadric or on variable quadric curves, and
//!   boundary-arc extension of generalized immersion data.
//! * [`lopez_ros`] — multiplier transforms fixing one component, period maps
//!   over homology bases, period-dominating sprays, and the period-killing
//!   Newton solve.
//! * [`proper_builder`] — the induction: exhaustions, boundary divisions,
//!   the three-deformation noncritical step, critical-step bookkeeping,
//!   and the limit assembly with escape certificates.
//! * [`cli`] — run configs, traces, reports and file export behind the
//!   `minsurf` binary.

pub mod cli;
pub mod convex_integration;
pub mod families;
pub mod lopez_ros;
pub mod numerics;
pub mod proper_builder;
pub mod riemann;
pub mod tol;
pub mod weierstrass;

pub use families::{Family, ParamGrid};
pub use riemann::{BeltramiField, HomologyBasis, ModelDomain, OneFormSample, QcMap};
