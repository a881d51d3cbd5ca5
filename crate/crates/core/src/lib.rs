//! Closed-form self-similar radial solutions of the isothermal and
//! pressureless Navier–Stokes equations, checked by finite-difference residuals.

// negated comparisons are how NaN inputs get rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod families;
pub mod ode;
pub mod residual;

pub use diagnostics::{
    blowup_rate_estimate, center_density, surface_coefficient, total_mass, BlowupRateEstimate,
    CoefficientMode, MassResult, RateVerdict,
};
pub use error::{Error, Result};
pub use families::{separable_profile, FamilyParams, FieldSample, SolutionFamily};
pub use ode::{
    detect_blowup, integrate, BlowupReport, BlowupStatus, IntegratorOptions, OdeKind, Sample,
    ScalingOde, Trajectory, TrajectoryStatus,
};
