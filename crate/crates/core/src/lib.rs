//! Stability of rectilinear shock waves in 2D compressible isentropic
//! elastodynamics.
//!
//! A shock is described by the downstream Mach number `M`, the density ratio
//! `R` and the deformation gradient `F` ([`ShockParameters`]). The crate
//! classifies it as uniformly or weakly stable in two independent ways:
//!
//! * the closed-form condition `K < K1 + K2` ([`classify_closed_form`]);
//! * numerically, by assembling the linearized interior and boundary
//!   matrices, building the Lopatinski determinant and locating its roots on
//!   the imaginary axis ([`lopatinski::find_boundary_roots`]) and in the
//!   right half plane ([`scan::scan_interior_roots`]).
//!
//! [`classify`] runs both and reports [`Error::Disagreement`] if they differ.
//!
//! ```
//! use loplab_core::{classify_closed_form, Deformation, ShockParameters, Verdict};
//!
//! let p = ShockParameters::new(1.0, 3.0, Deformation::diag(0.5, 0.5)).unwrap();
//! let v = classify_closed_form(&p.derive().unwrap());
//! assert_eq!(v.verdict, Verdict::WeaklyStable);
//! ```
//!
//! Unknowns are ordered `(p, v1, v2, F11, F21, F12, F22)`.

pub mod classify;
pub mod config;
pub mod dispersion;
pub mod error;
pub mod exec;
pub mod extended;
pub mod lopatinski;
pub mod params;
pub mod poly;
pub mod sampling;
pub mod scan;
pub mod sweep;
pub mod system;
pub mod verify;

pub use classify::{
    classify, classify_closed_form, classify_full, ClassifyOptions, StabilityVerdict, Verdict,
};
pub use error::{Error, Result};
pub use exec::Execution;
pub use params::{
    check_lax, derive, AdmissibilityReport, Deformation, DerivedQuantities, ShockParameters,
};
pub use scan::ScanConfig;
