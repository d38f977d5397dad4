//! Numerical laboratory for the spectral flow of families of twisted Dirac
//! operators.
//!
//! Two independent routes to the same integer are implemented:
//!
//! * the **spectral side**: eigenvalues of Fourier-discretized circle Dirac
//!   operators (or closed-form eigenvalue curves) are tracked in the family
//!   parameter and the spectral flow is computed from Phillips' partition
//!   definition ([`spectralflow`]);
//! * the **geometric side**: the odd Chern character form of the family of
//!   connections is assembled on a sampled chart with an exterior algebra of
//!   matrix-valued forms ([`exterior`], [`connections`], [`charforms`]) and
//!   integrated against the Â-form.
//!
//! The ξ-invariants of the endpoint operators ([`eta`]), an exact mode-wise
//! cylinder index computation ([`cylinder`]) and the scenario registry with
//! its sign-convention calibration ([`harness`]) close the loop.

// Negated float comparisons double as NaN rejection; index loops mirror the
// matrix formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod charforms;
pub mod connections;
pub mod cylinder;
pub mod dirac;
pub mod error;
pub mod eta;
pub mod exterior;
pub mod harness;
pub mod linalg;
pub mod param;
pub mod spectralflow;

pub use error::{Error, Result};

/// Complex scalar used by every form and operator matrix.
pub type C64 = num_complex::Complex64;
