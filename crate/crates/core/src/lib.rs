//! Numerical laboratory for semiclassical resolvent estimates.
//!
//! The crate builds the radial Carleman weight `w` and phase `phi` for a
//! potential `V`, checks the pointwise lower bound `A - (1 + eta) B >= (E/2) w'`
//! that drives the Carleman estimate, and measures weighted resolvent norms
//! of finite-difference discretizations of `-h^2 Δ + V - E ∓ iε`.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the production scalar to `f64`.

// `!(x > 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod banded;
pub mod carleman_check;
pub mod config;
pub mod dense;
pub mod discrete_operator;
pub mod error;
pub mod experiments;
pub mod phase_weight;
pub mod potential;
pub mod quadrature;
pub mod resolvent_norms;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{Cplx, Real};

pub type Potential = potential::PotentialSpec<f64>;
pub type Envelope = potential::EnvelopeSpec<f64>;
pub type Params = phase_weight::CarlemanParams<f64>;
pub type Profile = phase_weight::PhaseWeightProfile<f64>;
pub type Report = carleman_check::InequalityReport<f64>;
pub type Grid = discrete_operator::Grid1D<f64>;
pub type Operator = discrete_operator::DiscreteOperator<f64>;
pub type Norm = resolvent_norms::NormResult<f64>;

/// Formats with 17 significant digits, the precision used in every CSV.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}
