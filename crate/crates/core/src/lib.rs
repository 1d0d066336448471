//! Pseudospectral simulation of the two-dimensional Muskat problem with
//! surface tension on a periodic domain.
//!
//! The crate provides
//! - a periodic spectral toolkit ([`grid`], [`field`], [`spectral`]),
//! - the symmetric finite-difference operator algebra and its closed-form
//!   α-derivatives ([`difference`]),
//! - homogeneous Sobolev and Besov semi-norm estimators ([`norms`]),
//! - three equivalent right-hand sides: curvature form, slope form and the
//!   oscillatory-integral decomposition ([`rhs`]),
//! - an exponential (ETD-RK2) time stepper ([`timestep`]) and
//! - energy/dissipation monitors for the critical-norm estimates ([`monitor`]).
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the type
//! aliases below fix `f64`, which is what the tests and the command-line tool
//! use.

// `!(x > 0)` is how NaN gets rejected alongside the range check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod difference;
pub mod error;
pub mod field;
pub mod fieldspec;
pub mod grid;
pub mod laplace;
pub mod monitor;
pub mod norms;
pub mod parallel;
pub mod quadrature;
pub mod real;
pub mod rhs;
pub mod spectral;
pub mod timestep;

pub use error::{Error, Result};
pub use real::Real;

pub type Grid = grid::PeriodicGrid<f64>;
pub type Field = field::ScalarField<f64>;
pub type Params = rhs::PhysicalParams<f64>;
pub type Quadrature = quadrature::QuadratureSpec<f64>;
pub type BesovRule = norms::BesovRule<f64>;
pub type NormReport = norms::NormReport<f64>;
pub type EnergyReport = monitor::EnergyReport<f64>;
pub type TermBreakdown = rhs::TermBreakdown<f64>;
pub type SimConfig = timestep::SimConfig<f64>;
pub type Trajectory = timestep::Trajectory<f64>;
