//! Exact multiphoton interference statistics for linear-optical networks fed
//! with Fock states, and their distortion by realistic photocounters.
//!
//! The pipeline is: build an interferometer ([`interferometer`]), compute
//! the ideal output distribution from matrix permanents ([`ideal`]), then
//! fold in a detector model ([`detector`], [`realistic`]) and optionally
//! sample from the result ([`sampling`]).

// NaN-rejecting range checks are written as `!(x > 0.0)` throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod combinatorics;
pub mod deadtime;
pub mod detector;
pub mod distribution;
pub mod error;
pub mod ideal;
pub mod interferometer;
pub mod limits;
pub mod matrix;
pub mod montecarlo;
pub mod pattern;
pub mod permanent;
pub mod quadrature;
pub mod realistic;
pub mod rng;
pub mod sampling;

pub use detector::{CondProbTable, DetectorModel};
pub use distribution::OutcomeDistribution;
pub use error::{Error, Result};
pub use interferometer::UnitaryMatrix;
pub use matrix::ComplexMatrix;
pub use num_complex::Complex64;
pub use pattern::Pattern;
pub use quadrature::QuadratureSpec;
pub use realistic::{CorrectionTable, ReducedIdentifier};
pub use sampling::SampleReport;
