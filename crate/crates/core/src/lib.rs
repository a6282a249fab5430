//! Mean-field analysis of penalty-encoded quantum annealing.
//!
//! The solvers are generic over the floating-point type through [`Real`]; the aliases at the
//! bottom of this file fix it to `f64`.

// `!(x > 0)` style checks reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli_io;
pub mod dicke_gap;
pub mod error;
pub mod hopfield_rs;
pub mod meanfield_core;
pub mod numerics;
pub mod phase_scan;
pub mod scalar;

pub use error::{QacError, Result};
pub use meanfield_core::{Beta, Branch};
pub use scalar::Real;

pub type FerroParams = meanfield_core::FerroParams<f64>;
pub type CopyMagnetizations = meanfield_core::CopyMagnetizations<f64>;
pub type LandscapeSample = meanfield_core::LandscapeSample<f64>;
pub type SaddleSolution = meanfield_core::SaddleSolution<f64>;
pub type TransitionRecord = phase_scan::TransitionRecord<f64>;
pub type PhaseDiagram = phase_scan::PhaseDiagram<f64>;
pub type DickeHamiltonian = dicke_gap::DickeHamiltonian<f64>;
pub type GapScalingFit = dicke_gap::GapScalingFit<f64>;
pub type HopfieldParams = hopfield_rs::HopfieldParams<f64>;
pub type RSolution = hopfield_rs::RSolution<f64>;
pub type SweepTrace = hopfield_rs::SweepTrace<f64>;
pub type QuadratureRule = numerics::QuadratureRule<f64>;
pub type FitResult = numerics::FitResult<f64>;
