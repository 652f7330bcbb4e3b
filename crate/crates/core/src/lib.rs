//! Non-Markovian optomechanical cooling.
//!
//! A cavity mode dressed by a strong classical drive couples to a mechanical
//! mode that sits in a structured (sub-, super- or Ohmic) reservoir. Two
//! independent engines compute the phonon number:
//!
//! * [`propagator`] + [`occupancy`]: memory-kernel Volterra equations for the
//!   mechanical propagators and the assembled phonon number;
//! * [`moments`]: closed second-moment equations of a discretized bath.
//!
//! Everything is generic over [`Real`] (`f32`/`f64`); the `f64` aliases at
//! the crate root are what the CLI uses.

// `!(x > 0)` is deliberate throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod error;
mod etd;
pub mod model;
pub mod moments;
pub mod occupancy;
pub mod propagator;
pub mod quadrature;
pub mod scalar;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::{Cplx, Real};

pub type SystemParams = model::SystemParams<f64>;
pub type TimeGrid = model::TimeGrid<f64>;
pub type Schedule = model::Schedule<f64>;
pub type SpectralModel = spectral::SpectralModel<f64>;
pub type QuadratureRule = quadrature::QuadratureRule<f64>;
pub type KernelTables = spectral::KernelTables<f64>;
pub type BathModes = spectral::BathModes<f64>;
pub type ClassicalTrajectory = classical::ClassicalTrajectory<f64>;
pub type PhaseIntegral = classical::PhaseIntegral<f64>;
pub type DressedKernel = propagator::DressedKernel<f64>;
pub type PropagatorPair = propagator::PropagatorPair<f64>;
pub type OccupancySeries = occupancy::OccupancySeries<f64>;
pub type MomentSeries = moments::MomentSeries<f64>;
pub type Complex64 = Cplx<f64>;
