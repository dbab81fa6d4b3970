//! Channel modeling toolkit for capacitive human body communication in the
//! body-resonance regime (30 to 300 MHz).
//!
//! The body is a segmented lossy transmission line over earth ground, driven
//! and picked up through capacitive couplers with floating grounds. On top of
//! the line model sit sweeps, spectral features, Shannon capacity, exposure
//! estimates, off-body leakage and measurement calibration.
//!
//! Field and line kernels are generic over [`Scalar`] (`f32` or `f64`); the
//! analysis pipeline runs in `f64`.

// `!(x > 0.0)` rejects NaN along with non-positive values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calib;
pub mod channel;
pub mod consts;
pub mod dielectric;
pub mod dipole;
mod error;
pub mod io;
pub mod leakage;
mod linalg;
pub mod network;
pub mod rlgc;
pub mod safety;
mod scalar;
pub mod scenario;
pub mod special;
pub mod twoport;

pub use error::{Error, Result};
pub use scalar::{Cx, Scalar};

pub type TwoPort64 = twoport::TwoPort<f64>;
pub type TwoPort32 = twoport::TwoPort<f32>;
pub type PerUnitLength64 = rlgc::PerUnitLengthParams<f64>;
pub type BodySegment64 = rlgc::BodySegment<f64>;
pub type LinkModel64 = network::LinkModel<f64>;
pub type LinkModel32 = network::LinkModel<f32>;
pub type EMField64 = dipole::EMField<f64>;
pub type EMField32 = dipole::EMField<f32>;
pub type DipoleSource64 = dipole::DipoleSource<f64>;
pub type Medium64 = dipole::Medium<f64>;
pub type DielectricSpectrum64 = dielectric::DielectricSpectrum<f64>;
pub type TissueSet64 = dielectric::TissueSet<f64>;
