//! Simulation of a NOON-state NMR magnetometer and thermometer built on
//! star-topology (AX_N) molecules.
//!
//! The pipeline runs bottom-up through the modules:
//!
//! * [`spin_model`]: spin systems, thermal states in the collective basis,
//!   and a brute-force full-space oracle.
//! * [`protocol`]: NOON preparation, offset-field encoding with dephasing,
//!   per-line readout over an encoding-time grid.
//! * [`analysis`]: second-stage Fourier transform, line-shape fitting,
//!   field estimates, advantage ratio and optimal-time scans.
//! * [`thermometry`]: chemical-shift calibration and temperature inversion.
//! * [`io`] and [`config`]: file formats and the flat key-value config.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`.

// `!(x > 0)` is used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod error;
pub mod io;
mod linalg;
pub mod num;
pub mod protocol;
pub mod spin_model;
pub mod thermometry;

pub use error::{Error, Result};
pub use num::Real;

pub type SpinSystem = spin_model::SpinSystem<f64>;
pub type CollectiveState = spin_model::CollectiveState<f64>;
pub type SectorWeights = spin_model::SectorWeights<f64>;
pub type EncodingConfig = protocol::EncodingConfig<f64>;
pub type PeakSeries = protocol::PeakSeries<f64>;
pub type FieldSpectrum = analysis::FieldSpectrum<f64>;
pub type FieldEstimate = analysis::FieldEstimate<f64>;
pub type LineFit = analysis::LineFit<f64>;
pub type AnalysisOptions = analysis::AnalysisOptions;
pub type ChemicalShiftModel = thermometry::ChemicalShiftModel<f64>;
pub type Calibration = thermometry::Calibration<f64>;
