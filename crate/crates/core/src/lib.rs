//! Quantum trajectories of open systems, their intrinsic dimension and the
//! complex spectral statistics of the underlying Lindblad generators.

// `!(x > 0.0)` style checks deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dimension;
pub mod error;
pub mod experiments;
pub mod hilbert;
pub mod lindblad;
pub mod linalg;
pub mod scalar;
pub mod semiclassical;
pub mod spectral;
pub mod trajectory;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision instantiations used by the experiment drivers.
pub type PointCloudF64 = dimension::PointCloud<f64>;
pub type IdEstimateF64 = dimension::IdEstimate<f64>;
pub type ComplexSpectrumF64 = spectral::ComplexSpectrum<f64>;
pub type ClassicalSpinF64 = semiclassical::ClassicalSpin<f64>;
