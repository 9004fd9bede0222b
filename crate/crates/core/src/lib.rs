//! Pseudo-spectral Navier-Stokes-Coriolis solver on the layer R² × T¹.

pub mod asymptotics;
pub mod checkpoint;
pub mod error;
pub mod fft;
pub mod field;
pub mod grid;
pub mod kernel;
pub mod norms;
pub mod oseen;
pub mod rossby;
pub mod solver;
pub mod spectral;
pub mod strichartz;

pub use error::{NscError, Result};
pub use field::{
    forward_plane, forward_transform, inverse_plane, inverse_transform, FieldDecomposition,
    PlaneField, SpectralField, SpectralVectorField,
};
pub use grid::Grid;
pub use norms::Norm;
