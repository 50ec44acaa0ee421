pub mod analysis;
pub mod basis;
pub mod error;
pub mod matrix;
pub mod potential;
pub mod quadrature;
pub mod resolvent;
pub mod scattering;
pub mod special;

pub use error::{Error, Result};
pub use matrix::{GeneralMatrix, SpectralPair, SymMatrix};
