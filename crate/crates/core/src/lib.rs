pub mod audit;
pub mod aux;
pub mod blaschke;
pub mod error;
pub mod formats;
pub mod gallery;
pub mod interpolation;
pub mod geometry;
pub mod jet;
pub mod measures;
pub mod ode;
pub mod profile;
pub mod provider;
pub mod quad;
pub mod report;

pub use error::{Error, Result};
pub use jet::Jet;
pub use num_complex::Complex64;
