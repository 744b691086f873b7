pub mod deformation;
pub mod error;
pub mod exterior;
pub mod fixture;
pub mod hermitian;
pub mod linalg;
pub mod nilcomplex;
pub mod obstruction;
pub mod scalars;

pub use error::{Error, Result};
