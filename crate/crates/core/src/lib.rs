pub mod dirichlet;
pub mod error;
pub mod family;
pub mod halfspace;
pub mod logvalue;
pub mod lattice;
pub mod modulus;
pub mod profile;
pub mod quadrature;

pub use error::{Error, Result};
pub use logvalue::LogValue;
pub use modulus::{Indexing, Modulus};
