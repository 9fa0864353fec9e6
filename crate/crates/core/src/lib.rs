pub mod burgers;
pub mod cauchy;
pub mod cli;
pub mod correction;
pub mod error;
pub mod grid;
pub mod hilbert;
pub mod io;
pub mod model;
pub mod quadrature;
pub mod sim;

pub use error::{Error, Result};
