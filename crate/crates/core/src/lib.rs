pub mod cochain;
pub mod error;
pub mod group;
pub mod io;
pub mod pairings;
pub mod polygrowth;
pub mod quadrature;
pub mod rational;
pub mod report;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
