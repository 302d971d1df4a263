pub mod cli;
pub mod contextuality;
pub mod csp;
pub mod error;
mod homsearch;
pub mod quantale;
pub mod relations;
pub mod spectra;
pub mod subalgebra;
pub mod zariski;

pub use error::{Error, Result};
