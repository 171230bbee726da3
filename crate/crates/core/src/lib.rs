pub mod error;
pub mod geometry;
pub mod linalg;
pub mod poly;
pub mod rational;

pub use error::{Error, Result};
pub mod plfun;
pub mod quadrature;
pub mod quantize;
pub mod optimize;
pub mod invariants;
pub mod lab;
pub mod io;
