//! Exact search and certification tools for integer-distance points of the
//! square and the equilateral triangle.

pub mod angle;
pub mod cli;
pub mod error;
pub mod forms;
pub mod kernel;
pub mod report;
pub mod square;
pub mod triangle;

pub use error::{Error, Result};
pub use kernel::{Integer, Rational};
