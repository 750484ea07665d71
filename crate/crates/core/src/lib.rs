//! Closed and open dynamics of driven few-level systems near avoided
//! crossings, with diabatic ramps and sudden-switch control.

pub mod control;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod models;
pub mod numfmt;
pub mod qsl;
pub mod spectrum;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
