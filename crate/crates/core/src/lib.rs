pub mod arith;
pub mod calibration;
pub mod charsum;
pub mod error;
pub mod hecke;
pub mod lmoments;
pub mod mollifier;
pub mod numeric;
pub mod randmodel;
pub mod special;

pub use error::{Error, Result};
