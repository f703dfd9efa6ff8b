pub mod complementarity;
pub mod criteria;
pub mod error;
pub mod hw;
pub mod linalg;
pub mod optimize;
pub mod reproduce;
pub mod states;
pub mod tomography;

pub use error::{Error, Result};
