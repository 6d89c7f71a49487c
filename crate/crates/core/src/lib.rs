pub mod audit;
pub mod channels;
pub mod choi;
pub mod config;
pub mod constraints;
pub mod cost;
pub mod error;
pub mod linalg;
pub mod optim;
pub mod reproduce;
pub mod sampler;
pub mod symmetry;

pub use error::{Error, Result};
