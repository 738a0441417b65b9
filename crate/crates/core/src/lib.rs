pub mod configs;
pub mod error;
pub mod kernel;
pub mod lattice;
pub mod martingale;
pub mod paths;
pub mod rwlm;
pub mod seed;
pub mod sim;
pub mod stack;

pub use error::{Error, Result};
