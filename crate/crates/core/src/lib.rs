pub mod cli;
pub mod error;
pub mod jones;
pub mod kostant;
pub mod lie;
pub mod mult;
pub mod qseries;
pub mod stability;

pub use error::{Error, Result};
