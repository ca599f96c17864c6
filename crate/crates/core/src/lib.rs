//! Planning and analysis for metro networks that carry quantum and
//! conventional traffic over shared fiber.

pub mod capacity;
pub mod catalog;
pub mod cli;
pub mod config;
pub mod error;
pub mod loss;
pub mod report;
pub mod scheduler;
pub mod source;
pub mod topology;
pub mod units;
pub mod wdm_grid;

pub use error::{Error, Result};
