//! Std side of berryreach: suite configs, scene and log files, the parallel
//! experiment runner, CSV reports, log replay and the command-line tool.

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod replay;
pub mod report;
pub mod runner;

pub use error::AppError;
