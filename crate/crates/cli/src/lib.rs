//! Library side of the command-line harness: experiment configuration,
//! the Monte Carlo runner, and the results CSV codec. The binary in
//! `main.rs` is a thin argument-parsing shell over these.

pub mod config;
pub mod csv_io;
pub mod runner;
