//! Command-line front end and Monte Carlo oracle for the 3/2 pricing engine.

pub mod commands;
pub mod config;
pub mod error;
pub mod mc;
pub mod output;
