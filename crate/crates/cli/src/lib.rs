//! Configuration, command dispatch and reports behind the `su2seq` binary.

pub mod commands;
pub mod config;
pub mod report;
