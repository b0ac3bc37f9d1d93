//! Library surface of the command-line front end: configuration, file
//! formats, plotting, and the command implementations. The binary in
//! `main.rs` is a thin argument-parsing shell over these.

pub mod commands;
pub mod config;
pub mod io;
pub mod plot;
