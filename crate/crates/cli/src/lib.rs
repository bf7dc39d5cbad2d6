//! File formats, the parameter sweep and the `chaostap` command line built
//! on the `chaostap` core library.

pub mod cli;
pub mod config;
pub mod io;
pub mod seed;
pub mod sweep;
