//! File formats, dataset generation, benchmarking and the command-line
//! front end around `heomcast-core`.

pub mod audit;
pub mod benchmark;
pub mod config;
pub mod fmo;
pub mod generate;
pub mod manifest;
pub mod model_io;
pub mod parallel;
pub mod trajectory;
pub mod windows;

pub use heomcast_core as core;
