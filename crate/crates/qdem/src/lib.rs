//! Std companion of the core library: Monte Carlo analysis harness,
//! file formats, and SVG plotting used by the `qdem` binary.

pub mod analysis;
pub mod formats;
pub mod svg;

pub use qdem_core;
