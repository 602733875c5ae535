//! Core algorithms for random permutations generated by q-deformed Demazure
//! products of the staircase word, together with the equivalent colored
//! six-vertex samplers, cylinder particle systems, and the closed-form
//! hydrodynamic profiles they converge to.
//!
//! Everything in this crate is deterministic given a seed: randomness comes
//! from [`coins::CoinStream`], a counter-based stream addressed by lattice
//! position, so independent samplers can share coins bit-for-bit. The crate
//! is `no_std` (with `alloc`); I/O, file formats, and parallel experiment
//! drivers live in the companion `qdem` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod coins;
pub mod cylinder;
pub mod demazure;
pub mod godunov;
pub mod height;
pub mod hydro;
pub mod lattice;
pub mod perm;

pub use coins::{CoinStream, Purpose};
pub use height::{Chart, FieldMeta, HeightField};
pub use perm::Permutation;
