//! Coupled microwave, acoustic and optical mode models for piezo-Brillouin
//! transducers and phonon-counting sensors.
//!
//! All rates and frequencies are angular (rad/s) internally. Spectra carry
//! their grid in Hz so that files round-trip without conversion error.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

mod prelude;

pub mod cavity;
pub mod constants;
pub mod couplings;
pub mod design;
pub mod error;
pub mod fit;
pub mod materials;
pub mod presets;
pub mod sensing;
pub mod spectrum;
pub mod statespace;
pub mod table;

pub use error::{Error, Result};
