//! Simulation of pre- and post-selected quantum systems measured by chains of
//! von Neumann pointers of arbitrary accuracy.
//!
//! The crate offers two independent descriptions of the same experiment and
//! checks them against each other:
//!
//! - [`pathways`] and [`pointers`] work with virtual-path amplitudes: products
//!   of transition matrix elements between the prepared and post-selected
//!   states, dressed with one pointer profile per measurement. They produce
//!   reading distributions, conditional statistics, weak values, and the
//!   strong- and weak-limit laws.
//! - [`composite`] evolves the full system-plus-pointers tensor product on
//!   discretized grids and reads the same distributions off the final state,
//!   serving as a brute-force oracle for everything above.
//!
//! [`scenarios`] builds the canonical examples (double slit, three boxes,
//! Cheshire cat), [`hilbert`] supplies the dense complex linear algebra, and
//! [`rng`] a counter-based generator for reproducible Monte Carlo trials.
//!
//! The crate is `no_std`-compatible (with `alloc`); the default `std` feature
//! only adds threaded grid evaluation.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod composite;
pub mod error;
pub mod hilbert;
pub mod pathways;
pub mod pointers;
pub mod rng;
pub mod scenarios;
pub mod testing;

pub use error::{Error, Result};
pub use hilbert::{Operator, StateVector, Unitary};
pub use pathways::{
    MeasurementStep, PathAmplitudeSet, Postselection, Scenario, ScenarioStep,
    SpectralDecomposition,
};
pub use pointers::{PointerSpec, Profile, ReadingDistribution, WeakValue};

pub use num_complex::Complex64;
