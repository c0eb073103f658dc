//! Exact simulation of spin-dependent-kick interferometry on a single
//! trapped ion.
//!
//! A qubit (two hyperfine ground states) is coupled to one harmonic motional
//! mode through impulsive state-dependent kicks. Because every operation in
//! such an experiment maps coherent states to coherent states, an entire run
//! can be tracked exactly as a finite superposition of spin-labelled coherent
//! states: no basis truncation, no time stepping. That representation and
//! its closed inner-product algebra live in [`phase`]; the unitaries of the
//! experiment in [`operators`]; pulse programs, presets and schedule planning
//! in [`program`] and [`presets`]; measured quantities (brightness, Ramsey
//! contrast, thermal averages, Wigner maps, lineshape fits) in
//! [`observables`] and [`wigner`].
//!
//! An independent brute-force verifier on a truncated number basis is
//! provided by [`oracle`]; it executes the same pulse programs through dense
//! matrices and is used throughout the test suite to validate the coherent
//! algebra.
//!
//! The crate is `no_std` (with `alloc`); enable the `std` feature to pull in
//! standard-library float implementations.

#![no_std]

extern crate alloc;

#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod error;
pub mod observables;
pub mod operators;
pub mod oracle;
pub mod phase;
pub mod presets;
pub mod program;
pub mod quad;
pub mod rng;
pub mod wigner;

pub use error::Error;
pub use phase::{
    Amplitude, CoherentLabel, CoherentTerm, SpinLabel, SpinMotionState, ThermalEnsemble, Tolerances,
};

/// Convenience alias used throughout: `Result` with the crate error type.
pub type Result<T> = core::result::Result<T, Error>;
