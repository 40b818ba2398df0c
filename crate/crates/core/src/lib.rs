//! Core of the CNR ("comparison and replacement") tournament optimizer.
//!
//! A `p`-level run feeds `2^p` uniform superpositions through a binary tree of
//! `2^p - 1` CNR operations. Each CNR compares the costs held in a target and a
//! support register through phase estimation and overwrites the target with the
//! support when the support is better. This crate carries everything that does
//! not need an operating system:
//!
//! * [`cost`]: 2-local Ising cost functions and their exact energy spectra.
//! * [`generators`]: seeded Gaussian-weighted and MAX-2-XOR instances.
//! * [`qpe`]: the closed-form ancilla law of the comparison step.
//! * [`recursion`]: level-probability calculus under ideal comparison.
//! * [`metrics`]: relative error, cumulative probability, bound lines.
//! * [`sim`]: a small exact statevector simulator of the full circuit.
//! * [`emulator`]: a classical Monte Carlo of the tournament at n up to 30.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod cost;
pub mod emulator;
pub mod error;
pub mod generators;
pub mod metrics;
pub mod qpe;
pub mod recursion;
pub mod sim;

pub use cost::{EnergySpectrum, Level, ProblemInstance, Term};
pub use emulator::{EmpiricalLevels, EmulatorRun, Estimate, Mode, Pairing, Tally};
pub use error::{Error, Result};
pub use generators::{Family, GeneratorSpec};
pub use metrics::{Affine, BoundLines, CriticalLine, NeighborhoodReport};
pub use qpe::{CnrConfig, PhaseFraction};
pub use recursion::LevelDistribution;
pub use sim::{RegisterLayout, StateVector};
