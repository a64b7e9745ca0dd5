//! Error probabilities for telling apart two opposite-phase weak coherent
//! pulses when the phase is only defined relative to a finite reference pulse.
//!
//! The crate covers the simple linear-optics receivers (generalized Kennedy,
//! generalized homodyne, and the one-parameter beamsplitter family with a
//! maximum-likelihood decision), the minimum-error (Helstrom) bound for the
//! phase-averaged mixed states, a seeded Monte Carlo oracle, and parameter
//! sweeps that produce the data behind the standard figures.
//!
//! All intensities are mean photon numbers: `alpha2` for the signal and
//! `beta2` for the reference.

pub mod cli;
pub mod error;
pub mod helstrom;
pub mod model;
pub mod montecarlo;
pub mod numerics;
pub mod receivers;
pub mod scan;

pub use error::{Error, Result};
pub use model::{
    Beamsplitter, ClickOutcome, DiscriminationResult, Hypothesis, Method, OutputMeans, PulsePair,
};

/// Library version, stamped into scan metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
