//! Simulator for a deterministic multi-mode photonic source built from a
//! Rydberg-blockaded atomic ensemble.
//!
//! Quantum information is stored in the collective occupation of internal
//! atomic levels (zero or one atom per level), processed with blockade pulse
//! primitives ([`pulse`]), and released level by level as photonic modes.
//! [`protocols`] builds GHZ, Bell, double-trine and cluster-state schedules,
//! [`verify`] checks the produced states, [`emission`] evaluates the
//! directional cooperative-emission physics and [`dsl`] reads and writes the
//! `.pulse` schedule format.
//!
//! The numeric core is generic over [`Real`] (`f64` or `f32`); the aliases
//! below fix the double-precision instantiation used by the CLI.

pub mod cli;
pub mod dsl;
pub mod emission;
pub mod error;
pub mod protocols;
pub mod pulse;
pub mod scalar;
pub mod state;
pub mod verify;

pub use error::{Error, Result};
pub use protocols::{Protocol, RunMode, Schedule};
pub use pulse::{Instruction, Level};
pub use scalar::Real;
pub use state::{Configuration, Letter};

pub type Complex64 = num_complex::Complex<f64>;
pub type State = state::EnsembleState<f64>;
pub type StateF32 = state::EnsembleState<f32>;
pub type Ensemble = state::StateEnsemble<f64>;
pub type Cloud = emission::AtomCloud<f64>;
pub type CloudF32 = emission::AtomCloud<f32>;
pub type RunResult = protocols::SimResult<f64>;
