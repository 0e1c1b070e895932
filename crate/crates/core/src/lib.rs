//! Spin-1 three-box paradox and Cheshire-cat weak-measurement simulation.
//!
//! The crate is organized bottom-up:
//!
//! * [`spin_algebra`]: J = 1 states, observables, in-plane rotations.
//! * [`weak_values`]: `⟨ψ_f|O|ψ_i⟩ / ⟨ψ_f|ψ_i⟩` and spin-space projectors.
//! * [`conditions`]: the interference conditions on α, φ, γ and their solvers.
//! * [`interferometer`]: branch-level model of the Stern-Gerlach setups and
//!   path-resolved weak values.
//! * [`meter`]: pointer dynamics, post-selection, weak-limit convergence and
//!   the small-rotation protocol.
//! * [`cli`]: config files, CSV output and the `weakspin` subcommands.

pub mod cli;
pub mod conditions;
pub mod error;
pub mod interferometer;
pub mod meter;
pub mod roots;
pub mod spin_algebra;
pub mod weak_values;

pub use error::{Error, Result};
pub use spin_algebra::{Angle, Observable, SpinState};
pub use weak_values::WeakValue;
pub use num_complex::Complex64;
