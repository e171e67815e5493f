//! Exact sparse-state simulation of a collective-excitation phase gate
//! running on two-level atoms in a state-dependent optical lattice.
//!
//! The crate is layered bottom-up:
//!
//! * [`lattice`] and [`state`]: sites, regions, bit-packed configurations
//!   and the sparse amplitude map.
//! * [`primitives`]: pulses, state-dependent shifts, collisional sweeps,
//!   state phases and b-lattice emptying.
//! * [`schedule`], [`choreography`], [`validate`]: instruction lists, the
//!   mapping/creation procedures, initialization, the gate itself and the
//!   geometric validator.
//! * [`collective`]: storage/readout of collective excitations and the
//!   effective 3x3 gate.
//! * [`noise`]: error channels and the Monte Carlo trajectory harness.
//! * [`config`], [`results`], [`fit`], [`experiments`]: the batch runner
//!   used by the `simgate` binary.
//!
//! [`oracle`] is a deliberately naive list-of-branches engine used to
//! cross-check the primitives.

pub mod choreography;
pub mod collective;
pub mod config;
pub mod error;
pub mod experiments;
pub mod fit;
pub mod lattice;
pub mod noise;
pub mod oracle;
pub mod primitives;
pub mod results;
pub mod schedule;
pub mod state;
pub mod validate;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Tolerance used for physics assertions throughout the crate.
pub const PHYSICS_TOL: f64 = 1e-9;
/// Default amplitude pruning tolerance.
pub const DEFAULT_PRUNE_TOL: f64 = 1e-12;
