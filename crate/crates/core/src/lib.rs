//! Simulation and timing analysis of bipartite and remote unitary gate
//! protocols over a line of repeater nodes.
//!
//! The crate has two halves. The simulation half (`matrix`, `state`, `qops`,
//! `rep`, `forms`, `circuits`) executes the LOCC protocols exactly at small
//! qudit dimension and certifies every measurement branch against the target
//! unitary. The timing half (`timeline`, `variants`, `bounds`, `optimize`,
//! `posver`) schedules each protocol variant on a 1-D node array with exact
//! rational arithmetic, optimizes repeater placement, and evaluates
//! position-verification criteria.
//!
//! Index convention: subsystem 0 varies fastest (little-endian), both for
//! state vectors and for operator matrices.

pub mod circuits;
pub mod error;
pub mod forms;
pub mod linalg;
pub mod matrix;
pub mod qops;
pub mod rational;
pub mod rep;
pub mod state;

pub mod bounds;
pub mod io;
pub mod optimize;
pub mod posver;
pub mod timeline;
pub mod variants;

pub use error::{Error, Result};
pub use matrix::ComplexMatrix;
pub use rational::Rat;
pub use state::{equal_up_to_phase, Basis, MeasurementBranch, QuditState};
