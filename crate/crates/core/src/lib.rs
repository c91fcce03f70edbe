//! Age of Information for a source uplinking through a Poisson LEO constellation.
//!
//! The crate models the intermittent satellite coverage seen by a ground node
//! as an alternating on-off service process, evaluates the time-average age
//! in closed form, and checks it by simulation at two levels of fidelity:
//! a renewal simulator that draws i.i.d. periods from the fitted laws, and an
//! orbital simulator that moves the node under an explicit constellation.

pub mod analysis;
mod engine;
pub mod error;
pub mod geometry;
pub mod onoff;
pub mod orbital_sim;
pub mod renewal_sim;
pub mod stats;

pub use error::{Error, Result};
