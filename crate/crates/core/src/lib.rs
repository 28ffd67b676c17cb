//! Semiclassical simulation of state-selective pushing gates for trapped ions.
//!
//! Internally all quantities are dimensionless: lengths in units of
//! `a = sqrt(hbar / m omega)`, times in `1/omega`, energies in `hbar omega`.
//! `units` converts to and from SI.

pub mod dynamics;
pub mod error;
pub mod fidelity;
pub mod gates;
pub mod ode;
pub mod phases;
pub mod roots;
pub mod statics;
pub mod units;

pub use error::{Error, Result};
