//! Numerical laboratory for spike-layer concentration of the Neumann problem
//! `-eps^2 Δu + u = u^p` near the edge of a three-dimensional wedge.
//!
//! The crate is organised bottom-up:
//!
//! * [`radial`] computes the radial ground state `U` of `-ΔU + U = U^p` in ℝ³
//!   and the energy coefficient of a spike sitting on an edge.
//! * [`cone`] computes the spectrum of the linearized operator on infinite cones.
//! * [`wedge`] describes the wedge geometry, the pulled-back metric and spike ansätze.
//! * [`reduction`] assembles the discrete energy and runs the finite-dimensional reduction.
//! * [`cli`] wires everything to the `edgespike` command.

pub mod cli;
pub mod cone;
pub mod config;
pub mod error;
pub mod io;
pub mod linalg;
pub mod radial;
pub mod reduction;
pub mod wedge;

pub use error::{Error, Result};
