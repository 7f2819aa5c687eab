//! Symplectic-geometric diagnostics of reaction bottlenecks near index-1 saddles.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`]: the standard symplectic form, symplecticity tests,
//!   symplectic spectra (Williamson eigenvalues) and ellipsoid capacities.
//! * [`models`]: quadratic saddle–center normal forms, truncated classical
//!   normal-form polynomials and the physical Eckart–Morse(–Morse) Hamiltonian.
//! * [`geometry`]: maximal bath actions, candidate widths and action-space
//!   volumes / directional fluxes through the dividing surface.
//! * [`evolution`]: exact linear flows and saddle-plane projection areas of
//!   evolved ellipsoids.
//! * [`ensemble`]: reactive ensembles and closed-form finite-time transmission.
//! * [`integrate`]: Störmer–Verlet integration of the full Hamiltonian with
//!   energy and symplecticity monitors.
//! * [`report`] and [`io`]: tabular output with provenance headers, matrix and
//!   model file formats.
//!
//! Data-parallel loops go through [`Exec`]; with the `parallel` feature
//! disabled every loop runs sequentially and produces identical results.

// `!(x > 0.0)` is used deliberately so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod ensemble;
pub mod error;
pub mod evolution;
pub mod exec;
pub mod geometry;
pub mod integrate;
pub mod io;
pub mod linalg;
pub mod models;
pub mod report;
pub mod roots;

pub use error::{Error, Result};
pub use exec::Exec;
