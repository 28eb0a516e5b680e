//! Structural analysis and simulation of reaction-diffusion systems built
//! from mass-action chemical networks.
//!
//! The crate is split into
//! - [`netmodel`]: exact polynomial right-hand sides,
//! - [`dsl`]: the `.crn` network description format,
//! - [`structural`]: certificates for quasipositivity, mass control,
//!   entropy dissipation and intermediate sums,
//! - [`ladder`]: the bootstrap exponent sequence,
//! - [`pde`]: the finite-difference solver,
//! - [`diagnostics`]: norms, equilibria and decay fits over a trace.

pub mod catalog;
pub mod diagnostics;
pub mod dsl;
pub mod netmodel;
pub mod ladder;
pub mod pde;
pub mod structural;
