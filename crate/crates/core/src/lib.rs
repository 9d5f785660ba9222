//! Piecewise-smooth mean-field analysis of networks of adapting
//! integrate-and-fire neurons.
//!
//! The crate simulates the spiking network ([`netsim`]), integrates its
//! mean-field description across the switching manifold `H = 0`
//! ([`meanfield`]), computes equilibria in closed form ([`equilibria`]) and
//! assembles smooth and non-smooth bifurcation curves ([`bifurcation`]).

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bifurcation;
pub mod equilibria;
pub mod error;
pub mod meanfield;
pub mod models;
pub mod netsim;
pub mod numerics;

pub use error::{Error, Result};
pub use meanfield::{MeanFieldState, Trajectory};
pub use models::{ModelKind, ModelParams};
