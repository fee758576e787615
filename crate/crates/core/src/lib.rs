//! Analysis toolkit for a predator-prey model with a Holling type-IV
//! response, additional food for the predator and intra-specific predator
//! competition.
//!
//! The crate covers the full working loop for the model: right-hand side
//! and Jacobian evaluation ([`model`]), fixed-step and adaptive simulation
//! with limit-cycle detection ([`simulate`]), equilibrium location and
//! stability classification ([`equilibria`]), bifurcation curves and
//! parameter-plane atlases ([`bifurcation`]), and time-optimal control of
//! the food supply via direct multiple shooting ([`control`]).

pub mod bifurcation;
pub mod control;
pub mod equilibria;
pub mod error;
pub mod model;
pub mod simulate;

pub use error::{CoreError, Result};
pub use model::{Parameters, State};
