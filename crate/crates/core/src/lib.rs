//! Two-soliton dynamics for the focusing NLS with a point interaction.
//!
//! * [`numerics`]: grids, complex fields, quadrature, banded solves.
//! * [`profiles`]: the ground state `Q`, the two-soliton family, model parameters.
//! * [`interaction`]: action, Nehari functional and the soliton overlap integrals.
//! * [`eigen`]: the perturbed translational eigenpair `(ν_z, T_z)`.
//! * [`dynamics`]: the tabulated force law and the effective ODE for `(z, v)`.
//! * [`evolver`]: split-step Crank-Nicolson for the full PDE.
//! * [`modulation`]: decomposition of a field into family member plus remainder.
//! * [`experiments`]: shooting, attraction, acceptance criteria and the CLI.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod eigen;
pub mod error;
pub mod evolver;
pub mod experiments;
pub mod interaction;
pub mod modulation;
pub mod numerics;
pub mod profiles;

pub use error::{Error, Result};
