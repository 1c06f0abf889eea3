//! Generalized creation/annihilation (ladder) operators for separated
//! Schrodinger equations.
//!
//! The crate splits into an exact symbolic side and a floating-point side:
//!
//! * [`symexpr`] — term algebra over one variable with exact rational-function
//!   coefficients, plus a small expression parser and second-order
//!   differential-operator algebra.
//! * [`staeckel`] — orthogonal coordinate catalog, Stackel determinants,
//!   Robertson-condition checking, and assembly of separated 1D equations.
//! * [`factorize`] — Riccati solving in the power basis, ladder-pair
//!   construction, commutators and intertwining relations.
//! * [`states`] — exact ladder chains of radial eigenfunctions in the
//!   closed family P(r)·r^a·exp(br + cr²).
//! * [`numerics`] — grids, quadrature, Hamiltonian residuals, an independent
//!   shooting oracle, and the Liouville normal-form transformation. Generic
//!   over the floating scalar via [`Scalar`].
//! * [`cli`] — command-line front end and the audit-report machinery.

pub mod cli;
pub mod factorize;
pub mod numerics;
pub mod report;
pub mod staeckel;
pub mod states;
pub mod symexpr;

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating scalar the numeric side is generic over. The symbolic side is
/// always exact (arbitrary-precision rationals) and does not use this trait.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
}

/// Default scalar used by the CLI and the shipped test suites.
pub type Real = f64;

/// Single-precision alias, mainly useful for quick sweeps.
pub type Real32 = f32;
