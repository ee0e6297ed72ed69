//! Simulation and spectral-analysis toolkit for a boundary-controlled
//! nonlinear tubular-reactor model.
//!
//! An axial dispersion reactor `∂C/∂t = D·C″ − v·C′ − k·Cⁿ` on `[0, l]`
//! with Danckwerts boundary conditions is closed by the inlet feedback
//! `u(t) = α·C(0, t)`. The crate computes, for any gain α < 1:
//!
//! * the spectrum of the closed-loop linear operator, from the two
//!   transcendental eigenvalue branches ([`spectral`]),
//! * steady-state profiles of the full nonlinear loop ([`steady_state`]),
//! * IMEX Crank–Nicolson trajectories with invariant-set monitoring
//!   ([`pde_sim`]),
//! * certified and observed exponential decay rates ([`decay`]).
//!
//! [`model`] holds the physical parameters, grids, the invariant-set
//! weight φ, and the comparable-across-gains initial data; [`numerics`]
//! the shared kernels (bracketed root finding, Thomas solves, trapezoid
//! norms, least-squares fits).

pub mod decay;
pub mod error;
pub mod model;
pub mod numerics;
pub mod pde_sim;
pub mod spectral;
pub mod steady_state;

mod stencil;

pub use error::{Error, Result};
pub use model::{ClosedLoopSetup, Grid, InitialDataSpec, Profile, ReactorParams};
pub use spectral::{Branch, Eigenvalue, Spectrum};
