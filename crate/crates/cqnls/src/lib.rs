//! Radial spectral solver suite for the cubic-quintic nonlinear
//! Schrödinger equation
//!
//! ```text
//! i u_t + (1/2) Δu = -|u|^2 u + |u|^4 u,   x in R^d,  d = 2, 3,
//! ```
//!
//! restricted to radially symmetric states. In the variable `s = r^2` the
//! radial Laplacian loses its 1/r singularity and every field lives on a
//! Chebyshev collocation grid over `[0, s0]` with a homogeneous Dirichlet
//! condition at the truncation radius `s0`.
//!
//! The crate provides
//!
//! * [`spectral`]: collocation grids, differentiation matrices,
//!   Clenshaw–Curtis quadrature and barycentric interpolation;
//! * [`groundstate`]: Newton solves for solitary-wave profiles `Q_omega`,
//!   homotopy in the quintic deformation parameter, continuation in
//!   `omega`, and branch diagnostics;
//! * [`observables`]: mass, energy, action, momentum and Lp norms of
//!   radial fields;
//! * [`evolution`]: Strang splitting with an A-stable fourth-order
//!   implicit linear step, plus conservation monitoring;
//! * [`experiments`]: perturbed-soliton runs and their classification
//!   into stable / dispersive / settled outcomes;
//! * [`library`]: plain-text persistence for profiles, fields and
//!   diagnostic series.

pub mod error;
pub mod evolution;
pub mod experiments;
pub mod groundstate;
pub mod library;
pub mod observables;
pub mod spectral;

pub use error::{Error, Result};
pub use spectral::{Dimension, RadialGrid};
