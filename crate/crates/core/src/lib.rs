//! Space-time Galerkin boundary element methods for the one-dimensional wave
//! equation with Dirichlet data.
//!
//! Two formulations of the single layer boundary integral equation are
//! provided on the lateral boundary `{0, L} x (0, T)`:
//!
//! * the energetic formulation, testing `d/dt V w` in `L^2`, and
//! * the coercive formulation, testing `H_T V w` with the modified Hilbert
//!   transformation `H_T` that maps the sine basis `sin((pi/2 + k pi) t / T)`
//!   onto the cosine basis `cos((pi/2 + k pi) t / T)`.
//!
//! Operator actions are exact piecewise polynomials; the only approximate
//! ingredient is the `H_T` pairing, which is evaluated by two independent
//! routes (closed-form kernel integration and truncated Fourier series).

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod error;
pub mod experiments;
pub mod fourier;
pub mod linalg;
pub mod mesh;
pub mod poly;
pub mod quadrature;
pub mod spectral;
pub mod wave_ops;

pub use error::{Error, Result};
pub use mesh::{LateralMesh, Pair, ProblemGeometry, Side};
pub use poly::PiecewisePoly;
