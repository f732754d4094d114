//! Spline Galerkin laboratory for the triharmonic eigenvalue problem with weak
//! intermediate boundary conditions on domains with fast-oscillating boundaries.
//!
//! Modules, bottom-up: [`geometry`] (profiles, `Ω_ε`, `h_ε`, `Φ_ε`, charts),
//! [`spline`] (H³-conforming spaces, masks, quadrature), [`forms`] (assembly of
//! the pencil), [`eig`] (dense generalized eigensolver, 1D oracle), [`cell`]
//! (periodic cell problem and `K1`), [`analysis`] (unfolding, averaging,
//! polynomial defect, trace and Green-formula diagnostics) and [`lab`]
//! (configs, regime sweeps, output).

pub mod analysis;
pub mod cell;
pub mod eig;
pub mod fields;
pub mod forms;
pub mod geometry;
pub mod lab;
pub mod par;
pub mod spline;

pub use par::Parallelism;
