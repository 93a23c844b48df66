//! Two-dimensional time-harmonic acoustic scattering by sound-soft
//! piecewise-linear cracks, and crack reconstruction from the far-field
//! pattern of a single incident wave.
//!
//! Forward problem: a graded-mesh Nystrom discretization of the single-layer
//! boundary integral equation. Inverse methods: contrast sampling indicators,
//! a one-wave factorization indicator with disk test scatterers, radius scans
//! with convex-hull support accumulation, and a regularized Newton iteration
//! that reconstructs the crack corner points.

pub mod config;
pub mod forward;
pub mod scatterers;
pub mod geometry;
pub mod indicators;
pub mod io;
pub mod linalg;
pub mod newton;
pub mod noise;
pub mod specfun;
