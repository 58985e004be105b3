//! Numerical dynamics of the unicritical antiholomorphic family
//! `f_c(z) = conj(z)^d + c` and its connectedness loci, the multicorns.
//!
//! * [`dynamics`] — iteration, multipliers and periodic cycles.
//! * [`angles`] — exact angle dynamics under `t ↦ −d·t`, portraits, counts.
//! * [`atlas`] — hyperbolic-component centres, boundaries and cusps.
//! * [`parabolic`] — Fatou coordinates, Ecalle heights, indices, arcs.
//! * [`rays`] — Böttcher potentials, dynamical and parameter rays.
//! * [`render`] — deterministic tiled rendering.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angles;
pub mod atlas;
pub mod dynamics;
pub mod parabolic;
pub mod rays;
pub mod render;
pub mod series;
pub mod solve;

pub use num_complex::Complex64;
