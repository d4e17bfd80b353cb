//! Mass-conserving wavelet compression for finite-volume simulations on
//! regular grids.
//!
//! The crate is organised around the compression cycle applied to every
//! subgrid between two time steps:
//!
//! 1. [`wavelet`]: a non-periodic 5/3 lifting transform on signals of
//!    length `2^j + 1` that keeps the trapezoidal mass in the coarse samples,
//! 2. [`threshold`]: scale-dependent nullification of small details,
//! 3. [`codec`]: lossless CSR and chunked LZ back-ends with exact size
//!    accounting.
//!
//! [`patchgrid`] splits a global grid into subgrids that share their boundary
//! layer, [`solver`] provides the finite-volume update with an upwind
//! transport flux and an exact-Riemann Godunov flux for shallow water, and
//! [`pipeline`] wires everything into reproducible experiments.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod codec;
pub mod field;
pub mod patchgrid;
pub mod pipeline;
pub mod solver;
pub mod threshold;
pub mod wavelet;

pub use field::Field;
