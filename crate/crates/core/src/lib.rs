//! Constructive potential theory on the unit disk.
//!
//! The crate is organised bottom-up:
//!
//! - [`capacity`]: logarithmic capacity of finite unions of segments and arcs,
//!   via Fekete points (transfinite diameter) and via discrete equilibrium
//!   measures, plus capacity density ratios and thinness reports.
//! - [`cantor`]: Cantor-type sets `E(p_1, p_2, ...)`, the zero-capacity series
//!   criterion, and the associated singular staircase functions.
//! - [`lusin`]: capacity-a.e. antiderivatives built from Cantor flattening.
//! - [`harmonic`]: spectral Poisson extension on the disk, conjugates, `h^p`
//!   norms and nontangential (Stolz) probes.
//! - [`rh`]: the Riemann-Hilbert problem `Re(conj(lambda) f) = phi` for
//!   analytic `f` with unimodular BV coefficient `lambda`.
//! - [`beltrami`]: a Neumann-series Beltrami solver on a periodic lattice and
//!   the composition `f = F o H` solving the same boundary problem for
//!   quasiconformal functions.
//! - [`dimension`]: the family of harmonic functions with null boundary
//!   limits and the induced non-uniqueness of Riemann-Hilbert solutions.

// `!(x > 0.0)` is used deliberately: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beltrami;
pub mod cantor;
pub mod capacity;
pub mod dimension;
mod error;
pub mod fft;
pub mod harmonic;
pub mod lusin;
pub mod rh;
pub mod sequence;

pub use error::{Error, Result};
pub use num_complex::Complex64;
