//! Numerical laboratory for the eikonal equation on Wasserstein spaces of
//! discrete measures over ℝ^d.
//!
//! - [`base_space`]: Euclidean points, rays and analytically solvable fields.
//! - [`measure`]: finitely supported probability measures.
//! - [`transport`]: exact `W_p` via transportation simplex, with quantile and
//!   enumeration oracles.
//! - [`wgeom`]: displacement geodesics, rays, Busemann limits, sphere sampling,
//!   the (CS) diagnostic and distance-like limits.
//! - [`viscosity`]: fields on measures, slopes, viscosity and dl_G tests,
//!   ε-descent and the representation check.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod base_space;
pub mod error;
pub mod measure;
pub mod transport;
pub mod verdict;
pub mod viscosity;
pub mod wgeom;

pub use error::{Error, Result};
pub use verdict::Verdict;
