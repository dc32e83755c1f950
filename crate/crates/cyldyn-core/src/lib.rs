//! Projectable meromorphic maps `f(z) = ℓz + Φ(e^{2πiz})` with rational `Φ`,
//! their projections `g(w) = w^ℓ e^{2πiΦ(w)}` to the punctured plane, and the
//! Newton-map families built from them.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![cfg_attr(test, allow(unused_imports))]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod kernel;
pub mod maps;
pub mod newton;
pub mod orbit;
pub mod param;

pub use error::{Error, Result};
pub use kernel::{poly_roots, Polynomial, RationalMap, SpherePoint};
pub use maps::{EndStatus, Preset, ProjectableMap, SingularData};
pub use num_complex::Complex64;
