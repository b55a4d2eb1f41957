//! Computational homogenization of thin elastic plates with periodic
//! piezoelectric inclusions wired to electric circuits.
//!
//! The crate is `no_std` (it needs `alloc`). It covers:
//!
//! * [`material`]: constitutive tensors, the packed 10×10 global tensor and
//!   the transverse condensation to plate tensors;
//! * [`femcore`]: structured periodic/plate meshes, Q1 and Bogner–Fox–Schmit
//!   elements, sparse assembly and direct solves;
//! * [`cell2d`]: cell problems and effective tensors when the plate is much
//!   thinner than the inclusion spacing;
//! * [`cell3d`]: coupled elastic/electrostatic cell problems when thickness
//!   and spacing are comparable;
//! * [`plate`]: the effective Kirchhoff–Love plate solvers for prescribed
//!   voltage, local circuits and nonlocal (inter-cell) circuits.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod cell2d;
pub mod cell3d;
pub mod dense;
mod error;
pub mod femcore;
pub mod material;
pub mod plate;
pub mod poly;

pub use error::{Error, Result};
