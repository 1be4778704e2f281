//! Allen–Cahn phase-field laboratory for mean curvature flow.
//!
//! The crate is `no_std` (with `alloc`) by default. It contains the double-well
//! potential, uniform grids and finite-difference operators, well-prepared
//! initial data, an explicit Allen–Cahn integrator, the energy / discrepancy /
//! interface measures extracted from a phase field, and the verification
//! checks that compare those measures against mean-curvature-flow identities.
//!
//! Enable `std` for `std::error::Error` on [`Error`] and `parallel` for
//! cell-parallel stepping with rayon. Results never depend on the thread count.

#![cfg_attr(not(any(feature = "std", test)), no_std)]
// axis loops index several per-axis arrays at once
#![allow(clippy::needless_range_loop)]
// negated comparisons also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
pub mod fields;
pub mod geometry;
pub mod measures;
pub mod potential;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use fields::{Boundary, Grid, Point, Region, ScalarField, TestFunction, TestKind, TimeWindow};
pub use geometry::{FlowKind, ReferenceFlow, Shape, ShapeSpec};
pub use measures::{DensitySnapshot, InterfaceFields};
pub use potential::{DoubleWell, Potential, Quartic};
pub use solver::{PhaseField, PhaseTrajectory, Scheme};
pub use verify::{ReportRow, Sided, VerificationReport};
