//! Numerical laboratory for doubly warped products
//! `[0, inf) x_f S^{p-1} x_h S^1` with `f(r) = r (1 + r^2)^{-1/4}` and
//! `h(r) = (1 + r^2)^{-alpha}`, their universal covers and the asymptotic
//! cones of those covers.
//!
//! * [`warp`] and [`curvature`]: profiles, Ricci curvature, positivity scans.
//! * [`geodesy`]: exact cover distances through the warped plane
//!   `dr^2 + h(r)^2 dt^2`, plus a grid shortest-path oracle.
//! * [`asymptotics`]: growth of cover distances in the winding number and
//!   loops based far from the axis.
//! * [`cone`]: the limit orbit metric, its box-counting dimension and
//!   desk-scale checks of the cone structure.
//! * [`ghdist`]: finite metric spaces and Gromov-Hausdorff bounds.

// `!(x > 0.0)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod cone;
pub mod curvature;
pub mod error;
pub mod geodesy;
pub mod ghdist;
pub mod ode;
pub mod quad;
pub mod roots;
pub mod warp;

pub use error::{Error, Result};
pub use geodesy::{GeodesicArc, PlanePoint, WarpedPlane};
pub use warp::{WarpEval, WarpParams};
