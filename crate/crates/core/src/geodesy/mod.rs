//! Geodesics of the warped plane `P = (R^2, dr^2 + h(r)^2 dt^2)`.
//!
//! Deck transformations of the universal cover shift the unwound circle
//! coordinate `t` by `2 pi`, so the cover distance between a point at radius
//! `base_r` and its image under the `l`-th power of the generator is the
//! plane distance from `(base_r, 0)` to `(base_r, 2 pi l)`.
//!
//! Geodesics of `P` have the Clairaut first integral `c = h(r)^2 dt/ds`. An
//! arc with `0 < c < h(base_r)` leaves `base_r`, turns at the radius `r_star`
//! with `h(r_star) = c` and comes back; its length and angular advance are
//! one-dimensional integrals with an inverse square root singularity at the
//! turning point, removed by the substitution `r = r_star - u^2`.

mod clairaut;
mod distance;
mod oracle;
mod shoot;

pub use clairaut::{
    arc_from_clairaut, cover_distance, solve_winding, solve_winding_with_diagnostics, GeodesicArc, SolveDiagnostics,
};
pub use distance::{loop_size, point_distance, quotient_distance, DistanceMethod, LoopSize, PlaneDistance};
pub use oracle::{oracle_distance, GridOracle};
pub use shoot::{shoot_to_turning_point, GeodesicShot};

use serde::{Deserialize, Serialize};

use crate::warp::WarpParams;

/// Circle-factor profile of a surface of revolution `dr^2 + h(r)^2 dt^2`.
pub trait RadialProfile: Sync {
    fn h(&self, r: f64) -> f64;
}

/// The warped plane with `h(r) = (1 + r^2)^{-alpha}`, extended evenly to `r < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarpedPlane {
    pub params: WarpParams,
}

impl WarpedPlane {
    pub fn new(params: WarpParams) -> Self {
        Self { params }
    }

    pub fn alpha(&self) -> f64 {
        self.params.alpha()
    }

    /// `h'(r) / h(r)`.
    pub fn h_log_derivative(&self, r: f64) -> f64 {
        self.params.h_log_derivative(r)
    }
}

impl RadialProfile for WarpedPlane {
    #[inline]
    fn h(&self, r: f64) -> f64 {
        self.params.h(r)
    }
}

/// Euclidean plane, `h = 1`. Used to calibrate the grid oracle.
#[derive(Debug, Clone, Copy, Default)]
pub struct FlatProfile;

impl RadialProfile for FlatProfile {
    fn h(&self, _r: f64) -> f64 {
        1.0
    }
}

/// A point `(r, t)` of the plane chart; `t` is the unwound circle coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanePoint {
    pub r: f64,
    pub t: f64,
}

impl PlanePoint {
    pub fn new(r: f64, t: f64) -> Self {
        Self { r, t }
    }
}

/// Row of the geodesy batch CSV. The oracle columns are empty unless a grid
/// cross-check was run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesyRow {
    pub l: u64,
    pub alpha: f64,
    pub base_r: f64,
    pub c: f64,
    pub r_star: f64,
    pub length: f64,
    pub delta_t: f64,
    pub oracle_length: Option<f64>,
    pub rel_gap: Option<f64>,
}

impl GeodesyRow {
    pub fn new(l: u64, alpha: f64, arc: &GeodesicArc) -> Self {
        Self {
            l,
            alpha,
            base_r: arc.base_r,
            c: arc.c,
            r_star: arc.r_star,
            length: arc.length,
            delta_t: arc.delta_t,
            oracle_length: None,
            rel_gap: None,
        }
    }

    pub fn with_oracle(mut self, oracle_length: f64) -> Self {
        self.oracle_length = Some(oracle_length);
        self.rel_gap = Some((oracle_length - self.length).abs() / self.length);
        self
    }
}
