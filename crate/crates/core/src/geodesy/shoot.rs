//! Arclength integration of the geodesic equations, independent of the
//! Clairaut quadrature.
//!
//! With `theta` the angle between the velocity and `d/dr`:
//! `r' = cos(theta)`, `t' = sin(theta) / h(r)`, `theta' = -(h'/h)(r) sin(theta)`.
//! The turning point is the event `cos(theta) = 0`.

use serde::{Deserialize, Serialize};

use super::{RadialProfile, WarpedPlane};
use crate::error::{Error, Result};
use crate::ode::{dopri5_step, error_norm};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicShot {
    /// Arclength from the start to the turning point.
    pub half_length: f64,
    pub half_delta_t: f64,
    pub r_turn: f64,
    /// Largest `|h(r)^2 dt/ds - c|` over accepted steps.
    pub max_clairaut_drift: f64,
    pub steps: usize,
}

/// Shoots the outward geodesic from `(base_r, 0)` with Clairaut constant
/// `c in (0, h(base_r))` and stops at its turning point.
pub fn shoot_to_turning_point(plane: &WarpedPlane, base_r: f64, c: f64) -> Result<GeodesicShot> {
    let h0 = plane.h(base_r);
    if !(c > 0.0 && c < h0) {
        return Err(Error::NoTurningArc { c, h_base: h0 });
    }
    let rhs = |_s: f64, y: &[f64; 3]| {
        let (sin, cos) = y[2].sin_cos();
        [cos, sin / plane.h(y[0]), -plane.h_log_derivative(y[0]) * sin]
    };
    let drift = |y: &[f64; 3]| (plane.h(y[0]) * y[2].sin() - c).abs();
    let (atol, rtol) = (1e-13, 1e-12);

    let mut y = [base_r, 0.0, (c / h0).asin()];
    let mut s = 0.0;
    let mut step = 1e-3 * (1.0 + base_r);
    let mut max_drift = drift(&y);
    let mut steps = 0usize;

    loop {
        if steps > 5_000_000 {
            return Err(Error::Solver("geodesic shot exceeded the step budget".into()));
        }
        let (y_new, err) = dopri5_step(&rhs, s, &y, step);
        let norm = error_norm(&err, &y, &y_new, atol, rtol);
        if norm > 1.0 {
            step *= (0.9 * norm.powf(-0.2)).max(0.2);
            continue;
        }
        steps += 1;
        if y_new[2].cos() <= 0.0 {
            // bisect the step length onto cos(theta) = 0
            let (mut lo, mut hi) = (0.0, step);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let (ym, _) = dopri5_step(&rhs, s, &y, mid);
                if ym[2].cos() > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let (y_turn, _) = dopri5_step(&rhs, s, &y, lo);
            max_drift = max_drift.max(drift(&y_turn));
            return Ok(GeodesicShot {
                half_length: s + lo,
                half_delta_t: y_turn[1],
                r_turn: y_turn[0],
                max_clairaut_drift: max_drift,
                steps,
            });
        }
        s += step;
        y = y_new;
        max_drift = max_drift.max(drift(&y));
        step *= (0.9 * norm.max(1e-10).powf(-0.2)).min(5.0);
    }
}
