use std::f64::consts::PI;

use log::warn;
use serde::{Deserialize, Serialize};

use super::clairaut::{path_integrals, solve_increasing_family, Leg, SolveDiagnostics};
use super::oracle::GridOracle;
use super::{GeodesicArc, PlanePoint, RadialProfile, WarpedPlane};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DistanceMethod {
    Identity,
    Radial,
    Clairaut,
    /// Path along a circle `r = const`; a geodesic only on the axis.
    Circle,
    /// The Clairaut solve failed and a grid shortest path was used instead.
    OracleFallback,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneDistance {
    pub distance: f64,
    pub method: DistanceMethod,
}

impl PlaneDistance {
    pub fn used_fallback(&self) -> bool {
        self.method == DistanceMethod::OracleFallback
    }
}

/// Geodesic distance between two points of the warped plane.
///
/// Minimizing geodesics turn at most once: between two turns a Clairaut
/// geodesic runs from `+r_star` to `-r_star` through the axis, and a second
/// turn would make it a concatenation of two same-chord arcs, which is never
/// shorter than a single wider arc. Candidates are therefore
///
/// * the family without turn joined continuously with the family turning
///   beyond the farther point, parameterized so `delta_t` increases;
/// * the family turning on the opposite side of the axis, skipped when the
///   best length so far is below its trivial lower bound;
/// * the circle arc when both radii agree.
///
/// Each family is solved by shooting over the Clairaut constant (equivalently
/// the initial angle `sin(theta_0) = c / h(r_a)`) until the endpoint advance
/// matches.
pub fn point_distance(plane: &WarpedPlane, a: PlanePoint, b: PlanePoint) -> Result<PlaneDistance> {
    for x in [a.r, a.t, b.r, b.t] {
        if !x.is_finite() {
            return Err(Error::Domain(format!("plane coordinates must be finite, got {x}")));
        }
    }
    let target = (b.t - a.t).abs();
    let radial = (b.r - a.r).abs();
    if target == 0.0 {
        let method = if radial == 0.0 { DistanceMethod::Identity } else { DistanceMethod::Radial };
        return Ok(PlaneDistance { distance: radial, method });
    }

    match clairaut_distance(plane, a.r, b.r, target) {
        Ok(d) => Ok(d),
        Err(err) => {
            warn!("Clairaut solve failed for {a:?} -> {b:?} ({err}); falling back to the grid oracle");
            let oracle = GridOracle::enclosing(plane, a, b, 600)?;
            let distance = oracle.distance(plane, a, b)?;
            Ok(PlaneDistance { distance, method: DistanceMethod::OracleFallback })
        }
    }
}

fn clairaut_distance(plane: &WarpedPlane, r1: f64, r2: f64, target: f64) -> Result<PlaneDistance> {
    let alpha = plane.alpha();
    let (rho1, rho2) = (r1.abs(), r2.abs());
    let rho_max = rho1.max(rho2);
    let rho_min = rho1.min(rho2);
    let same_side = r1 * r2 >= 0.0;

    let mut best = PlaneDistance { distance: f64::INFINITY, method: DistanceMethod::Clairaut };
    if r1 == r2 {
        best = PlaneDistance { distance: plane.h(r1) * target, method: DistanceMethod::Circle };
    }

    // Unified family. z < 0: no turn, Clairaut radius rho_max + |sigma|.
    // z > 0: turn at rho_max + sigma on the side of the farther point.
    let scale = 1e-9 * rho_max.max(1.0);
    let sigma = |z: f64| scale * z.sinh();
    let unified = |z: f64| -> Result<[f64; 2]> {
        let s = sigma(z);
        if s <= 0.0 {
            let r_c = rho_max - s;
            let legs: &[Leg] = if same_side {
                &[Leg::new(rho_min, rho_max - rho_min, -s)]
            } else {
                &[Leg::new(0.0, rho1, (rho_max - rho1) - s), Leg::new(0.0, rho2, (rho_max - rho2) - s)]
            };
            path_integrals(alpha, legs, r_c)
        } else {
            let r_star = rho_max + s;
            if same_side {
                path_integrals(
                    alpha,
                    &[Leg::new(rho1, (rho_max - rho1) + s, 0.0), Leg::new(rho2, (rho_max - rho2) + s, 0.0)],
                    r_star,
                )
            } else {
                // r_star lies on the side of the farther point
                path_integrals(
                    alpha,
                    &[
                        Leg::new(0.0, rho_min, (rho_max - rho_min) + s),
                        Leg::new(0.0, r_star, 0.0),
                        Leg::new(rho_max, s, 0.0),
                    ],
                    r_star,
                )
            }
        }
    };

    let mut diag = SolveDiagnostics::default();
    // Both on the axis: only turning arcs exist, and they start at the
    // conjugate-point advance.
    let (z_start, z_min) = if rho_max == 0.0 { (10.0, 0.0) } else { (0.0, -200.0) };
    let mut solved_any = best.distance.is_finite();
    if let Some(root) = solve_increasing_family(unified, target, z_start, z_min, 200.0, &mut diag)? {
        solved_any = true;
        if root.length < best.distance {
            best = PlaneDistance { distance: root.length, method: DistanceMethod::Clairaut };
        }
    }

    // Turning on the far side of the axis from the farther point.
    let crossing_bound = if same_side { rho1 + rho2 } else { 2.0 * (rho_max - rho_min) + rho1 + rho2 };
    if rho_max > 0.0 && best.distance > crossing_bound {
        let opposite = |z: f64| -> Result<[f64; 2]> {
            let w = scale * z.sinh();
            let r_star = rho_max + w;
            if same_side {
                path_integrals(
                    alpha,
                    &[
                        Leg::new(0.0, rho1, (rho_max - rho1) + w),
                        Leg::new(0.0, r_star, 0.0),
                        Leg::new(0.0, r_star, 0.0),
                        Leg::new(0.0, rho2, (rho_max - rho2) + w),
                    ],
                    r_star,
                )
            } else {
                path_integrals(
                    alpha,
                    &[
                        Leg::new(rho_min, (rho_max - rho_min) + w, 0.0),
                        Leg::new(0.0, r_star, 0.0),
                        Leg::new(0.0, rho_max, w),
                    ],
                    r_star,
                )
            }
        };
        let mut diag = SolveDiagnostics::default();
        if let Some(root) = solve_increasing_family(opposite, target, 10.0, 0.0, 200.0, &mut diag)? {
            solved_any = true;
            if root.length < best.distance {
                best = PlaneDistance { distance: root.length, method: DistanceMethod::Clairaut };
            }
        }
    }

    if !solved_any {
        return Err(Error::Solver(format!(
            "no Clairaut geodesic found between radii {r1:e} and {r2:e} with advance {target:e}"
        )));
    }
    Ok(best)
}

/// Distance in the quotient cylinder `t ~ t + 2 pi`: the minimum over deck
/// shifts `k` of the plane distance to `(b.r, b.t + 2 pi k)`.
pub fn quotient_distance(plane: &WarpedPlane, a: PlanePoint, b: PlanePoint) -> Result<PlaneDistance> {
    let gap = (b.t - a.t).rem_euclid(2.0 * PI);
    let near = point_distance(plane, a, PlanePoint::new(b.r, a.t + gap))?;
    let far = point_distance(plane, a, PlanePoint::new(b.r, a.t + gap - 2.0 * PI))?;
    Ok(if far.distance < near.distance { far } else { near })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopSize {
    /// Largest sampled quotient distance from the basepoint to the loop.
    pub size: f64,
    /// `r_star - base_r`, a lower bound for the size.
    pub radial_gap: f64,
    pub samples: usize,
    pub fallbacks: usize,
}

/// Size of the closed loop traced by `arc` in the quotient cylinder, measured
/// from `(base_r, 0)`. The arc is symmetric about its turning point and the
/// total advance is a multiple of `2 pi`, so the half arc suffices.
pub fn loop_size(plane: &WarpedPlane, arc: &GeodesicArc, base_r: f64) -> Result<LoopSize> {
    let radial_gap = (arc.r_star - base_r).max(0.0);
    if radial_gap == 0.0 {
        // axis segment: the loop is the axis circle itself
        let half = PlanePoint::new(base_r, 0.5 * arc.delta_t);
        let d = quotient_distance(plane, PlanePoint::new(base_r, 0.0), half)?;
        return Ok(LoopSize { size: d.distance, radial_gap, samples: 1, fallbacks: d.used_fallback() as usize });
    }
    let n = 32;
    let alpha = plane.alpha();
    let origin = PlanePoint::new(base_r, 0.0);
    let mut size: f64 = 0.0;
    let mut fallbacks = 0;
    for k in 1..=n {
        // denser towards the turning point, where the loop is farthest out
        let frac = (k as f64 / n as f64 * 0.5 * PI).sin();
        let r = base_r + radial_gap * frac;
        let to_turn = path_integrals(alpha, &[Leg::new(r, arc.r_star - r, 0.0)], arc.r_star)?[1];
        let t = 0.5 * arc.delta_t - to_turn;
        let d = quotient_distance(plane, origin, PlanePoint::new(r, t))?;
        fallbacks += d.used_fallback() as usize;
        size = size.max(d.distance);
    }
    Ok(LoopSize { size: size.max(radial_gap), radial_gap, samples: n, fallbacks })
}
