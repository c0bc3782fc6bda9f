//! Warping profiles of the doubly warped product
//! `dr^2 + f(r)^2 ds_{p-1}^2 + h(r)^2 ds_1^2` with
//! `f(r) = r (1 + r^2)^{-1/4}` and `h(r) = (1 + r^2)^{-alpha}`.
//!
//! Both profiles and their first two derivatives are closed forms in `r^2`
//! (times an odd power of `r` for the odd derivatives), so `h` is even and
//! extends smoothly to `r < 0`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Decay exponent `alpha > 0` of the circle factor and the integer `p >= 2`
/// (sphere factor `S^{p-1}`). Identifies one manifold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarpParams {
    alpha: f64,
    p: u32,
}

impl WarpParams {
    pub fn new(alpha: f64, p: u32) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter(format!("alpha must be finite and > 0, got {alpha}")));
        }
        if p < 2 {
            return Err(Error::InvalidParameter(format!("p must be >= 2, got {p}")));
        }
        Ok(Self { alpha, p })
    }

    /// Uses the least `p` for which the Ricci lower bounds are positive.
    pub fn with_threshold_p(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter(format!("alpha must be finite and > 0, got {alpha}")));
        }
        Self::new(alpha, crate::curvature::dimension_threshold(alpha))
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// Dimension excess of the singular orbit, `beta = 2 alpha`.
    pub fn beta(&self) -> f64 {
        2.0 * self.alpha
    }

    /// Growth exponent `1 / (1 + 2 alpha)` of the cover distance in the winding number.
    pub fn growth_exponent(&self) -> f64 {
        1.0 / (1.0 + 2.0 * self.alpha)
    }

    /// `h(r) = (1 + r^2)^{-alpha}`.
    #[inline]
    pub fn h(&self, r: f64) -> f64 {
        (1.0 + r * r).powf(-self.alpha)
    }

    /// `h'(r) / h(r) = -2 alpha r / (1 + r^2)`.
    #[inline]
    pub fn h_log_derivative(&self, r: f64) -> f64 {
        -2.0 * self.alpha * r / (1.0 + r * r)
    }

    /// Radius at which `h` takes the value `c`, for `0 < c <= h(0) = 1`.
    pub fn radius_of_h(&self, c: f64) -> f64 {
        // (1 + r^2)^{-alpha} = c  =>  r^2 = c^{-1/alpha} - 1 = expm1(-ln(c)/alpha)
        (-(c.ln()) / self.alpha).exp_m1().max(0.0).sqrt()
    }
}

/// Profile values and derivatives at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarpEval {
    pub r: f64,
    pub f: f64,
    pub f1: f64,
    pub f2: f64,
    pub h: f64,
    pub h1: f64,
    pub h2: f64,
}

pub fn eval_profiles(params: &WarpParams, r: f64) -> Result<WarpEval> {
    if !r.is_finite() {
        return Err(Error::Domain(format!("radius must be finite, got {r}")));
    }
    if r < 0.0 {
        return Err(Error::Domain(format!("radius must be >= 0, got {r}")));
    }
    let a = params.alpha;
    let u = 1.0 + r * r;

    // f  = r u^{-1/4}
    // f' = (1 + r^2/2) u^{-5/4}
    // f''= -r (6 + r^2) / 4 * u^{-9/4}
    let f = r * u.powf(-0.25);
    let f1 = (1.0 + 0.5 * r * r) * u.powf(-1.25);
    let f2 = -0.25 * r * (6.0 + r * r) * u.powf(-2.25);

    // h  = u^{-a}
    // h' = -2 a r u^{-a-1}
    // h''= 2 a ((2a + 1) r^2 - 1) u^{-a-2}
    let h = u.powf(-a);
    let h1 = -2.0 * a * r * h / u;
    let h2 = 2.0 * a * ((2.0 * a + 1.0) * r * r - 1.0) * h / (u * u);

    Ok(WarpEval { r, f, f1, f2, h, h1, h2 })
}

/// `1 - f'(r)^2` without cancellation near the axis.
///
/// `1 - f'^2 = [(1 + r^2)^{5/2} - (1 + r^2/2)^2] / (1 + r^2)^{5/2}`; the
/// numerator is `expm1(5/2 ln1p(r^2)) - r^2 - r^4/4`, whose leading term is
/// `3 r^2 / 2`.
pub fn one_minus_f1_squared(r: f64) -> f64 {
    let x = r * r;
    let numerator = (2.5 * x.ln_1p()).exp_m1() - x - 0.25 * x * x;
    numerator * (1.0 + x).powf(-2.5)
}

/// Length `2 pi h(r)` of the circle factor at distance `r` from the axis.
pub fn circle_length(params: &WarpParams, r: f64) -> Result<f64> {
    Ok(2.0 * PI * eval_profiles(params, r)?.h)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(alpha: f64) -> WarpParams {
        WarpParams::new(alpha, 4).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn boundary_conditions_at_axis() {
        let w = eval_profiles(&params(1.0), 0.0).unwrap();
        assert_eq!(w.f, 0.0);
        assert_eq!(w.f1, 1.0);
        assert_eq!(w.f2, 0.0);
        assert_eq!(w.h, 1.0);
        assert_eq!(w.h1, 0.0);
        assert_eq!(w.h2, -2.0);
    }

    #[test]
    fn h_second_derivative_at_axis_matches_finite_difference() {
        let p = params(1.0);
        let step = 1e-4;
        let fd = (p.h(step) - 2.0 * p.h(0.0) + p.h(-step)) / (step * step);
        assert!((fd - (-2.0)).abs() < 1e-6, "fd = {fd}");
    }

    #[test]
    fn values_at_unit_radius() {
        let w = eval_profiles(&params(1.0), 1.0).unwrap();
        assert!(close(w.h, 0.5, 1e-15));
        assert!(close(w.h1, -0.5, 1e-15));
        let step = 1e-5;
        let p = params(1.0);
        let fd = (p.h(1.0 + step) - p.h(1.0 - step)) / (2.0 * step);
        assert!((fd - w.h1).abs() < 1e-9);

        for alpha in [0.25, 0.5, 1.0, 3.0] {
            let w = eval_profiles(&params(alpha), 1.0).unwrap();
            assert!(close(w.f, 2f64.powf(-0.25), 1e-15));
            assert!((w.f - 0.840896).abs() < 1e-6);
        }
    }

    #[test]
    fn circle_length_examples() {
        let c0 = circle_length(&params(1.0), 0.0).unwrap();
        assert!(close(c0, 2.0 * PI, 1e-15));
        let c1 = circle_length(&params(1.0), 1.0).unwrap();
        assert!(close(c1, PI, 1e-15));
        let c3 = circle_length(&params(0.5), 3.0).unwrap();
        assert!(close(c3, 2.0 * PI / 10f64.sqrt(), 1e-14));
        assert!((c3 - 1.98692).abs() < 1e-5);
    }

    #[test]
    fn circle_length_strictly_decreasing() {
        let p = params(0.5);
        let mut prev = f64::INFINITY;
        for i in 0..200 {
            let r = 1e-3 * 1.1f64.powi(i);
            let c = circle_length(&p, r).unwrap();
            assert!(c < prev);
            prev = c;
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(WarpParams::new(0.0, 4).is_err());
        assert!(WarpParams::new(-1.0, 4).is_err());
        assert!(WarpParams::new(f64::NAN, 4).is_err());
        assert!(WarpParams::new(1.0, 1).is_err());
        assert!(matches!(eval_profiles(&params(1.0), f64::NAN), Err(Error::Domain(_))));
        assert!(matches!(eval_profiles(&params(1.0), f64::INFINITY), Err(Error::Domain(_))));
    }

    #[test]
    fn beta_and_threshold_constructor() {
        let p = WarpParams::with_threshold_p(1.0).unwrap();
        assert_eq!(p.p(), 25);
        assert_eq!(p.beta(), 2.0);
        assert!((p.growth_exponent() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn h_is_even() {
        let p = params(0.75);
        for r in [0.0, 1e-6, 0.3, 2.0, 1e3] {
            assert_eq!(p.h(r), p.h(-r));
        }
    }

    #[test]
    fn radius_of_h_inverts_h() {
        for alpha in [0.25, 0.5, 1.5] {
            let p = params(alpha);
            for r in [1e-4, 0.5, 3.0, 1e4] {
                let back = p.radius_of_h(p.h(r));
                assert!((back - r).abs() <= 1e-9 * (1.0 + r), "alpha {alpha} r {r} -> {back}");
            }
        }
    }

    #[test]
    fn one_minus_f1_squared_is_stable() {
        for r in [1e-8, 1e-4, 0.1, 1.0, 10.0, 1e4] {
            let w = eval_profiles(&params(1.0), r).unwrap();
            let stable = one_minus_f1_squared(r);
            if r >= 0.1 {
                assert!(close(stable, 1.0 - w.f1 * w.f1, 1e-12));
            } else {
                assert!(close(stable / (r * r), 1.5, 1e-4), "r = {r}");
            }
        }
    }
}
