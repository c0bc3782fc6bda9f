//! Diagonal Ricci curvatures of the doubly warped product in the unit
//! directions `H` (radial), `U` (sphere) and `V` (circle).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::warp::{eval_profiles, one_minus_f1_squared, WarpParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RicciDiag {
    pub r: f64,
    pub ric_h: f64,
    pub ric_u: f64,
    pub ric_v: f64,
}

impl RicciDiag {
    pub fn min_component(&self) -> f64 {
        self.ric_h.min(self.ric_u).min(self.ric_v)
    }
}

/// Ricci components at `r > 0`:
///
/// ```text
/// Ric(H,H) = -h''/h - (p-1) f''/f
/// Ric(U,U) = -f''/f + (p-2)/f^2 (1 - f'^2) - f'h'/(fh)
/// Ric(V,V) = -h''/h - (p-1) f'h'/(fh)
/// ```
pub fn ricci_diag(params: &WarpParams, r: f64) -> Result<RicciDiag> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!(
            "ricci_diag needs a finite r > 0 (got {r}); use limit_at_origin for the axis"
        )));
    }
    let w = eval_profiles(params, r)?;
    let pm1 = f64::from(params.p()) - 1.0;
    let pm2 = f64::from(params.p()) - 2.0;

    let h2_over_h = w.h2 / w.h;
    let f2_over_f = w.f2 / w.f;
    let mixed = (w.f1 / w.f) * (w.h1 / w.h);
    let sphere = one_minus_f1_squared(r) / (w.f * w.f);

    Ok(RicciDiag {
        r,
        ric_h: -h2_over_h - pm1 * f2_over_f,
        ric_u: -f2_over_f + pm2 * sphere - mixed,
        ric_v: -h2_over_h - pm1 * mixed,
    })
}

/// Limits of the three components as `r -> 0+`, from the Taylor expansions
/// `f = r + F3 r^3 + O(r^5)` and `h = 1 + H2 r^2 + O(r^4)`.
pub fn limit_at_origin(params: &WarpParams) -> RicciDiag {
    const F3: f64 = -0.25;
    let h2 = -params.alpha();
    let pm1 = f64::from(params.p()) - 1.0;
    let pm2 = f64::from(params.p()) - 2.0;

    // f''/f -> 6 F3;  (1 - f'^2)/f^2 -> -6 F3;  f'h'/(fh) -> 2 H2;  h''/h -> 2 H2
    let f2_over_f = 6.0 * F3;
    let sphere = -6.0 * F3;
    let mixed = 2.0 * h2;
    let h2_over_h = 2.0 * h2;

    RicciDiag {
        r: 0.0,
        ric_h: -h2_over_h - pm1 * f2_over_f,
        ric_u: -f2_over_f + pm2 * sphere - mixed,
        ric_v: -h2_over_h - pm1 * mixed,
    }
}

/// Least integer `p` with `p >= max{4 alpha + 3, 16 alpha^2 + 8 alpha + 1}`.
pub fn dimension_threshold(alpha: f64) -> u32 {
    let bound = (4.0 * alpha + 3.0).max(16.0 * alpha * alpha + 8.0 * alpha + 1.0);
    // absorb rounding in bounds that are integers in exact arithmetic
    let p = (bound * (1.0 - 4.0 * f64::EPSILON)).ceil();
    (p as u32).max(2)
}

/// Lower bound for `Ric(H,H)`: `r^2/(1+r^2)^2 [(p-1)/4 - (2 alpha + 4 alpha^2)]`.
pub fn radial_lower_bound(params: &WarpParams, r: f64) -> f64 {
    let a = params.alpha();
    let u = 1.0 + r * r;
    r * r / (u * u) * ((f64::from(params.p()) - 1.0) / 4.0 - (2.0 * a + 4.0 * a * a))
}

/// Lower bound for `Ric(V,V)`: `alpha r^2/(1+r^2)^2 [p - (3 + 4 alpha)]`.
pub fn circle_lower_bound(params: &WarpParams, r: f64) -> f64 {
    let a = params.alpha();
    let u = 1.0 + r * r;
    a * r * r / (u * u) * (f64::from(params.p()) - (3.0 + 4.0 * a))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub n: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { r_min: 1e-3, r_max: 1e4, n: 500 }
    }
}

impl GridSpec {
    /// Log-spaced points including both ends.
    pub fn points(&self) -> Vec<f64> {
        log_grid(self.r_min, self.r_max, self.n)
    }
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentMin {
    pub min: f64,
    pub argmin_r: f64,
    pub positive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub alpha: f64,
    pub p: u32,
    pub grid_spec: GridSpec,
    pub threshold_p: u32,
    pub ric_h: ComponentMin,
    pub ric_u: ComponentMin,
    pub ric_v: ComponentMin,
    /// Radii where `Ric(H,H)` fails to exceed its displayed lower bound.
    pub radial_bound_violations: Vec<f64>,
    /// Radii where `Ric(V,V)` fails to exceed its displayed lower bound.
    pub circle_bound_violations: Vec<f64>,
    pub pass: bool,
    pub verdict: String,
}

fn component_min(diags: &[RicciDiag], pick: impl Fn(&RicciDiag) -> f64) -> ComponentMin {
    let (argmin_r, min) =
        diags
            .iter()
            .map(|d| (d.r, pick(d)))
            .fold((f64::NAN, f64::INFINITY), |acc, (r, v)| if v < acc.1 { (r, v) } else { acc });
    ComponentMin { min, argmin_r, positive: min > 0.0 }
}

pub fn positivity_scan(params: &WarpParams, r_grid: &[f64]) -> Result<ScanReport> {
    if r_grid.is_empty() {
        return Err(Error::InvalidParameter("positivity_scan needs a nonempty grid".into()));
    }
    if let Some(bad) = r_grid.iter().find(|r| !(**r > 0.0) || !r.is_finite()) {
        return Err(Error::Domain(format!("grid points must be finite and > 0, got {bad}")));
    }

    let diags: Vec<RicciDiag> = r_grid.par_iter().map(|&r| ricci_diag(params, r)).collect::<Result<_>>()?;

    let ric_h = component_min(&diags, |d| d.ric_h);
    let ric_u = component_min(&diags, |d| d.ric_u);
    let ric_v = component_min(&diags, |d| d.ric_v);

    let radial_bound_violations: Vec<f64> =
        diags.iter().filter(|d| !(d.ric_h > radial_lower_bound(params, d.r))).map(|d| d.r).collect();
    let circle_bound_violations: Vec<f64> =
        diags.iter().filter(|d| !(d.ric_v > circle_lower_bound(params, d.r))).map(|d| d.r).collect();

    let all_positive = ric_h.positive && ric_u.positive && ric_v.positive;
    let bounds_hold = radial_bound_violations.is_empty() && circle_bound_violations.is_empty();
    let threshold_p = dimension_threshold(params.alpha());

    let verdict = if all_positive {
        if params.p() >= threshold_p {
            "all components positive on the grid".to_string()
        } else {
            format!(
                "all components positive on the grid although p = {} is below the sufficient threshold {}",
                params.p(),
                threshold_p
            )
        }
    } else {
        let failing: Vec<String> = [("H", &ric_h), ("U", &ric_u), ("V", &ric_v)]
            .iter()
            .filter(|(_, c)| !c.positive)
            .map(|(name, c)| format!("Ric({name},{name}) reaches {:.3e} at r = {:.4e}", c.min, c.argmin_r))
            .collect();
        let mut v = format!("nonpositive on the grid: {}", failing.join("; "));
        if params.p() < threshold_p {
            v.push_str(&format!(" (p = {} is below the sufficient threshold {})", params.p(), threshold_p));
        }
        v
    };

    let grid_spec = GridSpec {
        r_min: r_grid.iter().cloned().fold(f64::INFINITY, f64::min),
        r_max: r_grid.iter().cloned().fold(0.0, f64::max),
        n: r_grid.len(),
    };

    Ok(ScanReport {
        alpha: params.alpha(),
        p: params.p(),
        grid_spec,
        threshold_p,
        ric_h,
        ric_u,
        ric_v,
        radial_bound_violations,
        circle_bound_violations,
        pass: all_positive && bounds_hold,
        verdict,
    })
}
