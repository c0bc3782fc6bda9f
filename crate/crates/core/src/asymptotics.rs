//! Growth of cover distances in the winding number, and loops based far
//! from the axis.
//!
//! For the basepoint on the axis, `D(l) = d(gamma^l p, p)` grows like
//! `l^{1/(1+2 alpha)}`: explicitly `C l^{1/(1+2a)} - 2 <= D(l) <= 9 l^{1/(1+2a)}`
//! with `C = 2 * 9^{-1/(2a)}` once `l >= 9^{1 + 1/(2a)}`. For a basepoint at
//! radius `s` and windings `l` of order `eps * s * (1+s^2)^a`, the minimal loop
//! has length between `pi/(1+pi)^{2a} * eps * s` and `2 pi eps s`, and its
//! size is a vanishing fraction of its length as `eps -> 0`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesy::{loop_size, solve_winding, WarpedPlane};
use crate::roots::{brent, RootOptions};
use crate::warp::WarpParams;

/// One cover distance `D(l)` for the basepoint on the axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceSample {
    pub l: u64,
    pub d: f64,
    /// Turning radius of the minimizing arc; `D(l) >= 2 r_star`.
    pub r_star: f64,
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub l_window: (u64, u64),
    pub samples: usize,
}

/// Ordinary least squares on log-log data. Needs two distinct abscissae.
pub fn log_log_fit(points: &[(f64, f64)]) -> Result<LogLogFit> {
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(Error::Domain("log-log fit needs finite positive data".into()));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if points.len() < 2 || sxx <= 0.0 {
        return Err(Error::InvalidParameter("log-log fit needs at least two distinct abscissae".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok(LogLogFit { slope, intercept: my - slope * mx, r_squared, points: points.len() })
}

/// `n` integers spaced geometrically between `lo` and `hi`, deduplicated.
pub fn geometric_windings(lo: u64, hi: u64, n: usize) -> Vec<u64> {
    if n < 2 || lo >= hi {
        return vec![lo.max(1)];
    }
    let (a, b) = ((lo.max(1) as f64).ln(), (hi as f64).ln());
    let mut out: Vec<u64> = (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp().round() as u64).collect();
    out.dedup();
    out
}

/// Cover distances `D(l)` at the axis basepoint, one per winding number.
pub fn sample_growth(params: &WarpParams, l_list: &[u64]) -> Result<Vec<DistanceSample>> {
    if l_list.is_empty() || l_list.contains(&0) {
        return Err(Error::InvalidParameter("winding numbers must be positive and nonempty".into()));
    }
    if l_list.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter("winding numbers must be sorted".into()));
    }
    let plane = WarpedPlane::new(*params);
    l_list
        .par_iter()
        .map(|&l| {
            let arc = solve_winding(&plane, 0.0, 2.0 * PI * l as f64)
                .map_err(|e| Error::Solver(format!("winding l = {l}: {e}")))?;
            Ok(DistanceSample { l, d: arc.length, r_star: arc.r_star })
        })
        .collect()
}

/// Least winding number covered by the explicit bounds, `9^{1 + 1/(2 alpha)}`.
pub fn bound_threshold(alpha: f64) -> f64 {
    9f64.powf(1.0 + 0.5 / alpha)
}

/// Constant `2 * 9^{-1/(2 alpha)}` of the lower bound.
pub fn lower_constant(alpha: f64) -> f64 {
    2.0 * 9f64.powf(-0.5 / alpha)
}

pub const UPPER_CONSTANT: f64 = 9.0;
pub const SHARP_UPPER_CONSTANT: f64 = 2.0 + 2.0 * PI;

/// Length of the cheapest comparison loop that runs out radially to `r'`,
/// winds `l` times around the circle there and returns, minimized over a
/// uniform grid of `n` radii.
pub fn competitor_minimum(alpha: f64, l: u64, n: usize) -> f64 {
    let l = l as f64;
    // stationary point of 2 r + 2 pi l r^{-2 alpha} for large r
    let r_opt = (2.0 * PI * alpha * l).powf(1.0 / (1.0 + 2.0 * alpha));
    let r_max = 4.0 * r_opt + 1.0;
    (0..n)
        .map(|k| {
            let r = r_max * k as f64 / (n - 1).max(1) as f64;
            2.0 * r + l * 2.0 * PI * (1.0 + r * r).powf(-alpha)
        })
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub l: u64,
    pub d: f64,
    pub lower: f64,
    pub upper: f64,
    pub sharp_upper: f64,
    pub competitor: f64,
    pub twice_turning_radius: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub alpha: f64,
    pub threshold_l: f64,
    pub checked: Vec<BoundRow>,
    /// Winding numbers below the threshold, excluded from the check.
    pub out_of_range: Vec<u64>,
    pub failures: Vec<u64>,
    pub pass: bool,
}

/// Checks every sample at or above the threshold against the lower bound,
/// both upper constants, the comparison loop and `D >= 2 r_star`.
pub fn check_lemma_bounds(params: &WarpParams, samples: &[DistanceSample]) -> Result<BoundReport> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("no samples to check".into()));
    }
    let alpha = params.alpha();
    let theta = params.growth_exponent();
    let threshold_l = bound_threshold(alpha);
    let mut checked = Vec::new();
    let mut out_of_range = Vec::new();
    for s in samples {
        if (s.l as f64) < threshold_l {
            out_of_range.push(s.l);
            continue;
        }
        let scale = (s.l as f64).powf(theta);
        let lower = lower_constant(alpha) * scale - 2.0;
        let upper = UPPER_CONSTANT * scale;
        let sharp_upper = SHARP_UPPER_CONSTANT * scale;
        let competitor = competitor_minimum(alpha, s.l, 200);
        let twice_turning_radius = 2.0 * s.r_star;
        // the comparison loop is itself a path, so allow only rounding slack
        let slack = 1e-9 * s.d;
        let pass = lower <= s.d
            && s.d <= upper
            && s.d <= sharp_upper
            && s.d <= competitor + slack
            && twice_turning_radius <= s.d + slack;
        checked.push(BoundRow { l: s.l, d: s.d, lower, upper, sharp_upper, competitor, twice_turning_radius, pass });
    }
    let failures: Vec<u64> = checked.iter().filter(|r| !r.pass).map(|r| r.l).collect();
    Ok(BoundReport { alpha, threshold_l, pass: failures.is_empty(), checked, out_of_range, failures })
}

/// Slope of `ln D` against `ln l` over the samples with `l` in `window`.
pub fn fit_exponent(samples: &[DistanceSample], window: (u64, u64)) -> Result<ScalingFit> {
    let points: Vec<(f64, f64)> =
        samples.iter().filter(|s| s.l >= window.0 && s.l <= window.1).map(|s| (s.l as f64, s.d)).collect();
    if points.len() < 4 {
        return Err(Error::InvalidParameter(format!(
            "exponent fit needs at least 4 samples in [{}, {}], got {}",
            window.0,
            window.1,
            points.len()
        )));
    }
    let fit = log_log_fit(&points)?;
    Ok(ScalingFit {
        slope: fit.slope,
        intercept: fit.intercept,
        r_squared: fit.r_squared,
        l_window: window,
        samples: points.len(),
    })
}

/// Minimal loop at the basepoint of radius `s`, at the largest admissible
/// winding number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FarLoopResult {
    pub s: f64,
    pub epsilon: f64,
    pub l: u64,
    pub length: f64,
    /// Size of the plane geodesic loop in the quotient cylinder. This is a
    /// surrogate: the loop is computed in the reduced plane, not in the full
    /// manifold.
    pub size: f64,
    pub radial_gap: f64,
    pub ratio: f64,
    pub length_lower: f64,
    pub length_upper: f64,
    /// `l * 2 pi h(s)`, the length of winding on the base circle.
    pub circle_upper: f64,
    pub pass: bool,
}

/// Admissible winding range `[eps s (1+s^2)^a / 2, eps s (1+s^2)^a]`.
fn winding_range(alpha: f64, s: f64, epsilon: f64) -> (f64, f64) {
    let top = epsilon * s * (1.0 + s * s).powf(alpha);
    (0.5 * top, top)
}

/// Constant `pi / (1 + pi)^{2 alpha}` of the far loop's length lower bound.
pub fn far_length_constant(alpha: f64) -> f64 {
    PI / (1.0 + PI).powf(2.0 * alpha)
}

pub fn far_loop(params: &WarpParams, s: f64, epsilon: f64) -> Result<FarLoopResult> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::InvalidParameter(format!("basepoint radius must be positive, got {s}")));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let alpha = params.alpha();
    let (lo, hi) = winding_range(alpha, s, epsilon);
    let l = hi.floor();
    if l < lo.ceil().max(1.0) {
        // eps s (1+s^2)^a >= 2 always leaves an integer in the range
        let g = |x: f64| Ok(epsilon * x * (1.0 + x * x).powf(alpha) - 2.0);
        let mut b = 1.0;
        while g(b)? < 0.0 {
            b *= 2.0;
        }
        let s_min = brent(g, 0.0, b, -2.0, g(b)?, RootOptions::default())?;
        return Err(Error::Precondition(format!(
            "no integer winding in [{lo}, {hi}]; take s >= {s_min:.6} for epsilon = {epsilon}"
        )));
    }
    let l_int = l as u64;
    let plane = WarpedPlane::new(*params);
    let arc = solve_winding(&plane, s, 2.0 * PI * l)?;
    let size = loop_size(&plane, &arc, s)?;
    let length_lower = far_length_constant(alpha) * epsilon * s;
    let length_upper = 2.0 * PI * epsilon * s;
    let circle_upper = l * 2.0 * PI * plane.params.h(s);
    let slack = 1e-9 * arc.length;
    let pass = arc.length >= length_lower
        && arc.length <= length_upper
        && arc.length <= circle_upper + slack
        && size.size <= 0.5 * arc.length + slack;
    Ok(FarLoopResult {
        s,
        epsilon,
        l: l_int,
        length: arc.length,
        size: size.size,
        radial_gap: size.radial_gap,
        ratio: size.size / arc.length,
        length_lower,
        length_upper,
        circle_upper,
        pass,
    })
}

/// Largest root of `delta^2 = eps^2 pi^2 (1 - (1 + delta)^{-4 alpha})`.
/// Every admissible loop has `size / s <= delta(eps)`.
pub fn delta_ceiling(alpha: f64, epsilon: f64) -> Result<f64> {
    if !(alpha > 0.0 && epsilon > 0.0) {
        return Err(Error::InvalidParameter("alpha and epsilon must be positive".into()));
    }
    let k = (epsilon * PI).powi(2);
    let g = |d: f64| Ok(d * d + k * (-4.0 * alpha * d.ln_1p()).exp_m1());
    // g < 0 just above 0 (slope -4 alpha k), g > 0 at eps pi, and g is convex
    // beyond its minimum, so the bracket holds the largest root.
    let hi = epsilon * PI;
    let mut lo = hi;
    let mut g_lo = g(lo)?;
    while g_lo >= 0.0 {
        lo *= 0.5;
        if lo < 1e-300 {
            return Err(Error::Solver("delta inequality has no positive root".into()));
        }
        g_lo = g(lo)?;
    }
    brent(g, lo, hi, g_lo, g(hi)?, RootOptions { x_tol: 1e-15 * hi, ..RootOptions::default() })
}

/// Ceiling `delta(eps) / (C eps)` on `size / length`, with `C` the far
/// loop's length constant.
pub fn ratio_ceiling(alpha: f64, epsilon: f64) -> Result<f64> {
    Ok(delta_ceiling(alpha, epsilon)? / (far_length_constant(alpha) * epsilon))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioPoint {
    pub epsilon: f64,
    pub ratio: f64,
    pub ceiling: f64,
    pub below_ceiling: bool,
    pub far_loop: FarLoopResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioCurve {
    pub s: f64,
    pub points: Vec<RatioPoint>,
    /// Ratios nonincreasing as epsilon decreases.
    pub monotone: bool,
    /// Final ratio below half the first one.
    pub halves: bool,
    pub pass: bool,
}

pub fn ratio_curve(params: &WarpParams, s: f64, eps_list: &[f64]) -> Result<RatioCurve> {
    if eps_list.is_empty() || eps_list.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::InvalidParameter("epsilon list must be nonempty and strictly decreasing".into()));
    }
    let points: Vec<RatioPoint> = eps_list
        .par_iter()
        .map(|&epsilon| {
            let far = far_loop(params, s, epsilon)?;
            let ceiling = ratio_ceiling(params.alpha(), epsilon)?;
            Ok(RatioPoint { epsilon, ratio: far.ratio, ceiling, below_ceiling: far.ratio <= ceiling, far_loop: far })
        })
        .collect::<Result<_>>()?;
    let monotone = points.windows(2).all(|w| w[1].ratio <= w[0].ratio);
    let halves = points.last().unwrap().ratio < 0.5 * points[0].ratio;
    let pass = monotone && halves && points.iter().all(|p| p.below_ceiling);
    Ok(RatioCurve { s, points, monotone, halves, pass })
}

/// Row of `growth.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub l: u64,
    #[serde(rename = "D")]
    pub d: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
}

impl GrowthRow {
    pub fn new(alpha: f64, sample: &DistanceSample) -> Self {
        let scale = (sample.l as f64).powf(1.0 / (1.0 + 2.0 * alpha));
        Self {
            l: sample.l,
            d: sample.d,
            lower_bound: lower_constant(alpha) * scale - 2.0,
            upper_bound: UPPER_CONSTANT * scale,
        }
    }
}

/// Row of `farloop.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FarLoopRow {
    pub s: f64,
    pub epsilon: f64,
    pub l: u64,
    pub length: f64,
    pub size: f64,
    pub ratio: f64,
    pub analytic_ceiling: f64,
}

impl FarLoopRow {
    pub fn new(far: &FarLoopResult, analytic_ceiling: f64) -> Self {
        Self {
            s: far.s,
            epsilon: far.epsilon,
            l: far.l,
            length: far.length,
            size: far.size,
            ratio: far.ratio,
            analytic_ceiling,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(alpha: f64) -> WarpParams {
        WarpParams::with_threshold_p(alpha).unwrap()
    }

    #[test]
    fn exact_power_law_fit() {
        let samples: Vec<DistanceSample> =
            [10u64, 100, 1000, 10000].iter().map(|&l| DistanceSample { l, d: l as f64, r_star: 0.0 }).collect();
        let fit = fit_exponent(&samples, (1, 10000)).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_rejects_short_window() {
        let samples: Vec<DistanceSample> =
            [10u64, 100, 1000].iter().map(|&l| DistanceSample { l, d: l as f64, r_star: 0.0 }).collect();
        assert!(fit_exponent(&samples, (1, 10000)).is_err());
    }

    #[test]
    fn growth_is_increasing_and_bounded() {
        let p = params(0.5);
        let samples = sample_growth(&p, &[100, 1000, 10_000, 100_000, 1_000_000]).unwrap();
        assert!(samples.windows(2).all(|w| w[0].d < w[1].d));
        assert!(samples.last().unwrap().d <= 9e3);
        let one = sample_growth(&params(1.0), &[1]).unwrap();
        assert!(one[0].d <= 2.0 * PI);
    }

    #[test]
    fn bounds_at_l_10000_half() {
        let p = params(0.5);
        let samples = sample_growth(&p, &[10_000]).unwrap();
        let report = check_lemma_bounds(&p, &samples).unwrap();
        let row = report.checked[0];
        assert!((row.lower - (2.0 / 9.0 * 100.0 - 2.0)).abs() < 1e-9);
        assert!((row.upper - 900.0).abs() < 1e-9);
        assert!((row.sharp_upper - 828.3185307179587).abs() < 1e-9);
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn threshold_boundary_is_included() {
        let p = params(1.0);
        assert!((bound_threshold(1.0) - 27.0).abs() < 1e-12);
        let samples = sample_growth(&p, &[5, 27]).unwrap();
        let report = check_lemma_bounds(&p, &samples).unwrap();
        assert_eq!(report.out_of_range, vec![5]);
        assert_eq!(report.checked.len(), 1);
        assert!(report.pass);
    }

    #[test]
    fn far_loop_at_s_1000() {
        let far = far_loop(&params(0.5), 1e3, 0.1).unwrap();
        assert!((far.length_lower - 75.84).abs() < 0.05);
        assert!((far.length_upper - 628.3185).abs() < 1e-3);
        let top = 0.1 * 1e3 * (1.0f64 + 1e6).sqrt();
        assert!(far.l as f64 >= 0.5 * top && far.l as f64 <= top);
        assert!(far.size <= 0.5 * far.length);
        assert!(far.pass, "{far:?}");
    }

    #[test]
    fn far_loop_reports_minimal_radius() {
        let err = far_loop(&params(0.5), 0.5, 0.1).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)), "{err}");
    }

    #[test]
    fn delta_ceiling_solves_the_inequality() {
        for (alpha, eps) in [(0.5, 0.01), (0.5, 0.3), (1.0, 0.1)] {
            let d = delta_ceiling(alpha, eps).unwrap();
            let rhs = (eps * PI).powi(2) * (1.0 - (1.0 + d).powf(-4.0 * alpha));
            assert!(d > 0.0 && (d * d - rhs).abs() < 1e-12 * rhs.max(1e-300), "{d}");
            // any larger delta violates the inequality
            let bigger = 1.01 * d;
            assert!(bigger * bigger > (eps * PI).powi(2) * (1.0 - (1.0 + bigger).powf(-4.0 * alpha)));
        }
    }

    #[test]
    fn ceiling_over_epsilon_vanishes() {
        let ratios: Vec<f64> = [1e-1, 1e-2, 1e-3, 1e-4].iter().map(|&e| delta_ceiling(0.5, e).unwrap() / e).collect();
        assert!(ratios.windows(2).all(|w| w[1] < w[0]));
        assert!(ratios[3] < 1e-2);
    }

    #[test]
    fn competitor_bounds_distance() {
        let p = params(0.5);
        let d = sample_growth(&p, &[10_000]).unwrap()[0].d;
        assert!(d <= competitor_minimum(0.5, 10_000, 200));
    }

    #[test]
    fn geometric_windings_are_sorted_and_unique() {
        let ls = geometric_windings(1000, 1_000_000, 13);
        assert_eq!(ls.first(), Some(&1000));
        assert_eq!(ls.last(), Some(&1_000_000));
        assert!(ls.windows(2).all(|w| w[0] < w[1]));
    }
}
