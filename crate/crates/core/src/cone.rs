//! The asymptotic cone of the universal cover.
//!
//! Rescaled by `1 / D(L)`, the orbit of the deck group through the axis
//! basepoint converges to a line with the metric `dhat(|b1 - b2|)`, where
//! `dhat(b) = lim D(round(b L)) / D(L)` behaves like `b^{1/(1+2 alpha)}`. That
//! snowflaked line has dimension `1 + 2 alpha`. Away from the orbit the cone is
//! flat, and the quotient by the deck group collapses onto a half-line.
//!
//! Hausdorff dimension is not computable from finite data; the box-counting
//! dimension is used instead. The two agree on snowflaked lines.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{log_log_fit, lower_constant, SHARP_UPPER_CONSTANT};
use crate::error::{Error, Result};
use crate::geodesy::{point_distance, quotient_distance, solve_winding, PlanePoint, WarpedPlane};
use crate::ghdist::{correspondence_distortion, Correspondence, FiniteMetricSpace};
use crate::warp::WarpParams;

/// Sampled orbit metric `b -> dhat(b)` on `(0, 1]`, interpolated linearly
/// in log-log coordinates between samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitMetric {
    pub params: WarpParams,
    pub l_ref: u64,
    pub d_ref: f64,
    /// Sample abscissae `l / l_ref`, strictly increasing, ending at 1.
    pub b: Vec<f64>,
    /// `D(l) / D(l_ref)`, strictly increasing, ending at 1.
    pub dhat: Vec<f64>,
}

pub const MIN_L_REF: u64 = 10_000;
pub const MIN_SAMPLES: usize = 50;

/// Samples `D(round(b L_ref)) / D(L_ref)` on a log grid of `n_samples`
/// values of `b` in `[1 / L_ref, 1]`. Grid points that round to the same
/// winding number are merged.
pub fn build_orbit_metric(params: &WarpParams, l_ref: u64, n_samples: usize) -> Result<OrbitMetric> {
    if l_ref < MIN_L_REF {
        return Err(Error::InvalidParameter(format!("L_ref must be >= {MIN_L_REF}, got {l_ref}")));
    }
    if n_samples < MIN_SAMPLES {
        return Err(Error::InvalidParameter(format!("need >= {MIN_SAMPLES} samples, got {n_samples}")));
    }
    let top = (l_ref as f64).ln();
    let mut windings: Vec<u64> = (0..n_samples)
        .map(|k| ((top * k as f64 / (n_samples - 1) as f64).exp().round() as u64).clamp(1, l_ref))
        .collect();
    windings.dedup();

    let plane = WarpedPlane::new(*params);
    let distances: Vec<f64> = windings
        .par_iter()
        .map(|&l| {
            solve_winding(&plane, 0.0, 2.0 * PI * l as f64)
                .map(|arc| arc.length)
                .map_err(|e| Error::Solver(format!("orbit sample l = {l}: {e}")))
        })
        .collect::<Result<_>>()?;
    let d_ref = *distances.last().unwrap();
    let b: Vec<f64> = windings.iter().map(|&l| l as f64 / l_ref as f64).collect();
    let dhat: Vec<f64> = distances.iter().map(|d| d / d_ref).collect();
    if let Some(k) = dhat.windows(2).position(|w| w[1] <= w[0]) {
        return Err(Error::Solver(format!(
            "orbit distances not increasing between l = {} and l = {}",
            windings[k],
            windings[k + 1]
        )));
    }
    Ok(OrbitMetric { params: *params, l_ref, d_ref, b, dhat })
}

impl OrbitMetric {
    /// Smallest resolved coordinate.
    pub fn b_min(&self) -> f64 {
        self.b[0]
    }

    /// `dhat(b)` for `b` in `{0} u [b_min, 1]`.
    pub fn eval(&self, b: f64) -> Result<f64> {
        if b == 0.0 {
            return Ok(0.0);
        }
        if !(b >= self.b_min() && b <= 1.0) {
            return Err(Error::Domain(format!("b = {b} outside the resolved range [{}, 1]", self.b_min())));
        }
        let k = self.b.partition_point(|&x| x < b).clamp(1, self.b.len() - 1);
        Ok(loglog_interp(self.b[k - 1], self.b[k], self.dhat[k - 1], self.dhat[k], b))
    }

    /// Distance between orbit coordinates: `dhat(|b1 - b2|)`.
    pub fn distance(&self, b1: f64, b2: f64) -> Result<f64> {
        self.eval((b1 - b2).abs())
    }

    /// `dhat^{-1}(delta)` for `delta` in `[dhat(b_min), 1]`.
    pub fn inverse(&self, delta: f64) -> Result<f64> {
        let lo = self.dhat[0];
        if !(delta >= lo && delta <= 1.0) {
            return Err(Error::Domain(format!("delta = {delta} below the table resolution {lo} or above 1")));
        }
        // binary search for the segment, then invert it exactly
        let k = self.dhat.partition_point(|&x| x < delta).clamp(1, self.dhat.len() - 1);
        Ok(loglog_interp(self.dhat[k - 1], self.dhat[k], self.b[k - 1], self.b[k], delta))
    }

    /// Scales `dhat(b)` for `b` spaced geometrically in `[b_lo, b_hi]`.
    pub fn deltas_for(&self, b_lo: f64, b_hi: f64, n: usize) -> Result<Vec<f64>> {
        geometric(b_lo, b_hi, n).into_iter().map(|b| self.eval(b)).collect()
    }
}

fn loglog_interp(x0: f64, x1: f64, y0: f64, y1: f64, x: f64) -> f64 {
    let w = (x / x0).ln() / (x1 / x0).ln();
    (y0.ln() + w * (y1 / y0).ln()).exp()
}

fn geometric(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![lo];
    }
    (0..n).map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderConstants {
    pub c1_emp: f64,
    pub c2_emp: f64,
    pub b_window: (f64, f64),
}

/// Extremes of `dhat(b) / b^{1/(1+2 alpha)}` over the samples in `[b_lo, 1]`.
pub fn holder_scan(metric: &OrbitMetric, b_lo: f64) -> Result<HolderConstants> {
    let theta = metric.params.growth_exponent();
    holder_scan_table(&metric.b, &metric.dhat, theta, b_lo)
}

pub fn holder_scan_table(b: &[f64], dhat: &[f64], theta: f64, b_lo: f64) -> Result<HolderConstants> {
    let ratios: Vec<f64> =
        b.iter().zip(dhat).filter(|(&b, _)| b >= b_lo && b <= 1.0).map(|(&b, &d)| d / b.powf(theta)).collect();
    if ratios.is_empty() {
        return Err(Error::InvalidParameter(format!("no samples in [{b_lo}, 1]")));
    }
    Ok(HolderConstants {
        c1_emp: ratios.iter().cloned().fold(f64::INFINITY, f64::min),
        c2_emp: ratios.iter().cloned().fold(0.0, f64::max),
        b_window: (b_lo, 1.0),
    })
}

/// Box counts `N(delta)` and the fitted dimension `-slope(ln N, ln delta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxCountResult {
    pub scales: Vec<f64>,
    pub counts: Vec<u64>,
    pub dimension: f64,
    pub r_squared: f64,
}

fn box_fit(mut scales: Vec<f64>, count: impl Fn(f64) -> Result<u64>) -> Result<BoxCountResult> {
    if scales.len() < 2 {
        return Err(Error::InvalidParameter("box counting needs at least two scales".into()));
    }
    scales.sort_by(f64::total_cmp);
    let counts: Vec<u64> = scales.iter().map(|&d| count(d)).collect::<Result<_>>()?;
    let fit = log_log_fit(&scales.iter().zip(&counts).map(|(&d, &n)| (d, n as f64)).collect::<Vec<_>>())?;
    Ok(BoxCountResult { scales, counts, dimension: -fit.slope, r_squared: fit.r_squared })
}

/// Covers `[0, 1]` by intervals of `dhat`-diameter `delta`. By translation
/// invariance and monotonicity the greedy cover is optimal, so
/// `N(delta) = ceil(1 / dhat^{-1}(delta))`.
pub fn box_dimension(metric: &OrbitMetric, deltas: &[f64]) -> Result<BoxCountResult> {
    box_fit(deltas.to_vec(), |d| Ok((1.0 / metric.inverse(d)?).ceil() as u64))
}

/// Exact box counts `ceil(delta^{-1/theta})` of `([0, 1], |x - y|^theta)`.
pub fn snowflake_oracle(theta: f64, deltas: &[f64]) -> Result<BoxCountResult> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::InvalidParameter(format!("theta must lie in (0, 1], got {theta}")));
    }
    if deltas.iter().any(|&d| !(d > 0.0 && d <= 1.0)) {
        return Err(Error::InvalidParameter("scales must lie in (0, 1]".into()));
    }
    box_fit(deltas.to_vec(), |d| Ok(d.powf(-1.0 / theta).ceil() as u64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalflineScale {
    pub s: f64,
    /// Largest `|d(x, y) / s - |a - b||` over the probed pairs.
    pub max_deviation: f64,
    /// `pi h(a_min s) / s`: half the largest collapsing circumference,
    /// rescaled; bounds the deviation from above.
    pub circumference_bound: f64,
    pub fallbacks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalflineReport {
    pub fractions: Vec<f64>,
    pub angle_gaps: Vec<f64>,
    pub scales: Vec<HalflineScale>,
    pub shrinking: bool,
    pub within_bound: bool,
}

pub const HALFLINE_FRACTIONS: [f64; 3] = [0.2, 0.5, 0.9];
pub const HALFLINE_ANGLES: [f64; 3] = [0.0, 0.5 * PI, PI];

/// Rescaled quotient distances between points at radii `a s` and `b s`
/// against the half-line distance `|a - b|`.
pub fn halfline_limit_check(
    params: &WarpParams,
    scales: &[f64],
    fractions: &[f64],
    angle_gaps: &[f64],
) -> Result<HalflineReport> {
    if scales.is_empty() || scales.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("scales must be nonempty and increasing".into()));
    }
    if fractions.is_empty() || fractions.iter().any(|&a| !(a > 0.0)) {
        return Err(Error::InvalidParameter("radial fractions must be positive".into()));
    }
    let plane = WarpedPlane::new(*params);
    let a_min = fractions.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut probes = Vec::new();
    for (i, &a) in fractions.iter().enumerate() {
        for &b in &fractions[i..] {
            for &gap in angle_gaps {
                probes.push((a, b, gap));
            }
        }
    }
    let rows: Vec<HalflineScale> = scales
        .iter()
        .map(|&s| {
            let results: Vec<(f64, bool)> = probes
                .par_iter()
                .map(|&(a, b, gap)| {
                    let d = quotient_distance(&plane, PlanePoint::new(a * s, 0.0), PlanePoint::new(b * s, gap))?;
                    Ok(((d.distance / s - (a - b).abs()).abs(), d.used_fallback()))
                })
                .collect::<Result<_>>()?;
            Ok(HalflineScale {
                s,
                max_deviation: results.iter().map(|r| r.0).fold(0.0, f64::max),
                circumference_bound: PI * plane.params.h(a_min * s) / s,
                fallbacks: results.iter().filter(|r| r.1).count(),
            })
        })
        .collect::<Result<_>>()?;
    let shrinking = rows.windows(2).all(|w| w[1].max_deviation <= w[0].max_deviation);
    let within_bound = rows.iter().all(|r| r.max_deviation <= r.circumference_bound * (1.0 + 1e-9) + 1e-15);
    Ok(HalflineReport {
        fractions: fractions.to_vec(),
        angle_gaps: angle_gaps.to_vec(),
        scales: rows,
        shrinking,
        within_bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlatnessReport {
    pub s: f64,
    pub rho: f64,
    pub n: usize,
    pub seed: u64,
    /// Additive distortion of the chart correspondence.
    pub distortion: f64,
    /// `distortion / 2 / (rho s)`: bounds the rescaled GH distance between
    /// the sampled ball and its Euclidean chart image.
    pub normalized_distortion: f64,
    pub fallbacks: usize,
}

pub const FLATNESS_POINTS: usize = 64;

/// Samples `n` points uniformly in the chart disk of radius `rho s` about
/// `(s, 0)`, where the chart `(r, t) -> (r - s, h(s) t)` is an isometry at
/// the center, and measures how far the cover-plane distances are from the
/// Euclidean ones.
pub fn flatness_off_orbit(params: &WarpParams, s: f64, rho: f64, n: usize, seed: u64) -> Result<FlatnessReport> {
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::InvalidParameter(format!("s must be positive, got {s}")));
    }
    if !(rho > 0.0 && rho < 0.2) {
        return Err(Error::InvalidParameter(format!("rho must lie in (0, 0.2), got {rho}")));
    }
    if n < 2 {
        return Err(Error::InvalidParameter("need at least two sample points".into()));
    }
    let plane = WarpedPlane::new(*params);
    let h_s = plane.params.h(s);
    let radius = rho * s;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chart: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let phi: f64 = rng.random_range(0.0..2.0 * PI);
            let rr = radius * u.sqrt();
            (rr * phi.cos(), rr * phi.sin())
        })
        .collect();
    let points: Vec<PlanePoint> = chart.iter().map(|&(x, y)| PlanePoint::new(s + x, y / h_s)).collect();

    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let solved: Vec<(f64, bool)> = pairs
        .par_iter()
        .map(|&(i, j)| point_distance(&plane, points[i], points[j]).map(|d| (d.distance, d.used_fallback())))
        .collect::<Result<_>>()?;
    let mut matrix = vec![0.0; n * n];
    for (&(i, j), &(d, _)) in pairs.iter().zip(&solved) {
        matrix[i * n + j] = d;
        matrix[j * n + i] = d;
    }
    let cover = FiniteMetricSpace::new(n, matrix)?;
    let euclid = FiniteMetricSpace::from_fn(n, |i, j| (chart[i].0 - chart[j].0).hypot(chart[i].1 - chart[j].1))?;
    let distortion = correspondence_distortion(&cover, &euclid, &Correspondence::identity(n))?;
    Ok(FlatnessReport {
        s,
        rho,
        n,
        seed,
        distortion,
        normalized_distortion: 0.5 * distortion / radius,
        fallbacks: solved.iter().filter(|r| r.1).count(),
    })
}

/// Row of `orbit.csv`; the bands use the explicit growth constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitRow {
    pub b: f64,
    pub dhat: f64,
    pub lower_band: f64,
    pub upper_band: f64,
}

pub fn orbit_rows(metric: &OrbitMetric) -> Vec<OrbitRow> {
    let alpha = metric.params.alpha();
    let theta = metric.params.growth_exponent();
    metric
        .b
        .iter()
        .zip(&metric.dhat)
        .map(|(&b, &dhat)| OrbitRow {
            b,
            dhat,
            lower_band: lower_constant(alpha) * b.powf(theta),
            upper_band: SHARP_UPPER_CONSTANT * b.powf(theta),
        })
        .collect()
}

/// Row of `boxcount.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxCountRow {
    pub delta: f64,
    #[serde(rename = "N")]
    pub n: u64,
    pub fit_dimension: f64,
}

pub fn box_rows(result: &BoxCountResult) -> Vec<BoxCountRow> {
    result
        .scales
        .iter()
        .zip(&result.counts)
        .map(|(&delta, &n)| BoxCountRow { delta, n, fit_dimension: result.dimension })
        .collect()
}

/// Row of `flatness.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlatnessRow {
    pub s: f64,
    pub rho: f64,
    pub normalized_distortion: f64,
}

impl From<&FlatnessReport> for FlatnessRow {
    fn from(r: &FlatnessReport) -> Self {
        Self { s: r.s, rho: r.rho, normalized_distortion: r.normalized_distortion }
    }
}
