use std::f64::consts::PI;

use log::warn;
use serde::{Deserialize, Serialize};

use super::{RadialProfile, WarpedPlane};
use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};
use crate::roots::{brent, RootOptions};

/// One symmetric Clairaut arc from `(base_r, 0)` out to `r_star` and back.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicArc {
    /// Clairaut constant `h(r)^2 dt/ds`.
    pub c: f64,
    pub base_r: f64,
    /// Turning radius, `h(r_star) = |c|`. Equals `base_r` for the axis segment.
    pub r_star: f64,
    pub length: f64,
    /// Total advance in the unwound circle coordinate.
    pub delta_t: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub evaluations: usize,
    /// `delta_t` increased along every sampled bracket point.
    pub monotone: bool,
    pub dense_fallback: bool,
    pub roots_found: usize,
    /// Target below the conjugate-point advance on the axis; the answer is
    /// the axis segment itself.
    pub axis_segment: bool,
}

pub(crate) const QUAD: QuadOptions = QuadOptions { rel_tol: 1e-11, abs_tol: 1e-300, max_intervals: 4000 };

/// `1 - c^2 / h(r)^2` for `c = h(r_c)`, where `gap = r_c - |r| >= 0` is
/// supplied separately so that nearly tangent configurations keep their
/// relative precision.
#[inline]
pub(crate) fn clairaut_slack(alpha: f64, r: f64, r_c: f64, gap: f64) -> f64 {
    let one_rc = 1.0 + r_c * r_c;
    let ratio = (1.0 + r * r) / one_rc;
    if ratio < 0.5 {
        1.0 - ratio.powf(2.0 * alpha)
    } else {
        let x = gap * (r_c + r.abs()) / one_rc;
        -(2.0 * alpha * (-x).ln_1p()).exp_m1()
    }
}

/// A monotone stretch of a geodesic in which `|r|` runs over
/// `[lo, lo + span]`, with the Clairaut radius `gap` beyond the top end.
/// Span and gap are passed separately from `lo` because they can sit far
/// below the rounding unit of the radii themselves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Leg {
    pub lo: f64,
    pub span: f64,
    pub gap: f64,
}

impl Leg {
    pub fn new(lo: f64, span: f64, gap: f64) -> Self {
        Self { lo, span, gap }
    }
}

/// `[length, delta_t]` of a leg for the Clairaut constant `c = h(r_c)`,
/// `r_c = lo + span + gap`.
pub(crate) fn leg_integrals(alpha: f64, leg: Leg, r_c: f64) -> Result<[f64; 2]> {
    if !(leg.span > 0.0) {
        return Ok([0.0, 0.0]);
    }
    let hi = leg.lo + leg.span;
    let gap0 = leg.gap.max(0.0);
    let log_one_rc = (r_c * r_c).ln_1p();
    let integrand = |u: f64| {
        let u2 = u * u;
        let r = hi - u2;
        let q = clairaut_slack(alpha, r, r_c, gap0 + u2);
        let ds = 2.0 * u / q.sqrt();
        // c / h(r)^2 = (1 + r^2)^{2 alpha} / (1 + r_c^2)^alpha
        let dtheta = (alpha * (2.0 * (r * r).ln_1p() - log_one_rc)).exp();
        [ds, ds * dtheta]
    };
    Ok(integrate(integrand, 0.0, leg.span.sqrt(), QUAD)?.value)
}

pub(crate) fn path_integrals(alpha: f64, legs: &[Leg], r_c: f64) -> Result<[f64; 2]> {
    let mut total = [0.0, 0.0];
    for leg in legs {
        let v = leg_integrals(alpha, *leg, r_c)?;
        total[0] += v[0];
        total[1] += v[1];
    }
    Ok(total)
}

/// Solution of `delta_t(z) = target` along a one-parameter family.
#[derive(Debug, Clone, Copy)]
pub(crate) struct FamilyRoot {
    pub z: f64,
    pub length: f64,
    pub delta_t: f64,
}

/// Solves `delta_t(z) = target` for a family whose `delta_t` is expected to
/// increase in `z`. `eval` returns `[length, delta_t]`.
///
/// The bracket is found by expanding steps from `z_start`; the sampled values
/// are checked for monotonicity, and on a violation every sign change of a
/// dense scan is refined and the shortest solution returned. `Ok(None)` means
/// no bracket exists inside `[z_min, z_max]`.
pub(crate) fn solve_increasing_family<F>(
    eval: F,
    target: f64,
    z_start: f64,
    z_min: f64,
    z_max: f64,
    diag: &mut SolveDiagnostics,
) -> Result<Option<FamilyRoot>>
where
    F: Fn(f64) -> Result<[f64; 2]>,
{
    let mut samples: Vec<(f64, [f64; 2])> = Vec::new();
    let mut sample = |z: f64, diag: &mut SolveDiagnostics| -> Result<[f64; 2]> {
        diag.evaluations += 1;
        let v = eval(z)?;
        samples.push((z, v));
        Ok(v)
    };

    let v0 = sample(z_start, diag)?;
    let (mut z_lo, mut z_hi);
    let (mut g_lo, mut g_hi);
    if v0[1] < target {
        z_lo = z_start;
        g_lo = v0[1] - target;
        let mut step = 1.0;
        loop {
            let z = (z_lo + step).min(z_max);
            let g = sample(z, diag)?[1] - target;
            if g >= 0.0 {
                z_hi = z;
                g_hi = g;
                break;
            }
            if z >= z_max {
                return Ok(None);
            }
            z_lo = z;
            g_lo = g;
            step *= 2.0;
        }
    } else {
        z_hi = z_start;
        g_hi = v0[1] - target;
        let mut step = 1.0;
        loop {
            // approach a finite (open) lower end geometrically
            let z = if z_hi - step > z_min { z_hi - step } else { z_min + 0.125 * (z_hi - z_min) };
            let g = sample(z, diag)?[1] - target;
            if g < 0.0 {
                z_lo = z;
                g_lo = g;
                break;
            }
            if z - z_min < 1e-250 || diag.evaluations > 2000 {
                return Ok(None);
            }
            z_hi = z;
            g_hi = g;
            step *= 2.0;
        }
    }

    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    let monotone = samples.windows(2).all(|w| w[1].1[1] >= w[0].1[1]);
    diag.monotone = monotone;

    let refine = |a: f64, b: f64, ga: f64, gb: f64, diag: &mut SolveDiagnostics| -> Result<FamilyRoot> {
        let mut count = 0usize;
        let z = brent(
            |z| {
                count += 1;
                Ok(eval(z)?[1] - target)
            },
            a,
            b,
            ga,
            gb,
            RootOptions { x_tol: 1e-13 * (1.0 + a.abs().max(b.abs())), f_tol: 1e-13 * target, max_iter: 200 },
        )?;
        diag.evaluations += count + 1;
        let v = eval(z)?;
        Ok(FamilyRoot { z, length: v[0], delta_t: v[1] })
    };

    if monotone {
        diag.roots_found = 1;
        return refine(z_lo, z_hi, g_lo, g_hi, diag).map(Some);
    }

    warn!(
        "delta_t is not monotone on the sampled bracket ({} samples around target {target:e}); using dense scan",
        samples.len()
    );
    diag.dense_fallback = true;
    let (a, b) = (samples.first().unwrap().0, samples.last().unwrap().0);
    let n = 256;
    let mut grid = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let z = a + (b - a) * i as f64 / n as f64;
        diag.evaluations += 1;
        grid.push((z, eval(z)?[1] - target));
    }
    let mut best: Option<FamilyRoot> = None;
    for w in grid.windows(2) {
        let ((za, ga), (zb, gb)) = (w[0], w[1]);
        if ga == 0.0 || ga.signum() != gb.signum() {
            let root = refine(za, zb, ga, gb, diag)?;
            diag.roots_found += 1;
            if best.is_none_or(|b| root.length < b.length) {
                best = Some(root);
            }
        }
    }
    Ok(best)
}

/// Advance in `t` of arcs that leave the axis and return to it, in the limit
/// where the turning radius shrinks to zero: half a period of the Jacobi
/// equation with curvature `-h''(0)/h(0) = 2 alpha`.
pub fn axis_conjugate_advance(plane: &WarpedPlane) -> f64 {
    PI / (2.0 * plane.alpha()).sqrt()
}

fn loop_eval(plane: &WarpedPlane, base_r: f64, excess: f64) -> Result<[f64; 2]> {
    let v = leg_integrals(plane.alpha(), Leg::new(base_r, excess, 0.0), base_r + excess)?;
    Ok([2.0 * v[0], 2.0 * v[1]])
}

fn check_base(base_r: f64) -> Result<()> {
    if !(base_r >= 0.0) || !base_r.is_finite() {
        return Err(Error::Domain(format!("base radius must be finite and >= 0, got {base_r}")));
    }
    Ok(())
}

/// Arc with Clairaut constant `c` leaving `(base_r, 0)` outward.
pub fn arc_from_clairaut(plane: &WarpedPlane, base_r: f64, c: f64) -> Result<GeodesicArc> {
    check_base(base_r)?;
    if !c.is_finite() {
        return Err(Error::Domain(format!("Clairaut constant must be finite, got {c}")));
    }
    if c == 0.0 {
        return Err(Error::DegenerateRadial);
    }
    let h_base = plane.h(base_r);
    if c.abs() >= h_base {
        return Err(Error::NoTurningArc { c, h_base });
    }
    let r_star = plane.params.radius_of_h(c.abs()).max(base_r);
    let [length, delta_t] = loop_eval(plane, base_r, r_star - base_r)?;
    Ok(GeodesicArc { c, base_r, r_star, length, delta_t })
}

/// The arc from `(base_r, 0)` to `(base_r, T)` of least length among
/// single-turn outward arcs (and, on the axis, the axis segment itself).
pub fn solve_winding(plane: &WarpedPlane, base_r: f64, target: f64) -> Result<GeodesicArc> {
    solve_winding_with_diagnostics(plane, base_r, target).map(|(arc, _)| arc)
}

pub fn solve_winding_with_diagnostics(
    plane: &WarpedPlane,
    base_r: f64,
    target: f64,
) -> Result<(GeodesicArc, SolveDiagnostics)> {
    check_base(base_r)?;
    if !(target > 0.0) || !target.is_finite() {
        return Err(Error::Domain(format!("target advance must be finite and > 0, got {target}")));
    }
    let mut diag = SolveDiagnostics { monotone: true, ..Default::default() };

    if base_r == 0.0 && target <= axis_conjugate_advance(plane) {
        diag.axis_segment = true;
        let arc = GeodesicArc { c: 1.0, base_r, r_star: 0.0, length: target, delta_t: target };
        return Ok((arc, diag));
    }

    // r_star = base_r + scale * sinh(z), z > 0
    let scale = 1e-9 * base_r.max(1.0);
    let to_r_star = |z: f64| base_r + scale * z.sinh();
    let eval = |z: f64| loop_eval(plane, base_r, scale * z.sinh());

    let root = solve_increasing_family(eval, target, 10.0, 0.0, 200.0, &mut diag)?.ok_or_else(|| {
        Error::Solver(format!(
            "no turning radius found with delta_t = {target:e} from base_r = {base_r:e} (scanned c over (1e-12 h, (1 - 1e-12) h))"
        ))
    })?;

    let r_star = to_r_star(root.z);
    let rel = (root.delta_t - target).abs() / target;
    if rel > 1e-8 {
        return Err(Error::Solver(format!("winding residual {rel:e} exceeds 1e-8 at r_star = {r_star:e}")));
    }
    let c = plane.h(r_star);
    Ok((GeodesicArc { c, base_r, r_star, length: root.length, delta_t: root.delta_t }, diag))
}

/// Distance in the universal cover between a point at radius `base_r` and
/// its image under the `l`-th deck transformation.
pub fn cover_distance(plane: &WarpedPlane, base_r: f64, l: u64) -> Result<f64> {
    if l == 0 {
        return Err(Error::InvalidParameter("winding number l must be >= 1".into()));
    }
    Ok(solve_winding(plane, base_r, 2.0 * PI * l as f64)?.length)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::warp::WarpParams;

    fn plane(alpha: f64) -> WarpedPlane {
        WarpedPlane::new(WarpParams::new(alpha, 4).unwrap())
    }

    /// Tanh-sinh quadrature of the original integrands in `r`, which handles
    /// the inverse square root singularity at `r_star` natively.
    /// `f` receives `r` and `b - r`, the latter free of cancellation.
    fn tanh_sinh(f: impl Fn(f64, f64) -> f64, a: f64, b: f64) -> f64 {
        let h = 1.0 / 64.0;
        let half = 0.5 * (b - a);
        let mut sum = 0.0;
        for k in -400..=400 {
            let x = k as f64 * h;
            let s = 0.5 * PI * x.sinh();
            let y = s.tanh();
            let w = 0.5 * PI * x.cosh() / s.cosh().powi(2);
            // distance to the upper end computed without cancellation
            let to_b = half * (1.0 - y);
            if to_b <= 0.0 || y <= -1.0 {
                continue;
            }
            let r = b - to_b;
            let v = f(r, to_b);
            if v.is_finite() {
                sum += w * v;
            }
        }
        sum * half * h
    }

    #[test]
    fn arc_with_half_clairaut_constant() {
        let p = plane(1.0);
        let arc = arc_from_clairaut(&p, 0.0, 0.5).unwrap();
        assert!((arc.r_star - 1.0).abs() < 1e-12);
        // 1 - (1 + r^2)^2 / 4 = (1 - r^2) / 2 * (1 + (1 + r^2) / 2), 1 - r^2 = d (2 - d)
        let slack = |r: f64, d: f64| 0.5 * d * (2.0 - d) * (1.0 + 0.5 * (1.0 + r * r));
        let len_oracle = 2.0 * tanh_sinh(|r, d| 1.0 / slack(r, d).sqrt(), 0.0, 1.0);
        let dt_oracle = 2.0 * tanh_sinh(|r, d| 0.5 * (1.0 + r * r).powi(2) / slack(r, d).sqrt(), 0.0, 1.0);
        assert!((arc.length - len_oracle).abs() < 1e-8 * len_oracle, "{} vs {len_oracle}", arc.length);
        assert!((arc.delta_t - dt_oracle).abs() < 1e-8 * dt_oracle, "{} vs {dt_oracle}", arc.delta_t);
        assert!(arc.length >= arc.delta_t * p.h(arc.r_star));
    }

    #[test]
    fn near_tangent_arc_on_axis_approaches_conjugate_advance() {
        // On the axis the near-tangent arcs do not shrink: they converge to the
        // axis segment up to its first conjugate point.
        let p = plane(1.0);
        let arc = arc_from_clairaut(&p, 0.0, 1.0 - 1e-10).unwrap();
        let limit = axis_conjugate_advance(&p);
        assert!((arc.delta_t - limit).abs() < 1e-4, "{} vs {limit}", arc.delta_t);
        assert!((arc.length - limit).abs() < 1e-4);
    }

    #[test]
    fn near_tangent_arc_off_axis_shrinks() {
        let p = plane(1.0);
        let base = 2.0;
        let arc = arc_from_clairaut(&p, base, p.h(base) * (1.0 - 1e-10)).unwrap();
        assert!(arc.delta_t < 1e-3 && arc.length < 1e-3, "{arc:?}");
    }

    #[test]
    fn arc_errors() {
        let p = plane(1.0);
        assert_eq!(arc_from_clairaut(&p, 0.0, 0.0), Err(Error::DegenerateRadial));
        assert!(matches!(arc_from_clairaut(&p, 0.0, 1.0), Err(Error::NoTurningArc { .. })));
        assert!(matches!(arc_from_clairaut(&p, 1.0, 0.6), Err(Error::NoTurningArc { .. })));
    }

    #[test]
    fn negative_constant_mirrors() {
        let p = plane(0.5);
        let a = arc_from_clairaut(&p, 0.0, 0.3).unwrap();
        let b = arc_from_clairaut(&p, 0.0, -0.3).unwrap();
        assert_eq!(a.length, b.length);
        assert_eq!(a.delta_t, b.delta_t);
    }

    #[test]
    fn winding_inverts_arc() {
        let p = plane(1.0);
        let arc = arc_from_clairaut(&p, 0.0, 0.2).unwrap();
        let solved = solve_winding(&p, 0.0, arc.delta_t).unwrap();
        assert!((solved.r_star - arc.r_star).abs() < 1e-8 * arc.r_star);
        assert!((solved.length - arc.length).abs() < 1e-9 * arc.length);
    }

    #[test]
    fn small_advance_is_axis_segment() {
        let p = plane(1.0);
        let (arc, diag) = solve_winding_with_diagnostics(&p, 0.0, 0.01).unwrap();
        assert!(diag.axis_segment);
        assert!((arc.length - 0.01).abs() < 1e-4);
    }

    #[test]
    fn small_advance_off_axis_hugs_circle() {
        let p = plane(1.0);
        let base = 3.0;
        let t = 0.01;
        let arc = solve_winding(&p, base, t).unwrap();
        let circle = t * p.h(base);
        assert!(arc.length <= circle && arc.length > 0.99 * circle, "{} vs {circle}", arc.length);
    }

    #[test]
    fn sandwich_at_l100_alpha1() {
        let p = plane(1.0);
        let d = cover_distance(&p, 0.0, 100).unwrap();
        let l13 = 100f64.powf(1.0 / 3.0);
        let c = 2.0 / 9f64.powf(0.5);
        assert!(d >= c * l13 - 2.0 && d <= 9.0 * l13, "d = {d}");
    }

    #[test]
    fn one_wrap_beats_axis_circle() {
        let d = cover_distance(&plane(1.0), 0.0, 1).unwrap();
        assert!(d <= 2.0 * PI, "{d}");
    }

    #[test]
    fn length_dominates_double_turning_radius() {
        let p = plane(0.5);
        for l in [10u64, 1000, 100_000] {
            let arc = solve_winding(&p, 0.0, 2.0 * PI * l as f64).unwrap();
            assert!(arc.length >= 2.0 * arc.r_star);
            assert!(arc.length >= arc.delta_t * p.h(arc.r_star));
        }
    }

    #[test]
    fn rejects_bad_targets() {
        let p = plane(1.0);
        assert!(solve_winding(&p, 0.0, 0.0).is_err());
        assert!(solve_winding(&p, -1.0, 1.0).is_err());
        assert!(cover_distance(&p, 0.0, 0).is_err());
    }
}
