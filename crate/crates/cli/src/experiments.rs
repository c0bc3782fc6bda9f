//! One function per experiment. Each writes its CSV/JSON artifacts into the
//! output directory and returns the verdict for `summary.json`.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use warped_limit_core::asymptotics::{
    check_lemma_bounds, fit_exponent, geometric_windings, ratio_curve, DistanceSample, FarLoopRow, GrowthRow,
};
use warped_limit_core::cone::{
    box_dimension, box_rows, build_orbit_metric, flatness_off_orbit, halfline_limit_check, holder_scan, orbit_rows,
    FlatnessRow, OrbitMetric, FLATNESS_POINTS, HALFLINE_ANGLES, HALFLINE_FRACTIONS,
};
use warped_limit_core::curvature::{circle_lower_bound, log_grid, positivity_scan, radial_lower_bound, ricci_diag};
use warped_limit_core::geodesy::{solve_winding, GeodesyRow, GridOracle};
use warped_limit_core::{asymptotics, PlanePoint, WarpedPlane};

use crate::config::{Experiment, ExperimentConfig};
use crate::output::{write_csv, write_json, Summary};

pub struct Artifacts<'a> {
    dir: &'a Path,
    pub files: Vec<PathBuf>,
}

impl<'a> Artifacts<'a> {
    pub fn new(dir: &'a Path) -> Self {
        Self { dir, files: Vec::new() }
    }

    fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> anyhow::Result<()> {
        self.files.push(write_csv(self.dir, name, rows)?);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> anyhow::Result<()> {
        self.files.push(write_json(self.dir, name, value)?);
        Ok(())
    }
}

fn summary(cfg: &ExperimentConfig, claim: &str, paper_ref: &str, pass: bool, details: serde_json::Value) -> Summary {
    Summary {
        experiment: cfg.experiment.name().to_string(),
        claim: claim.to_string(),
        paper_ref: paper_ref.to_string(),
        pass,
        details,
    }
}

pub fn run_experiment(cfg: &ExperimentConfig, out: &mut Artifacts) -> anyhow::Result<Summary> {
    match cfg.experiment {
        Experiment::CurvatureScan => curvature_scan(cfg, out),
        Experiment::Growth => growth(cfg, out),
        Experiment::LemmaBounds => lemma_bounds(cfg, out),
        Experiment::FarLoop => far_loop(cfg, out),
        Experiment::OrbitDimension => orbit_dimension(cfg, out),
        Experiment::Halfline => halfline(cfg, out),
        Experiment::Flatness => flatness(cfg, out),
        Experiment::OracleCheck => oracle_check(cfg, out),
    }
}

#[derive(Serialize)]
struct CurvatureRow {
    r: f64,
    #[serde(rename = "ric_H")]
    ric_h: f64,
    #[serde(rename = "ric_U")]
    ric_u: f64,
    #[serde(rename = "ric_V")]
    ric_v: f64,
    radial_lower_bound: f64,
    circle_lower_bound: f64,
}

fn curvature_scan(cfg: &ExperimentConfig, out: &mut Artifacts) -> anyhow::Result<Summary> {
    let params = cfg.params()?;
    let grid = log_grid(cfg.f64("r-min", 1e-3)?, cfg.f64("r-max", 1e4)?, cfg.usize("n-grid", 500)?);
    let report = positivity_scan(&params, &grid)?;
    let rows: Vec<CurvatureRow> = grid
        .iter()
        .map(|&r| {
            let d = ricci_diag(&params, r)?;
            Ok(CurvatureRow {
                r,
                ric_h: d.ric_h,
                ric_u: d.ric_u,
                ric_v: d.ric_v,
                radial_lower_bound: radial_lower_bound(&params, r),
                circle_lower_bound: circle_lower_bound(&params, r),
            })
        })
        .collect::<warped_limit_core::Result<_>>()?;
    out.csv("curvature.csv", &rows)?;
    out.json("curvature.json", &report)?;
    Ok(summary(
        cfg,
        "Ric(H,H), Ric(U,U), Ric(V,V) > 0 and the two displayed lower bounds hold on the grid",
        "p >= max{4 alpha + 3, 16 alpha^2 + 8 alpha + 1}",
        report.pass,
        serde_json::to_value(&report)?,
    ))
}

fn growth(cfg: &ExperimentConfig, out: &mut Artifacts) -> anyhow::Result<Summary> {
    let params = cfg.params()?;
    let (l_min, l_max) = (cfg.u64("l-min", 1_000)?, cfg.u64("l-max", 1_000_000)?);
    let windings = geometric_windings(l_min, l_max, cfg.usize("n-l", 13)?);
    let window = (cfg.u64("fit-min", l_min)?, cfg.u64("fit-max", l_max)?);
    let tolerance = cfg.f64("tolerance", 0.03)?;
    let samples = asymptotics::sample_growth(&params, &windings)?;
    let fit = fit_exponent(&samples, window)?;
    let expected = params.growth_exponent();
    let increasing = samples.windows(2).all(|w| w[0].d <= w[1].d);
    let pass = (fit.slope - expected).abs() <= tolerance && increasing;

    let rows: Vec<GrowthRow> = samples.iter().map(|s| GrowthRow::new(params.alpha(), s)).collect();
    out.csv("growth.csv", &rows)?;
    Ok(summary(
        cfg,
        "log D(l) / log l tends to 1/(1+2 alpha)",
        "d(gamma^l p, p) ~ l^{1/(1+2 alpha)}",
        pass,
        json!({
            "slope": fit.slope,
            "expected": expected,
            "tolerance": tolerance,
            "r_squared": fit.r_squared,
            "l_window": [fit.l_window.0, fit.l_window.1],
            "samples_in_window": fit.samples,
            "increasing": increasing,
        }),
    ))
}

fn lemma_bounds(cfg: &ExperimentConfig, out: &mut Artifacts) -> anyhow::Result<Summary> {
    let params = cfg.params()?;
    let mut ls = cfg.u64_list("l-list", &[100, 1_000, 10_000, 100_000, 1_000_000])?;
    ls.sort_unstable();
    ls.dedup();
    let plane = WarpedPlane::new(params);
    let arcs: Vec<(u64, warped_limit_core::GeodesicArc)> = ls
        .par_iter()
        .map(|&l| Ok((l, solve_winding(&plane, 0.0, 2.0 * PI * l as f64)?)))
        .collect::<warped_limit_core::Result<_>>()?;
    let samples: Vec<DistanceSample> =
        arcs.iter().map(|(l, arc)| DistanceSample { l: *l, d: arc.length, r_star: arc.r_star }).collect();
    let report = check_lemma_bounds(&params, &samples)?;
    let pass = report.pass && !report.checked.is_empty();

    let geodesy: Vec<GeodesyRow> = arcs.iter().map(|(l, arc)| GeodesyRow::new(*l, params.alpha(), arc)).collect();
    out.csv("geodesy.csv", &geodesy)?;
    out.csv("bounds.csv", &report.checked)?;
    Ok(summary(
        cfg,
        "C l^{1/(1+2a)} - 2 <= D(l) <= 9 l^{1/(1+2a)} for l >= 9^{1+1/(2a)}, also D(l) <= (2+2 pi) l^{1/(1+2a)} and D(l) <= min_r (2r + 2 pi l h(r))",
        "C = 2 * 9^{-1/(2 alpha)}; upper constant (2 + 2 pi); comparison loop 2 r_l + l L(r_l)",
        pass,
        serde_json::to_value(&report)?,
    ))
}

fn far_loop(cfg: &ExperimentConfig, out: &mut Artifacts) -> anyhow::Result<Summary> {
    let params = cfg.params()?;
    let mut s_list = cfg.f64_list("s-list", &[1e3, 1e4])?;
    s_list.sort_by(f64::total_cmp);
    let mut eps = cfg.f64_list("eps-list", &[0.3, 0.1, 0.03, 0.01])?;
    eps.sort_by(|a, b| b.total_cmp(a));
    eps.dedup();

    let curves =
        s_list.iter().map(|&s| ratio_curve(&params, s, &eps)).collect::<warped_limit_core::Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut length_failures = Vec::new();
    for curve in &curves {
        for point in &curve.points {
            rows.push(FarLoopRow::new(&point.far_loop, point.ceiling));
            if !point.far_loop.pass {
                length_failures.push(json!({ "s": curve.s, "epsilon": point.epsilon }));
            }
        }
    }
    rows.sort_by(|a, b| a.s.total_cmp(&b.s).then(a.epsilon.total_cmp(&b.epsilon)));
    out.csv("farloop.csv", &rows)?;
    let pass = length_failures.is_empty() && curves.iter().all(|c| c.pass);
    Ok(summary(
        cfg,
        "pi/(1+pi)^{2a} eps s <= length(c_l) <= 2 pi eps s, and size/length decreases with eps below the delta(eps)/(C eps) ceiling",
        "delta^2 <= eps^2 pi^2 [1 - (1+delta)^{-4 alpha}]",
        pass,
        json!({
            "length_constant": asymptotics::far_length_constant(params.alpha()),
            "length_failures": length_failures,
            "curves": curves.iter().map(|c| json!({
                "s": c.s,
                "monotone": c.monotone,
                "halves": c.halves,
                "ratios": c.points.iter().map(|p| json!({
                    "epsilon": p.epsilon, "ratio": p.ratio, "ceiling": p.ceiling,
                })).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "size_note": "size is measured for the plane geodesic loop in the quotient cylinder",
        }),
    ))
}

/// Largest relative change of `dhat` over the samples of `coarse` in
/// `[b_lo, 1]` when the normalization winding is doubled.
fn cauchy_gap(coarse: &OrbitMetric, fine: &OrbitMetric, b_lo: f64) -> anyhow::Result<f64> {
    let mut worst: f64 = 0.0;
    for (&b, &d) in coarse.b.iter().zip(&coarse.dhat) {
        if b >= b_lo {
            worst = worst.max((fine.eval(b)? - d).abs() / d);
        }
    }
    Ok(worst)
}

fn orbit_dimension(cfg: &ExperimentConfig, out: &mut Artifacts) -> anyhow::Result<Summary> {
    let params = cfg.params()?;
    let alpha = params.alpha();
    let metric = build_orbit_metric(&params, cfg.u64("l-ref", 100_000_000)?, cfg.usize("n-samples", 400)?)?;
    let deltas = metric.deltas_for(cfg.f64("b-min", 1e-4)?, cfg.f64("b-max", 1e-2)?, cfg.usize("n-deltas", 20)?)?;
    let boxes = box_dimension(&metric, &deltas)?;
    let target = 1.0 + 2.0 * alpha;
    let tolerance = cfg.f64("tolerance", 0.1)?;
    let dimension_ok = (boxes.dimension - target).abs() <= tolerance;
    let product = boxes.dimension * params.growth_exponent();

    let holder_l = cfg.u64("holder-l-ref", 10_000)?;
    let holder_n = cfg.usize("holder-samples", 200)?;
    let holder_b = cfg.f64("holder-b-min", 1e-3)?;
    let stability_tol = cfg.f64("stability-tol", 0.02)?;
    let coarse = build_orbit_metric(&params, holder_l, holder_n)?;
    let fine = build_orbit_metric(&params, 2 * holder_l, holder_n)?;
    let (h1, h2) = (holder_scan(&coarse, holder_b)?, holder_scan(&fine, holder_b)?);
    let c_lower = asymptotics::lower_constant(alpha);
    let c_upper = asymptotics::SHARP_UPPER_CONSTANT;
    let band_ok = h1.c1_emp >= c_lower && h2.c1_emp >= c_lower && h1.c2_emp <= c_upper && h2.c2_emp <= c_upper;
    let c1_shift = (h2.c1_emp - h1.c1_emp).abs() / h1.c1_emp;
    let c2_shift = (h2.c2_emp - h1.c2_emp).abs() / h1.c2_emp;
    let dhat_shift = cauchy_gap(&coarse, &fine, 0.01)?;
    let stable = c1_shift <= stability_tol && c2_shift <= stability_tol && dhat_shift <= stability_tol;

    out.csv("orbit.csv", &orbit_rows(&metric))?;
    out.csv("boxcount.csv", &box_rows(&boxes))?;
    Ok(summary(
        cfg,
        "the orbit metric is a snowflaked line of dimension 1 + 2 alpha (box-counting surrogate) with a two-sided Holder band",
        "C_1 |b_1 - b_2|^{1/(1+2 alpha)} <= d((b_1,0),(b_2,0)) <= C_2 |b_1 - b_2|^{1/(1+2 alpha)}; dim = 1 + 2 alpha",
        dimension_ok && band_ok && stable,
        json!({
            "dimension": boxes.dimension,
            "target": target,
            "tolerance": tolerance,
            "fit_r_squared": boxes.r_squared,
            "dimension_times_exponent": product,
            "l_ref": metric.l_ref,
            "holder": {
                "l_ref": [coarse.l_ref, fine.l_ref],
                "b_window": [holder_b, 1.0],
                "c1_emp": [h1.c1_emp, h2.c1_emp],
                "c2_emp": [h1.c2_emp, h2.c2_emp],
                "c1_floor": c_lower,
                "c2_ceiling": c_upper,
                "band_ok": band_ok,
                "c1_shift": c1_shift,
                "c2_shift": c2_shift,
                "dhat_shift_on_0.01_1": dhat_shift,
                "stable": stable,
            },
            "estimator_note": "box-counting dimension, equal to the Hausdorff dimension on snowflaked lines",
        }),
    ))
}

#[derive(Serialize)]
struct HalflineRow {
    s: f64,
    max_deviation: f64,
    circumference_bound: f64,
}

fn halfline(cfg: &ExperimentConfig, out: &mut Artifacts) -> anyhow::Result<Summary> {
    let params = cfg.params()?;
    let mut scales = cfg.f64_list("s-list", &[1e3, 1e4, 1e5])?;
    scales.sort_by(f64::total_cmp);
    let fractions = cfg.f64_list("fractions", &HALFLINE_FRACTIONS)?;
    let angles = cfg.f64_list("angle-gaps", &HALFLINE_ANGLES)?;
    let tolerance = cfg.f64("tolerance", 1e-2)?;
    let report = halfline_limit_check(&params, &scales, &fractions, &angles)?;
    let small = report.scales.iter().all(|s| s.max_deviation <= tolerance);
    let rows: Vec<HalflineRow> = report
        .scales
        .iter()
        .map(|s| HalflineRow { s: s.s, max_deviation: s.max_deviation, circumference_bound: s.circumference_bound })
        .collect();
    out.csv("halfline.csv", &rows)?;
    Ok(summary(
        cfg,
        "rescaled quotient distances converge to the half-line distance |a - b|",
        "(X, x) is a half-line [0, infinity)",
        report.shrinking && report.within_bound && small,
        json!({ "tolerance": tolerance, "report": report }),
    ))
}

fn flatness(cfg: &ExperimentConfig, out: &mut Artifacts) -> anyhow::Result<Summary> {
    let params = cfg.params()?;
    let s = cfg.f64("s", 1e3)?;
    let mut rhos = cfg.f64_list("rho-list", &[0.1, 0.05, 0.025])?;
    rhos.sort_by(|a, b| b.total_cmp(a));
    let n = cfg.usize("n-points", FLATNESS_POINTS)?;
    let reports = rhos
        .iter()
        .map(|&rho| flatness_off_orbit(&params, s, rho, n, cfg.seed))
        .collect::<warped_limit_core::Result<Vec<_>>>()?;
    let decreasing = reports.windows(2).all(|w| w[1].normalized_distortion < w[0].normalized_distortion);
    let within_rho = reports.iter().all(|r| r.normalized_distortion <= r.rho);
    let mut rows: Vec<FlatnessRow> = reports.iter().map(FlatnessRow::from).collect();
    rows.sort_by(|a, b| a.s.total_cmp(&b.s).then(a.rho.total_cmp(&b.rho)));
    out.csv("flatness.csv", &rows)?;
    Ok(summary(
        cfg,
        "balls off the orbit are Gromov-Hausdorff close to Euclidean discs after rescaling, with gap O(rho)",
        "any tangent cone at z is isometric to R^2",
        decreasing && within_rho,
        json!({ "decreasing": decreasing, "within_rho": within_rho, "reports": reports }),
    ))
}

fn oracle_check(cfg: &ExperimentConfig, out: &mut Artifacts) -> anyhow::Result<Summary> {
    let params = cfg.params()?;
    let mut ls = cfg.u64_list("l-list", &[1, 3, 10, 20])?;
    ls.sort_unstable();
    ls.dedup();
    let mesh = cfg.usize("mesh", 2000)?;
    let stencil = cfg.usize("stencil", 3)?;
    let tolerance = cfg.f64("tolerance", 0.03)?;
    let plane = WarpedPlane::new(params);
    let rows: Vec<GeodesyRow> = ls
        .par_iter()
        .map(|&l| -> anyhow::Result<GeodesyRow> {
            let t = 2.0 * PI * l as f64;
            let arc = solve_winding(&plane, 0.0, t)?;
            let r_max = 1.5 * arc.r_star + 1.0;
            let oracle = GridOracle::new(-r_max, r_max, t, mesh, mesh)?.with_stencil(stencil);
            let grid = oracle.distance(&plane, PlanePoint::new(0.0, 0.0), PlanePoint::new(0.0, t))?;
            Ok(GeodesyRow::new(l, params.alpha(), &arc).with_oracle(grid))
        })
        .collect::<anyhow::Result<_>>()?;
    out.csv("geodesy.csv", &rows)?;
    let worst = rows.iter().filter_map(|r| r.rel_gap).fold(0.0, f64::max);
    Ok(summary(
        cfg,
        "Clairaut cover distances agree with grid shortest paths",
        "d(gamma^l p, p) computed on the warped plane dr^2 + h(r)^2 dt^2",
        worst <= tolerance,
        json!({
            "mesh_nodes": mesh * mesh,
            "stencil": stencil,
            "tolerance": tolerance,
            "worst_rel_gap": worst,
        }),
    ))
}
