//! The experiment registry E0–E8. Every runner records its inputs,
//! tolerances, artifacts and verdicts in an [`ExperimentManifest`]; failing
//! steps are recorded as errors instead of aborting the run.

use std::f64::consts::{PI, TAU};
use std::path::Path;

use multicorn::angles::{
    angle, check_root_arc_relation, count_exact_periodic, multibrot_count, multicorn_count, MapSign,
};
use multicorn::atlas::{
    boundary_trace, cusp_seeds, find_centers, mu_family_demo, period1_boundary, period1_cusp_angles, refine_cusp,
    scan_mu_circle, BoundaryConfig, BoundaryTrace, CenterConfig, ComponentRecord, CuspRecord,
};
use multicorn::dynamics::MapParams;
use multicorn::parabolic::{
    bifurcation_test, critical_ecalle_height, even_bifurcation_check, ordered_cusps, return_map_index, trace_arc,
    ArcConfig, ArcSample, BifurcationConfig, EvenBifurcationConfig, FatouConfig,
};
use multicorn::rays::{discontinuity_experiment, DiscontinuityConfig};
use multicorn::render::{
    classify_parameter, colorize, decode_png, decode_ppm, encode_png, encode_ppm, overlay, render_parameter_plane,
    Coloring, OverlayLayers, RasterGrid, RenderConfig, Viewport,
};
use multicorn::Complex64;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::config::Config;
use crate::manifest::{sha256_hex, ExperimentManifest, Recorder};

pub const EXPERIMENT_IDS: [&str; 9] = ["E0", "E1", "E2", "E3", "E4", "E5", "E6", "E7", "E8"];

/// Centre of the real period-3 tricorn component.
pub const PERIOD3_CENTER: f64 = -1.7548776662466927;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("unknown experiment `{0}` (expected E0..E8 or all)")]
    Unknown(String),
}

/// Runs one experiment. Artifacts and `manifest.json` go to `out_dir/<id>/`
/// when a directory is given.
pub fn run_experiment(id: &str, cfg: &Config, out_dir: Option<&Path>) -> Result<ExperimentManifest, ExperimentError> {
    let id = id.to_ascii_uppercase();
    Ok(match id.as_str() {
        "E0" => e0(cfg, out_dir),
        "E1" => e1(cfg, out_dir),
        "E2" => e2(cfg, out_dir),
        "E3" => e3(cfg, out_dir),
        "E4" => e4(cfg, out_dir),
        "E5" => e5(cfg, out_dir),
        "E6" => e6(cfg, out_dir),
        "E7" => e7(cfg, out_dir),
        "E8" => e8(cfg, out_dir),
        _ => return Err(ExperimentError::Unknown(id)),
    })
}

/// Expands `all` to every id.
pub fn resolve_ids(list: &str) -> Result<Vec<String>, ExperimentError> {
    if list.eq_ignore_ascii_case("all") {
        return Ok(EXPERIMENT_IDS.iter().map(|s| s.to_string()).collect());
    }
    list.split(',')
        .map(|s| {
            let s = s.trim().to_ascii_uppercase();
            if EXPERIMENT_IDS.contains(&s.as_str()) {
                Ok(s)
            } else {
                Err(ExperimentError::Unknown(s))
            }
        })
        .collect()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Largest distance from any point of `expected` to its nearest point of
/// `found` (infinite when `found` is empty).
fn match_error(expected: &[Complex64], found: &[Complex64]) -> f64 {
    expected
        .iter()
        .map(|e| found.iter().map(|f| (f - e).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

fn csv<T: Serialize>(rows: &[T]) -> Vec<u8> {
    let mut out = String::new();
    for r in rows {
        let v = serde_json::to_value(r).unwrap_or_default();
        let line: Vec<String> = match v {
            serde_json::Value::Array(a) => a.iter().map(|x| x.to_string()).collect(),
            other => vec![other.to_string()],
        };
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out.into_bytes()
}

fn with_header(header: &str, body: Vec<u8>) -> Vec<u8> {
    let mut out = format!("{header}\n").into_bytes();
    out.extend(body);
    out
}

// ---------------------------------------------------------------- E0

fn e0(cfg: &Config, out: Option<&Path>) -> ExperimentManifest {
    let (s, t) = (&cfg.sizes, &cfg.tolerances);
    let mut rec = Recorder::new("E0", "openness fails for the family mu*conj(z) + conj(z)^2", cfg.seed(), out);
    rec.input("scan_points", s.e0_scan_points);
    rec.input("grid", s.e0_grid);
    rec.input("radius", s.e0_radius);
    rec.input("control_mu", [s.e0_control_modulus, 0.0]);
    rec.tolerance("min_fraction", t.e0_min_fraction);
    rec.tolerance("control_max_fraction", t.e0_control_max_fraction);

    let (pick, fractions) = scan_mu_circle(s.e0_scan_points, s.e0_radius, s.e0_grid);
    rec.artifact("csv", "scan.csv", &with_header("theta,fraction", csv(&fractions)));
    match pick {
        Some(mu0) => {
            rec.input("mu0", mu0);
            let frac = mu_family_demo(mu0, s.e0_radius, s.e0_grid);
            rec.check_detail(
                "non-repelling fraction around mu0",
                frac >= t.e0_min_fraction,
                frac,
                format!(">= {}", t.e0_min_fraction),
                format!("mu0 = {mu0}"),
            );
        }
        None => rec.step_failed("non-repelling fraction around mu0", "no scanned point is fully non-repelling"),
    }
    let control = mu_family_demo(c(s.e0_control_modulus, 0.0), s.e0_radius, s.e0_grid);
    rec.check(
        "control fraction",
        control <= t.e0_control_max_fraction,
        control,
        format!("<= {}", t.e0_control_max_fraction),
    );
    rec.finish(Some(cfg.budgets.e0))
}

// ---------------------------------------------------------------- E1

/// Real centre of a period-4 component near −1.31.
fn period4_real_center(cfg: &Config) -> Option<Complex64> {
    let centers = find_centers(2, 4, &CenterConfig { seed: cfg.seed(), ..CenterConfig::default() });
    centers
        .centers
        .into_iter()
        .filter(|z| z.im.abs() < 1e-9)
        .min_by(|a, b| (a.re + 1.31).abs().total_cmp(&(b.re + 1.31).abs()))
}

fn grid_hash(grid: &RasterGrid) -> String {
    let mut bytes = Vec::with_capacity(grid.pixels.len() * 24);
    for p in &grid.pixels {
        bytes.extend(p.escape_iterations.map_or(u32::MAX, |n| n).to_le_bytes());
        bytes.extend(p.period.map_or(0, |n| n).to_le_bytes());
        bytes.extend(p.smooth_potential.to_bits().to_le_bytes());
        bytes.extend(p.smooth_iterations.to_bits().to_le_bytes());
    }
    sha256_hex(&bytes)
}

fn render_with_threads(
    threads: usize,
    vp: &Viewport,
    rc: &RenderConfig,
) -> Result<RasterGrid, Box<dyn std::error::Error + Send + Sync>> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
    Ok(pool.install(|| render_parameter_plane(2, vp, rc))?)
}

/// Closed-form deltoid (boundary of the period-1 tricorn component).
pub fn deltoid(n: usize) -> Vec<Complex64> {
    (0..=n).map(|j| period1_boundary(2, TAU * j as f64 / n as f64)).collect()
}

fn e1(cfg: &Config, out: Option<&Path>) -> ExperimentManifest {
    let (s, t) = (&cfg.sizes, &cfg.tolerances);
    let mut rec = Recorder::new("E1", "tricorn figures: determinism and symmetry", cfg.seed(), out);
    let px = s.e1_pixels;
    rec.input("pixels", px);
    rec.input("max_iterations", s.e1_max_iterations);
    rec.tolerance("probe_agreement", t.e1_probe_agreement);
    let rc = RenderConfig {
        max_iterations: s.e1_max_iterations,
        coloring: Coloring::Escape,
        ..RenderConfig::default()
    };
    let vp = match Viewport::new(c(0.0, 0.0), 4.4, px, px) {
        Ok(v) => v,
        Err(e) => {
            rec.step_failed("viewport", e);
            return rec.finish(Some(cfg.budgets.e1));
        }
    };
    rec.input("viewport", vp);
    let workers = rayon::current_num_threads().max(2);
    let (single, multi) = match (render_with_threads(1, &vp, &rc), render_with_threads(workers, &vp, &rc)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            rec.step_failed("render", e);
            return rec.finish(Some(cfg.budgets.e1));
        }
    };
    let (h1, hn) = (grid_hash(&single), grid_hash(&multi));
    rec.check_detail(
        "deterministic across worker counts",
        h1 == hn,
        format!("1 thread {h1}, {workers} threads {hn}"),
        "identical hashes",
        "",
    );

    // Rotating the viewport by ω, ω² must reproduce the image exactly.
    let mut rotation_ok = true;
    for k in 1..=2 {
        let rv = Viewport { rotation: k, ..vp };
        match render_parameter_plane(2, &rv, &rc) {
            Ok(g) => rotation_ok &= grid_hash(&g) == h1,
            Err(e) => {
                rec.step_failed("rotation render", e);
                rotation_ok = false;
            }
        }
    }
    rec.check("omega-rotation pixel symmetry", rotation_ok, rotation_ok, "exact");

    let mirror_mismatches = (0..px)
        .flat_map(|j| (0..px).map(move |i| (i, j)))
        .filter(|&(i, j)| multi.get(i, j) != multi.get(i, px - 1 - j))
        .count();
    rec.check("conjugation mirror symmetry", mirror_mismatches == 0, mirror_mismatches, "0 mismatches");

    // Rotated probe parameters classified by direct iteration, without the
    // local-frame shortcut.
    let stride = (px / 64).max(1);
    let probes: Vec<(usize, usize)> = (0..px)
        .step_by(stride)
        .flat_map(|j| (0..px).step_by(stride).map(move |i| (i, j)))
        .collect();
    let rotated = Viewport { rotation: 1, ..vp };
    let agree = probes
        .par_iter()
        .filter(|&&(i, j)| {
            let direct = classify_parameter(2, rotated.pixel_to_point(i, j, 2), &rc);
            direct.interior() == multi.get(i, j).interior()
        })
        .count() as f64
        / probes.len() as f64;
    rec.check_detail(
        "direct iteration of rotated probes",
        agree >= t.e1_probe_agreement,
        agree,
        format!(">= {}", t.e1_probe_agreement),
        format!("{} probes", probes.len()),
    );

    let img = colorize(&multi);
    let ppm = encode_ppm(&img);
    match encode_png(&img) {
        Ok(png) => {
            let same = matches!((decode_ppm(&ppm), decode_png(&png)), (Ok(a), Ok(b)) if a == b && a == img);
            rec.check("PPM and PNG decode identically", same, same, "identical rasters");
            rec.artifact("png", "tricorn.png", &png);
        }
        Err(e) => rec.step_failed("PPM and PNG decode identically", e),
    }
    rec.artifact("ppm", "tricorn.ppm", &ppm);
    let layers = OverlayLayers {
        curves: vec![deltoid(720)],
        ..OverlayLayers::default()
    };
    if let Ok(png) = encode_png(&overlay(&img, &vp, 2, &layers)) {
        rec.artifact("png", "tricorn_deltoid.png", &png);
    }

    match period4_real_center(cfg) {
        Some(center) => {
            rec.input("period4_center", center);
            let zp = s.e1_zoom_pixels;
            let zrc = RenderConfig {
                coloring: Coloring::Period,
                ..rc
            };
            let zoom = Viewport::new(center, 0.05, zp, zp).and_then(|zv| {
                let a = render_parameter_plane(2, &zv, &zrc)?;
                let b = render_parameter_plane(2, &zv, &zrc)?;
                Ok((a, b))
            });
            match zoom {
                Ok((a, b)) => {
                    let period = a.get(zp / 2, zp / 2).period;
                    rec.check("zoom centre pixel has period 4", period == Some(4), period, "4");
                    let same = grid_hash(&a) == grid_hash(&b);
                    rec.check("zoom render deterministic", same, same, "identical hashes");
                    if let Ok(png) = encode_png(&colorize(&a)) {
                        rec.artifact("png", "period4_zoom.png", &png);
                    }
                }
                Err(e) => rec.step_failed("zoom centre pixel has period 4", e),
            }
        }
        None => rec.step_failed("zoom centre pixel has period 4", "no real period-4 centre found"),
    }
    rec.finish(Some(cfg.budgets.e1))
}

// ---------------------------------------------------------------- E2

fn e2(cfg: &Config, out: Option<&Path>) -> ExperimentManifest {
    let (s, t) = (&cfg.sizes, &cfg.tolerances);
    let mut rec = Recorder::new("E2", "hyperbolic centres versus the counting formula", cfg.seed(), out);
    rec.tolerance("closed_form", t.e2_closed_form);
    let cc = CenterConfig {
        seed: cfg.seed(),
        ..CenterConfig::default()
    };
    rec.input("center_search", cc);
    let cases: Vec<(u32, usize)> = (1..=s.e2_max_period_d2)
        .map(|k| (2, k))
        .chain((1..=s.e2_max_period_d3).map(|k| (3, k)))
        .collect();
    let mut table = Vec::new();
    for (d, k) in cases {
        let search = find_centers(d, k, &cc);
        let expected = multicorn_count(d, k as u32).to_usize().unwrap_or(usize::MAX);
        rec.check_detail(
            &format!("centre count d={d} k={k}"),
            search.centers.len() == expected,
            search.centers.len(),
            format!("== {expected}"),
            search.warning.clone().unwrap_or_default(),
        );
        if d == 2 {
            let closed: Option<Vec<Complex64>> = match k {
                1 => Some(vec![c(0.0, 0.0)]),
                2 => Some(vec![c(-1.0, 0.0), Complex64::from_polar(1.0, PI / 3.0), Complex64::from_polar(1.0, -PI / 3.0)]),
                3 => Some(vec![c(PERIOD3_CENTER, 0.0)]),
                _ => None,
            };
            if let Some(closed) = closed {
                let err = match_error(&closed, &search.centers);
                rec.check(
                    &format!("closed-form centres d=2 k={k}"),
                    err <= t.e2_closed_form,
                    err,
                    format!("<= {:e}", t.e2_closed_form),
                );
            }
        }
        table.push((d, k, search));
    }
    rec.json_artifact("centers.json", &table);
    rec.finish(Some(cfg.budgets.e2))
}

// ---------------------------------------------------------------- E3

/// Angles `a/m` of exact period `k` under `t ↦ sign·d·t`, counted by
/// enumerating all numerators (`m = |(sign·d)^k − 1|`).
pub fn enumerate_exact_periodic(d: u64, k: u32, sign: MapSign) -> u64 {
    let dk = d.pow(k);
    let negative = matches!(sign, MapSign::Minus) && k % 2 == 1;
    let m = if negative { dk + 1 } else { dk - 1 };
    let step = |a: u64| {
        let p = (d * a) % m;
        match sign {
            MapSign::Plus => p,
            MapSign::Minus => (m - p) % m,
        }
    };
    (0..m)
        .filter(|&a| {
            let mut x = a;
            for j in 1..=k {
                x = step(x);
                if x == a {
                    return j == k;
                }
            }
            false
        })
        .count() as u64
}

#[derive(Serialize)]
struct CountRow {
    d: u32,
    k: u32,
    phi_minus: String,
    phi_plus: String,
    s: String,
    s_star: String,
}

fn e3(cfg: &Config, out: Option<&Path>) -> ExperimentManifest {
    let (s, _) = (&cfg.sizes, &cfg.tolerances);
    let mut rec = Recorder::new("E3", "periodic angle counts", cfg.seed(), out);
    rec.input("max_degree", s.e3_max_degree);
    rec.input("max_period", s.e3_max_period);
    rec.input("enumeration_limit", s.e3_enumeration_limit);
    let s26 = multicorn_count(2, 6);
    rec.check("s*(2,6)", s26 == 33u32.into(), s26.to_string(), "== 33");
    let decomposition = multibrot_count(2, 6) + multibrot_count(2, 3) * 2u32;
    rec.check("s*(2,6) = s(2,6) + 2 s(2,3)", decomposition == 33u32.into(), decomposition.to_string(), "== 33");

    let mut rows = Vec::new();
    let mut mismatched = Vec::new();
    let mut enumerated = 0usize;
    let mut enumeration_failures = Vec::new();
    for d in 2..=s.e3_max_degree {
        for k in 1..=s.e3_max_period {
            let minus = count_exact_periodic(d, k, MapSign::Minus);
            let plus = count_exact_periodic(d, k, MapSign::Plus);
            if k > 2 && minus != plus {
                mismatched.push(format!("d={d} k={k}"));
            }
            let m = (d as u64).pow(k) + 1;
            if m <= s.e3_enumeration_limit {
                for (sign, formula) in [(MapSign::Minus, &minus), (MapSign::Plus, &plus)] {
                    enumerated += 1;
                    let brute = enumerate_exact_periodic(d as u64, k, sign);
                    if formula.to_u64() != Some(brute) {
                        enumeration_failures.push(format!("d={d} k={k} {sign:?}: {formula} vs {brute}"));
                    }
                }
            }
            rows.push(CountRow {
                d,
                k,
                phi_minus: minus.to_string(),
                phi_plus: plus.to_string(),
                s: multibrot_count(d, k).to_string(),
                s_star: multicorn_count(d, k).to_string(),
            });
        }
    }
    rec.check_detail(
        "phi- = phi+ for 2 < k",
        mismatched.is_empty(),
        mismatched.len(),
        "0 mismatches",
        mismatched.join("; "),
    );
    rec.check_detail(
        "formula matches enumeration",
        enumeration_failures.is_empty() && enumerated > 0,
        enumerated - enumeration_failures.len(),
        format!("all {enumerated} enumerated cases"),
        enumeration_failures.join("; "),
    );
    let mut text = String::from("d,k,phi_minus,phi_plus,s,s_star\n");
    for r in &rows {
        text.push_str(&format!("{},{},{},{},{},{}\n", r.d, r.k, r.phi_minus, r.phi_plus, r.s, r.s_star));
    }
    rec.artifact("csv", "counts.csv", text.as_bytes());
    rec.finish(Some(cfg.budgets.e3))
}

// ---------------------------------------------------------------- E4

/// Refines cusp seeds of a traced component and removes duplicates.
fn cusps_from_trace(trace: &BoundaryTrace, d: u32, k: usize) -> Vec<CuspRecord> {
    let found: Vec<CuspRecord> = cusp_seeds(trace, d, k)
        .par_iter()
        .filter_map(|(c, z)| refine_cusp(d, k, *c, *z, 1e-10))
        .collect();
    let mut out: Vec<CuspRecord> = Vec::new();
    for cr in found {
        if !out.iter().any(|q| (q.c - cr.c).norm() < 1e-7) {
            out.push(cr);
        }
    }
    out
}

/// A component record with cusps located from a boundary trace over
/// `directions` directions.
pub fn component_with_cusps(d: u32, k: usize, center: Complex64, directions: usize) -> ComponentRecord {
    let mut comp = ComponentRecord::new(d, k, center);
    let trace = boundary_trace(&comp, directions, &BoundaryConfig::default());
    comp.cusps = cusps_from_trace(&trace, d, k).iter().map(|q| q.c).collect();
    comp.boundary_samples = trace.parameters();
    comp
}

/// Number of gaps between consecutive cusps (by direction from the centre)
/// that contain boundary samples away from the cusps.
fn count_arcs(center: Complex64, trace: &BoundaryTrace, cusps: &[Complex64]) -> usize {
    let mut phis: Vec<f64> = cusps.iter().map(|q| (q - center).arg()).collect();
    phis.sort_by(f64::total_cmp);
    let n = phis.len();
    (0..n)
        .filter(|&i| {
            let (a, b) = (phis[i], phis[(i + 1) % n]);
            let span = (b - a).rem_euclid(TAU);
            trace.points.iter().any(|p| {
                let off = (p.direction - a).rem_euclid(TAU);
                off > 0.0 && off < span && cusps.iter().all(|q| (q - p.c).norm() > 1e-3)
            })
        })
        .count()
}

/// The three cusps of the period-1 tricorn component.
pub fn period1_cusps() -> Vec<Complex64> {
    period1_cusp_angles(2).into_iter().map(|t| period1_boundary(2, t)).collect()
}

fn e4(cfg: &Config, out: Option<&Path>) -> ExperimentManifest {
    let (s, t) = (&cfg.sizes, &cfg.tolerances);
    let mut rec = Recorder::new("E4", "cusps and arcs of odd-period components", cfg.seed(), out);
    rec.input("directions", s.e4_directions);
    rec.input("period3_directions", s.e4_period3_directions);
    rec.tolerance("deltoid", t.e4_deltoid);
    rec.tolerance("cusp", t.e4_cusp);
    let bc = BoundaryConfig::default();

    let comp = ComponentRecord::new(2, 1, c(0.0, 0.0));
    let trace = boundary_trace(&comp, s.e4_directions, &bc);
    let deltoid_err = trace
        .points
        .iter()
        .map(|p| (p.c - period1_boundary(2, p.z.arg())).norm())
        .fold(0.0, f64::max);
    rec.check_detail(
        "period-1 trace matches the deltoid",
        deltoid_err <= t.e4_deltoid && !trace.points.is_empty(),
        deltoid_err,
        format!("<= {:e}", t.e4_deltoid),
        format!("{} points, {} failures", trace.points.len(), trace.failures.len()),
    );
    let cusps = cusps_from_trace(&trace, 2, 1);
    let found: Vec<Complex64> = cusps.iter().map(|q| q.c).collect();
    rec.check("period-1 cusp count", found.len() == 3, found.len(), "== 3");
    let err = match_error(&period1_cusps(), &found);
    rec.check("period-1 cusp locations", err <= t.e4_cusp, err, format!("<= {:e}", t.e4_cusp));
    let arcs = count_arcs(comp.center, &trace, &found);
    rec.check("period-1 arc count", arcs == 3, arcs, "== 3");

    let comp3 = ComponentRecord::new(2, 3, c(PERIOD3_CENTER, 0.0));
    let trace3 = boundary_trace(&comp3, s.e4_period3_directions, &bc);
    let cusps3 = cusps_from_trace(&trace3, 2, 3);
    let found3: Vec<Complex64> = cusps3.iter().map(|q| q.c).collect();
    rec.check_detail(
        "period-3 cusp count",
        found3.len() == 3,
        found3.len(),
        "== 3",
        format!("{} boundary points, {} failures", trace3.points.len(), trace3.failures.len()),
    );
    let arcs3 = count_arcs(comp3.center, &trace3, &found3);
    rec.check("period-3 arc count", arcs3 == 3, arcs3, "== 3");
    rec.json_artifact("cusps.json", &[cusps, cusps3]);
    rec.artifact(
        "csv",
        "period1_boundary.csv",
        &with_header("re,im", csv(&trace.points.iter().map(|p| (p.c.re, p.c.im)).collect::<Vec<_>>())),
    );
    rec.finish(Some(cfg.budgets.e4))
}

// ---------------------------------------------------------------- E5

fn period1_component() -> ComponentRecord {
    let mut comp = ComponentRecord::new(2, 1, c(0.0, 0.0));
    comp.cusps = period1_cusps();
    comp
}

fn e5(cfg: &Config, out: Option<&Path>) -> ExperimentManifest {
    let (s, t) = (&cfg.sizes, &cfg.tolerances);
    let mut rec = Recorder::new("E5", "fixed-point index along parabolic arcs", cfg.seed(), out);
    rec.input("arc_samples", s.e5_arc_samples);
    for (k, v) in [
        ("index_quarter", t.e5_index_quarter),
        ("index_imaginary", t.e5_index_imaginary),
        ("cusp_index", t.e5_cusp_index),
        ("cusp_distance", t.e5_cusp_distance),
        ("evidence_above", t.e5_evidence_above),
        ("evidence_below", t.e5_evidence_below),
    ] {
        rec.tolerance(k, v);
    }
    match MapParams::new(2, c(0.25, 0.0))
        .map_err(|e| e.to_string())
        .and_then(|p| return_map_index(&p, 1, c(0.5, 0.0)).map_err(|e| e.to_string()))
    {
        Ok(est) => {
            let err = (est.index - 0.5).norm();
            rec.check_detail(
                "index at c = 1/4",
                err <= t.e5_index_quarter,
                est.index,
                format!("1/2 ± {:e}", t.e5_index_quarter),
                format!("error {err:e}"),
            );
        }
        Err(e) => rec.step_failed("index at c = 1/4", e),
    }

    let comp = period1_component();
    let ac = ArcConfig::default();
    let bc = BifurcationConfig::default();
    let mut samples: Vec<ArcSample> = Vec::new();
    let mut arc_times = Vec::new();
    let mut cusp_maxima = Vec::new();
    for arc in 0..comp.cusps.len() {
        let start = std::time::Instant::now();
        match trace_arc(&comp, arc, s.e5_arc_samples, &ac) {
            Ok(tr) => {
                for cusp in [tr.start_cusp, tr.end_cusp] {
                    let near = tr
                        .samples
                        .iter()
                        .filter(|x| (x.c - cusp).norm() <= t.e5_cusp_distance)
                        .map(|x| x.index.re)
                        .fold(f64::NEG_INFINITY, f64::max);
                    cusp_maxima.push(near);
                }
                samples.extend(tr.samples);
            }
            Err(e) => rec.step_failed(&format!("trace arc {arc}"), e),
        }
        arc_times.push(start.elapsed().as_secs_f64());
    }
    let max_imag = samples.iter().map(|x| x.index.im.abs()).fold(0.0, f64::max);
    rec.check_detail(
        "index is real along arcs",
        max_imag < t.e5_index_imaginary && !samples.is_empty(),
        max_imag,
        format!("< {:e}", t.e5_index_imaginary),
        format!("{} samples", samples.len()),
    );
    let weakest = cusp_maxima.iter().copied().fold(f64::INFINITY, f64::min);
    rec.check_detail(
        "index large near cusps",
        weakest > t.e5_cusp_index && !cusp_maxima.is_empty(),
        weakest,
        format!("> {} within {:e} of every cusp", t.e5_cusp_index, t.e5_cusp_distance),
        "smallest over arc ends of the largest nearby index",
    );

    let evidence: Vec<(f64, bool)> = samples
        .par_iter()
        .filter(|x| x.index.re >= t.e5_evidence_above || x.index.re <= t.e5_evidence_below)
        .map(|x| (x.index.re, bifurcation_test(x, 2, 1, &bc).is_some()))
        .collect();
    let above: Vec<&(f64, bool)> = evidence.iter().filter(|e| e.0 >= t.e5_evidence_above).collect();
    let below: Vec<&(f64, bool)> = evidence.iter().filter(|e| e.0 <= t.e5_evidence_below).collect();
    let missing = above.iter().filter(|e| !e.1).count();
    let spurious = below.iter().filter(|e| e.1).count();
    rec.check_detail(
        "bifurcation evidence where index >= threshold",
        missing == 0,
        missing,
        "0 samples without evidence",
        format!("{} samples tested", above.len()),
    );
    rec.check_detail(
        "no bifurcation evidence where index <= threshold",
        spurious == 0,
        spurious,
        "0 samples with evidence",
        format!("{} samples tested", below.len()),
    );
    let slowest = arc_times.iter().copied().fold(0.0, f64::max);
    rec.check(
        "runtime per arc",
        slowest < cfg.budgets.e5_per_arc,
        slowest,
        format!("< {} s", cfg.budgets.e5_per_arc),
    );
    rec.json_artifact("arcs.json", &samples);
    rec.finish(None)
}

// ---------------------------------------------------------------- E6

fn e6(cfg: &Config, out: Option<&Path>) -> ExperimentManifest {
    let t = &cfg.tolerances;
    let mut rec = Recorder::new("E6", "bifurcation from an even-period indifferent cycle", cfg.seed(), out);
    let ec = EvenBifurcationConfig::default();
    rec.input("config", &ec);
    rec.tolerance("slope_relative", t.e6_slope_relative);
    match even_bifurcation_check(&ec) {
        Ok(r) => {
            let target = Complex64::from_polar(1.0, TAU * ec.p as f64 / ec.q as f64);
            let merr = (r.multiplier - target).norm();
            rec.check_detail("indifferent multiplier", merr < 1e-8, r.multiplier, "e^{2 pi i p/q} ± 1e-8", format!("c0 = {}", r.c0));
            rec.check_detail(
                "attracting higher-period parameters in the disk",
                !r.attracting_parameters.is_empty(),
                r.attracting_parameters.len(),
                ">= 1",
                format!("{} grid points, radius {}", r.grid_points, ec.disk_radius),
            );
            let rel = (r.fitted_slope - r.expected_slope).norm() / r.expected_slope;
            rec.check_detail(
                "perturbation slope",
                rel <= t.e6_slope_relative,
                r.fitted_slope,
                format!("{} ± {}%", r.expected_slope, 100.0 * t.e6_slope_relative),
                format!("relative error {rel:e}"),
            );
            rec.json_artifact("report.json", &r);
        }
        Err(e) => rec.step_failed("even bifurcation check", e),
    }
    rec.finish(Some(cfg.budgets.e6))
}

// ---------------------------------------------------------------- E7

/// Index of the period-1 arc whose direction range contains `phi`.
fn arc_containing(comp: &ComponentRecord, phi: f64) -> Option<usize> {
    let cusps = ordered_cusps(comp);
    let n = cusps.len();
    (0..n).find(|&i| {
        let (a, b) = (cusps[i].0, cusps[(i + 1) % n].0);
        (phi - a).rem_euclid(TAU) < (b - a).rem_euclid(TAU)
    })
}

fn e7(cfg: &Config, out: Option<&Path>) -> ExperimentManifest {
    let (s, t) = (&cfg.sizes, &cfg.tolerances);
    let mut rec = Recorder::new("E7", "critical Ecalle height along a parabolic arc", cfg.seed(), out);
    rec.input("arc_samples", s.e7_arc_samples);
    rec.input("antisymmetry_probes", s.e7_antisymmetry_probes);
    rec.tolerance("height_quarter", t.e7_height_quarter);
    rec.tolerance("antisymmetry", t.e7_antisymmetry);
    rec.tolerance("min_samples", t.e7_min_samples);
    let fc = FatouConfig::default();
    match critical_ecalle_height(2, c(0.25, 0.0), 1, &fc) {
        Ok(h) => rec.check(
            "height at c = 1/4",
            h.abs() <= t.e7_height_quarter,
            h,
            format!("0 ± {:e}", t.e7_height_quarter),
        ),
        Err(e) => rec.step_failed("height at c = 1/4", e),
    }
    let comp = period1_component();
    let Some(arc) = arc_containing(&comp, 0.0) else {
        rec.step_failed("arc through 1/4", "no arc contains direction 0");
        return rec.finish(Some(cfg.budgets.e7));
    };
    match trace_arc(&comp, arc, s.e7_arc_samples, &ArcConfig::default()) {
        Ok(tr) => {
            let n = tr.samples.len();
            rec.check_detail(
                "strictly monotone height along the arc",
                tr.non_monotone.is_empty() && n >= t.e7_min_samples,
                n,
                format!(">= {} samples, no breaks", t.e7_min_samples),
                format!("{} breaks, {} dropped", tr.non_monotone.len(), tr.dropped.len()),
            );
            let stride = (n / s.e7_antisymmetry_probes.max(1)).max(1);
            let defects: Vec<Result<f64, String>> = tr
                .samples
                .par_iter()
                .step_by(stride)
                .map(|x| {
                    critical_ecalle_height(2, x.c.conj(), 1, &fc)
                        .map(|h| (h + x.ecalle_height).abs())
                        .map_err(|e| e.to_string())
                })
                .collect();
            let errors: Vec<&String> = defects.iter().filter_map(|r| r.as_ref().err()).collect();
            let worst = defects.iter().filter_map(|r| r.as_ref().ok()).copied().fold(0.0, f64::max);
            rec.check_detail(
                "antisymmetry under conjugation",
                errors.is_empty() && worst <= t.e7_antisymmetry && !defects.is_empty(),
                worst,
                format!("<= {:e}", t.e7_antisymmetry),
                format!("{} probes, {} failed", defects.len(), errors.len()),
            );
            let rows: Vec<(f64, f64, f64, f64)> = tr
                .samples
                .iter()
                .map(|x| (x.boundary_angle, x.c.re, x.c.im, x.ecalle_height))
                .collect();
            rec.artifact("csv", "heights.csv", &with_header("direction,re,im,height", csv(&rows)));
        }
        Err(e) => rec.step_failed("strictly monotone height along the arc", e),
    }
    rec.finish(Some(cfg.budgets.e7))
}

// ---------------------------------------------------------------- E8

fn e8(cfg: &Config, out: Option<&Path>) -> ExperimentManifest {
    let (s, t) = (&cfg.sizes, &cfg.tolerances);
    let mut rec = Recorder::new("E8", "discontinuity of ray landing on a parabolic arc", cfg.seed(), out);
    let dc = DiscontinuityConfig {
        offsets: s.e8_offsets.clone(),
        colanding_tolerance: t.e8_colanding,
        ..DiscontinuityConfig::default()
    };
    rec.input("config", &dc);
    rec.tolerance("jump_factor", t.e8_jump_factor);
    rec.tolerance("colanding", t.e8_colanding);

    match check_root_arc_relation(&angle(4, 9), &angle(5, 9), &angle(3, 7), &angle(4, 7), 2, 3) {
        Ok(ok) => rec.check("exact root-arc identity (3/7, 4/9, 5/9, 4/7)", ok, ok, "true"),
        Err(e) => rec.step_failed("exact root-arc identity (3/7, 4/9, 5/9, 4/7)", e),
    }
    match discontinuity_experiment(&dc) {
        Ok(r) => {
            rec.check_detail(
                "4/9 lands alone at the arc point",
                r.lands_alone,
                r.lands_alone,
                "true",
                format!("c* = {}, landing {}", r.c_star, r.landing_star),
            );
            for o in &r.offsets {
                let need = t.e8_jump_factor * o.offset;
                for (label, sample, jump) in [
                    ("5/9", &o.c_prime, o.jump1),
                    ("3/7", &o.c_double_prime, o.jump2),
                ] {
                    let name = format!("offset {:e}: jump toward the {label}-coland", o.offset);
                    match (sample, jump) {
                        (Some(w), Some(j)) => {
                            rec.check_detail(&name, j >= need, j, format!(">= {need:e}"), format!("c = {}", w.c));
                            rec.check(
                                &format!("offset {:e}: 4/9 and {label} co-land", o.offset),
                                w.colanding_error <= t.e8_colanding,
                                w.colanding_error,
                                format!("<= {:e}", t.e8_colanding),
                            );
                        }
                        _ => rec.step_failed(&name, "no wake parameter found"),
                    }
                }
            }
            rec.json_artifact("report.json", &r);
        }
        Err(e) => rec.step_failed("discontinuity experiment", e),
    }
    rec.finish(Some(cfg.budgets.e8))
}
