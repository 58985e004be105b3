//! Hyperbolic components of the multicorn: centres, boundary samples, cusps,
//! parameter-space symmetries and the `μ z̄ + z̄²` family.

use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angles::multicorn_count;
use crate::dynamics::{
    cycle_multiplier, exact_period, find_cycles, CycleRecord, MapParams, ReturnMap, SolveConfig,
};
use crate::series::HolomorphicMap;
use crate::solve::{gauss_newton, newton_real, polynomial_roots, NewtonOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AtlasError {
    #[error("λ-coordinate undefined at c = 0")]
    ZeroParameter,
    #[error("cusps exist only for odd periods, got {0}")]
    EvenPeriod(usize),
    #[error(transparent)]
    Dynamics(#[from] crate::dynamics::DynamicsError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Odd,
    Even,
}

impl Parity {
    pub fn of(k: usize) -> Self {
        if k % 2 == 1 {
            Parity::Odd
        } else {
            Parity::Even
        }
    }
}

/// A hyperbolic component of the multicorn.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentRecord {
    pub degree: u32,
    pub period: usize,
    pub center: Complex64,
    pub parity: Parity,
    pub symmetry_class: usize,
    pub boundary_samples: Vec<Complex64>,
    pub cusps: Vec<Complex64>,
}

impl ComponentRecord {
    pub fn new(degree: u32, period: usize, center: Complex64) -> Self {
        Self {
            degree,
            period,
            center,
            parity: Parity::of(period),
            symmetry_class: 0,
            boundary_samples: Vec::new(),
            cusps: Vec::new(),
        }
    }
}

/// `ω^j c` for `j = 0..=d`.
pub fn symmetry_orbit(c: Complex64, d: u32) -> Vec<Complex64> {
    let w = MapParams::omega(d);
    (0..=d).map(|j| w.powu(j) * c).collect()
}

/// `λ = d·c̄^d / c`, invariant under the rotation symmetry.
pub fn to_lambda(c: Complex64, d: u32) -> Result<Complex64, AtlasError> {
    if c.norm() == 0.0 {
        return Err(AtlasError::ZeroParameter);
    }
    Ok(d as f64 * c.conj().powu(d) / c)
}

/// Radius `d^{−1/(d−1)}` of the indifferent fixed point on the period-1
/// boundary.
pub fn period1_radius(d: u32) -> f64 {
    (d as f64).powf(-1.0 / (d as f64 - 1.0))
}

/// `c(θ) = r e^{iθ} − r^d e^{−idθ}`: the parameter with an indifferent fixed
/// point `r e^{iθ}`.
pub fn period1_boundary(d: u32, theta: f64) -> Complex64 {
    let r = period1_radius(d);
    Complex64::from_polar(r, theta) - Complex64::from_polar(r.powi(d as i32), -(d as f64) * theta)
}

/// Angles `θ` where the period-1 boundary has its cusps:
/// `e^{i(d+1)θ} = −1`.
pub fn period1_cusp_angles(d: u32) -> Vec<f64> {
    (0..=d)
        .map(|j| std::f64::consts::PI * (2 * j + 1) as f64 / (d as f64 + 1.0))
        .collect()
}

/// Settings for centre enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CenterConfig {
    pub seeds_per_batch: usize,
    pub max_batches: usize,
    pub dedup_radius: f64,
    pub residual_tolerance: f64,
    /// Also seed Newton from rotated and conjugated copies of found centres.
    pub use_symmetry: bool,
    pub seed: u64,
}

impl Default for CenterConfig {
    fn default() -> Self {
        Self {
            seeds_per_batch: 4000,
            max_batches: 25,
            dedup_radius: 1e-8,
            residual_tolerance: 1e-10,
            use_symmetry: true,
            seed: 0x5eed,
        }
    }
}

/// Output of [`find_centers`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CenterSearch {
    pub centers: Vec<Complex64>,
    pub expected: usize,
    /// Set when the number found differs from the expected count.
    pub warning: Option<String>,
}

fn critical_return(d: u32, k: usize, c: Complex64) -> Option<Complex64> {
    let p = MapParams { degree: d, c };
    let mut z = Complex64::new(0.0, 0.0);
    for _ in 0..k {
        z = p.step(z);
        if z.norm() > 1e8 {
            return None;
        }
    }
    Some(z)
}

fn polish_center(d: u32, k: usize, seed: Complex64, cfg: &CenterConfig) -> Option<Complex64> {
    let f = |x: &[f64; 2]| critical_return(d, k, Complex64::new(x[0], x[1])).map(|z| [z.re, z.im]);
    let sol = newton_real(
        f,
        [seed.re, seed.im],
        NewtonOptions {
            max_iterations: 80,
            residual_tolerance: 1e-15,
            ..Default::default()
        },
    )?;
    if sol.residual > cfg.residual_tolerance {
        return None;
    }
    let c = Complex64::new(sol.x[0], sol.x[1]);
    // Discard centres whose critical orbit closes early.
    let p = MapParams { degree: d, c };
    let mut z = Complex64::new(0.0, 0.0);
    for j in 1..k {
        z = p.step(z);
        if k.is_multiple_of(j) && z.norm() < 10.0 * cfg.dedup_radius {
            return None;
        }
    }
    Some(c)
}

fn dedup_points(mut pts: Vec<Complex64>, radius: f64) -> Vec<Complex64> {
    pts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut out: Vec<Complex64> = Vec::new();
    for p in pts {
        if !out.iter().any(|q| (q - p).norm() < radius) {
            out.push(p);
        }
    }
    out
}

/// Centres of all period-`k` hyperbolic components, found by multistart
/// two-dimensional real Newton on `f_c^k(0) = 0`.
pub fn find_centers(d: u32, k: usize, cfg: &CenterConfig) -> CenterSearch {
    let expected = multicorn_count(d, k as u32).to_usize().unwrap_or(usize::MAX);
    let seed_radius = 2f64.powf(1.0 / (d as f64 - 1.0)) + 0.5;
    let mut found: Vec<Complex64> = Vec::new();
    for batch in 0..cfg.max_batches {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(batch as u64));
        let seeds: Vec<Complex64> = (0..cfg.seeds_per_batch)
            .map(|_| {
                let r = seed_radius * rng.random::<f64>().sqrt();
                Complex64::from_polar(r, rng.random::<f64>() * std::f64::consts::TAU)
            })
            .collect();
        let mut candidates: Vec<Complex64> = seeds
            .par_iter()
            .filter_map(|s| polish_center(d, k, *s, cfg))
            .collect();
        candidates.extend(found.iter().copied());
        found = dedup_points(candidates, cfg.dedup_radius);
        if cfg.use_symmetry {
            let images: Vec<Complex64> = found
                .iter()
                .flat_map(|c| {
                    let mut v = symmetry_orbit(*c, d);
                    v.extend(symmetry_orbit(c.conj(), d));
                    v
                })
                .collect();
            let mut polished: Vec<Complex64> = images
                .par_iter()
                .filter_map(|s| polish_center(d, k, *s, cfg))
                .collect();
            polished.extend(found.iter().copied());
            found = dedup_points(polished, cfg.dedup_radius);
        }
        if found.len() >= expected {
            break;
        }
    }
    let warning = (found.len() != expected).then(|| {
        format!(
            "found {} period-{k} centres, expected {expected} (budget exhausted)",
            found.len()
        )
    });
    CenterSearch {
        centers: found,
        expected,
        warning,
    }
}

/// Component records for a list of centres, with symmetry classes assigned
/// by orbit under the rotation `c ↦ ωc`.
pub fn component_records(d: u32, k: usize, centers: &[Complex64]) -> Vec<ComponentRecord> {
    let sector = std::f64::consts::TAU / (d as f64 + 1.0);
    let representative = |c: Complex64| {
        if c.norm() < 1e-12 {
            return Complex64::new(0.0, 0.0);
        }
        let a = c.arg().rem_euclid(std::f64::consts::TAU);
        let j = (a / sector).floor();
        c * Complex64::from_polar(1.0, -j * sector)
    };
    let mut reps: Vec<Complex64> = Vec::new();
    for c in centers {
        let r = representative(*c);
        if !reps.iter().any(|q| (q - r).norm() < 1e-6) {
            reps.push(r);
        }
    }
    reps.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    centers
        .iter()
        .map(|c| {
            let r = representative(*c);
            let class = reps
                .iter()
                .position(|q| (q - r).norm() < 1e-6)
                .expect("representative registered");
            ComponentRecord {
                symmetry_class: class,
                ..ComponentRecord::new(d, k, *c)
            }
        })
        .collect()
}

/// Settings for radial boundary sampling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryConfig {
    pub solve: SolveConfig,
    /// First radial step; doubled until the predicate fails.
    pub initial_step: f64,
    pub max_radius: f64,
    /// Bisection stops when the bracket is shorter than this.
    pub bisection_tolerance: f64,
    /// Points checked inside the bracket for star-shapedness.
    pub star_checks: usize,
    /// Accepted deviation of `|ρ|` from 1 after polishing.
    pub multiplier_tolerance: f64,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        Self {
            solve: SolveConfig::default(),
            initial_step: 1e-3,
            max_radius: 4.0,
            bisection_tolerance: 1e-11,
            star_checks: 6,
            multiplier_tolerance: 1e-6,
        }
    }
}

/// A polished point on the boundary of a hyperbolic component.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    /// Direction of the sampling ray from the centre, in radians.
    pub direction: f64,
    pub c: Complex64,
    /// A point of the indifferent cycle.
    pub z: Complex64,
    pub multiplier: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTrace {
    pub points: Vec<BoundaryPoint>,
    /// Skipped directions with the reason.
    pub failures: Vec<(f64, String)>,
}

impl BoundaryTrace {
    pub fn parameters(&self) -> Vec<Complex64> {
        self.points.iter().map(|p| p.c).collect()
    }
}

/// The attracting cycle of exact period `k`, if any.
pub fn attracting_cycle(d: u32, c: Complex64, k: usize, cfg: &SolveConfig) -> Option<CycleRecord> {
    let params = MapParams { degree: d, c };
    let res = find_cycles(&params, k, cfg).ok()?;
    res.cycles
        .into_iter()
        .filter(|cy| cy.return_multiplier.norm() < 1.0)
        .min_by(|a, b| a.return_multiplier.norm().total_cmp(&b.return_multiplier.norm()))
}

/// `(f^k(z) − z, λ)` along the orbit of `z`.
fn return_and_lambda(params: &MapParams, z: Complex64, k: usize) -> (Complex64, Complex64) {
    let mut w = z;
    let mut lambda = Complex64::new(1.0, 0.0);
    for _ in 0..k {
        lambda *= params.anti_derivative(w);
        w = params.step(w);
    }
    (w - z, lambda)
}

/// Polishes `(c, z)` onto `f_c^k(z) = z`, `|λ| = 1` with `c` constrained to
/// the ray `center + s·e^{iφ}`.
fn polish_radial(
    d: u32,
    k: usize,
    center: Complex64,
    dir: Complex64,
    s: f64,
    z: Complex64,
) -> Option<(f64, Complex64)> {
    let f = |x: &[f64; 3]| {
        let params = MapParams {
            degree: d,
            c: center + dir * x[0],
        };
        let (r, l) = return_and_lambda(&params, Complex64::new(x[1], x[2]), k);
        r.re.is_finite().then_some([r.re, r.im, l.norm() - 1.0])
    };
    let sol = newton_real(
        f,
        [s, z.re, z.im],
        NewtonOptions {
            residual_tolerance: 1e-15,
            fd_step: 1e-8,
            ..Default::default()
        },
    )?;
    (sol.residual < 1e-10).then(|| (sol.x[0], Complex64::new(sol.x[1], sol.x[2])))
}

/// Boundary point in one direction from the centre.
pub fn sample_direction(
    component: &ComponentRecord,
    phi: f64,
    cfg: &BoundaryConfig,
) -> Result<BoundaryPoint, String> {
    let d = component.degree;
    let k = component.period;
    let dir = Complex64::from_polar(1.0, phi);
    let at = |s: f64| attracting_cycle(d, component.center + dir * s, k, &cfg.solve);

    let mut s_in = 0.0;
    let mut s = cfg.initial_step;
    while at(s).is_some() {
        s_in = s;
        s *= 2.0;
        if s > cfg.max_radius {
            return Err("no exit before the maximal radius".into());
        }
    }
    if s_in == 0.0 {
        // Component smaller than the first step.
        let mut t = cfg.initial_step;
        loop {
            t /= 8.0;
            if t < 1e-12 {
                return Err("no attracting cycle near the centre".into());
            }
            if at(t).is_some() {
                s_in = t;
                s = 8.0 * t;
                break;
            }
        }
    }
    let mut s_out = s;
    while s_out - s_in > cfg.bisection_tolerance * s_out.max(1e-3) {
        let mid = 0.5 * (s_in + s_out);
        if at(mid).is_some() {
            s_in = mid;
        } else {
            s_out = mid;
        }
    }
    for j in 1..=cfg.star_checks {
        let t = s_in * j as f64 / (cfg.star_checks + 1) as f64;
        if at(t).is_none() {
            return Err(format!("not star-shaped: no attracting cycle at radius {t:e}"));
        }
    }
    let cycle = at(s_in).ok_or("lost attracting cycle")?;
    let (s_b, z_b) = cycle
        .points
        .iter()
        .filter_map(|z| polish_radial(d, k, component.center, dir, s_in, *z)).find(|(sb, _)| (sb - s_in).abs() < 1e-6_f64.max(1e3 * cfg.bisection_tolerance))
        .ok_or("boundary polish failed")?;
    let c = component.center + dir * s_b;
    let params = MapParams { degree: d, c };
    let mut pts = Vec::with_capacity(k);
    let mut w = z_b;
    for _ in 0..k {
        pts.push(w);
        w = params.step(w);
    }
    let (_, rho) = cycle_multiplier(&params, &pts).map_err(|e| e.to_string())?;
    if (rho.norm() - 1.0).abs() > cfg.multiplier_tolerance {
        return Err(format!("multiplier modulus {} off the unit circle", rho.norm()));
    }
    Ok(BoundaryPoint {
        direction: phi,
        c,
        z: z_b,
        multiplier: rho,
    })
}

/// Re-polishes a boundary point onto the ray in direction `phi`, seeded from
/// a nearby boundary point.
pub fn repolish_boundary_point(
    component: &ComponentRecord,
    seed: &BoundaryPoint,
    phi: f64,
) -> Option<BoundaryPoint> {
    let d = component.degree;
    let k = component.period;
    let dir = Complex64::from_polar(1.0, phi);
    let s0 = (seed.c - component.center).norm();
    let (s, z) = polish_radial(d, k, component.center, dir, s0, seed.z)?;
    let c = component.center + dir * s;
    let params = MapParams { degree: d, c };
    let mut pts = Vec::with_capacity(k);
    let mut w = z;
    for _ in 0..k {
        pts.push(w);
        w = params.step(w);
    }
    let (_, rho) = cycle_multiplier(&params, &pts).ok()?;
    Some(BoundaryPoint {
        direction: phi,
        c,
        z,
        multiplier: rho,
    })
}

/// Boundary points in `n` equally spaced directions from the centre, by
/// radial bisection on "an attracting cycle of exact period k exists"
/// followed by Newton polishing onto `|ρ| = 1`.
pub fn boundary_trace(component: &ComponentRecord, n: usize, cfg: &BoundaryConfig) -> BoundaryTrace {
    let directions: Vec<f64> = (0..n)
        .map(|j| std::f64::consts::TAU * j as f64 / n as f64)
        .collect();
    boundary_trace_directions(component, &directions, cfg)
}

pub fn boundary_trace_directions(
    component: &ComponentRecord,
    directions: &[f64],
    cfg: &BoundaryConfig,
) -> BoundaryTrace {
    let results: Vec<(f64, Result<BoundaryPoint, String>)> = directions
        .par_iter()
        .map(|phi| (*phi, sample_direction(component, *phi, cfg)))
        .collect();
    let mut points = Vec::new();
    let mut failures = Vec::new();
    for (phi, r) in results {
        match r {
            Ok(p) => points.push(p),
            Err(e) => failures.push((phi, e)),
        }
    }
    BoundaryTrace { points, failures }
}

/// Boundary samples ordered by direction.
pub fn boundary_sample(component: &ComponentRecord, n: usize, cfg: &BoundaryConfig) -> Vec<Complex64> {
    boundary_trace(component, n, cfg).parameters()
}

/// A parabolic cusp: a double-parabolic odd-period parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CuspRecord {
    pub c: Complex64,
    pub period: usize,
    pub parabolic_point: Complex64,
    /// `|F'(z0) − 1|` and `|F''(z0)|` for `F = f_c^{2k}`.
    pub normal_form_check: [f64; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CuspConfig {
    pub centers: CenterConfig,
    pub boundary: BoundaryConfig,
    /// Directions sampled per component to seed the cusp solver.
    pub directions: usize,
    pub dedup_radius: f64,
    pub residual_tolerance: f64,
}

impl Default for CuspConfig {
    fn default() -> Self {
        Self {
            centers: CenterConfig::default(),
            boundary: BoundaryConfig::default(),
            directions: 96,
            dedup_radius: 1e-7,
            residual_tolerance: 1e-10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CuspSearch {
    pub cusps: Vec<CuspRecord>,
    pub expected: usize,
    pub warning: Option<String>,
}

/// Residuals of `F(z) − z`, `F'(z) − 1`, `F''(z)` for `F = f_c^{2k}`.
pub fn cusp_residual(d: u32, k: usize, c: Complex64, z: Complex64) -> [Complex64; 3] {
    let [f0, f1, f2] = ReturnMap::new(MapParams { degree: d, c }, k).jet2(z);
    [f0 - z, f1 - 1.0, f2]
}

/// Solves the cusp system from a seed `(c, z)` and validates the solution.
pub fn refine_cusp(
    d: u32,
    k: usize,
    c: Complex64,
    z: Complex64,
    residual_tolerance: f64,
) -> Option<CuspRecord> {
    let f = |x: &[f64; 4]| {
        let r = cusp_residual(d, k, Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3]));
        let v = [r[0].re, r[0].im, r[1].re, r[1].im, r[2].re, r[2].im];
        v.iter().all(|a| a.is_finite()).then_some(v)
    };
    let sol = gauss_newton::<6, 4, _>(
        f,
        [c.re, c.im, z.re, z.im],
        NewtonOptions {
            max_iterations: 100,
            residual_tolerance: 1e-14,
            fd_step: 1e-7,
            ..Default::default()
        },
    )?;
    if sol.residual > residual_tolerance {
        return None;
    }
    let c = Complex64::new(sol.x[0], sol.x[1]);
    let z = Complex64::new(sol.x[2], sol.x[3]);
    let params = MapParams { degree: d, c };
    if exact_period(&params, z, 2 * k, 1e-6) != Some(k) {
        return None;
    }
    let t = ReturnMap::new(params, k).taylor(z, 3);
    // Exactly two petals: the cubic term must survive.
    if t[3].norm() < 1e-6 {
        return None;
    }
    Some(CuspRecord {
        c,
        period: k,
        parabolic_point: z,
        normal_form_check: [(t[1] - 1.0).norm(), 2.0 * t[2].norm()],
    })
}

/// Seeds for the cusp solver: boundary points where `|F''|` along the
/// traced boundary has a local minimum.
pub fn cusp_seeds(trace: &BoundaryTrace, d: u32, k: usize) -> Vec<(Complex64, Complex64)> {
    let n = trace.points.len();
    if n < 3 {
        return Vec::new();
    }
    let m: Vec<f64> = trace
        .points
        .iter()
        .map(|p| ReturnMap::new(MapParams { degree: d, c: p.c }, k).jet2(p.z)[2].norm())
        .collect();
    (0..n)
        .filter(|&i| m[i] <= m[(i + n - 1) % n] && m[i] <= m[(i + 1) % n])
        .map(|i| (trace.points[i].c, trace.points[i].z))
        .collect()
}

/// All parabolic cusps of odd period `k`.
pub fn find_cusps(d: u32, k: usize, cfg: &CuspConfig) -> Result<CuspSearch, AtlasError> {
    if k.is_multiple_of(2) {
        return Err(AtlasError::EvenPeriod(k));
    }
    let centers = find_centers(d, k, &cfg.centers);
    let expected = (d as usize + 1) * centers.expected;
    let components = component_records(d, k, &centers.centers);
    let mut cusps: Vec<CuspRecord> = Vec::new();
    for comp in &components {
        let trace = boundary_trace(comp, cfg.directions, &cfg.boundary);
        let found: Vec<CuspRecord> = cusp_seeds(&trace, d, k)
            .par_iter()
            .filter_map(|(c, z)| refine_cusp(d, k, *c, *z, cfg.residual_tolerance))
            .collect();
        for cr in found {
            if !cusps.iter().any(|q| (q.c - cr.c).norm() < cfg.dedup_radius) {
                cusps.push(cr);
            }
        }
    }
    cusps.sort_by(|a, b| a.c.re.total_cmp(&b.c.re).then(a.c.im.total_cmp(&b.c.im)));
    let mut warning = centers.warning;
    if cusps.len() != expected {
        warning = Some(format!("found {} cusps, expected {expected}", cusps.len()));
    }
    Ok(CuspSearch {
        cusps,
        expected,
        warning,
    })
}

/// Assigns to each component the cusps lying on its boundary (closest
/// boundary sample within `radius`).
pub fn cusps_of_component(trace: &BoundaryTrace, cusps: &[CuspRecord], radius: f64) -> Vec<Complex64> {
    cusps
        .iter()
        .filter(|cr| trace.points.iter().any(|p| (p.c - cr.c).norm() < radius))
        .map(|cr| cr.c)
        .collect()
}

/// Fixed points of `P_μ(z) = μ z̄ + z̄²`.
pub fn mu_fixed_points(mu: Complex64) -> Vec<Complex64> {
    // P∘P(z) = |μ|² z + (μ + μ̄²) z² + 2μ̄ z³ + z⁴.
    let mb = mu.conj();
    let coeffs = [
        Complex64::new(0.0, 0.0),
        Complex64::new(mu.norm_sqr() - 1.0, 0.0),
        mu + mb * mb,
        2.0 * mb,
        Complex64::new(1.0, 0.0),
    ];
    let p = |z: Complex64| mu * z.conj() + z.conj() * z.conj();
    polynomial_roots(&coeffs, 1e-14)
        .into_iter()
        .map(|z| if z.norm() < 1e-12 { Complex64::new(0.0, 0.0) } else { z })
        .filter(|z| (p(*z) - z).norm() < 1e-8 * z.norm().max(1.0))
        .collect()
}

/// Whether `P_μ` has a fixed point with `|∂P/∂z̄| ≤ 1 + tol`.
pub fn mu_has_nonrepelling_fixed_point(mu: Complex64, tol: f64) -> bool {
    mu_fixed_points(mu)
        .iter()
        .any(|z| (mu + 2.0 * z.conj()).norm() <= 1.0 + tol)
}

/// Fraction of grid parameters in the disk of the given radius around `μ0`
/// (a `samples × samples` grid on the enclosing square) having a
/// non-repelling fixed point.
pub fn mu_family_demo(mu0: Complex64, radius: f64, samples: usize) -> f64 {
    let grid: Vec<Complex64> = (0..samples)
        .flat_map(|i| (0..samples).map(move |j| (i, j)))
        .map(|(i, j)| {
            let t = |m: usize| {
                if samples == 1 {
                    0.0
                } else {
                    -radius + 2.0 * radius * m as f64 / (samples - 1) as f64
                }
            };
            mu0 + Complex64::new(t(i), t(j))
        })
        .filter(|m| (m - mu0).norm() <= radius * (1.0 + 1e-12))
        .collect();
    let good = grid
        .par_iter()
        .filter(|m| mu_has_nonrepelling_fixed_point(**m, 1e-9))
        .count();
    good as f64 / grid.len() as f64
}

/// Scans `n` equally spaced points of the unit circle and returns the first
/// one whose surrounding grid is entirely non-repelling, together with all
/// scanned fractions.
pub fn scan_mu_circle(n: usize, radius: f64, samples: usize) -> (Option<Complex64>, Vec<(f64, f64)>) {
    let fractions: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|j| {
            let t = std::f64::consts::TAU * j as f64 / n as f64;
            (t, mu_family_demo(Complex64::from_polar(1.0, t), radius, samples))
        })
        .collect();
    let pick = fractions
        .iter()
        .find(|(_, f)| *f >= 1.0)
        .map(|(t, _)| Complex64::from_polar(1.0, *t));
    (pick, fractions)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn period1_boundary_examples() {
        assert!((period1_boundary(2, 0.0) - c(0.25, 0.0)).norm() < 1e-15);
        assert!((period1_boundary(2, std::f64::consts::PI) - c(-0.75, 0.0)).norm() < 1e-15);
        let e = Complex64::from_polar(0.75, std::f64::consts::PI / 3.0);
        assert!((period1_boundary(2, std::f64::consts::PI / 3.0) - e).norm() < 1e-15);
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(to_lambda(c(1.0, 0.0), 2), Ok(c(2.0, 0.0)));
        assert_eq!(to_lambda(c(0.0, 0.0), 2), Err(AtlasError::ZeroParameter));
        let orbit = symmetry_orbit(c(-1.0, 0.0), 2);
        for e in [
            c(-1.0, 0.0),
            Complex64::from_polar(1.0, std::f64::consts::PI / 3.0),
            Complex64::from_polar(1.0, -std::f64::consts::PI / 3.0),
        ] {
            assert!(orbit.iter().any(|o| (o - e).norm() < 1e-14));
        }
    }

    #[test]
    fn small_period_centers() {
        let cfg = CenterConfig::default();
        let r = find_centers(2, 1, &cfg);
        assert_eq!(r.centers.len(), 1);
        assert!(r.centers[0].norm() < 1e-12);
        let r = find_centers(2, 2, &cfg);
        assert_eq!(r.centers.len(), 3);
        assert!(r.warning.is_none());
    }

    #[test]
    fn cusp_residual_at_minus_three_quarters() {
        let r = cusp_residual(2, 1, c(-0.75, 0.0), c(-0.5, 0.0));
        for v in r {
            assert!(v.norm() < 1e-14, "{r:?}");
        }
    }

    #[test]
    fn mu_fixed_points_solve_equation() {
        let mu = c(0.3, -1.1);
        let pts = mu_fixed_points(mu);
        assert!(pts.iter().any(|z| z.norm() < 1e-12));
        for z in pts {
            assert!((mu * z.conj() + z.conj() * z.conj() - z).norm() < 1e-10);
        }
    }
}
