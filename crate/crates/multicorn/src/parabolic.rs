//! Parabolic dynamics on odd-period boundaries: normal forms, Fatou
//! coordinates with the antiholomorphic normalisation, critical Ecalle
//! heights, holomorphic fixed-point indices, arc tracing and the numeric
//! bifurcation checks.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::atlas::{repolish_boundary_point, sample_direction, BoundaryConfig, BoundaryPoint, ComponentRecord};
use crate::dynamics::{
    cycle_from_point, exact_period, find_cycles, polish_periodic_point, return_fixed_points,
    CycleRecord, DynamicsError, MapParams, ReturnMap, SolveConfig,
};
use crate::series::{HolomorphicMap, Series};
use crate::solve::{newton_real, NewtonOptions};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParabolicError {
    #[error("not parabolic: |F(z0) − z0| = {fixed:e}, |F'(z0) − 1| = {derivative:e}")]
    NotParabolic { fixed: f64, derivative: f64 },
    #[error("parabolic point has more than two petals")]
    TooManyPetals,
    #[error("point is not in the attracting petal")]
    NotInPetal,
    #[error("Fatou coordinate did not converge (last change {0:e})")]
    NoConvergence(f64),
    #[error("a fixed point lies on the integration contour")]
    FixedPointOnContour,
    #[error("contour winds {found} times, expected multiplicity {expected}")]
    IsolationFailure { found: i64, expected: i64 },
    #[error("no parabolic cycle of period {0} at this parameter")]
    NoParabolicCycle(usize),
    #[error("could not locate the parameter: {0}")]
    LocateFailure(String),
    #[error("degenerate interpolation: {0}")]
    InterpolationDegeneracy(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// Maximal `|F(z0) − z0|` (relative) and `|F'(z0) − 1|` for a parabolic point.
pub const PARABOLIC_TOLERANCE: f64 = 1e-8;

/// Local data of `F(z0 + w) = z0 + w + b w^{q+1} + …`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalForm {
    pub z0: Complex64,
    pub petals: u32,
    pub b: Complex64,
    /// Holomorphic index of the normal form `w + w^{q+1} + α w^{2q+1}`,
    /// i.e. `α`.
    pub alpha: Complex64,
    /// Taylor coefficients of `F(z0 + w) − z0`.
    pub coefficients: Vec<Complex64>,
}

/// A parabolic periodic point of `f_c` with its normal form under
/// `F = f_c^{2k}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParabolicPointRecord {
    pub degree: u32,
    pub c: Complex64,
    pub period: usize,
    pub z0: Complex64,
    pub petals: u32,
    pub normal_form_b: Complex64,
    pub formal_invariant: Complex64,
    pub coefficients: Vec<Complex64>,
}

impl ParabolicPointRecord {
    pub fn return_map(&self) -> ReturnMap {
        ReturnMap::new(MapParams { degree: self.degree, c: self.c }, self.period)
    }

    pub fn normal_form(&self) -> NormalForm {
        NormalForm {
            z0: self.z0,
            petals: self.petals,
            b: self.normal_form_b,
            alpha: self.formal_invariant,
            coefficients: self.coefficients.clone(),
        }
    }
}

const TAYLOR_ORDER: usize = 8;

/// `−[w^q] 1 / (a_{q+1} + a_{q+2} w + …)`: the residue of `1/(w − F(w))`.
fn residue_index(t: &[Complex64], q: usize) -> Complex64 {
    let tail: Vec<Complex64> = t[q + 1..].to_vec();
    let s = Series::from_coeffs(tail, q);
    -s.recip().expect("leading coefficient is non-zero").coeff(q)
}

/// Polishes a parabolic fixed point of `map` and extracts its normal form.
pub fn normal_form_of<M: HolomorphicMap + ?Sized>(
    map: &M,
    z0: Complex64,
) -> Result<NormalForm, ParabolicError> {
    let mut z = z0;
    let t = map.taylor(z, 3);
    if (t[1] - ONE).norm() > 1e-3 {
        return Err(ParabolicError::NotParabolic {
            fixed: (t[0] - z).norm(),
            derivative: (t[1] - ONE).norm(),
        });
    }
    // One petal: F' = 1 at the double root; two petals: F'' = 0 at the triple root.
    for _ in 0..60 {
        let t = map.taylor(z, 3);
        let step = if t[2].norm() > 1e-7 * t[3].norm().max(1.0) {
            (t[1] - ONE) / (2.0 * t[2])
        } else if t[3].norm() > 0.0 {
            t[2] / (3.0 * t[3])
        } else {
            ZERO
        };
        if !step.re.is_finite() || step.norm() > 1e-2 {
            break;
        }
        z -= step;
        if step.norm() <= 1e-16 * z.norm().max(1.0) {
            break;
        }
    }
    let t = map.taylor(z, TAYLOR_ORDER);
    let fixed = (t[0] - z).norm() / z.norm().max(1.0);
    let derivative = (t[1] - ONE).norm();
    if !(fixed <= PARABOLIC_TOLERANCE && derivative <= PARABOLIC_TOLERANCE) {
        return Err(ParabolicError::NotParabolic { fixed, derivative });
    }
    let scale = t[3].norm().max(1.0);
    let q = if t[2].norm() > 1e-7 * scale {
        1
    } else if t[3].norm() > 1e-7 {
        2
    } else {
        return Err(ParabolicError::TooManyPetals);
    };
    let mut coefficients = t.clone();
    coefficients[0] = ZERO;
    Ok(NormalForm {
        z0: z,
        petals: q as u32,
        b: t[q + 1],
        alpha: residue_index(&t, q),
        coefficients,
    })
}

/// Normal form of `f_c^{2k}` at a parabolic point of odd period `k`.
pub fn normal_form(
    degree: u32,
    c: Complex64,
    k: usize,
    z0: Complex64,
) -> Result<ParabolicPointRecord, ParabolicError> {
    let params = MapParams::new(degree, c)?;
    let nf = normal_form_of(&ReturnMap::new(params, k), z0)?;
    Ok(ParabolicPointRecord {
        degree,
        c,
        period: k,
        z0: nf.z0,
        petals: nf.petals,
        normal_form_b: nf.b,
        formal_invariant: nf.alpha,
        coefficients: nf.coefficients,
    })
}

/// Settings for the Fatou coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FatouConfig {
    /// Largest iteration depth tried before giving up.
    pub iterations_to_petal: usize,
    /// Initial iteration depth; doubled until the value stabilises.
    pub telescope_depth: usize,
    /// Apply the logarithmic (and `1/u`) corrections.
    pub log_correction: bool,
    /// Accepted change between successive depths, relative to `max(1, |ψ|)`.
    pub tolerance: f64,
}

impl Default for FatouConfig {
    fn default() -> Self {
        Self {
            iterations_to_petal: 2_560_000,
            telescope_depth: 10_000,
            log_correction: true,
            tolerance: 1e-9,
        }
    }
}

impl FatouConfig {
    pub fn validate(&self) -> Result<(), ParabolicError> {
        if self.telescope_depth == 0 || self.iterations_to_petal < self.telescope_depth {
            return Err(ParabolicError::InvalidConfig(
                "depths must be positive with iterations_to_petal ≥ telescope_depth".into(),
            ));
        }
        if !(self.tolerance > 0.0) {
            return Err(ParabolicError::InvalidConfig("tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Asymptotic expansion `ψ ≈ u − A log u + B₁/u` in `u = −1/(q b w^q)`.
#[derive(Clone, Copy, Debug)]
struct FatouExpansion {
    q: u32,
    b: Complex64,
    log_coeff: Complex64,
    inv_coeff: Complex64,
}

impl FatouExpansion {
    fn new(nf: &NormalForm) -> Self {
        let q = nf.petals;
        let qf = q as f64;
        let log_coeff = (Complex64::new((qf + 1.0) / 2.0, 0.0) - nf.alpha) / qf;
        let inv_coeff = if q == 1 {
            let a2 = nf.coefficients[2];
            let a = nf.coefficients[3] / (a2 * a2);
            let e = nf.coefficients[4] / (a2 * a2 * a2);
            let big_a = ONE - a;
            let big_b = ONE + e - 2.0 * a;
            big_b - big_a * big_a + big_a / 2.0
        } else {
            ZERO
        };
        Self {
            q,
            b: nf.b,
            log_coeff,
            inv_coeff,
        }
    }

    fn u(&self, w: Complex64) -> Complex64 {
        -(self.q as f64 * self.b * w.powu(self.q)).inv()
    }

    fn psi(&self, w: Complex64, n: usize, corrected: bool) -> Complex64 {
        let u = self.u(w);
        let mut psi = u - n as f64;
        if corrected {
            psi += -self.log_coeff * u.ln() + self.inv_coeff / u;
        }
        psi
    }
}

/// Order of the local expansion used once an orbit is close to `z0`.
const LOCAL_ORDER: usize = 20;

/// Orbit of a point under `F`, tracked in the Fatou variable once it is
/// close to the parabolic point.
///
/// Far from `z0` the displacement `w = z − z0` is iterated. For one petal,
/// once `|w|` is inside the validity radius of the local Taylor polynomial,
/// the bounded offset `v = u − n` is iterated instead, with the increment
/// `u(F) − u − 1` evaluated without cancellation; this keeps the rounding
/// error linear in the depth.
struct PetalOrbit<'a, M: HolomorphicMap + ?Sized> {
    map: &'a M,
    z0: Complex64,
    b: Complex64,
    /// Taylor coefficients of `F(z0 + w) − z0 − w − b w²`.
    rest: Vec<Complex64>,
    switch_radius: f64,
    w: Complex64,
    v: Option<Complex64>,
    n: usize,
}

impl<'a, M: HolomorphicMap + ?Sized> PetalOrbit<'a, M> {
    fn new(map: &'a M, nf: &NormalForm, z: Complex64) -> Self {
        let mut rest = Vec::new();
        let mut switch_radius = 0.0;
        if nf.petals == 1 {
            let t = map.taylor(nf.z0, LOCAL_ORDER);
            let bn = nf.b.norm();
            switch_radius = (3..=LOCAL_ORDER)
                .map(|j| (bn / t[j].norm()).powf(1.0 / (j - 2) as f64))
                .fold(1.0, f64::min)
                * 0.25;
            // The point is parabolic by hypothesis; keeping the rounding-level
            // defects of F(z0) − z0 and F'(z0) − 1 would add a drift growing
            // like n³ to the orbit in the Fatou variable.
            rest = t;
            rest[0] = ZERO;
            rest[1] = ZERO;
            rest[2] = ZERO;
        }
        Self {
            map,
            z0: nf.z0,
            b: nf.b,
            rest,
            switch_radius,
            w: z - nf.z0,
            v: None,
            n: 0,
        }
    }

    fn u(&self) -> Complex64 {
        match self.v {
            Some(v) => v + self.n as f64,
            None => -(self.b * self.w).inv(),
        }
    }

    fn step(&mut self) -> Result<(), ParabolicError> {
        match self.v {
            None => {
                self.w = self.map.displacement(self.z0, self.w);
                self.n += 1;
                if !self.w.re.is_finite() || !self.w.im.is_finite() {
                    return Err(ParabolicError::NotInPetal);
                }
                if self.w.norm() < self.switch_radius {
                    self.v = Some(self.u() - self.n as f64);
                }
            }
            Some(v) => {
                let u = v + self.n as f64;
                let w = -(self.b * u).inv();
                let r2 = self.rest.iter().rev().fold(ZERO, |acc, a| acc * w + a);
                let r = r2 + self.b * w * w;
                let delta = w + r;
                let inc = (r2 - self.b * w * r) / (self.b * w * delta);
                if !inc.re.is_finite() || !inc.im.is_finite() {
                    return Err(ParabolicError::NotInPetal);
                }
                self.v = Some(v + inc);
                self.n += 1;
            }
        }
        Ok(())
    }

    /// `ψ` at the current depth.
    fn psi(&self, exp: &FatouExpansion, corrected: bool) -> Complex64 {
        let u = self.u();
        let mut psi = match self.v {
            Some(v) => v,
            None => u - self.n as f64,
        };
        if corrected {
            psi += -exp.log_coeff * u.ln() + exp.inv_coeff / u;
        }
        psi
    }
}

/// Fatou coordinate `ψ` of `map` at `z` for the attracting petal at the
/// parabolic point described by `nf`, normalised so that `ψ ∘ F = ψ + 1`.
pub fn fatou_coordinate_of<M: HolomorphicMap + ?Sized>(
    map: &M,
    nf: &NormalForm,
    z: Complex64,
    cfg: &FatouConfig,
) -> Result<Complex64, ParabolicError> {
    cfg.validate()?;
    let exp = FatouExpansion::new(nf);
    let mut orbit = PetalOrbit::new(map, nf, z);
    let mut target = cfg.telescope_depth;
    let mut prev_raw: Option<Complex64> = None;
    let mut prev: Option<Complex64> = None;
    let mut last_change = f64::INFINITY;
    while target <= cfg.iterations_to_petal {
        while orbit.n < target {
            orbit.step()?;
        }
        // Inside the petal the orbit advances by one unit per step in u.
        let u = if nf.petals == 1 { orbit.u() } else { exp.u(orbit.w) };
        if !((u / orbit.n as f64 - 1.0).norm() < 0.5) {
            return Err(ParabolicError::NotInPetal);
        }
        let raw = if nf.petals == 1 {
            orbit.psi(&exp, cfg.log_correction)
        } else {
            exp.psi(orbit.w, orbit.n, cfg.log_correction)
        };
        // The truncation error of the corrected expansion decays like 1/n².
        let richardson = cfg.log_correction && nf.petals == 1;
        let psi = if richardson {
            prev_raw.map(|p| (4.0 * raw - p) / 3.0)
        } else {
            Some(raw)
        };
        if let (Some(p), Some(x)) = (prev, psi) {
            last_change = (x - p).norm();
            if last_change < cfg.tolerance * x.norm().max(1.0) {
                return Ok(x);
            }
        }
        prev = psi;
        prev_raw = Some(raw);
        target *= 2;
    }
    Err(ParabolicError::NoConvergence(last_change))
}

/// Fatou coordinate of `f_c^{2k}` at the recorded parabolic point.
pub fn fatou_coordinate(
    record: &ParabolicPointRecord,
    z: Complex64,
    cfg: &FatouConfig,
) -> Result<Complex64, ParabolicError> {
    fatou_coordinate_of(&record.return_map(), &record.normal_form(), z, cfg)
}

/// The parabolic cycle of exact period `k` at `c`, if there is one.
pub fn parabolic_cycle(degree: u32, c: Complex64, k: usize) -> Result<CycleRecord, ParabolicError> {
    let params = MapParams::new(degree, c)?;
    let res = find_cycles(&params, k, &SolveConfig::default())?;
    res.cycles
        .into_iter()
        .filter(|cy| (cy.return_multiplier - ONE).norm() < 1e-4)
        .min_by(|a, b| {
            (a.return_multiplier - ONE)
                .norm()
                .total_cmp(&(b.return_multiplier - ONE).norm())
        })
        .ok_or(ParabolicError::NoParabolicCycle(k))
}

/// Critical Ecalle height together with diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EcalleHeight {
    pub height: f64,
    /// `β = ψ(f^k(z)) − conj ψ(z) − 1/2` at the probe point; its real part
    /// vanishes for a consistent Fatou coordinate.
    pub beta: Complex64,
    pub record: ParabolicPointRecord,
    /// `ψ` at the critical value.
    pub psi_critical_value: Complex64,
}

/// The point of the parabolic cycle on the boundary of the Fatou component
/// containing the critical value.
pub fn characteristic_point(
    degree: u32,
    c: Complex64,
    k: usize,
) -> Result<ParabolicPointRecord, ParabolicError> {
    let cycle = parabolic_cycle(degree, c, k)?;
    let params = MapParams { degree, c };
    let map = ReturnMap::new(params, k);
    let mut w = c;
    for _ in 0..2000 {
        w = map.eval(w);
    }
    let z0 = cycle
        .points
        .iter()
        .copied()
        .min_by(|a, b| (a - w).norm().total_cmp(&(b - w).norm()))
        .ok_or(ParabolicError::NoParabolicCycle(k))?;
    let rec = normal_form(degree, c, k, z0)?;
    if rec.petals != 1 {
        return Err(ParabolicError::TooManyPetals);
    }
    Ok(rec)
}

/// Critical Ecalle height at a parameter on a parabolic arc, with the
/// antiholomorphic normalisation taken at `probe` (the critical value when
/// `None`).
pub fn ecalle_height_with_probe(
    degree: u32,
    c: Complex64,
    k: usize,
    probe: Option<Complex64>,
    cfg: &FatouConfig,
) -> Result<EcalleHeight, ParabolicError> {
    let record = characteristic_point(degree, c, k)?;
    let params = MapParams { degree, c };
    let psi_c = fatou_coordinate(&record, c, cfg)?;
    let z = probe.unwrap_or(c);
    let psi_z = if probe.is_some() { fatou_coordinate(&record, z, cfg)? } else { psi_c };
    let psi_fz = fatou_coordinate(&record, params.iterate(z, k), cfg)?;
    let beta = psi_fz - psi_z.conj() - 0.5;
    Ok(EcalleHeight {
        height: psi_c.im - beta.im / 2.0,
        beta,
        record,
        psi_critical_value: psi_c,
    })
}

/// Critical Ecalle height of `f_c` for `c` on a parabolic arc of odd period `k`.
pub fn critical_ecalle_height(
    degree: u32,
    c: Complex64,
    k: usize,
    cfg: &FatouConfig,
) -> Result<f64, ParabolicError> {
    ecalle_height_with_probe(degree, c, k, None, cfg).map(|e| e.height)
}

/// Result of a contour-integral index computation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexEstimate {
    pub index: Complex64,
    pub nodes: usize,
    /// Winding number of `z − F(z)` around the contour.
    pub winding: i64,
}

const INDEX_TOLERANCE: f64 = 1e-10;
const MAX_INDEX_NODES: usize = 1 << 20;

/// `(1/2πi) ∮ dz / (z − F(z))` over the circle `|z − center| = radius`, by
/// the trapezoidal rule with node doubling. No isolation check.
pub fn contour_index<M: HolomorphicMap + ?Sized>(
    map: &M,
    center: Complex64,
    radius: f64,
    nodes: usize,
) -> Result<IndexEstimate, ParabolicError> {
    let eval = |n: usize| -> Result<(Complex64, i64), ParabolicError> {
        let vals: Vec<(Complex64, Complex64)> = (0..n)
            .into_par_iter()
            .map(|j| {
                let w = Complex64::from_polar(radius, std::f64::consts::TAU * j as f64 / n as f64);
                (w, w - map.displacement(center, w))
            })
            .collect();
        let floor = 1e-13 * radius;
        if vals.iter().any(|(_, v)| !(v.norm() > floor) || !v.re.is_finite()) {
            return Err(ParabolicError::FixedPointOnContour);
        }
        let sum: Complex64 = vals.iter().map(|(w, v)| w / v).sum();
        let turn: f64 = (0..n)
            .map(|j| (vals[(j + 1) % n].1 / vals[j].1).arg())
            .sum();
        Ok((sum / n as f64, (turn / std::f64::consts::TAU).round() as i64))
    };
    let mut n = nodes.max(8);
    let (mut prev, _) = eval(n)?;
    loop {
        let m = 2 * n;
        let (cur, winding) = eval(m)?;
        if (cur - prev).norm() < INDEX_TOLERANCE || m >= MAX_INDEX_NODES {
            return Ok(IndexEstimate {
                index: cur,
                nodes: m,
                winding,
            });
        }
        prev = cur;
        n = m;
    }
}

/// Multiplicity of `z0` as a fixed point, read from the Taylor expansion.
fn fixed_point_multiplicity<M: HolomorphicMap + ?Sized>(map: &M, z0: Complex64) -> i64 {
    let t = map.taylor(z0, TAYLOR_ORDER);
    let scale = t.iter().map(|a| a.norm()).fold(1.0, f64::max);
    (1..=TAYLOR_ORDER)
        .find(|&j| {
            let a = if j == 1 { t[1] - ONE } else { t[j] };
            a.norm() > 1e-8 * scale
        })
        .unwrap_or(TAYLOR_ORDER + 1) as i64
}

/// Holomorphic fixed-point index of `map` at `z0`; the contour must enclose
/// no other fixed point, which is checked against the winding number.
pub fn fixed_point_index<M: HolomorphicMap + ?Sized>(
    map: &M,
    z0: Complex64,
    radius: f64,
    nodes: usize,
) -> Result<IndexEstimate, ParabolicError> {
    let est = contour_index(map, z0, radius, nodes)?;
    let expected = fixed_point_multiplicity(map, z0);
    if est.winding != expected {
        return Err(ParabolicError::IsolationFailure {
            found: est.winding,
            expected,
        });
    }
    Ok(est)
}

/// Contour radius for the index at a fixed point `z0` of `f_c^{2k}`: half
/// the distance to the nearest other fixed point, capped at `1e−2`.
pub fn index_radius(params: &MapParams, k: usize, z0: Complex64) -> f64 {
    let (roots, _) = return_fixed_points(params, k, &SolveConfig::default());
    let nearest = roots
        .iter()
        .map(|z| (z - z0).norm())
        .filter(|r| *r > 1e-6)
        .fold(f64::INFINITY, f64::min);
    (0.5 * nearest).min(1e-2)
}

/// Default quadrature node count.
pub const INDEX_NODES: usize = 1 << 12;

/// Index of `f_c^{2k}` at `z0` using the default radius and node count.
pub fn return_map_index(params: &MapParams, k: usize, z0: Complex64) -> Result<IndexEstimate, ParabolicError> {
    let r = index_radius(params, k, z0);
    fixed_point_index(&ReturnMap::new(*params, k), z0, r, INDEX_NODES)
}

/// Settings for arc tracing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcConfig {
    pub boundary: BoundaryConfig,
    pub fatou: FatouConfig,
    /// Samples closer than this to a cusp are dropped.
    pub cusp_guard: f64,
    /// Angular offset used to estimate the boundary tangent.
    pub normal_step: f64,
}

impl Default for ArcConfig {
    fn default() -> Self {
        Self {
            boundary: BoundaryConfig::default(),
            fatou: FatouConfig::default(),
            cusp_guard: 1e-3,
            normal_step: 1e-5,
        }
    }
}

/// A point on a parabolic arc.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcSample {
    pub c: Complex64,
    pub arc_id: usize,
    pub ecalle_height: f64,
    pub index: Complex64,
    /// Direction from the component centre, in radians.
    pub boundary_angle: f64,
    /// Characteristic parabolic point.
    pub parabolic_point: Complex64,
    /// Unit outward normal of the component boundary at `c`.
    pub outward_normal: Complex64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcTrace {
    pub arc_id: usize,
    pub start_cusp: Complex64,
    pub end_cusp: Complex64,
    pub samples: Vec<ArcSample>,
    /// Dropped directions with the reason.
    pub dropped: Vec<(f64, String)>,
    /// Positions where the Ecalle height fails to be monotone.
    pub non_monotone: Vec<usize>,
}

/// Cusps of a component ordered by direction from its centre.
pub fn ordered_cusps(component: &ComponentRecord) -> Vec<(f64, Complex64)> {
    let mut v: Vec<(f64, Complex64)> = component
        .cusps
        .iter()
        .map(|c| ((c - component.center).arg(), *c))
        .collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    v
}

fn annotate(
    component: &ComponentRecord,
    arc_id: usize,
    bp: &BoundaryPoint,
    cfg: &ArcConfig,
) -> Result<ArcSample, String> {
    let d = component.degree;
    let k = component.period;
    let eh = ecalle_height_with_probe(d, bp.c, k, None, &cfg.fatou).map_err(|e| e.to_string())?;
    let params = MapParams { degree: d, c: bp.c };
    let index = return_map_index(&params, k, eh.record.z0).map_err(|e| e.to_string())?;
    let ahead = repolish_boundary_point(component, bp, bp.direction + cfg.normal_step);
    let behind = repolish_boundary_point(component, bp, bp.direction - cfg.normal_step);
    let (a, b) = ahead.zip(behind).ok_or("tangent estimate failed")?;
    let tangent = a.c - b.c;
    let normal = -Complex64::i() * tangent / tangent.norm();
    Ok(ArcSample {
        c: bp.c,
        arc_id,
        ecalle_height: eh.height,
        index: index.index,
        boundary_angle: bp.direction,
        parabolic_point: eh.record.z0,
        outward_normal: normal,
    })
}

/// Samples the `arc_id`-th arc of an odd-period component (between
/// consecutive cusps, counter-clockwise about the centre), annotated with
/// Ecalle heights and indices. Directions cluster towards the cusps.
pub fn trace_arc(
    component: &ComponentRecord,
    arc_id: usize,
    samples: usize,
    cfg: &ArcConfig,
) -> Result<ArcTrace, ParabolicError> {
    let cusps = ordered_cusps(component);
    if cusps.len() < 2 {
        return Err(ParabolicError::InvalidConfig("component needs at least two cusps".into()));
    }
    if arc_id >= cusps.len() {
        return Err(ParabolicError::InvalidConfig(format!(
            "arc {arc_id} out of range (component has {} arcs)",
            cusps.len()
        )));
    }
    let (phi0, start) = cusps[arc_id];
    let (phi1, end) = cusps[(arc_id + 1) % cusps.len()];
    let span = (phi1 - phi0).rem_euclid(std::f64::consts::TAU);
    let directions: Vec<f64> = (0..samples)
        .map(|i| {
            // Distance to a cusp grows like the angle to the power 2/3, so
            // cluster cubically towards both ends.
            let t = (i + 1) as f64 / (samples + 1) as f64;
            let (a, b) = (t.powi(3), (1.0 - t).powi(3));
            phi0 + span * a / (a + b)
        })
        .collect();
    let results: Vec<(f64, Result<ArcSample, String>)> = directions
        .par_iter()
        .map(|&phi| {
            let r = sample_direction(component, phi, &cfg.boundary).and_then(|bp| {
                let near = component
                    .cusps
                    .iter()
                    .map(|q| (q - bp.c).norm())
                    .fold(f64::INFINITY, f64::min);
                if near < cfg.cusp_guard {
                    return Err(format!("within {near:e} of a cusp"));
                }
                annotate(component, arc_id, &bp, cfg)
            });
            (phi, r)
        })
        .collect();
    let mut out = Vec::new();
    let mut dropped = Vec::new();
    for (phi, r) in results {
        match r {
            Ok(s) => out.push(s),
            Err(e) => dropped.push((phi, e)),
        }
    }
    let non_monotone = monotonicity_breaks(&out);
    Ok(ArcTrace {
        arc_id,
        start_cusp: start,
        end_cusp: end,
        samples: out,
        dropped,
        non_monotone,
    })
}

/// Positions `i` where `h[i] → h[i+1]` runs against the overall trend.
pub fn monotonicity_breaks(samples: &[ArcSample]) -> Vec<usize> {
    if samples.len() < 2 {
        return Vec::new();
    }
    let trend = (samples[samples.len() - 1].ecalle_height - samples[0].ecalle_height).signum();
    (0..samples.len() - 1)
        .filter(|&i| (samples[i + 1].ecalle_height - samples[i].ecalle_height) * trend <= 0.0)
        .collect()
}

/// Settings for [`bifurcation_test`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BifurcationConfig {
    /// Outward offsets tried, in increasing order.
    pub offsets: Vec<f64>,
    /// Newton seeds per radius around the parabolic point.
    pub seeds_per_radius: usize,
}

impl Default for BifurcationConfig {
    fn default() -> Self {
        Self {
            offsets: (0..7).map(|j| 1e-7 * 10f64.powf(j as f64 / 2.0)).collect(),
            seeds_per_radius: 8,
        }
    }
}

/// An attracting cycle of twice the arc period just outside the arc.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BifurcationEvidence {
    pub c: Complex64,
    pub offset: f64,
    pub cycle: CycleRecord,
}

/// Attracting exact-period-`2k` cycle of `f_c` near `z0`, if one is found.
pub fn attracting_doubled_cycle(
    degree: u32,
    c: Complex64,
    k: usize,
    z0: Complex64,
    scale: f64,
    seeds_per_radius: usize,
) -> Option<CycleRecord> {
    let params = MapParams { degree, c };
    for r in [0.5, 1.0, 2.0, 4.0] {
        for j in 0..seeds_per_radius {
            let seed = z0 + Complex64::from_polar(r * scale, std::f64::consts::TAU * j as f64 / seeds_per_radius as f64);
            let Some(z) = polish_periodic_point(&params, k, seed) else {
                continue;
            };
            if exact_period(&params, z, 2 * k, 1e-9) != Some(2 * k) {
                continue;
            }
            if let Ok(cy) = cycle_from_point(&params, z, 2 * k, 1e-6) {
                if cy.return_multiplier.norm() < 1.0 {
                    return Some(cy);
                }
            }
        }
    }
    None
}

/// Searches along the outward normal at an arc sample for a parameter with an
/// attracting cycle of exact period `2k`.
pub fn bifurcation_test(
    sample: &ArcSample,
    degree: u32,
    k: usize,
    cfg: &BifurcationConfig,
) -> Option<BifurcationEvidence> {
    let nf = normal_form(degree, sample.c, k, sample.parabolic_point).ok()?;
    let b = nf.normal_form_b.norm().max(1e-12);
    cfg.offsets.iter().find_map(|&eps| {
        let c = sample.c + eps * sample.outward_normal;
        attracting_doubled_cycle(degree, c, k, nf.z0, (eps / b).sqrt(), cfg.seeds_per_radius).map(|cycle| {
            BifurcationEvidence {
                c,
                offset: eps,
                cycle,
            }
        })
    })
}

/// Whether an attracting cycle of exact period `k` persists at `samples`
/// equally spaced points of the segment from `a` to `b`.
pub fn segment_stays_hyperbolic(degree: u32, k: usize, a: Complex64, b: Complex64, samples: usize) -> bool {
    let cfg = SolveConfig::default();
    (0..=samples).into_par_iter().all(|j| {
        let c = a + (b - a) * (j as f64 / samples as f64);
        crate::atlas::attracting_cycle(degree, c, k, &cfg).is_some()
    })
}

/// `F(z) = φ(z̄)` for a holomorphic polynomial `φ`.
#[derive(Clone, Debug)]
pub struct AntiPolynomial {
    /// Ascending coefficients of `φ`.
    pub coeffs: Vec<Complex64>,
}

impl AntiPolynomial {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let w = z.conj();
        self.coeffs.iter().rev().fold(ZERO, |acc, a| acc * w + a)
    }

    /// `φ'(z̄)`, the `∂/∂z̄` derivative.
    pub fn anti_derivative(&self, z: Complex64) -> Complex64 {
        let w = z.conj();
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(ZERO, |acc, (m, a)| acc * w + m as f64 * a)
    }

    /// `F^n(z)` and its holomorphic derivative (`n` even).
    pub fn iterate_with_derivative(&self, z: Complex64, n: usize) -> (Complex64, Complex64) {
        // (a, b) = (∂/∂z, ∂/∂z̄) of the iterate.
        let mut a = ONE;
        let mut b = ZERO;
        let mut w = z;
        for _ in 0..n {
            let fp = self.anti_derivative(w);
            (a, b) = (fp * b.conj(), fp * a.conj());
            w = self.eval(w);
        }
        (w, a)
    }

    /// Return multiplier of an even-length cycle through `z`.
    pub fn cycle_multiplier(&self, z: Complex64, n: usize) -> Complex64 {
        self.iterate_with_derivative(z, n).1
    }
}

/// Settings for [`even_bifurcation_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvenBifurcationConfig {
    pub degree: u32,
    /// Even period `2k` of the indifferent cycle.
    pub period: usize,
    pub p: u32,
    pub q: u32,
    /// Newton seed for the parameter.
    pub c_seed: Complex64,
    /// Negative perturbation sizes for the slope fit.
    pub epsilons: Vec<f64>,
    pub disk_radius: f64,
    /// Grid points per side of the disk search.
    pub grid: usize,
}

impl Default for EvenBifurcationConfig {
    fn default() -> Self {
        Self {
            degree: 2,
            period: 2,
            p: 1,
            q: 3,
            c_seed: Complex64::new(-1.0, 0.0) + Complex64::from_polar(0.25, std::f64::consts::FRAC_PI_3),
            epsilons: vec![-1e-4, -1e-5, -1e-6],
            disk_radius: 1e-2,
            grid: 41,
        }
    }
}

/// Outcome of [`even_bifurcation_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvenBifurcationReport {
    pub c0: Complex64,
    pub cycle: Vec<Complex64>,
    pub multiplier: Complex64,
    /// `(ε, ρ_ε / ((1 − ε) ρ₀))` for the original cycle.
    pub perturbed_ratio: Vec<(f64, Complex64)>,
    /// `(ε, ρ̃_ε)` for the bifurcating cycle.
    pub slope_samples: Vec<(f64, Complex64)>,
    pub fitted_slope: Complex64,
    pub expected_slope: f64,
    /// Parameters in the disk with an attracting cycle of period `2kq`.
    pub attracting_parameters: Vec<Complex64>,
    pub grid_points: usize,
}

fn even_cycle_residual(d: u32, c: Complex64, z: Complex64, n: usize, target: Complex64) -> Option<[f64; 4]> {
    let params = MapParams { degree: d, c };
    let mut w = z;
    let mut derivs = Vec::with_capacity(n);
    for _ in 0..n {
        derivs.push(params.anti_derivative(w));
        w = params.step(w);
    }
    let rho: Complex64 = (0..n / 2).map(|j| derivs[2 * j + 1] * derivs[2 * j].conj()).product();
    let e1 = w - z;
    let e2 = rho - target;
    let v = [e1.re, e1.im, e2.re, e2.im];
    v.iter().all(|a| a.is_finite()).then_some(v)
}

/// Parameter near `c_seed` with an exact-period-`n` cycle of multiplier
/// `e^{2πip/q}`, with one point of that cycle.
pub fn locate_even_indifferent(
    cfg: &EvenBifurcationConfig,
) -> Result<(Complex64, Complex64), ParabolicError> {
    let d = cfg.degree;
    let n = cfg.period;
    if !n.is_multiple_of(2) || n == 0 {
        return Err(ParabolicError::InvalidConfig("period must be even".into()));
    }
    let target = Complex64::from_polar(1.0, std::f64::consts::TAU * cfg.p as f64 / cfg.q as f64);
    let params = MapParams::new(d, cfg.c_seed)?;
    let seed_cycle = find_cycles(&params, n, &SolveConfig::default())?
        .cycles
        .into_iter()
        .min_by(|a, b| {
            (a.return_multiplier - target)
                .norm()
                .total_cmp(&(b.return_multiplier - target).norm())
        })
        .ok_or_else(|| ParabolicError::LocateFailure("no seed cycle".into()))?;
    let z = seed_cycle.points[0];
    let sol = newton_real(
        |x: &[f64; 4]| even_cycle_residual(d, Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3]), n, target),
        [cfg.c_seed.re, cfg.c_seed.im, z.re, z.im],
        NewtonOptions {
            max_iterations: 100,
            residual_tolerance: 1e-15,
            ..Default::default()
        },
    )
    .ok_or_else(|| ParabolicError::LocateFailure("Newton diverged".into()))?;
    if sol.residual > 1e-11 {
        return Err(ParabolicError::LocateFailure(format!("residual {:e}", sol.residual)));
    }
    let c0 = Complex64::new(sol.x[0], sol.x[1]);
    let z0 = Complex64::new(sol.x[2], sol.x[3]);
    let p0 = MapParams { degree: d, c: c0 };
    if exact_period(&p0, z0, n, 1e-9) != Some(n) {
        return Err(ParabolicError::LocateFailure("cycle collapsed to a lower period".into()));
    }
    Ok((c0, z0))
}

/// Coefficients of `h(w) = w^d Σ_{m<2n} p_m w^m` with `h(w_j) = 0`,
/// `h'(w_j) = 0` for `j ≠ 1` and `h'(w_1) = −φ'(w_1)`, where `w_j = z̄_j`.
pub fn hermite_perturbation(d: u32, cycle: &[Complex64]) -> Result<Vec<Complex64>, ParabolicError> {
    let n = cycle.len();
    for i in 0..n {
        for j in 0..i {
            if (cycle[i] - cycle[j]).norm() < 1e-10 {
                return Err(ParabolicError::InterpolationDegeneracy("cycle points collide".into()));
            }
        }
    }
    let unknowns = 2 * n;
    let mut a = DMatrix::<Complex64>::zeros(unknowns, unknowns);
    let mut rhs = DVector::<Complex64>::zeros(unknowns);
    for (j, z) in cycle.iter().enumerate() {
        let w = z.conj();
        for m in 0..unknowns {
            let e = d + m as u32;
            a[(2 * j, m)] = w.powu(e);
            a[(2 * j + 1, m)] = e as f64 * w.powu(e - 1);
        }
        if j == 1 {
            rhs[2 * j + 1] = -(d as f64) * w.powu(d - 1);
        }
    }
    let sol = a
        .lu()
        .solve(&rhs)
        .ok_or_else(|| ParabolicError::InterpolationDegeneracy("singular system".into()))?;
    let mut coeffs = vec![ZERO; d as usize + unknowns];
    for m in 0..unknowns {
        coeffs[d as usize + m] = sol[m];
    }
    Ok(coeffs)
}

/// `φ_ε(w) = w^d + c + ε h(w)`.
fn perturbed_family(d: u32, c: Complex64, h: &[Complex64], eps: f64) -> AntiPolynomial {
    let len = h.len().max(d as usize + 1);
    let mut coeffs = vec![ZERO; len];
    for (m, a) in h.iter().enumerate() {
        coeffs[m] += eps * a;
    }
    coeffs[0] += c;
    coeffs[d as usize] += ONE;
    AntiPolynomial { coeffs }
}

/// Numeric check of the even-period bifurcation: locate `c0`, perturb by
/// the Hermite family and fit the multiplier of the bifurcating cycle, then
/// search a disk around `c0` for attracting cycles of period `2kq`.
pub fn even_bifurcation_check(cfg: &EvenBifurcationConfig) -> Result<EvenBifurcationReport, ParabolicError> {
    let d = cfg.degree;
    let n = cfg.period;
    let q = cfg.q as usize;
    let (c0, z0) = locate_even_indifferent(cfg)?;
    let params = MapParams { degree: d, c: c0 };
    let mut cycle = Vec::with_capacity(n);
    let mut w = z0;
    for _ in 0..n {
        cycle.push(w);
        w = params.step(w);
    }
    let h = hermite_perturbation(d, &cycle)?;
    let base = perturbed_family(d, c0, &h, 0.0);
    let rho0 = base.cycle_multiplier(z0, n);

    let perturbed_ratio = cfg
        .epsilons
        .iter()
        .map(|&e| (e, perturbed_family(d, c0, &h, e).cycle_multiplier(z0, n) / ((1.0 - e) * rho0)))
        .collect();

    // First non-linear term of f^{nq} at z0 sets the size of the new cycle.
    let tq = ReturnMap::new(params, n * q / 2).taylor(z0, q + 1);
    let b = tq[q + 1];
    let mut slope_samples = Vec::new();
    for &eps in &cfg.epsilons {
        let fam = perturbed_family(d, c0, &h, eps);
        let root = (q as f64 * eps / b).powf(1.0 / q as f64);
        let found = (0..q).find_map(|j| {
            let omega = Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / q as f64);
            let mut z = z0 + root * omega;
            for _ in 0..80 {
                let (fz, dz) = fam.iterate_with_derivative(z, n * q);
                let step = (fz - z) / (dz - ONE);
                if !step.re.is_finite() {
                    return None;
                }
                z -= step;
                if step.norm() < 1e-16 * z.norm().max(1.0) {
                    break;
                }
            }
            let moved = (z - z0).norm();
            // Reject the original cycle and lower periods.
            let mut w = z;
            for m in 1..n * q {
                w = fam.eval(w);
                if (n * q).is_multiple_of(m) && (w - z).norm() < 1e-3 * moved {
                    return None;
                }
            }
            (moved > 0.1 * root.norm()).then(|| fam.cycle_multiplier(z, n * q))
        });
        if let Some(r) = found {
            slope_samples.push((eps, r));
        }
    }
    let num: Complex64 = slope_samples.iter().map(|(e, r)| (r - ONE) * *e).sum();
    let den: f64 = slope_samples.iter().map(|(e, _)| e * e).sum();
    let fitted_slope = if den > 0.0 { num / den } else { Complex64::new(f64::NAN, f64::NAN) };

    let g = cfg.grid.max(2);
    let grid: Vec<Complex64> = (0..g * g)
        .map(|i| {
            let x = -1.0 + 2.0 * (i % g) as f64 / (g - 1) as f64;
            let y = -1.0 + 2.0 * (i / g) as f64 / (g - 1) as f64;
            Complex64::new(x, y)
        })
        .filter(|p| p.norm() <= 1.0)
        .map(|p| c0 + cfg.disk_radius * p)
        .collect();
    let period = n * q;
    let attracting_parameters: Vec<Complex64> = grid
        .par_iter()
        .filter(|&&c| attracting_critical_cycle(d, c, period))
        .copied()
        .collect();

    Ok(EvenBifurcationReport {
        c0,
        cycle,
        multiplier: rho0,
        perturbed_ratio,
        slope_samples,
        fitted_slope,
        expected_slope: (q * q) as f64,
        attracting_parameters,
        grid_points: grid.len(),
    })
}

/// Whether the critical orbit of `f_c` is attracted to a cycle of exact
/// even period `n`.
pub fn attracting_critical_cycle(d: u32, c: Complex64, n: usize) -> bool {
    let params = MapParams { degree: d, c };
    let mut z = ZERO;
    for _ in 0..4000 {
        z = params.step(z);
        if z.norm() > 1e6 {
            return false;
        }
    }
    let Some(z) = polish_periodic_point(&params, n / 2, z) else {
        return false;
    };
    exact_period(&params, z, n, 1e-9) == Some(n)
        && cycle_from_point(&params, z, n, 1e-6).is_ok_and(|cy| cy.return_multiplier.norm() < 1.0)
}
