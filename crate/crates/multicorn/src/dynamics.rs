//! Evaluation and periodic orbits of `f_c(z) = conj(z)^d + c` and of its
//! holomorphic second iterate `P_{a,b}(z) = (z^d + a)^d + b`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::series::{HolomorphicMap, Series};
use crate::solve::{aberth, complex_newton, AberthOptions};

/// Largest polynomial degree handed to full simultaneous root extraction.
pub const MAX_FULL_DEGREE: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("degree must be at least 2, got {0}")]
    InvalidDegree(u32),
    #[error("parameter must be finite")]
    NonFiniteParameter,
    #[error("not a cycle: closing error {0:e} exceeds tolerance")]
    NotACycle(f64),
    #[error("empty cycle")]
    EmptyCycle,
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
}

/// Parameters of `f_c(z) = conj(z)^d + c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapParams {
    pub degree: u32,
    pub c: Complex64,
}

impl MapParams {
    pub fn new(degree: u32, c: Complex64) -> Result<Self, DynamicsError> {
        if degree < 2 {
            return Err(DynamicsError::InvalidDegree(degree));
        }
        if !c.re.is_finite() || !c.im.is_finite() {
            return Err(DynamicsError::NonFiniteParameter);
        }
        Ok(Self { degree, c })
    }

    /// Tricorn map `conj(z)^2 + c`.
    pub fn tricorn(c: Complex64) -> Self {
        Self { degree: 2, c }
    }

    #[inline]
    pub fn step(&self, z: Complex64) -> Complex64 {
        z.conj().powu(self.degree) + self.c
    }

    /// `∂f/∂z̄ = d·conj(z)^{d−1}`.
    #[inline]
    pub fn anti_derivative(&self, z: Complex64) -> Complex64 {
        self.degree as f64 * z.conj().powu(self.degree - 1)
    }

    /// `f^n(z)` without overflow checks.
    pub fn iterate(&self, z: Complex64, n: usize) -> Complex64 {
        (0..n).fold(z, |w, _| self.step(w))
    }

    /// Default escape radius `max(2, |c|^{1/(d−1)} + 1)`.
    pub fn escape_radius(&self) -> f64 {
        let d = self.degree as f64;
        2f64.max(self.c.norm().powf(1.0 / (d - 1.0)) + 1.0)
    }

    pub fn second_iterate(&self) -> SecondIterateParams {
        SecondIterateParams {
            a: self.c.conj(),
            b: self.c,
            degree: self.degree,
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            degree: self.degree,
            c: self.c.conj(),
        }
    }

    /// The primitive `(d+1)`-th root of unity `e^{2πi/(d+1)}`.
    pub fn omega(degree: u32) -> Complex64 {
        Complex64::from_polar(1.0, std::f64::consts::TAU / (degree as f64 + 1.0))
    }
}

/// Result of iterating with overflow detection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Iterate {
    Point(Complex64),
    /// The orbit overflowed double precision at the given iteration.
    Escaped { iteration: usize },
}

impl Iterate {
    pub fn point(self) -> Option<Complex64> {
        match self {
            Iterate::Point(z) => Some(z),
            Iterate::Escaped { .. } => None,
        }
    }
}

/// `f_c^n(z)`, reporting overflow as escape to infinity.
pub fn evaluate(params: &MapParams, z: Complex64, n: usize) -> Iterate {
    let mut w = z;
    for i in 0..n {
        w = params.step(w);
        if !w.re.is_finite() || !w.im.is_finite() {
            return Iterate::Escaped { iteration: i + 1 };
        }
    }
    Iterate::Point(w)
}

/// `P_{a,b}(z) = (z^d + a)^d + b`; with `a = conj(b)` this is `f_b∘f_b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondIterateParams {
    pub a: Complex64,
    pub b: Complex64,
    pub degree: u32,
}

impl SecondIterateParams {
    #[inline]
    pub fn eval(&self, z: Complex64) -> Complex64 {
        (z.powu(self.degree) + self.a).powu(self.degree) + self.b
    }

    /// Value and derivative.
    #[inline]
    pub fn eval_d(&self, z: Complex64) -> (Complex64, Complex64) {
        let d = self.degree;
        let zd1 = z.powu(d - 1);
        let u = zd1 * z + self.a;
        let ud1 = u.powu(d - 1);
        let df = (d * d) as f64 * zd1 * ud1;
        (ud1 * u + self.b, df)
    }

    /// Newton correction `h/h'` for `h(z) = P^p(z) − z`, robust against
    /// overflow of the iterates far outside the filled Julia set.
    pub fn periodic_newton_ratio(&self, z: Complex64, p: usize) -> Complex64 {
        const BIG: f64 = 1e120;
        let mut w = z;
        let mut dw = Complex64::new(1.0, 0.0);
        for j in 0..p {
            let (gw, dg) = self.eval_d(w);
            let ndw = dw * dg;
            if gw.norm() > BIG || ndw.norm() > BIG || !gw.re.is_finite() || !ndw.re.is_finite() {
                // Far out: P(w) ≈ w^{d²}, so dw/w grows by exactly d² per step.
                let mut q = dw / w * (dg * w / gw);
                if !q.re.is_finite() || q.norm() == 0.0 {
                    q = dw / w * (self.degree * self.degree) as f64;
                }
                let remaining = (p - j - 1) as i32;
                let q = q * ((self.degree * self.degree) as f64).powi(remaining);
                return q.inv();
            }
            w = gw;
            dw = ndw;
        }
        (w - z) / (dw - 1.0)
    }
}

/// `(z + δ)^d − z^d` without cancellation.
pub fn pow_difference(z: Complex64, delta: Complex64, d: u32) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut binom = 1.0;
    let mut dp = Complex64::new(1.0, 0.0);
    for m in 1..=d {
        binom = binom * (d - m + 1) as f64 / m as f64;
        dp *= delta;
        sum += binom * z.powu(d - m) * dp;
    }
    sum
}

/// `F = f_c^{2k} = P^k` viewed as a holomorphic map.
#[derive(Clone, Copy, Debug)]
pub struct ReturnMap {
    pub params: MapParams,
    /// Number of applications of the second iterate.
    pub k: usize,
}

impl ReturnMap {
    pub fn new(params: MapParams, k: usize) -> Self {
        Self { params, k }
    }

    /// Value and first two derivatives of `F` at `z`.
    pub fn jet2(&self, z: Complex64) -> [Complex64; 3] {
        let t = self.taylor(z, 2);
        [t[0], t[1], 2.0 * t[2]]
    }
}

impl HolomorphicMap for ReturnMap {
    fn eval(&self, z: Complex64) -> Complex64 {
        let g = self.params.second_iterate();
        (0..self.k).fold(z, |w, _| g.eval(w))
    }

    fn taylor(&self, z0: Complex64, order: usize) -> Vec<Complex64> {
        let g = self.params.second_iterate();
        let d = self.params.degree;
        let mut s = Series::variable(z0, order);
        for _ in 0..self.k {
            s = s.powu(d).add_scalar(g.a).powu(d).add_scalar(g.b);
        }
        s.into_coeffs()
    }

    fn displacement(&self, z0: Complex64, w: Complex64) -> Complex64 {
        // Perturbation iteration along the reference orbit of z0.
        let g = self.params.second_iterate();
        let d = self.params.degree;
        let mut z = z0;
        let mut delta = w;
        for _ in 0..self.k {
            let u = z.powu(d) + g.a;
            let du = pow_difference(z, delta, d);
            delta = pow_difference(u, du, d);
            z = u.powu(d) + g.b;
        }
        delta + (z - z0)
    }

    fn derivative(&self, z: Complex64) -> Complex64 {
        let g = self.params.second_iterate();
        let mut w = z;
        let mut dw = Complex64::new(1.0, 0.0);
        for _ in 0..self.k {
            let (gw, dg) = g.eval_d(w);
            dw *= dg;
            w = gw;
        }
        dw
    }
}

/// Stability class of a cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stability {
    Superattracting,
    Attracting,
    Repelling,
    Indifferent,
    ParabolicCandidate,
}

/// A periodic orbit of `f_c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub points: Vec<Complex64>,
    pub period: usize,
    /// λ = ∏ ∂f/∂z̄ along the cycle (diagnostic only for odd periods).
    pub anti_derivative_product: Complex64,
    /// Holomorphic multiplier of the first holomorphic return.
    pub return_multiplier: Complex64,
    pub stability: Stability,
}

impl CycleRecord {
    /// Whether `z` is within `tol` of some point of the cycle.
    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        self.distance_to(z) <= tol
    }

    pub fn distance_to(&self, z: Complex64) -> f64 {
        self.points
            .iter()
            .map(|p| (p - z).norm())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Numerical settings for cycle computation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub max_iterations: usize,
    pub convergence_tolerance: f64,
    pub dedup_radius: f64,
    pub multistart_count: usize,
    /// `None` selects `max(2, |c|^{1/(d−1)} + 1)`.
    pub escape_radius: Option<f64>,
    pub parabolic_window: f64,
    pub seed: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            max_iterations: 1000,
            convergence_tolerance: 1e-12,
            dedup_radius: 1e-8,
            multistart_count: 20_000,
            escape_radius: None,
            parabolic_window: 1e-6,
            seed: 0x5eed,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<(), DynamicsError> {
        let bad = |m: &str| Err(DynamicsError::InvalidConfig(m.to_string()));
        if self.max_iterations == 0 || self.multistart_count == 0 {
            return bad("iteration and multistart budgets must be positive");
        }
        if !(self.convergence_tolerance > 0.0) || !(self.dedup_radius > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.dedup_radius <= self.convergence_tolerance {
            return bad("dedup radius must exceed the convergence tolerance");
        }
        if let Some(r) = self.escape_radius {
            if !(r > 0.0) {
                return bad("escape radius must be positive");
            }
        }
        if !(self.parabolic_window > 0.0) {
            return bad("parabolic window must be positive");
        }
        Ok(())
    }
}

/// Output of [`find_cycles`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CycleSearch {
    pub cycles: Vec<CycleRecord>,
    /// False when multistart mode was used and cycles may be missing.
    pub complete: bool,
}

/// Relative closing tolerance used when validating cycles.
pub const CYCLE_TOLERANCE: f64 = 1e-6;

/// `(λ, ρ)` of a cycle given as its successive points.
pub fn cycle_multiplier(
    params: &MapParams,
    points: &[Complex64],
) -> Result<(Complex64, Complex64), DynamicsError> {
    cycle_multiplier_tol(params, points, CYCLE_TOLERANCE)
}

pub fn cycle_multiplier_tol(
    params: &MapParams,
    points: &[Complex64],
    tol: f64,
) -> Result<(Complex64, Complex64), DynamicsError> {
    let p = points.len();
    if p == 0 {
        return Err(DynamicsError::EmptyCycle);
    }
    let mut worst: f64 = 0.0;
    for j in 0..p {
        let next = points[(j + 1) % p];
        let err = (params.step(points[j]) - next).norm() / next.norm().max(1.0);
        worst = worst.max(err);
    }
    if !(worst <= tol) {
        return Err(DynamicsError::NotACycle(worst));
    }
    let derivs: Vec<Complex64> = points.iter().map(|z| params.anti_derivative(*z)).collect();
    let lambda = derivs.iter().product::<Complex64>();
    let rho = if p % 2 == 1 {
        Complex64::new(lambda.norm_sqr(), 0.0)
    } else {
        (0..p / 2)
            .map(|j| derivs[2 * j + 1] * derivs[2 * j].conj())
            .product()
    };
    Ok((lambda, rho))
}

/// Largest denominator considered when testing for roots of unity.
const ROOT_OF_UNITY_DENOMINATOR: u32 = 64;

fn near_root_of_unity(rho: Complex64, tol: f64) -> bool {
    if (rho.norm() - 1.0).abs() >= tol {
        return false;
    }
    let t = rho.arg() / std::f64::consts::TAU;
    (1..=ROOT_OF_UNITY_DENOMINATOR).any(|q| {
        let x = t * q as f64;
        (x - x.round()).abs() / q as f64 * std::f64::consts::TAU < tol
    })
}

/// Stability class from the return multiplier.
pub fn classify(record: &CycleRecord, tol: f64) -> Stability {
    classify_multiplier(record.return_multiplier, record.period, tol)
}

pub fn classify_multiplier(rho: Complex64, period: usize, tol: f64) -> Stability {
    let m = rho.norm();
    if m < tol {
        Stability::Superattracting
    } else if m < 1.0 - tol {
        Stability::Attracting
    } else if m > 1.0 + tol {
        Stability::Repelling
    } else if (period % 2 == 1 && (rho - 1.0).norm() < tol)
        || (period.is_multiple_of(2) && near_root_of_unity(rho, tol))
    {
        Stability::ParabolicCandidate
    } else {
        Stability::Indifferent
    }
}

/// Exact period of `z` under `f_c` among the divisors of `max_period`,
/// using a relative closing tolerance.
pub fn exact_period(params: &MapParams, z: Complex64, max_period: usize, tol: f64) -> Option<usize> {
    let mut w = z;
    for m in 1..=max_period {
        w = params.step(w);
        if max_period.is_multiple_of(m) && (w - z).norm() <= tol * z.norm().max(1.0) {
            return Some(m);
        }
    }
    None
}

/// Builds a validated [`CycleRecord`] from one point of an exact-period-`p`
/// cycle.
pub fn cycle_from_point(
    params: &MapParams,
    z: Complex64,
    period: usize,
    tol: f64,
) -> Result<CycleRecord, DynamicsError> {
    let mut points = Vec::with_capacity(period);
    let mut w = z;
    for _ in 0..period {
        points.push(w);
        w = params.step(w);
    }
    let start = canonical_start(&points);
    points.rotate_left(start);
    let (lambda, rho) = cycle_multiplier(params, &points)?;
    Ok(CycleRecord {
        period,
        stability: classify_multiplier(rho, period, tol),
        points,
        anti_derivative_product: lambda,
        return_multiplier: rho,
    })
}

/// Index of the point used to start a cycle: the critical point if present,
/// otherwise the lexicographically smallest point.
fn canonical_start(points: &[Complex64]) -> usize {
    let mut best = 0;
    for (i, z) in points.iter().enumerate() {
        let b = points[best];
        if z.norm() < 1e-12 && b.norm() >= 1e-12 {
            best = i;
            continue;
        }
        if b.norm() < 1e-12 {
            continue;
        }
        if z.re < b.re - 1e-9 || ((z.re - b.re).abs() <= 1e-9 && z.im < b.im) {
            best = i;
        }
    }
    best
}

/// Merges approximations of the same root. Points closer than `radius` are
/// merged; slightly further points are merged when the residual at their
/// midpoint is no larger than at the points themselves, which is the
/// signature of a numerically unresolved multiple root.
fn merge_roots<R>(roots: &[Complex64], radius: f64, residual: R) -> Vec<Complex64>
where
    R: Fn(Complex64) -> f64,
{
    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    let mut sorted: Vec<Complex64> = roots
        .iter()
        .copied()
        .filter(|z| z.re.is_finite() && z.im.is_finite())
        .collect();
    sorted.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    for z in sorted {
        let mut merged = false;
        for (sum, count) in clusters.iter_mut() {
            let center = *sum / *count as f64;
            let dist = (center - z).norm();
            let scale = z.norm().max(1.0);
            let same = dist < radius * scale
                || (dist < 1e-4 * scale && {
                    let mid = (center + z) * 0.5;
                    let rm = residual(mid);
                    rm <= 10.0 * residual(z).max(residual(center)).max(1e-300)
                });
            if same {
                *sum += z;
                *count += 1;
                merged = true;
                break;
            }
        }
        if !merged {
            clusters.push((z, 1));
        }
    }
    clusters.into_iter().map(|(s, n)| s / n as f64).collect()
}

/// All cycles of exact period `p` of `f_c`.
///
/// Roots of `P^p(z) − z` (`P = f_c∘f_c`) are extracted simultaneously when the
/// degree `d^{2p}` is at most [`MAX_FULL_DEGREE`]; otherwise multistart
/// Newton is used and the result is flagged as possibly incomplete.
pub fn find_cycles(
    params: &MapParams,
    period: usize,
    cfg: &SolveConfig,
) -> Result<CycleSearch, DynamicsError> {
    cfg.validate()?;
    assert!(period >= 1, "period must be positive");
    let (roots, full) = return_fixed_points(params, period, cfg);

    let period_tol = (100.0 * cfg.dedup_radius).max(1e-6);
    let mut cycles: Vec<CycleRecord> = Vec::new();
    for z in roots {
        if exact_period(params, z, 2 * period, period_tol) != Some(period) {
            continue;
        }
        if cycles
            .iter()
            .any(|c| c.distance_to(z) < period_tol * z.norm().max(1.0))
        {
            continue;
        }
        if let Ok(rec) = cycle_from_point(params, z, period, cfg.parabolic_window) {
            cycles.push(rec);
        }
    }
    cycles.sort_by(|a, b| {
        let (x, y) = (a.points[0], b.points[0]);
        x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im))
    });
    Ok(CycleSearch {
        cycles,
        complete: full,
    })
}

/// Distinct fixed points of `P^p` (multiple roots merged), and whether the
/// enumeration is complete.
pub fn return_fixed_points(params: &MapParams, period: usize, cfg: &SolveConfig) -> (Vec<Complex64>, bool) {
    let g = params.second_iterate();
    let radius = cfg.escape_radius.unwrap_or_else(|| params.escape_radius());
    let log_degree = 2.0 * period as f64 * (params.degree as f64).log2();
    let full = log_degree <= (MAX_FULL_DEGREE as f64).log2() + 1e-9;
    let ratio = |z: Complex64| g.periodic_newton_ratio(z, period);

    let raw: Vec<Complex64> = if full {
        let degree = (params.degree as usize).pow(2 * period as u32);
        let res = aberth(
            degree,
            ratio,
            AberthOptions {
                max_iterations: cfg.max_iterations,
                tolerance: cfg.convergence_tolerance,
                radius,
            },
        );
        res.roots
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let seeds: Vec<Complex64> = (0..cfg.multistart_count)
            .map(|_| {
                let r = radius * rng.random::<f64>().sqrt();
                Complex64::from_polar(r, rng.random::<f64>() * std::f64::consts::TAU)
            })
            .collect();
        seeds
            .par_iter()
            .filter_map(|s| complex_newton(ratio, *s, cfg.max_iterations, cfg.convergence_tolerance))
            .collect()
    };
    let residual = |z: Complex64| {
        let mut w = z;
        for _ in 0..period {
            w = g.eval(w);
        }
        (w - z).norm()
    };
    let roots: Vec<Complex64> = merge_roots(&raw, cfg.dedup_radius, residual)
        .into_iter()
        .filter(|z| z.norm() <= 2.0 * radius && residual(*z) < 1e-6 * z.norm().max(1.0))
        .collect();
    (roots, full)
}

/// Refines an approximate fixed point of `F = P^k` by complex Newton.
pub fn polish_periodic_point(params: &MapParams, k: usize, z: Complex64) -> Option<Complex64> {
    let g = params.second_iterate();
    complex_newton(|w| g.periodic_newton_ratio(w, k), z, 100, 1e-15)
}
