//! External rays: Böttcher potentials and angles, dynamical rays by backward
//! iteration, parameter rays by continuation, landing estimates.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use rayon::prelude::*;

use crate::angles::Angle;
use crate::atlas::{sample_direction, BoundaryConfig, ComponentRecord};
use crate::dynamics::{
    cycle_from_point, exact_period, polish_periodic_point, CycleRecord, DynamicsError, MapParams, CYCLE_TOLERANCE,
};
use crate::solve::{newton_real, NewtonOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RayError {
    #[error("orbit of {0} does not escape")]
    NonEscaping(Complex64),
    #[error("ambiguous inverse branch at potential {0:e}")]
    BranchAmbiguity(f64),
    #[error("precision floor reached at potential {0:e}")]
    PrecisionFloor(f64),
    #[error("continuation failed at potential {0:e}")]
    NewtonDivergence(f64),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("could not identify the wakes: {0}")]
    WakeIdentification(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// Orbits are followed until `|z|` exceeds this radius, where the Böttcher
/// coordinate agrees with the identity to double precision.
const BOTTCHER_RADIUS: f64 = 1e8;

/// Settings for ray tracing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayConfig {
    /// Potential at which tracing starts (dynamical rays).
    pub start_potential: f64,
    /// Potential at which parameter-ray continuation starts.
    pub parameter_start_potential: f64,
    /// Dynamical-ray tracing stops below this potential.
    pub min_potential: f64,
    /// Parameter-ray continuation stops below this potential.
    pub parameter_min_potential: f64,
    /// Potential levels per factor `d`.
    pub steps_per_level: usize,
    /// Times the level spacing may be halved on branch ambiguity.
    pub max_refinements: usize,
    pub max_iterations: usize,
    /// Distance at which a landing estimate is matched to a cycle.
    pub match_tolerance: f64,
}

impl Default for RayConfig {
    fn default() -> Self {
        Self {
            start_potential: 40.0,
            parameter_start_potential: 8.0,
            min_potential: 1e-80,
            parameter_min_potential: 1e-8,
            steps_per_level: 8,
            max_refinements: 4,
            max_iterations: 1_000_000,
            match_tolerance: 1e-6,
        }
    }
}

impl RayConfig {
    pub fn validate(&self) -> Result<(), RayError> {
        let ok = self.start_potential > 0.0
            && self.parameter_start_potential > 0.0
            && self.min_potential > 0.0
            && self.min_potential < self.start_potential
            && self.parameter_min_potential > 0.0
            && self.parameter_min_potential < self.parameter_start_potential
            && self.steps_per_level > 0
            && self.max_iterations > 0
            && self.match_tolerance > 0.0;
        if ok {
            Ok(())
        } else {
            Err(RayError::InvalidConfig(
                "potentials, steps and tolerances must be positive with min_potential below the start".into(),
            ))
        }
    }
}

fn wrap_unit(x: f64) -> f64 {
    x - x.floor()
}

/// Signed distance `a − b` on the circle, in `(−1/2, 1/2]`.
fn circle_diff(a: f64, b: f64) -> f64 {
    let x = wrap_unit(a - b);
    if x > 0.5 {
        x - 1.0
    } else {
        x
    }
}

/// Potential and external angle of an escaping point, with inverse branches
/// chosen nearest to `(−d)^n·hint` when a hint is given and to `arg z_n`
/// otherwise.
pub fn external_angle_with_hint(
    params: &MapParams,
    z: Complex64,
    hint: Option<&Angle>,
    max_iterations: usize,
) -> Result<(f64, f64), RayError> {
    let d = params.degree;
    let mut orbit = vec![z];
    let mut w = z;
    while w.norm() <= BOTTCHER_RADIUS {
        if orbit.len() > max_iterations || !w.re.is_finite() {
            return Err(RayError::NonEscaping(z));
        }
        w = params.step(w);
        orbit.push(w);
    }
    let n = orbit.len() - 1;
    let g = w.norm().ln() / (d as f64).powi(n as i32);
    let hints: Option<Vec<f64>> = hint.map(|h| {
        let mut v = Vec::with_capacity(n + 1);
        let mut a = h.clone();
        for _ in 0..=n {
            v.push(a.to_f64());
            a = a.anti_multiply(d);
        }
        v
    });
    let mut t = wrap_unit(w.arg() / std::f64::consts::TAU);
    for m in (0..n).rev() {
        let target = match &hints {
            Some(h) => h[m],
            None => wrap_unit(orbit[m].arg() / std::f64::consts::TAU),
        };
        // Preimages of t under s ↦ −d s.
        t = (0..d)
            .map(|j| wrap_unit((j as f64 - t) / d as f64))
            .min_by(|a, b| circle_diff(*a, target).abs().total_cmp(&circle_diff(*b, target).abs()))
            .expect("degree ≥ 2");
    }
    Ok((g, t))
}

/// Green's function `G` and external angle `t` of an escaping point.
pub fn external_angle_and_potential(params: &MapParams, z: Complex64) -> Result<(f64, f64), RayError> {
    external_angle_with_hint(params, z, None, RayConfig::default().max_iterations)
}

/// Where a ray was traced.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum RaySpace {
    Dynamical { c: Complex64, degree: u32 },
    Parameter { degree: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RayStatus {
    Landed,
    Accumulating,
    Aborted,
}

/// Terminal behaviour of a ray: a point and the radius of the disc the tail
/// is known to lie in.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandingEstimate {
    pub point: Complex64,
    pub spread: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayPath {
    pub space: RaySpace,
    pub angle: Angle,
    /// Ray points at strictly decreasing potentials.
    pub points: Vec<Complex64>,
    pub potentials: Vec<f64>,
    pub landing: Option<LandingEstimate>,
    pub status: RayStatus,
    pub note: Option<String>,
}

/// Inverse images of `w` under `f_c`.
fn preimages(params: &MapParams, w: Complex64) -> Vec<Complex64> {
    let d = params.degree;
    let root = (w - params.c).powf(1.0 / d as f64);
    (0..d)
        .map(|k| (root * Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / d as f64)).conj())
        .collect()
}

struct BackwardTrace {
    potentials: Vec<f64>,
    /// Points of the ray of `angles[0]`.
    points: Vec<Complex64>,
}

fn trace_backward(
    params: &MapParams,
    angle: &Angle,
    steps: usize,
    cfg: &RayConfig,
) -> Result<BackwardTrace, RayError> {
    let d = params.degree;
    let orbit = angle.orbit(d);
    let len = orbit.angles.len();
    let next: Vec<usize> = (0..len)
        .map(|i| if i + 1 < len { i + 1 } else { orbit.preperiod })
        .collect();
    let ln_d = (d as f64).ln();
    let levels = ((cfg.start_potential / cfg.min_potential).ln() / ln_d * steps as f64).ceil() as usize;
    let potentials: Vec<f64> = (0..=levels)
        .map(|m| cfg.start_potential * (-(m as f64) / steps as f64 * ln_d).exp())
        .collect();
    let mut pts: Vec<Vec<Complex64>> = vec![Vec::with_capacity(levels + 1); len];
    for m in 0..=levels {
        for j in 0..len {
            let z = if m < steps {
                Complex64::from_polar(potentials[m].exp(), std::f64::consts::TAU * orbit.angles[j].to_f64())
            } else {
                let w = pts[next[j]][m - steps];
                let prev = pts[j][m - 1];
                let mut cand: Vec<(f64, Complex64)> = preimages(params, w)
                    .into_iter()
                    .map(|z| ((z - prev).norm(), z))
                    .collect();
                cand.sort_by(|a, b| a.0.total_cmp(&b.0));
                if !(cand[0].0.is_finite()) {
                    return Err(RayError::PrecisionFloor(potentials[m]));
                }
                if cand[1].0 < 2.0 * cand[0].0 {
                    return Err(RayError::BranchAmbiguity(potentials[m]));
                }
                cand[0].1
            };
            pts[j].push(z);
        }
    }
    Ok(BackwardTrace {
        potentials,
        points: pts.swap_remove(0),
    })
}

/// Geometric-tail extrapolation over blocks of `block` points.
fn cauchy_tail(points: &[Complex64], block: usize) -> Option<LandingEstimate> {
    let n = points.len();
    if block == 0 || n < 2 * block + 1 {
        return None;
    }
    let a = points[n - 1];
    let b = points[n - 1 - block];
    let c = points[n - 1 - 2 * block];
    let d1 = (a - b).norm();
    let d0 = (b - c).norm();
    // Converged to rounding level.
    if d1 <= 1e-13 * a.norm().max(1.0) {
        return Some(LandingEstimate { point: a, spread: d1 });
    }
    let q = d1 / d0;
    if !(q < 0.95) {
        return Some(LandingEstimate { point: a, spread: f64::INFINITY });
    }
    Some(LandingEstimate {
        point: a + (a - b) * (q / (1.0 - q)),
        spread: d1 * q / (1.0 - q),
    })
}

/// Dynamical ray of a rational angle for `f_c`, traced by backward
/// iteration from a large potential.
pub fn dynamical_ray(params: &MapParams, angle: &Angle, cfg: &RayConfig) -> Result<RayPath, RayError> {
    cfg.validate()?;
    let mut steps = cfg.steps_per_level;
    let mut last_err = None;
    for _ in 0..=cfg.max_refinements {
        match trace_backward(params, angle, steps, cfg) {
            Ok(tr) => {
                let (_, period) = angle.exact_period(params.degree);
                let landing = cauchy_tail(&tr.points, period * steps);
                let status = match landing {
                    Some(l) if l.spread < cfg.match_tolerance => RayStatus::Landed,
                    _ => RayStatus::Accumulating,
                };
                return Ok(RayPath {
                    space: RaySpace::Dynamical {
                        c: params.c,
                        degree: params.degree,
                    },
                    angle: angle.clone(),
                    points: tr.points,
                    potentials: tr.potentials,
                    landing,
                    status,
                    note: (steps != cfg.steps_per_level).then(|| format!("refined to {steps} steps per level")),
                });
            }
            Err(RayError::BranchAmbiguity(p)) => {
                last_err = Some(RayError::BranchAmbiguity(p));
                steps *= 2;
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.expect("at least one attempt"))
}

/// Landing of a dynamical ray, matched against the cycles of `f_c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandingReport {
    pub angle: Angle,
    pub c: Complex64,
    pub landing_estimate: Option<LandingEstimate>,
    pub matched_cycle: Option<CycleRecord>,
    /// Distance from the estimate to the matched cycle.
    pub separation_distance: Option<f64>,
    pub status: RayStatus,
}

/// The cycle through the periodic point nearest to `z`, among periods
/// dividing `period`, found by polishing `z` itself.
pub fn nearest_cycle(params: &MapParams, period: usize, z: Complex64) -> Option<(CycleRecord, f64)> {
    let w = polish_periodic_point(params, period, z)?;
    let k = exact_period(params, w, period, CYCLE_TOLERANCE)?;
    let cycle = cycle_from_point(params, w, k, CYCLE_TOLERANCE).ok()?;
    let dist = cycle.distance_to(z);
    Some((cycle, dist))
}

/// Traces the ray and matches its landing estimate against periodic cycles.
pub fn landing_report(params: &MapParams, angle: &Angle, cfg: &RayConfig) -> Result<LandingReport, RayError> {
    let ray = dynamical_ray(params, angle, cfg)?;
    let (preperiod, period) = angle.exact_period(params.degree);
    let mut report = LandingReport {
        angle: angle.clone(),
        c: params.c,
        landing_estimate: ray.landing,
        matched_cycle: None,
        separation_distance: None,
        status: ray.status,
    };
    if let (Some(l), 0) = (ray.landing, preperiod) {
        if let Some((cy, dist)) = nearest_cycle(params, period, l.point) {
            report.separation_distance = Some(dist);
            if dist < cfg.match_tolerance {
                report.matched_cycle = Some(cy);
                report.status = RayStatus::Landed;
            }
        }
    }
    Ok(report)
}

/// Potential of `z` and the deviation `t(z) − θ` of its external angle from
/// a rational angle, branches following the orbit of `θ`. The deviation
/// keeps full relative precision however small it is.
pub fn angle_deviation(
    params: &MapParams,
    z: Complex64,
    theta: &Angle,
    max_iterations: usize,
) -> Result<(f64, f64), RayError> {
    let d = params.degree;
    let mut w = z;
    let mut n = 0usize;
    while w.norm() <= BOTTCHER_RADIUS {
        if n >= max_iterations || !w.re.is_finite() {
            return Err(RayError::NonEscaping(z));
        }
        w = params.step(w);
        n += 1;
    }
    let target = theta.anti_multiply_pow(d, n as u64);
    let g = w.norm().ln() / (d as f64).powi(n as i32);
    let delta = circle_diff(w.arg() / std::f64::consts::TAU, target.to_f64());
    // Each pull-back along s ↦ −d s divides the deviation by −d.
    let scale = (-1.0 / d as f64).powi(n as i32);
    Ok((g, delta * scale))
}

/// `(G(c) − P, 2π(t(c) − θ)) / P` for the critical value of `f_c`.
fn parameter_residual(d: u32, c: Complex64, angle: &Angle, potential: f64, max_iterations: usize) -> Option<[f64; 2]> {
    let params = MapParams { degree: d, c };
    let (g, delta) = angle_deviation(&params, c, angle, max_iterations).ok()?;
    let r = [
        (g - potential) / potential,
        std::f64::consts::TAU * delta / potential,
    ];
    r.iter().all(|x| x.is_finite()).then_some(r)
}

/// `Φ(c) = φ_c(c)` as `(G, t)`.
pub fn parameter_coordinate(d: u32, c: Complex64) -> Result<(f64, f64), RayError> {
    external_angle_and_potential(&MapParams { degree: d, c }, c)
}

/// Parameter ray of a rational angle, continued from a large potential down
/// to `min_potential` by Newton's method on `Φ(c) = e^{P + 2πiθ}`.
pub fn parameter_ray(d: u32, angle: &Angle, cfg: &RayConfig) -> Result<RayPath, RayError> {
    cfg.validate()?;
    if d < 2 {
        return Err(RayError::Dynamics(DynamicsError::InvalidDegree(d)));
    }
    let ln_d = (d as f64).ln();
    let theta = angle.to_f64();
    let ratio = (-ln_d / cfg.steps_per_level as f64).exp();
    let mut potential = cfg.parameter_start_potential;
    let mut c = Complex64::from_polar(potential.exp(), std::f64::consts::TAU * theta);
    let mut points: Vec<Complex64> = Vec::new();
    let mut potentials = Vec::new();
    let mut last_step = c.norm();
    let mut factor = ratio;
    let mut status = RayStatus::Accumulating;
    let mut note = None;
    loop {
        let solve = |p: f64, seed: Complex64, step: f64| {
            let h = (1e-7 * seed.norm().max(1.0)).min(1e-2 * step) / seed.norm().max(1.0);
            newton_real(
                |x: &[f64; 2]| parameter_residual(d, Complex64::new(x[0], x[1]), angle, p, cfg.max_iterations),
                [seed.re, seed.im],
                NewtonOptions {
                    max_iterations: 40,
                    residual_tolerance: 1e-11,
                    fd_step: h,
                    max_step: 4.0 * step,
                    ..Default::default()
                },
            )
            .filter(|s| s.residual < 1e-9)
            .map(|s| Complex64::new(s.x[0], s.x[1]))
        };
        match solve(potential, c, last_step) {
            Some(cn) => {
                if let Some(prev) = points.last() {
                    last_step = (cn - prev).norm().max(1e-300);
                }
                c = cn;
                points.push(c);
                potentials.push(potential);
                factor = (factor / ratio).sqrt() * ratio;
                factor = factor.max(ratio);
            }
            None => {
                if points.is_empty() {
                    return Err(RayError::NewtonDivergence(potential));
                }
                // Retry from the last accepted point with a smaller decrement.
                let accepted = *potentials.last().expect("non-empty");
                factor = factor.sqrt();
                if 1.0 - factor < 1e-4 {
                    status = RayStatus::Aborted;
                    note = Some(format!("continuation stalled at potential {accepted:e}"));
                    break;
                }
                potential = accepted;
                c = *points.last().expect("non-empty");
            }
        }
        if potential <= cfg.parameter_min_potential {
            break;
        }
        potential = (potential * factor).max(cfg.parameter_min_potential);
    }
    let tail = points.len().min(4);
    let landing = (tail >= 2).then(|| {
        let end = points[points.len() - 1];
        let spread = points[points.len() - tail..]
            .iter()
            .map(|p| (p - end).norm())
            .fold(0.0, f64::max);
        LandingEstimate { point: end, spread }
    });
    Ok(RayPath {
        space: RaySpace::Parameter { degree: d },
        angle: angle.clone(),
        points,
        potentials,
        landing,
        status,
        note,
    })
}

/// Settings for the landing-discontinuity experiment around a co-root arc.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscontinuityConfig {
    pub degree: u32,
    /// Centre of the odd-period component whose arc is probed.
    pub center: Complex64,
    pub period: usize,
    /// Angle of the ray landing alone on the co-root arc.
    pub theta1: Angle,
    /// Co-landing partner of `theta1` in the wake across the far cusp.
    pub theta2: Angle,
    /// Co-landing partner of `theta1` in the wake across the root cusp.
    pub alpha1: Angle,
    pub offsets: Vec<f64>,
    /// Polar search grid inside each offset disc.
    pub radial_samples: usize,
    pub angular_samples: usize,
    /// Depth of the parameter ray that locates the arc point.
    pub accumulation_potential: f64,
    /// Required agreement of co-landing points.
    pub colanding_tolerance: f64,
    /// Iterations after which a grid parameter is deemed non-escaping.
    pub escape_iterations: usize,
    pub ray: RayConfig,
}

impl Default for DiscontinuityConfig {
    fn default() -> Self {
        Self {
            degree: 2,
            center: Complex64::new(-1.7548776662466927, 0.0),
            period: 3,
            theta1: Angle::new(4u32, 9u32).expect("valid angle"),
            theta2: Angle::new(5u32, 9u32).expect("valid angle"),
            alpha1: Angle::new(3u32, 7u32).expect("valid angle"),
            offsets: vec![1e-2, 1e-3, 1e-4],
            radial_samples: 12,
            angular_samples: 96,
            accumulation_potential: 1e-40,
            colanding_tolerance: 1e-6,
            escape_iterations: 100_000,
            ray: RayConfig::default(),
        }
    }
}

/// A parameter in one of the two wakes together with the rays tested there.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WakeSample {
    pub c: Complex64,
    /// External angle of the (escaping) parameter.
    pub external_angle: f64,
    /// Its deviation from `theta1`.
    pub angle_deviation: f64,
    pub partner: Angle,
    pub landing_theta1: Complex64,
    pub landing_partner: Complex64,
    pub colanding_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscontinuityOffset {
    pub offset: f64,
    /// Parameter where `theta1` co-lands with `theta2`.
    pub c_prime: Option<WakeSample>,
    /// Parameter where `theta1` co-lands with `alpha1`.
    pub c_double_prime: Option<WakeSample>,
    /// `|L(c′) − L(c*)|` and `|L(c″) − L(c*)|`.
    pub jump1: Option<f64>,
    pub jump2: Option<f64>,
    /// `|L(c′) − L(c″)|`.
    pub jump12: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscontinuityReport {
    /// Arc point where the `theta1` parameter ray accumulates.
    pub c_star: Complex64,
    /// Terminal point of the `theta1` parameter ray.
    pub parameter_ray_end: Complex64,
    /// Landing point of `theta1` at `c*`: a point of the parabolic cycle.
    pub landing_star: Complex64,
    /// Landing points of `theta2` and `alpha1` at `c*`.
    pub landing_theta2_star: Option<Complex64>,
    pub landing_alpha1_star: Option<Complex64>,
    /// True when neither partner lands at the landing point of `theta1`.
    pub lands_alone: bool,
    pub offsets: Vec<DiscontinuityOffset>,
}

/// Landing point of a dynamical ray matched to a cycle, if it matched.
fn matched_landing(params: &MapParams, angle: &Angle, cfg: &RayConfig) -> Option<Complex64> {
    let rep = landing_report(params, angle, cfg).ok()?;
    let est = rep.landing_estimate?.point;
    let cycle = rep.matched_cycle?;
    cycle.points.iter().copied().min_by(|a, b| (a - est).norm().total_cmp(&(b - est).norm()))
}

/// Escaping parameters of the polar grid around `c_star`, nearest first,
/// with their angle deviation from `theta1`.
fn wake_candidates(cfg: &DiscontinuityConfig, c_star: Complex64, offset: f64) -> Vec<(Complex64, f64)> {
    let grid: Vec<Complex64> = (1..=cfg.radial_samples)
        .flat_map(|i| {
            let r = offset * i as f64 / cfg.radial_samples as f64;
            (0..cfg.angular_samples)
                .map(move |j| c_star + Complex64::from_polar(r, std::f64::consts::TAU * j as f64 / cfg.angular_samples as f64))
        })
        .collect();
    grid.into_par_iter()
        .filter_map(|c| {
            // Escaping parameters near the arc have angles within rounding of
            // `theta1`; the side is read off the exact deviation.
            let params = MapParams { degree: cfg.degree, c };
            angle_deviation(&params, c, &cfg.theta1, cfg.escape_iterations)
                .ok()
                .filter(|(_, delta)| *delta != 0.0)
                .map(|(_, delta)| (c, delta))
        })
        .collect()
}

fn search_wake(
    cfg: &DiscontinuityConfig,
    candidates: &[(Complex64, f64)],
    sign: f64,
    partner: &Angle,
) -> Option<WakeSample> {
    let t1 = cfg.theta1.to_f64();
    candidates.iter().filter(|(_, delta)| delta.signum() == sign).find_map(|&(c, delta)| {
        let params = MapParams { degree: cfg.degree, c };
        let l1 = matched_landing(&params, &cfg.theta1, &cfg.ray)?;
        let l2 = matched_landing(&params, partner, &cfg.ray)?;
        let err = (l1 - l2).norm();
        (err < cfg.colanding_tolerance).then(|| WakeSample {
            c,
            external_angle: wrap_unit(t1 + delta),
            angle_deviation: delta,
            partner: partner.clone(),
            landing_theta1: l1,
            landing_partner: l2,
            colanding_error: err,
        })
    })
}

/// Probes the landing point of the `theta1` ray near a point of the co-root
/// arc on which it lands alone, approaching from the two adjacent wakes.
pub fn discontinuity_experiment(cfg: &DiscontinuityConfig) -> Result<DiscontinuityReport, RayError> {
    cfg.ray.validate()?;
    if cfg.offsets.iter().any(|o| !(*o > 0.0)) || cfg.radial_samples == 0 || cfg.angular_samples == 0 {
        return Err(RayError::InvalidConfig("offsets and grid sizes must be positive".into()));
    }
    let d = cfg.degree;
    let pcfg = RayConfig {
        parameter_min_potential: cfg.accumulation_potential,
        ..cfg.ray
    };
    let pray = parameter_ray(d, &cfg.theta1, &pcfg)?;
    let end = *pray
        .points
        .last()
        .ok_or_else(|| RayError::WakeIdentification("empty parameter ray".into()))?;
    let component = ComponentRecord::new(d, cfg.period, cfg.center);
    let bp = sample_direction(&component, (end - cfg.center).arg(), &BoundaryConfig::default())
        .map_err(RayError::WakeIdentification)?;
    let c_star = bp.c;
    let params = MapParams { degree: d, c: c_star };

    // At the parabolic parameter the ray converges slowly; identify its
    // landing point as the nearest point of the parabolic cycle.
    let ray = dynamical_ray(&params, &cfg.theta1, &cfg.ray)?;
    let tail = *ray.points.last().expect("non-empty ray");
    let landing_star = (0..cfg.period)
        .scan(bp.z, |w, _| {
            let z = *w;
            *w = params.step(z);
            Some(z)
        })
        .min_by(|a, b| (a - tail).norm().total_cmp(&(b - tail).norm()))
        .expect("period ≥ 1");
    let landing_theta2_star = matched_landing(&params, &cfg.theta2, &cfg.ray);
    let landing_alpha1_star = matched_landing(&params, &cfg.alpha1, &cfg.ray);
    let apart = |l: Option<Complex64>| l.is_some_and(|l| (l - landing_star).norm() > cfg.colanding_tolerance);
    let lands_alone = apart(landing_theta2_star) && apart(landing_alpha1_star);

    // The deviation from `theta1` is positive on the counter-clockwise side.
    let sign = |partner: &Angle| {
        if wrap_unit(partner.to_f64() - cfg.theta1.to_f64()) < 0.5 {
            1.0
        } else {
            -1.0
        }
    };
    let (sign2, sign1) = (sign(&cfg.theta2), sign(&cfg.alpha1));
    let offsets = cfg
        .offsets
        .iter()
        .map(|&offset| {
            let candidates = wake_candidates(cfg, c_star, offset);
            let c_prime = search_wake(cfg, &candidates, sign2, &cfg.theta2);
            let c_double_prime = search_wake(cfg, &candidates, sign1, &cfg.alpha1);
            let jump = |w: &Option<WakeSample>| w.as_ref().map(|w| (w.landing_theta1 - landing_star).norm());
            DiscontinuityOffset {
                offset,
                jump1: jump(&c_prime),
                jump2: jump(&c_double_prime),
                jump12: c_prime
                    .as_ref()
                    .zip(c_double_prime.as_ref())
                    .map(|(a, b)| (a.landing_theta1 - b.landing_theta1).norm()),
                c_prime,
                c_double_prime,
            }
        })
        .collect();
    Ok(DiscontinuityReport {
        c_star,
        parameter_ray_end: end,
        landing_star,
        landing_theta2_star,
        landing_alpha1_star,
        lands_alone,
        offsets,
    })
}
