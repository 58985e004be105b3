//! Generic numerical solvers: simultaneous polynomial root iteration and
//! small real Newton / Gauss–Newton systems with differenced Jacobians.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;

/// Options for the simultaneous root iteration.
#[derive(Clone, Copy, Debug)]
pub struct AberthOptions {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub radius: f64,
}

/// Below this degree the root iteration runs on the calling thread.
const PARALLEL_DEGREE: usize = 256;

/// Result of a simultaneous root iteration.
#[derive(Clone, Debug)]
pub struct AberthResult {
    pub roots: Vec<Complex64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Aberth–Ehrlich iteration for a monic polynomial of the given degree.
///
/// `ratio(z)` must return the Newton correction `p(z)/p'(z)`; the polynomial
/// itself is never expanded, so it can be any composition that is cheap to
/// evaluate. Updates are Jacobi-style, which keeps the result independent of
/// the worker count.
pub fn aberth<F>(degree: usize, ratio: F, opts: AberthOptions) -> AberthResult
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    let mut roots: Vec<Complex64> = (0..degree)
        .map(|j| {
            let t = std::f64::consts::TAU * (j as f64 + 0.25) / degree as f64 + 0.4;
            Complex64::from_polar(opts.radius, t)
        })
        .collect();
    let mut done = vec![false; degree];
    let mut stall = vec![0u32; degree];
    let mut last = vec![f64::INFINITY; degree];

    for it in 0..opts.max_iterations {
        let current = roots.clone();
        let update = |i: usize| {
                if done[i] {
                    return None;
                }
                let zi = current[i];
                let n = ratio(zi);
                if !n.re.is_finite() || !n.im.is_finite() {
                    return Some((Complex64::new(0.0, 0.0), 0.0));
                }
                let mut s = Complex64::new(0.0, 0.0);
                for (j, zj) in current.iter().enumerate() {
                    if j != i {
                        let diff = zi - zj;
                        if diff.norm_sqr() > 0.0 {
                            s += diff.inv();
                        }
                    }
                }
                let denom = Complex64::new(1.0, 0.0) - n * s;
                let step = if denom.norm() > 1e-300 { n / denom } else { n };
                Some((step, step.norm()))
        };
        let updates: Vec<Option<(Complex64, f64)>> = if degree >= PARALLEL_DEGREE {
            (0..degree).into_par_iter().map(update).collect()
        } else {
            (0..degree).map(update).collect()
        };

        let mut all_done = true;
        for (i, u) in updates.into_iter().enumerate() {
            if let Some((step, size)) = u {
                roots[i] -= step;
                let scale = roots[i].norm().max(1.0);
                if size <= opts.tolerance * scale {
                    done[i] = true;
                } else {
                    if size >= 0.5 * last[i] && size < 1e-6 * scale {
                        stall[i] += 1;
                        if stall[i] >= 8 {
                            done[i] = true;
                        }
                    }
                    last[i] = size;
                }
            }
            all_done &= done[i];
        }
        if all_done {
            return AberthResult {
                roots,
                iterations: it + 1,
                converged: true,
            };
        }
    }
    AberthResult {
        roots,
        iterations: opts.max_iterations,
        converged: false,
    }
}

/// Roots of a monic-normalisable polynomial given by ascending coefficients.
pub fn polynomial_roots(coeffs: &[Complex64], tolerance: f64) -> Vec<Complex64> {
    let mut c: Vec<Complex64> = coeffs.to_vec();
    while c.len() > 1 && c.last().is_some_and(|a| a.norm() == 0.0) {
        c.pop();
    }
    let n = c.len() - 1;
    if n == 0 {
        return Vec::new();
    }
    let lead = c[n];
    let c: Vec<Complex64> = c.iter().map(|a| a / lead).collect();
    // Cauchy bound.
    let radius = 1.0 + c[..n].iter().map(|a| a.norm()).fold(0.0, f64::max);
    let ratio = |z: Complex64| {
        let mut p = Complex64::new(1.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for a in c[..n].iter().rev() {
            dp = dp * z + p;
            p = p * z + a;
        }
        p / dp
    };
    aberth(
        n,
        ratio,
        AberthOptions {
            max_iterations: 500,
            tolerance,
            radius: radius.min(1e6) * 0.9,
        },
    )
    .roots
}

/// Options for the small real Newton solvers.
#[derive(Clone, Copy, Debug)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    /// Stop once the residual norm falls below this value.
    pub residual_tolerance: f64,
    /// Stop once the step is below this (relative to max(1, |x|)).
    pub step_tolerance: f64,
    /// Relative finite-difference step.
    pub fd_step: f64,
    /// Reject any step longer than this.
    pub max_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            max_iterations: 60,
            residual_tolerance: 1e-14,
            step_tolerance: 1e-15,
            fd_step: 1e-7,
            max_step: f64::INFINITY,
        }
    }
}

/// Outcome of a converged real Newton solve.
#[derive(Clone, Copy, Debug)]
pub struct NewtonSolution<const N: usize> {
    pub x: [f64; N],
    pub residual: f64,
    pub iterations: usize,
}

fn jacobian<const M: usize, const N: usize, F>(
    f: &F,
    x: &[f64; N],
    fd_step: f64,
) -> Option<DMatrix<f64>>
where
    F: Fn(&[f64; N]) -> Option<[f64; M]>,
{
    let mut jac = DMatrix::<f64>::zeros(M, N);
    for k in 0..N {
        let h = fd_step * x[k].abs().max(1.0);
        let mut xp = *x;
        let mut xm = *x;
        xp[k] += h;
        xm[k] -= h;
        let fp = f(&xp)?;
        let fm = f(&xm)?;
        for i in 0..M {
            jac[(i, k)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    Some(jac)
}

fn norm<const M: usize>(v: &[f64; M]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Damped Newton's method on a square real system with a centrally
/// differenced Jacobian. `f` returns `None` where it is undefined (for
/// instance when an orbit escapes), which triggers step halving.
pub fn newton_real<const N: usize, F>(
    f: F,
    x0: [f64; N],
    opts: NewtonOptions,
) -> Option<NewtonSolution<N>>
where
    F: Fn(&[f64; N]) -> Option<[f64; N]>,
{
    gauss_newton::<N, N, F>(f, x0, opts)
}

/// Damped Gauss–Newton on an `M × N` real system (`M ≥ N`), solving each
/// linearised step in the least-squares sense via SVD.
pub fn gauss_newton<const M: usize, const N: usize, F>(
    f: F,
    x0: [f64; N],
    opts: NewtonOptions,
) -> Option<NewtonSolution<N>>
where
    F: Fn(&[f64; N]) -> Option<[f64; M]>,
{
    let mut x = x0;
    let mut r = f(&x)?;
    let mut rn = norm(&r);
    for it in 0..opts.max_iterations {
        if rn <= opts.residual_tolerance {
            return Some(NewtonSolution {
                x,
                residual: rn,
                iterations: it,
            });
        }
        let jac = jacobian::<M, N, F>(&f, &x, opts.fd_step)?;
        let rhs = DVector::<f64>::from_row_slice(&r);
        let svd = jac.svd(true, true);
        let step = svd.solve(&rhs, 1e-300).ok()?;
        let mut lambda = 1.0;
        let step_len = step.norm();
        if !step_len.is_finite() {
            return None;
        }
        if step_len > opts.max_step {
            lambda = opts.max_step / step_len;
        }
        let mut accepted = false;
        for _ in 0..30 {
            let mut xn = x;
            for k in 0..N {
                xn[k] -= lambda * step[k];
            }
            if let Some(rnew) = f(&xn) {
                let nn = norm(&rnew);
                if nn.is_finite() && (nn < rn || nn <= opts.residual_tolerance) {
                    x = xn;
                    r = rnew;
                    rn = nn;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        let scale = x.iter().map(|a| a.abs()).fold(1.0, f64::max);
        if !accepted || lambda * step_len <= opts.step_tolerance * scale {
            // No further progress possible at this precision.
            return Some(NewtonSolution {
                x,
                residual: rn,
                iterations: it + 1,
            });
        }
    }
    Some(NewtonSolution {
        x,
        residual: rn,
        iterations: opts.max_iterations,
    })
}

/// Plain complex Newton iteration on a holomorphic function given its
/// Newton ratio `h/h'`.
pub fn complex_newton<F>(ratio: F, z0: Complex64, max_iterations: usize, tol: f64) -> Option<Complex64>
where
    F: Fn(Complex64) -> Complex64,
{
    let mut z = z0;
    for _ in 0..max_iterations {
        let step = ratio(z);
        if !step.re.is_finite() || !step.im.is_finite() {
            return None;
        }
        z -= step;
        if step.norm() <= tol * z.norm().max(1.0) {
            return Some(z);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aberth_finds_roots_of_unity() {
        let roots = polynomial_roots(
            &[
                Complex64::new(-1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
            ],
            1e-14,
        );
        assert_eq!(roots.len(), 5);
        for r in roots {
            assert!((r.powu(5) - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn newton_real_circle_line() {
        let sol = newton_real(
            |x: &[f64; 2]| Some([x[0] * x[0] + x[1] * x[1] - 1.0, x[0] - x[1]]),
            [1.0, 0.2],
            NewtonOptions::default(),
        )
        .unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((sol.x[0] - s).abs() < 1e-12 && (sol.x[1] - s).abs() < 1e-12);
    }

    #[test]
    fn gauss_newton_consistent_overdetermined() {
        let sol = gauss_newton::<3, 2, _>(
            |x: &[f64; 2]| Some([x[0] - 1.0, x[1] + 2.0, x[0] * x[1] + 2.0]),
            [0.0, 0.0],
            NewtonOptions::default(),
        )
        .unwrap();
        assert!((sol.x[0] - 1.0).abs() < 1e-10 && (sol.x[1] + 2.0).abs() < 1e-10);
    }
}
