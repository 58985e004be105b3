//! Truncated power series in one complex variable.
//!
//! Used to expand holomorphic return maps around a fixed point without
//! finite differences.

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Power series `Σ a_j w^j` truncated after `w^order`.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    coeffs: Vec<Complex64>,
}

impl Series {
    pub fn constant(value: Complex64, order: usize) -> Self {
        let mut coeffs = vec![ZERO; order + 1];
        coeffs[0] = value;
        Self { coeffs }
    }

    /// The series of `z0 + w`.
    pub fn variable(z0: Complex64, order: usize) -> Self {
        let mut s = Self::constant(z0, order);
        if order >= 1 {
            s.coeffs[1] = ONE;
        }
        s
    }

    pub fn from_coeffs(mut coeffs: Vec<Complex64>, order: usize) -> Self {
        coeffs.resize(order + 1, ZERO);
        Self { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn coeff(&self, j: usize) -> Complex64 {
        self.coeffs.get(j).copied().unwrap_or(ZERO)
    }

    pub fn add_scalar(mut self, v: Complex64) -> Self {
        self.coeffs[0] += v;
        self
    }

    pub fn sub(&self, other: &Series) -> Series {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Series { coeffs }
    }

    pub fn mul(&self, other: &Series) -> Series {
        let n = self.coeffs.len().min(other.coeffs.len());
        let mut out = vec![ZERO; n];
        for (i, a) in self.coeffs.iter().enumerate().take(n) {
            if *a == ZERO {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(n - i) {
                out[i + j] += a * b;
            }
        }
        Series { coeffs: out }
    }

    pub fn powu(&self, e: u32) -> Series {
        let order = self.order();
        let mut result = Series::constant(ONE, order);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Multiplicative inverse; requires a nonzero constant term.
    pub fn recip(&self) -> Option<Series> {
        let a0 = self.coeffs[0];
        if a0 == ZERO {
            return None;
        }
        let n = self.coeffs.len();
        let mut out = vec![ZERO; n];
        out[0] = a0.inv();
        for k in 1..n {
            let mut acc = ZERO;
            for j in 1..=k {
                acc += self.coeffs[j] * out[k - j];
            }
            out[k] = -acc * out[0];
        }
        Some(Series { coeffs: out })
    }

    pub fn conj(&self) -> Series {
        Series {
            coeffs: self.coeffs.iter().map(|a| a.conj()).collect(),
        }
    }

    pub fn eval(&self, w: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, a| acc * w + a)
    }
}

/// A holomorphic self-map that can be evaluated and expanded in a Taylor
/// series about any point.
pub trait HolomorphicMap: Sync {
    fn eval(&self, z: Complex64) -> Complex64;

    /// Coefficients `a_0..=a_order` of `F(z0 + w)`.
    fn taylor(&self, z0: Complex64, order: usize) -> Vec<Complex64>;

    /// `F(z0 + w) − z0`; implementors may evaluate this without the
    /// cancellation of the naive difference when `w` is small.
    fn displacement(&self, z0: Complex64, w: Complex64) -> Complex64 {
        self.eval(z0 + w) - z0
    }

    fn derivative(&self, z: Complex64) -> Complex64 {
        self.taylor(z, 1)[1]
    }
}

/// Plain polynomial given by ascending coefficients.
#[derive(Clone, Debug)]
pub struct Polynomial {
    pub coeffs: Vec<Complex64>,
}

impl HolomorphicMap for Polynomial {
    fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, a| acc * z + a)
    }

    fn taylor(&self, z0: Complex64, order: usize) -> Vec<Complex64> {
        let w = Series::variable(z0, order);
        let mut acc = Series::constant(ZERO, order);
        for a in self.coeffs.iter().rev() {
            acc = acc.mul(&w).add_scalar(*a);
        }
        acc.into_coeffs()
    }
}

/// `z ↦ λ z`, handy for index checks.
#[derive(Clone, Copy, Debug)]
pub struct Linear(pub Complex64);

impl HolomorphicMap for Linear {
    fn eval(&self, z: Complex64) -> Complex64 {
        self.0 * z
    }

    fn taylor(&self, z0: Complex64, order: usize) -> Vec<Complex64> {
        let mut v = vec![ZERO; order + 1];
        v[0] = self.0 * z0;
        if order >= 1 {
            v[1] = self.0;
        }
        v
    }
}

/// The parabolic model `w ↦ w / (1 − w)`, whose Fatou coordinate is `−1/w`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ParabolicModel;

impl HolomorphicMap for ParabolicModel {
    fn eval(&self, w: Complex64) -> Complex64 {
        w / (ONE - w)
    }

    fn taylor(&self, z0: Complex64, order: usize) -> Vec<Complex64> {
        let w = Series::variable(z0, order);
        let denom = Series::constant(ONE, order).sub(&w);
        w.mul(&denom.recip().expect("pole of the model map"))
            .into_coeffs()
    }
}
