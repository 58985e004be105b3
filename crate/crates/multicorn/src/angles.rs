//! Exact angle dynamics under `t ↦ −d·t (mod 1)`, orbit portraits and the
//! counting formulas for periodic angles and hyperbolic components.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AngleError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("cannot parse angle `{0}` (expected p/q)")]
    Parse(String),
    #[error("inconsistent portrait: {0}")]
    InconsistentPortrait(String),
    #[error("angles are not in circular order α1 < θ1 < θ2 < α2")]
    OrderingViolation,
    #[error("empty seed set")]
    EmptySeeds,
}

/// A rational angle in `[0, 1)` stored in lowest terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Angle {
    num: BigUint,
    den: BigUint,
}

impl Angle {
    /// `num/den` reduced modulo 1.
    pub fn new(num: impl Into<BigUint>, den: impl Into<BigUint>) -> Result<Self, AngleError> {
        let den = den.into();
        if den.is_zero() {
            return Err(AngleError::ZeroDenominator);
        }
        let num = num.into() % &den;
        Ok(Self::reduced(num, den))
    }

    /// Any rational (possibly negative) reduced modulo 1.
    pub fn from_rational(r: &BigRational) -> Self {
        let den = r.denom().clone();
        let num = r.numer().mod_floor(&den);
        Self::reduced(
            num.to_biguint().expect("nonnegative after mod_floor"),
            den.to_biguint().expect("positive denominator"),
        )
    }

    fn reduced(num: BigUint, den: BigUint) -> Self {
        let g = num.gcd(&den);
        if num.is_zero() {
            return Self {
                num,
                den: BigUint::one(),
            };
        }
        Self {
            num: num / &g,
            den: den / &g,
        }
    }

    pub fn zero() -> Self {
        Self {
            num: BigUint::zero(),
            den: BigUint::one(),
        }
    }

    pub fn numerator(&self) -> &BigUint {
        &self.num
    }

    pub fn denominator(&self) -> &BigUint {
        &self.den
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(
            BigInt::from_biguint(Sign::Plus, self.num.clone()),
            BigInt::from_biguint(Sign::Plus, self.den.clone()),
        )
    }

    pub fn to_f64(&self) -> f64 {
        let r = self.to_rational();
        r.to_f64().unwrap_or_else(|| {
            // Huge denominators: scale down.
            let bits = self.den.bits().saturating_sub(60);
            let n = (&self.num >> bits).to_f64().unwrap_or(0.0);
            let d = (&self.den >> bits).to_f64().unwrap_or(1.0);
            n / d
        })
    }

    /// `m·t mod 1` for any integer `m`.
    pub fn times(&self, m: i64) -> Angle {
        let n = BigInt::from_biguint(Sign::Plus, self.num.clone()) * BigInt::from(m);
        let d = BigInt::from_biguint(Sign::Plus, self.den.clone());
        let r = n.mod_floor(&d).to_biguint().expect("nonnegative");
        Self::reduced(r, self.den.clone())
    }

    /// `−d·t mod 1`.
    pub fn anti_multiply(&self, d: u32) -> Angle {
        self.times(-(d as i64))
    }

    /// `(−d)^n·t mod 1`.
    pub fn anti_multiply_pow(&self, d: u32, n: u64) -> Angle {
        let m = BigUint::from(d).modpow(&BigUint::from(n), &self.den);
        let r = (&self.num * m) % &self.den;
        let r = if n % 2 == 1 && !r.is_zero() { &self.den - r } else { r };
        Self::reduced(r, self.den.clone())
    }

    /// Minimal `(preperiod, period)` under `t ↦ −d·t`.
    pub fn exact_period(&self, d: u32) -> (usize, usize) {
        let orbit = self.orbit(d);
        (orbit.preperiod, orbit.period)
    }

    /// Forward orbit up to its first repetition.
    pub fn orbit(&self, d: u32) -> AngleOrbit {
        let mut seen: HashMap<Angle, usize> = HashMap::new();
        let mut angles = Vec::new();
        let mut t = self.clone();
        loop {
            if let Some(&i) = seen.get(&t) {
                let period = angles.len() - i;
                return AngleOrbit {
                    angles,
                    period,
                    preperiod: i,
                };
            }
            seen.insert(t.clone(), angles.len());
            angles.push(t.clone());
            t = t.anti_multiply(d);
        }
    }

    /// Length of the counter-clockwise arc from `self` to `other`, in
    /// `(0, 1]` (a full turn when the endpoints coincide).
    pub fn arc_length_to(&self, other: &Angle) -> BigRational {
        let diff = other.to_rational() - self.to_rational();
        if diff.is_positive() {
            diff
        } else {
            diff + BigRational::one()
        }
    }

    /// Whether `self` lies strictly inside the open counter-clockwise arc
    /// `(a, b)`.
    pub fn in_open_arc(&self, a: &Angle, b: &Angle) -> bool {
        if self == a || self == b {
            return false;
        }
        if a == b {
            return true;
        }
        a.arc_length_to(self) < a.arc_length_to(b)
    }
}

impl PartialOrd for Angle {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Angle {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.num * &other.den).cmp(&(&other.num * &self.den))
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

impl FromStr for Angle {
    type Err = AngleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || AngleError::Parse(s.to_string());
        let s = s.trim();
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let n: BigInt = n.parse().map_err(|_| err())?;
        let d: BigInt = d.parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(AngleError::ZeroDenominator);
        }
        Ok(Angle::from_rational(&BigRational::new(n, d)))
    }
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Convenience constructor for small fractions.
pub fn angle(num: u64, den: u64) -> Angle {
    Angle::new(num, den).expect("nonzero denominator")
}

/// Forward orbit of an angle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AngleOrbit {
    pub angles: Vec<Angle>,
    pub period: usize,
    pub preperiod: usize,
}

/// Which multiplication map to count periodic points of.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MapSign {
    /// `t ↦ d·t`
    Plus,
    /// `t ↦ −d·t`
    Minus,
}

/// Möbius function of a small positive integer.
pub fn mobius(n: u64) -> i32 {
    assert!(n > 0);
    let mut n = n;
    let mut result = 1;
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            n /= p;
            if n.is_multiple_of(p) {
                return 0;
            }
            result = -result;
        }
        p += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

fn divisors(n: u64) -> Vec<u64> {
    (1..=n).filter(|j| n.is_multiple_of(*j)).collect()
}

/// `|(±d)^j − 1|`: the number of angles whose period divides `j`.
pub fn count_period_dividing(d: u32, j: u32, sign: MapSign) -> BigUint {
    let m = match sign {
        MapSign::Plus => BigInt::from(d),
        MapSign::Minus => -BigInt::from(d),
    };
    (num_traits::pow(m, j as usize) - BigInt::one())
        .abs()
        .to_biguint()
        .expect("absolute value")
}

/// Number of angles of exact period `k` under `t ↦ ±d·t`, by Möbius
/// inversion.
pub fn count_exact_periodic(d: u32, k: u32, sign: MapSign) -> BigUint {
    assert!(k >= 1, "period must be positive");
    let mut total = BigInt::zero();
    for j in divisors(k as u64) {
        let mu = mobius(k as u64 / j);
        if mu != 0 {
            total += BigInt::from(mu)
                * BigInt::from_biguint(Sign::Plus, count_period_dividing(d, j as u32, sign));
        }
    }
    total.to_biguint().expect("counts are nonnegative")
}

/// `s_{d,k}`: number of period-`k` hyperbolic components of the multibrot
/// set of degree `d`.
pub fn multibrot_count(d: u32, k: u32) -> BigUint {
    match k {
        0 => panic!("period must be positive"),
        1 => BigUint::one(),
        2 => BigUint::from(d - 1),
        _ => count_exact_periodic(d, k, MapSign::Minus) / BigUint::from(d),
    }
}

/// `s*_{d,k}`: number of period-`k` hyperbolic components of the multicorn
/// of degree `d`.
pub fn multicorn_count(d: u32, k: u32) -> BigUint {
    let s = multibrot_count(d, k);
    if k % 4 == 2 {
        s + BigUint::from(2u32) * multibrot_count(d, k / 2)
    } else {
        s
    }
}

/// Orbit portrait: a cycle of finite angle sets permuted by `t ↦ −d·t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitPortrait {
    pub angle_sets: Vec<Vec<Angle>>,
    /// Open counter-clockwise arc; for single-ray orbits it degenerates to
    /// the full circle based at the seed angle.
    pub characteristic_arc: (Angle, Angle),
    pub ray_period: usize,
}

impl OrbitPortrait {
    pub fn period(&self) -> usize {
        self.angle_sets.len()
    }

    pub fn characteristic_angles(&self) -> [&Angle; 2] {
        [&self.characteristic_arc.0, &self.characteristic_arc.1]
    }

    pub fn is_trivial(&self) -> bool {
        self.angle_sets.iter().all(|s| s.len() == 1)
    }
}

fn complementary_arcs(set: &[Angle]) -> Vec<(Angle, Angle)> {
    let n = set.len();
    (0..n).map(|i| (set[i].clone(), set[(i + 1) % n].clone())).collect()
}

/// Closes a set of periodic angles under `t ↦ −d·t` and validates it as an
/// orbit portrait.
pub fn build_portrait(seeds: &[Angle], d: u32) -> Result<OrbitPortrait, AngleError> {
    if seeds.is_empty() {
        return Err(AngleError::EmptySeeds);
    }
    let bad = |m: String| Err(AngleError::InconsistentPortrait(m));
    let first: BTreeSet<Angle> = seeds.iter().cloned().collect();
    let mut ray_period = None;
    for t in &first {
        let (pre, per) = t.exact_period(d);
        if pre != 0 {
            return bad(format!("{t} is not periodic"));
        }
        match ray_period {
            None => ray_period = Some(per),
            Some(r) if r != per => return bad(format!("ray periods {r} and {per} differ")),
            _ => {}
        }
    }
    let ray_period = ray_period.expect("nonempty");

    let mut sets: Vec<BTreeSet<Angle>> = vec![first.clone()];
    loop {
        let cur = sets.last().expect("nonempty");
        let next: BTreeSet<Angle> = cur.iter().map(|t| t.anti_multiply(d)).collect();
        if next.len() != cur.len() {
            return bad("forward images collide".to_string());
        }
        if next == first {
            break;
        }
        for s in &sets {
            if s != &next && !s.is_disjoint(&next) {
                return bad("angle sets overlap without coinciding".to_string());
            }
        }
        if sets.len() > ray_period {
            return bad("sets fail to cycle".to_string());
        }
        sets.push(next);
    }
    let sets: Vec<Vec<Angle>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();

    // Unlinkedness: every other set lies in a single complementary arc.
    for (i, a) in sets.iter().enumerate() {
        if a.len() < 2 {
            continue;
        }
        let arcs = complementary_arcs(a);
        for (j, b) in sets.iter().enumerate() {
            if i == j {
                continue;
            }
            let arc_of = |t: &Angle| arcs.iter().position(|(x, y)| t.in_open_arc(x, y));
            let first_arc = arc_of(&b[0]);
            if first_arc.is_none() || b.iter().any(|t| arc_of(t) != first_arc) {
                return bad(format!("sets {i} and {j} are linked"));
            }
        }
    }

    let characteristic_arc = if sets[0].len() == 1 {
        (sets[0][0].clone(), sets[0][0].clone())
    } else {
        let mut best: Option<(BigRational, (Angle, Angle))> = None;
        for s in &sets {
            for (x, y) in complementary_arcs(s) {
                let len = x.arc_length_to(&y);
                if best.as_ref().is_none_or(|(b, _)| len < *b) {
                    best = Some((len, (x, y)));
                }
            }
        }
        best.expect("nonempty").1
    };

    Ok(OrbitPortrait {
        angle_sets: sets,
        characteristic_arc,
        ray_period,
    })
}

/// Checks `(1+d^k)(θ1−α1) = α2−α1 = (1+d^k)(α2−θ2)` exactly.
pub fn check_root_arc_relation(
    theta1: &Angle,
    theta2: &Angle,
    alpha1: &Angle,
    alpha2: &Angle,
    d: u32,
    k: u32,
) -> Result<bool, AngleError> {
    if !(alpha1 < theta1 && theta1 < theta2 && theta2 < alpha2) {
        return Err(AngleError::OrderingViolation);
    }
    let m = BigRational::from_integer(num_traits::pow(BigInt::from(d), k as usize) + BigInt::one());
    let (t1, t2, a1, a2) = (
        theta1.to_rational(),
        theta2.to_rational(),
        alpha1.to_rational(),
        alpha2.to_rational(),
    );
    let width = &a2 - &a1;
    Ok(&m * (&t1 - &a1) == width && &m * (&a2 - &t2) == width)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anti_multiply_examples() {
        assert_eq!(angle(4, 9).anti_multiply(2), angle(1, 9));
        assert_eq!(Angle::zero().anti_multiply(5), Angle::zero());
        assert_eq!(angle(1, 3).anti_multiply(2), angle(1, 3));
    }

    #[test]
    fn period_examples() {
        assert_eq!(angle(4, 9).exact_period(2), (0, 3));
        assert_eq!(angle(1, 2).exact_period(2), (1, 1));
        assert_eq!(angle(3, 7).exact_period(2), (0, 6));
        let orbit: Vec<String> = angle(3, 7).orbit(2).angles.iter().map(|a| a.to_string()).collect();
        assert_eq!(orbit, ["3/7", "1/7", "5/7", "4/7", "6/7", "2/7"]);
    }

    #[test]
    fn parse_and_display() {
        let a: Angle = "10/15".parse().unwrap();
        assert_eq!(a.to_string(), "2/3");
        let b: Angle = "-1/3".parse().unwrap();
        assert_eq!(b, angle(2, 3));
        assert!("1/0".parse::<Angle>().is_err());
        assert!("x".parse::<Angle>().is_err());
    }

    #[test]
    fn count_examples() {
        assert_eq!(count_exact_periodic(2, 3, MapSign::Minus), BigUint::from(6u32));
        assert_eq!(count_exact_periodic(2, 2, MapSign::Minus), BigUint::zero());
        assert_eq!(count_exact_periodic(2, 2, MapSign::Plus), BigUint::from(2u32));
        assert_eq!(multibrot_count(2, 3), BigUint::from(3u32));
        assert_eq!(multicorn_count(2, 3), BigUint::from(3u32));
        assert_eq!(multicorn_count(2, 2), BigUint::from(3u32));
        assert_eq!(multibrot_count(2, 6), BigUint::from(27u32));
        assert_eq!(multicorn_count(2, 6), BigUint::from(33u32));
        assert_eq!(multicorn_count(3, 1), BigUint::one());
    }

    #[test]
    fn mobius_values() {
        let expect = [1, -1, -1, 0, -1, 1, -1, 0, 0, 1, -1, 0];
        for (n, m) in (1..=12).zip(expect) {
            assert_eq!(mobius(n), m, "μ({n})");
        }
    }

    #[test]
    fn portrait_examples() {
        let p = build_portrait(&[angle(3, 7), angle(4, 7)], 2).unwrap();
        assert_eq!(p.period(), 3);
        assert!(p.angle_sets.iter().all(|s| s.len() == 2));
        assert_eq!(p.characteristic_arc, (angle(3, 7), angle(4, 7)));

        let p = build_portrait(&[angle(4, 9)], 2).unwrap();
        assert!(p.is_trivial());
        assert_eq!(
            p.angle_sets,
            vec![vec![angle(4, 9)], vec![angle(1, 9)], vec![angle(7, 9)]]
        );

        let p = build_portrait(&[Angle::zero()], 2).unwrap();
        assert_eq!(p.period(), 1);
    }

    #[test]
    fn portrait_rejects_bad_seeds() {
        assert!(build_portrait(&[angle(1, 2)], 2).is_err());
        assert!(build_portrait(&[angle(1, 3), angle(3, 7)], 2).is_err());
        // 1/7 and 3/7 sit in one orbit: images collide with the seed set.
        assert!(build_portrait(&[angle(1, 7), angle(3, 7)], 2).is_err());
        assert!(build_portrait(&[], 2).is_err());
    }

    #[test]
    fn root_arc_relation() {
        let ok = check_root_arc_relation(&angle(4, 9), &angle(5, 9), &angle(3, 7), &angle(4, 7), 2, 3);
        assert_eq!(ok, Ok(true));
        let t1 = Angle::from_rational(&(angle(4, 9).to_rational() + angle(1, 63).to_rational()));
        let bad = check_root_arc_relation(&t1, &angle(5, 9), &angle(3, 7), &angle(4, 7), 2, 3);
        assert_eq!(bad, Ok(false));
        let order = check_root_arc_relation(&angle(5, 9), &angle(4, 9), &angle(3, 7), &angle(4, 7), 2, 3);
        assert_eq!(order, Err(AngleError::OrderingViolation));
    }
}
