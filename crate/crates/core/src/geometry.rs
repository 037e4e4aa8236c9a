//! Shell problem data and the critical-exponent taxonomy.
//!
//! The shell is `{(y, z) in R^(m+1) x R^(N-m-1) : a < |y| < b}`. Functions
//! invariant under `O(m+1) x O(N-m-1)` reduce to a weighted problem on the
//! strip `(a, b) x (0, inf)^d` with `d = N - m - 1`.

use std::cmp::Ordering;
use std::fmt;

use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};

/// Problem data `(N, m, a, b, p)`, validated at construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShellConfig {
    n: u32,
    m: u32,
    a: f64,
    b: f64,
    p: f64,
}

impl ShellConfig {
    pub fn new(n: u32, m: u32, a: f64, b: f64, p: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain(format!("dimension N = {n} must be at least 2")));
        }
        if m > n - 1 {
            return Err(Error::domain(format!("m = {m} must satisfy 0 <= m <= N - 1 = {}", n - 1)));
        }
        if !(a.is_finite() && b.is_finite() && a > 0.0 && b > a) {
            return Err(Error::domain(format!("radii must satisfy 0 < a < b < inf, got a = {a}, b = {b}")));
        }
        if !(p.is_finite() && p > 2.0) {
            return Err(Error::domain(format!("exponent p = {p} must be finite and > 2")));
        }
        Ok(ShellConfig { n, m, a, b, p })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Same shell with a different exponent.
    pub fn with_p(&self, p: f64) -> Result<Self> {
        ShellConfig::new(self.n, self.m, self.a, self.b, p)
    }

    /// Radii scaled by `lambda > 0`.
    pub fn scaled(&self, lambda: f64) -> Result<Self> {
        ShellConfig::new(self.n, self.m, lambda * self.a, lambda * self.b, self.p)
    }

    /// `d = N - m - 1`, the dimension of the `z` factor.
    pub fn reduced_dimension(&self) -> u32 {
        self.n - self.m - 1
    }

    pub fn critical_exponent(&self) -> CriticalExponent {
        // validated at construction
        critical_exponent(self.n, self.m).expect("valid shell")
    }

    pub fn classify(&self) -> ExponentRegime {
        classify_regime(self)
    }
}

/// `2*_{N,m}`: finite `2(N-m)/(N-m-2)` or infinite. Never a sentinel float.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalExponent {
    Finite(f64),
    Infinite,
}

impl CriticalExponent {
    /// Exact value as a ratio of integers, `None` when infinite.
    pub fn exact(n: u32, m: u32) -> Option<Ratio<i64>> {
        if n < 2 || m > n - 1 || m + 2 >= n {
            return None;
        }
        let k = i64::from(n - m);
        Some(Ratio::new(2 * k, k - 2))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, CriticalExponent::Finite(_))
    }

    /// Total order of `p` against the exponent.
    pub fn compare(&self, p: f64) -> Ordering {
        match *self {
            CriticalExponent::Infinite => Ordering::Less,
            CriticalExponent::Finite(c) => p.partial_cmp(&c).unwrap_or(Ordering::Greater),
        }
    }

    pub fn as_f64(&self) -> f64 {
        match *self {
            CriticalExponent::Finite(c) => c,
            CriticalExponent::Infinite => f64::INFINITY,
        }
    }
}

impl fmt::Display for CriticalExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CriticalExponent::Finite(c) => write!(f, "{c}"),
            CriticalExponent::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Subcritical => "subcritical",
            Regime::Critical => "critical",
            Regime::Supercritical => "supercritical",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentRegime {
    pub critical_exponent: CriticalExponent,
    pub regime: Regime,
}

pub fn critical_exponent(n: u32, m: u32) -> Result<CriticalExponent> {
    if n < 2 || m > n - 1 {
        return Err(Error::domain(format!("need N >= 2 and 0 <= m <= N - 1, got N = {n}, m = {m}")));
    }
    if m + 2 >= n {
        return Ok(CriticalExponent::Infinite);
    }
    let k = f64::from(n - m);
    Ok(CriticalExponent::Finite(2.0 * k / (k - 2.0)))
}

/// Ties `p = 2*_{N,m}` are classified critical.
pub fn classify_regime(cfg: &ShellConfig) -> ExponentRegime {
    let critical_exponent = cfg.critical_exponent();
    let regime = match critical_exponent.compare(cfg.p) {
        Ordering::Less => Regime::Subcritical,
        Ordering::Equal => Regime::Critical,
        Ordering::Greater => Regime::Supercritical,
    };
    ExponentRegime { critical_exponent, regime }
}

pub fn reduced_dimension(cfg: &ShellConfig) -> u32 {
    cfg.reduced_dimension()
}

/// Surface area `|S^k|` of the unit sphere in `R^(k+1)`.
pub fn sphere_area(k: u32) -> f64 {
    use std::f64::consts::PI;
    match k {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / f64::from(k - 1) * sphere_area(k - 2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critical_exponent_values() {
        assert_eq!(critical_exponent(4, 1).unwrap(), CriticalExponent::Finite(6.0));
        assert_eq!(critical_exponent(6, 2).unwrap(), CriticalExponent::Finite(4.0));
        assert_eq!(critical_exponent(5, 3).unwrap(), CriticalExponent::Infinite);
        assert_eq!(critical_exponent(5, 4).unwrap(), CriticalExponent::Infinite);
        assert!(critical_exponent(1, 0).is_err());
        assert!(critical_exponent(4, 4).is_err());
    }

    #[test]
    fn exact_critical_exponent_matches_float() {
        for n in 2..=10u32 {
            for m in 0..n {
                match (critical_exponent(n, m).unwrap(), CriticalExponent::exact(n, m)) {
                    (CriticalExponent::Finite(c), Some(r)) => {
                        assert_eq!(c, *r.numer() as f64 / *r.denom() as f64)
                    }
                    (CriticalExponent::Infinite, None) => {}
                    other => panic!("mismatch at N = {n}, m = {m}: {other:?}"),
                }
            }
        }
    }

    #[test]
    fn regime_examples() {
        let r = |n, m, p| ShellConfig::new(n, m, 1.0, 2.0, p).unwrap().classify().regime;
        assert_eq!(r(4, 1, 3.0), Regime::Subcritical);
        assert_eq!(r(5, 1, 4.0), Regime::Critical);
        assert_eq!(r(5, 1, 6.0), Regime::Supercritical);
        assert_eq!(r(3, 1, 100.0), Regime::Subcritical);
    }

    #[test]
    fn reduced_dimension_examples() {
        let d = |n, m| ShellConfig::new(n, m, 1.0, 2.0, 3.0).unwrap().reduced_dimension();
        assert_eq!(d(4, 1), 2);
        assert_eq!(d(3, 1), 1);
        assert_eq!(d(3, 2), 0);
    }

    #[test]
    fn construction_rejects_bad_data() {
        assert!(ShellConfig::new(3, 1, 0.0, 2.0, 3.0).is_err());
        assert!(ShellConfig::new(3, 1, 2.0, 1.0, 3.0).is_err());
        assert!(ShellConfig::new(3, 1, 1.0, f64::INFINITY, 3.0).is_err());
        assert!(ShellConfig::new(3, 1, 1.0, 2.0, 2.0).is_err());
        assert!(ShellConfig::new(3, 3, 1.0, 2.0, 3.0).is_err());
    }

    #[test]
    fn critical_exponent_increases_with_m() {
        for n in 3..=12u32 {
            let mut prev = 0.0;
            for m in 0..n - 2 {
                let c = critical_exponent(n, m).unwrap().as_f64();
                assert!(c > prev);
                prev = c;
            }
        }
    }

    #[test]
    fn sphere_areas() {
        use std::f64::consts::PI;
        assert_eq!(sphere_area(0), 2.0);
        assert!((sphere_area(2) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 2.0 * PI * PI).abs() < 1e-13);
    }

    proptest::proptest! {
        #[test]
        fn regime_is_scale_invariant(n in 2u32..10, m_frac in 0.0f64..1.0, p in 2.01f64..20.0, lambda in 0.01f64..100.0) {
            let m = ((n - 1) as f64 * m_frac).floor() as u32;
            let cfg = ShellConfig::new(n, m, 1.0, 2.0, p).unwrap();
            let scaled = cfg.scaled(lambda).unwrap();
            proptest::prop_assert_eq!(cfg.classify(), scaled.classify());
        }
    }
}
