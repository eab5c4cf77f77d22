//! Real trigonometric polynomials on the unit circle.
//!
//! A [`PeriodicProfile`] stores
//! `f(x) = c0 + Σ_{k=1..K} (cos_k cos 2πkx + sin_k sin 2πkx)`
//! and is the common currency of every other module: the Toda profiles α and
//! β, the Hill potentials, and the KdV states once converted back from the
//! grid.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on the degree of user-supplied profiles.
pub const DEFAULT_MAX_DEGREE: usize = 64;

/// Real trigonometric polynomial of period 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileJson", into = "ProfileJson")]
pub struct PeriodicProfile {
    c0: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileJson {
    #[serde(default)]
    c0: f64,
    #[serde(default)]
    cos: Vec<f64>,
    #[serde(default)]
    sin: Vec<f64>,
}

impl TryFrom<ProfileJson> for PeriodicProfile {
    type Error = Error;

    fn try_from(raw: ProfileJson) -> Result<Self> {
        PeriodicProfile::from_fourier(raw.c0, raw.cos, raw.sin)
    }
}

impl From<PeriodicProfile> for ProfileJson {
    fn from(p: PeriodicProfile) -> Self {
        ProfileJson { c0: p.c0, cos: p.cos, sin: p.sin }
    }
}

impl PeriodicProfile {
    /// Builds a profile from its Fourier series; index `k-1` of `cos`/`sin`
    /// holds the coefficient of frequency `k`.
    pub fn from_fourier(c0: f64, cos: Vec<f64>, sin: Vec<f64>) -> Result<Self> {
        Self::from_fourier_capped(c0, cos, sin, DEFAULT_MAX_DEGREE)
    }

    pub fn from_fourier_capped(c0: f64, cos: Vec<f64>, sin: Vec<f64>, cap: usize) -> Result<Self> {
        if !c0.is_finite() {
            return Err(Error::NonFiniteCoefficient { series: "constant", index: 0 });
        }
        if let Some(index) = cos.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFiniteCoefficient { series: "cos", index });
        }
        if let Some(index) = sin.iter().position(|c| !c.is_finite()) {
            return Err(Error::NonFiniteCoefficient { series: "sin", index });
        }
        let mut p = PeriodicProfile { c0, cos, sin };
        p.trim();
        if p.degree() > cap {
            return Err(Error::DegreeTooLarge { degree: p.degree(), cap });
        }
        Ok(p)
    }

    pub fn zero() -> Self {
        PeriodicProfile { c0: 0.0, cos: Vec::new(), sin: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        PeriodicProfile { c0: c, cos: Vec::new(), sin: Vec::new() }
    }

    /// `amplitude · cos 2πkx`.
    pub fn cos_mode(k: usize, amplitude: f64) -> Self {
        let mut p = Self::zero();
        p.set_mode(k, amplitude, 0.0);
        p
    }

    /// `amplitude · sin 2πkx`.
    pub fn sin_mode(k: usize, amplitude: f64) -> Self {
        let mut p = Self::zero();
        p.set_mode(k, 0.0, amplitude);
        p
    }

    fn set_mode(&mut self, k: usize, c: f64, s: f64) {
        if k == 0 {
            self.c0 = c;
            return;
        }
        if self.cos.len() < k {
            self.cos.resize(k, 0.0);
            self.sin.resize(k, 0.0);
        }
        self.cos[k - 1] = c;
        self.sin[k - 1] = s;
        self.trim();
    }

    fn trim(&mut self) {
        let n = self.cos.len().max(self.sin.len());
        self.cos.resize(n, 0.0);
        self.sin.resize(n, 0.0);
        while let (Some(&c), Some(&s)) = (self.cos.last(), self.sin.last()) {
            if c == 0.0 && s == 0.0 {
                self.cos.pop();
                self.sin.pop();
            } else {
                break;
            }
        }
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn cos_coeffs(&self) -> &[f64] {
        &self.cos
    }

    pub fn sin_coeffs(&self) -> &[f64] {
        &self.sin
    }

    /// Highest frequency with a nonzero coefficient.
    pub fn degree(&self) -> usize {
        self.cos.len()
    }

    pub fn mean(&self) -> f64 {
        self.c0
    }

    pub fn is_mean_zero(&self) -> bool {
        self.c0 == 0.0
    }

    pub fn is_zero(&self) -> bool {
        self.c0 == 0.0 && self.cos.is_empty()
    }

    /// `|c0| + Σ(|cos_k| + |sin_k|)`, an upper bound for `sup |f|`.
    pub fn sup_bound(&self) -> f64 {
        self.c0.abs() + self.cos.iter().chain(&self.sin).map(|c| c.abs()).sum::<f64>()
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        let x = x - x.floor();
        if self.cos.is_empty() {
            return self.c0;
        }
        // Angle-addition recurrence for (cos 2πkx, sin 2πkx).
        let (s1, c1) = (2.0 * PI * x).sin_cos();
        let (mut ck, mut sk) = (c1, s1);
        let mut acc = self.c0;
        for (k, (a, b)) in self.cos.iter().zip(&self.sin).enumerate() {
            if k > 0 && k % 16 == 0 {
                // refresh to stop the recurrence from drifting
                let (s, c) = (2.0 * PI * (k as f64 + 1.0) * x).sin_cos();
                ck = c;
                sk = s;
            }
            acc += a * ck + b * sk;
            let next_c = ck * c1 - sk * s1;
            sk = sk * c1 + ck * s1;
            ck = next_c;
        }
        acc
    }

    /// Derivative `f'(x)`.
    pub fn derivative(&self) -> PeriodicProfile {
        let mut cos = Vec::with_capacity(self.degree());
        let mut sin = Vec::with_capacity(self.degree());
        for (k, (a, b)) in self.cos.iter().zip(&self.sin).enumerate() {
            let w = 2.0 * PI * (k as f64 + 1.0);
            cos.push(w * b);
            sin.push(-w * a);
        }
        let mut p = PeriodicProfile { c0: 0.0, cos, sin };
        p.trim();
        p
    }

    /// Values `f(i/n)` for `i = 0..n`.
    pub fn sample_grid(&self, n: usize) -> Vec<f64> {
        (0..n).map(|i| self.evaluate(i as f64 / n as f64)).collect()
    }

    pub fn scale(&self, factor: f64) -> PeriodicProfile {
        let mut p = PeriodicProfile {
            c0: self.c0 * factor,
            cos: self.cos.iter().map(|c| c * factor).collect(),
            sin: self.sin.iter().map(|c| c * factor).collect(),
        };
        p.trim();
        p
    }

    /// `self·s + other·t`, coefficient-wise.
    pub fn combine(&self, s: f64, other: &PeriodicProfile, t: f64) -> PeriodicProfile {
        let n = self.degree().max(other.degree());
        let get = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
        let mut p = PeriodicProfile {
            c0: s * self.c0 + t * other.c0,
            cos: (0..n).map(|i| s * get(&self.cos, i) + t * get(&other.cos, i)).collect(),
            sin: (0..n).map(|i| s * get(&self.sin, i) + t * get(&other.sin, i)).collect(),
        };
        p.trim();
        p
    }

    /// The profile `x ↦ f(m·x)`: every frequency multiplied by `m`.
    pub fn dilate(&self, m: usize) -> PeriodicProfile {
        assert!(m >= 1, "dilation factor must be positive");
        let n = self.degree() * m;
        let mut cos = vec![0.0; n];
        let mut sin = vec![0.0; n];
        for (k, (a, b)) in self.cos.iter().zip(&self.sin).enumerate() {
            cos[(k + 1) * m - 1] = *a;
            sin[(k + 1) * m - 1] = *b;
        }
        let mut p = PeriodicProfile { c0: self.c0, cos, sin };
        p.trim();
        p
    }

    /// Complex exponential coefficients `f̂_k`, `k = -K..=K`, stored at index `k + K`.
    pub fn complex_coefficients(&self) -> Vec<Complex64> {
        let kmax = self.degree();
        let mut out = vec![Complex64::new(0.0, 0.0); 2 * kmax + 1];
        out[kmax] = Complex64::new(self.c0, 0.0);
        for (k, (a, b)) in self.cos.iter().zip(&self.sin).enumerate() {
            let k = k + 1;
            // a cos + b sin = (a - ib)/2 e^{+} + (a + ib)/2 e^{-}
            out[kmax + k] = Complex64::new(0.5 * a, -0.5 * b);
            out[kmax - k] = Complex64::new(0.5 * a, 0.5 * b);
        }
        out
    }

    /// Discrete Fourier analysis of samples `v_i = f(i/n)`, keeping
    /// frequencies up to `max_degree` (which must be below `n/2`).
    pub fn from_samples(values: &[f64], max_degree: usize) -> Result<PeriodicProfile> {
        let n = values.len();
        if n == 0 || 2 * max_degree >= n {
            return Err(Error::InvalidArgument(format!("cannot resolve degree {max_degree} from {n} samples")));
        }
        let c0 = values.iter().sum::<f64>() / n as f64;
        let mut cos = Vec::with_capacity(max_degree);
        let mut sin = Vec::with_capacity(max_degree);
        for k in 1..=max_degree {
            let (mut a, mut b) = (0.0, 0.0);
            for (i, v) in values.iter().enumerate() {
                // exact index reduction keeps the phase accurate
                let phase = 2.0 * PI * ((k * i) % n) as f64 / n as f64;
                a += v * phase.cos();
                b += v * phase.sin();
            }
            cos.push(2.0 * a / n as f64);
            sin.push(2.0 * b / n as f64);
        }
        PeriodicProfile::from_fourier_capped(c0, cos, sin, max_degree)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cos_profile_values() {
        let p = PeriodicProfile::from_fourier(0.0, vec![1.0], vec![]).unwrap();
        assert_eq!(p.mean(), 0.0);
        assert_abs_diff_eq!(p.evaluate(0.0), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.evaluate(0.25), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.evaluate(1.25), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_and_shifted_profiles() {
        let z = PeriodicProfile::from_fourier(0.0, vec![], vec![]).unwrap();
        assert!(z.is_zero());
        assert_eq!(z.sample_grid(7), vec![0.0; 7]);

        let p = PeriodicProfile::from_fourier(2.0, vec![0.0, 1.0], vec![]).unwrap();
        assert_eq!(p.mean(), 2.0);
        assert_abs_diff_eq!(p.evaluate(0.1), 2.0 + (4.0 * PI * 0.1).cos(), epsilon = 1e-14);
        let g = p.sample_grid(2);
        assert_abs_diff_eq!(g[0], 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(g[1], 3.0, epsilon = 1e-14);
    }

    #[test]
    fn sample_grid_cos() {
        let p = PeriodicProfile::cos_mode(1, 1.0);
        let g = p.sample_grid(4);
        for (got, want) in g.iter().zip([1.0, 0.0, -1.0, 0.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
    }

    #[test]
    fn rejects_non_finite() {
        let err = PeriodicProfile::from_fourier(0.0, vec![1.0, f64::NAN], vec![]).unwrap_err();
        assert_eq!(err, Error::NonFiniteCoefficient { series: "cos", index: 1 });
        let err = PeriodicProfile::from_fourier(0.0, vec![], vec![0.0, 0.0, f64::INFINITY]).unwrap_err();
        assert_eq!(err, Error::NonFiniteCoefficient { series: "sin", index: 2 });
    }

    #[test]
    fn degree_cap() {
        let err = PeriodicProfile::from_fourier(0.0, vec![1.0; 65], vec![]).unwrap_err();
        assert_eq!(err, Error::DegreeTooLarge { degree: 65, cap: 64 });
        assert!(PeriodicProfile::from_fourier_capped(0.0, vec![1.0; 65], vec![], 100).is_ok());
    }

    #[test]
    fn json_fragment() {
        let p: PeriodicProfile = serde_json::from_str(r#"{"c0": 0.0, "cos": [1.0, 0.0], "sin": [0.5]}"#).unwrap();
        assert_eq!(p.cos_coeffs(), &[1.0]);
        assert_eq!(p.sin_coeffs(), &[0.5]);
        assert!(serde_json::from_str::<PeriodicProfile>(r#"{"c0": 0.0, "tan": [1.0]}"#).is_err());
        assert!(serde_json::from_str::<PeriodicProfile>(r#"{"cos": [1e999]}"#).is_err());
    }

    #[test]
    fn derivative_and_dilation() {
        let p = PeriodicProfile::from_fourier(0.3, vec![1.0, 0.5], vec![0.2]).unwrap();
        let d = p.derivative();
        let h = 1e-6;
        for x in [0.1, 0.37, 0.8] {
            let fd = (p.evaluate(x + h) - p.evaluate(x - h)) / (2.0 * h);
            assert_abs_diff_eq!(d.evaluate(x), fd, epsilon = 1e-6);
            assert_abs_diff_eq!(p.dilate(2).evaluate(x), p.evaluate(2.0 * x), epsilon = 1e-14);
        }
    }

    #[test]
    fn samples_roundtrip() {
        let p = PeriodicProfile::from_fourier(0.0, vec![1.0, 0.0, -0.25], vec![0.5, 0.1]).unwrap();
        let q = PeriodicProfile::from_samples(&p.sample_grid(32), 10).unwrap();
        assert_abs_diff_eq!(q.c0(), 0.0, epsilon = 1e-15);
        for x in [0.0, 0.123, 0.5, 0.9] {
            assert_abs_diff_eq!(q.evaluate(x), p.evaluate(x), epsilon = 1e-14);
        }
    }

    #[test]
    fn complex_coefficients_reconstruct() {
        let p = PeriodicProfile::from_fourier(0.2, vec![1.0, -0.5], vec![0.3, 0.7]).unwrap();
        let c = p.complex_coefficients();
        let k = p.degree() as i64;
        for x in [0.0, 0.21, 0.77] {
            let s: Complex64 =
                (-k..=k).map(|m| c[(m + k) as usize] * Complex64::from_polar(1.0, 2.0 * PI * m as f64 * x)).sum();
            assert_abs_diff_eq!(s.re, p.evaluate(x), epsilon = 1e-14);
            assert_abs_diff_eq!(s.im, 0.0, epsilon = 1e-14);
        }
    }
}
