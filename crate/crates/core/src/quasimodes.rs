//! Theta functions of the quantized torus and coherent-state quasimodes.
//!
//! `Θ_j`, `j = 0..2N−1`, are orthonormal for the weight `e^{−4πN y²}` on the
//! unit square. `L_N` is the matrix of a Töplitz operator in the basis
//! `{Θ_{2N−1}, …, Θ_0}`, so the coefficient of `Θ_j` sits at row
//! `2N − 1 − j`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::profiles::PeriodicProfile;
use crate::quadrature::GaussLegendre;
use crate::toda::build_jacobi;

const QUAD_TOL: f64 = 1e-10;

/// Lattice-sum parameters for a given `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaContext {
    pub n: usize,
    /// `ħ = 1/(4πN)`, informational.
    pub hbar: f64,
    pub n_max: i64,
}

fn tail_width(n: usize) -> i64 {
    (18.0 * 10f64.ln() / (2.0 * PI * n as f64)).sqrt().ceil() as i64
}

impl ThetaContext {
    pub fn new(n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidArgument("N must be positive".into()));
        }
        Ok(ThetaContext { n, hbar: 1.0 / (4.0 * PI * n as f64), n_max: (tail_width(n) + 1).max(3) })
    }

    pub fn with_n_max(self, n_max: i64) -> Self {
        ThetaContext { n_max, ..self }
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    fn check(&self, j: usize, imag: f64) -> Result<()> {
        if j >= self.dim() {
            return Err(Error::InvalidArgument(format!("theta index {j} outside 0..{}", self.dim())));
        }
        let required = imag.abs().ceil() as i64 + tail_width(self.n);
        if required > self.n_max {
            return Err(Error::ThetaTruncation { imag, required: required as usize });
        }
        Ok(())
    }
}

/// `Θ_j(z)·e^{−2πN (Im z)²}`, which stays bounded for every `z`.
pub fn theta_gaussian(j: usize, z: Complex64, ctx: &ThetaContext) -> Result<Complex64> {
    ctx.check(j, z.im)?;
    let two_n = ctx.dim() as f64;
    let mut sum = Complex64::new(0.0, 0.0);
    for n in -ctx.n_max..=ctx.n_max {
        let m = j as f64 + two_n * n as f64;
        // −π m²/2N − 2π y m − 2πN y² = −(π/2N)(m + 2N y)²
        let e = -PI / two_n * (m + two_n * z.im).powi(2);
        sum += Complex64::from_polar(e.exp(), 2.0 * PI * z.re * m);
    }
    Ok(sum * (2.0 * two_n).powf(0.25))
}

/// `Θ_j(z) = (4N)^{1/4} e^{−πj²/2N} Σ_n e^{−π(2Nn²+2jn)} e^{2πiz(j+2Nn)}`.
pub fn theta(j: usize, z: Complex64, ctx: &ThetaContext) -> Result<Complex64> {
    let g = theta_gaussian(j, z, ctx)?;
    Ok(g * (2.0 * PI * ctx.n as f64 * z.im * z.im).exp())
}

/// A trigonometric series `Σ μ_l e^{2πilx}` with finite support.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct FourierSymbol {
    coeffs: BTreeMap<i64, Complex64>,
}

impl FourierSymbol {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::mode(0, Complex64::new(c, 0.0))
    }

    pub fn mode(l: i64, c: Complex64) -> Self {
        let mut s = Self::new();
        s.add_to(l, c);
        s
    }

    pub fn from_pairs(pairs: &[(i64, Complex64)]) -> Self {
        let mut s = Self::new();
        for &(l, c) in pairs {
            s.add_to(l, c);
        }
        s
    }

    pub fn from_profile(p: &PeriodicProfile) -> Self {
        let k = p.degree() as i64;
        let mut s = Self::new();
        for (i, c) in p.complex_coefficients().into_iter().enumerate() {
            s.add_to(i as i64 - k, c);
        }
        s
    }

    pub fn add_to(&mut self, l: i64, c: Complex64) {
        if c != Complex64::new(0.0, 0.0) {
            *self.coeffs.entry(l).or_default() += c;
        }
    }

    pub fn get(&self, l: i64) -> Complex64 {
        self.coeffs.get(&l).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().map(|(l, c)| (*l, *c))
    }

    pub fn support(&self) -> Vec<i64> {
        self.coeffs.keys().copied().collect()
    }

    pub fn scale(&self, f: Complex64) -> Self {
        FourierSymbol { coeffs: self.coeffs.iter().map(|(l, c)| (*l, c * f)).collect() }
    }

    pub fn plus(&self, other: &FourierSymbol) -> Self {
        let mut out = self.clone();
        for (l, c) in other.iter() {
            out.add_to(l, c);
        }
        out
    }

    pub fn evaluate(&self, x: f64) -> Complex64 {
        self.iter().map(|(l, c)| c * Complex64::from_polar(1.0, 2.0 * PI * l as f64 * x)).sum()
    }

    /// `Σ |μ_l|²`.
    pub fn l2_norm_sqr(&self) -> f64 {
        self.iter().map(|(_, c)| c.norm_sqr()).sum()
    }
}

/// Coordinates in the ordered basis `{Θ_{2N−1}, …, Θ_0}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientVector {
    pub rows: Vec<Complex64>,
}

impl CoefficientVector {
    /// Builds from coefficients indexed by `j` (coefficient of `Θ_j`).
    pub fn from_theta_order(by_j: Vec<Complex64>) -> Self {
        let mut rows = by_j;
        rows.reverse();
        CoefficientVector { rows }
    }

    /// Coefficient of `Θ_j`.
    pub fn theta_coefficient(&self, j: usize) -> Complex64 {
        self.rows[self.rows.len() - 1 - j]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.rows.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `⟨self, other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &CoefficientVector) -> Complex64 {
        self.rows.iter().zip(&other.rows).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn distance(&self, other: &CoefficientVector) -> f64 {
        self.rows.iter().zip(&other.rows).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
    }
}

/// `ψ^k = (2N)^{−1/2} Σ_j e^{πikj/N} Θ_j`, an eigenvector of `L_N^{0,0}` with
/// eigenvalue `2cos(πk/N)`.
pub fn equilibrium_eigenvector(k: usize, n: usize) -> CoefficientVector {
    let norm = 1.0 / ((2 * n) as f64).sqrt();
    let by_j = (0..2 * n).map(|j| Complex64::from_polar(norm, PI * ((k * j) % (2 * n)) as f64 / n as f64)).collect();
    CoefficientVector::from_theta_order(by_j)
}

/// Coefficients of `ψ^k_μ` from the `s`-integral
/// `(4N)^{−1/4} ∫_0^1 Θ_j(k/2N + is) μ(s) e^{−2πNs²} ds`, by composite
/// Gauss–Legendre with a panel-halving error estimate.
pub fn quasimode_coefficients(k: usize, mu: &FourierSymbol, ctx: &ThetaContext) -> Result<CoefficientVector> {
    let (fine, estimate) = quasimode_coefficients_with_estimate(k, mu, ctx)?;
    if estimate > QUAD_TOL {
        return Err(Error::QuadratureTolerance { estimate });
    }
    Ok(fine)
}

/// As [`quasimode_coefficients`], also returning the quadrature estimate.
pub fn quasimode_coefficients_with_estimate(
    k: usize,
    mu: &FourierSymbol,
    ctx: &ThetaContext,
) -> Result<(CoefficientVector, f64)> {
    let dim = ctx.dim();
    let rule = GaussLegendre::new(16);
    // Gaussian width is (4πN)^{-1/2}; resolve it with several panels.
    let panels = (8.0 * (ctx.n as f64).sqrt()).ceil() as usize + 16;
    let x = k as f64 / dim as f64;
    let factor = (2.0 * dim as f64).powf(-0.25);
    let integrand = |j: usize, s: f64| -> Result<Complex64> {
        Ok(theta_gaussian(j, Complex64::new(x, s), ctx)? * mu.evaluate(s) * factor)
    };
    let integrate = |j: usize, panels: usize| -> Result<Complex64> {
        let h = 1.0 / panels as f64;
        let mut sum = Complex64::new(0.0, 0.0);
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * h;
            for (t, w) in rule.nodes.iter().zip(&rule.weights) {
                sum += integrand(j, mid + 0.5 * h * t)? * (0.5 * h * w);
            }
        }
        Ok(sum)
    };
    let results: Vec<Result<(Complex64, f64)>> = (0..dim)
        .into_par_iter()
        .map(|j| {
            let fine = integrate(j, 2 * panels)?;
            let coarse = integrate(j, panels)?;
            Ok((fine, (fine - coarse).norm()))
        })
        .collect();
    let mut by_j = Vec::with_capacity(dim);
    let mut estimate = 0.0f64;
    for r in results {
        let (c, e) = r?;
        by_j.push(c);
        estimate = estimate.max(e);
    }
    Ok((CoefficientVector::from_theta_order(by_j), estimate))
}

/// Closed form of the same coefficients with the `s`-integral taken over ℝ:
/// `(2N)^{−1/2} Σ_l μ_l e^{πi(k−l)j/N} e^{−πl²/2N}`.
pub fn quasimode_coefficients_closed(k: usize, mu: &FourierSymbol, n: usize) -> CoefficientVector {
    let dim = 2 * n as i64;
    let norm = 1.0 / (dim as f64).sqrt();
    let by_j = (0..dim)
        .map(|j| {
            mu.iter()
                .map(|(l, c)| {
                    let phase = ((k as i64 - l) * j).rem_euclid(2 * dim) as f64 * PI / n as f64;
                    c * Complex64::from_polar(norm * (-PI * (l * l) as f64 / dim as f64).exp(), phase)
                })
                .sum()
        })
        .collect();
    CoefficientVector::from_theta_order(by_j)
}

/// `Σ_l conj(μ_l) μ′_{l−k+k′} e^{−πl²/2N} e^{−π(l−k+k′)²/2N}`.
pub fn gram_formula(
    mu: &FourierSymbol,
    mu_prime: &FourierSymbol,
    k: i64,
    k_prime: i64,
    ctx: &ThetaContext,
) -> Complex64 {
    let two_n = ctx.dim() as f64;
    mu.iter()
        .map(|(l, c)| {
            let lp = l - k + k_prime;
            let g = (-PI * ((l * l) as f64 + (lp * lp) as f64) / two_n).exp();
            c.conj() * mu_prime.get(lp) * g
        })
        .sum()
}

/// `‖ψ^k_μ‖² = Σ_l |μ_l|² e^{−πl²/N}`.
pub fn norm_formula(mu: &FourierSymbol, n: usize) -> f64 {
    mu.iter().map(|(l, c)| c.norm_sqr() * (-PI * (l * l) as f64 / n as f64).exp()).sum()
}

/// Symbol `μ^k` with `T_N ψ^k_μ = ψ^k_{μ^k} + O(ε³)`:
/// `(μ^k)_l = 2cos(2πε(k−l)) μ_l + ε² Σ_m [2α̂_m cos(2πε(k−l+2m)) + β̂_m] μ_{l−2m}`.
///
/// Sampling `α(i/N)` over `2N` rows winds the profile twice, so `α` and `β`
/// act at doubled frequency.
pub fn transported_symbol(
    k: usize,
    mu: &FourierSymbol,
    alpha: &PeriodicProfile,
    beta: &PeriodicProfile,
    ctx: &ThetaContext,
) -> FourierSymbol {
    let eps = 1.0 / ctx.dim() as f64;
    let k = k as i64;
    let cos_op = |l: i64| 2.0 * (2.0 * PI * eps * (k - l) as f64).cos();
    let a_hat = FourierSymbol::from_profile(alpha);
    let b_hat = FourierSymbol::from_profile(beta);
    let mut out = FourierSymbol::new();
    for (l, c) in mu.iter() {
        out.add_to(l, c * cos_op(l));
        for (m, a) in a_hat.iter() {
            out.add_to(l + 2 * m, a * c * (eps * eps * cos_op(l)));
        }
        for (m, b) in b_hat.iter() {
            out.add_to(l + 2 * m, b * c * (eps * eps));
        }
    }
    out
}

/// `‖L_N c(ψ^k_μ) − c(ψ^k_{μ^k})‖` using closed-form coefficients.
pub fn quasimode_residual(
    k: usize,
    mu: &FourierSymbol,
    alpha: &PeriodicProfile,
    beta: &PeriodicProfile,
    n: usize,
) -> Result<f64> {
    let ctx = ThetaContext::new(n)?;
    let j = build_jacobi(alpha, beta, n)?;
    let psi = quasimode_coefficients_closed(k, mu, n);
    let image = CoefficientVector { rows: j.apply(&psi.rows) };
    let target = quasimode_coefficients_closed(k, &transported_symbol(k, mu, alpha, beta, &ctx), n);
    Ok(image.distance(&target))
}
