//! The periodic Jacobi matrix `L_N^{α,β}` of the Toda lattice.
//!
//! The matrix has size `2N × 2N`, diagonal `b_i`, off-diagonal `a_i` and the
//! corner entry `a_{2N-1}` closing the cycle; the coefficients repeat with
//! period `N`. Its spectrum is computed twice: by a dense symmetric
//! eigensolver and as the roots of `Δ^N(λ)² − 4`, where `Δ^N` is the trace of
//! the one-period transfer matrix.

use std::f64::consts::{LN_2, PI};
use std::io::{self, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::eigen::symmetric_eigenvalues;
use crate::error::{Error, Result};
use crate::profiles::PeriodicProfile;
use crate::roots::{brent, sign_change_roots};

/// Default multiplicity tolerance for closed gaps.
pub const DEFAULT_TAU: f64 = 1e-12;

/// Fundamental-period coefficients of `L_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct JacobiData {
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    eps: f64,
}

/// Builds `a_i = 1 + ε²α(i/N)`, `b_i = ε²β(i/N)` with `ε = 1/(2N)`.
pub fn build_jacobi(alpha: &PeriodicProfile, beta: &PeriodicProfile, n: usize) -> Result<JacobiData> {
    build_with_eps(alpha, beta, n, 1.0 / (2.0 * n as f64))
}

/// Same as [`build_jacobi`] with an arbitrary `ε`.
#[cfg(feature = "eps-override")]
pub fn build_jacobi_with_epsilon(
    alpha: &PeriodicProfile,
    beta: &PeriodicProfile,
    n: usize,
    eps: f64,
) -> Result<JacobiData> {
    build_with_eps(alpha, beta, n, eps)
}

fn build_with_eps(alpha: &PeriodicProfile, beta: &PeriodicProfile, n: usize, eps: f64) -> Result<JacobiData> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("N must be at least 2, got {n}")));
    }
    if !alpha.is_mean_zero() || !beta.is_mean_zero() {
        log::warn!("profiles are not mean-zero (mean α = {}, mean β = {})", alpha.mean(), beta.mean());
    }
    let e2 = eps * eps;
    let a: Vec<f64> = alpha.sample_grid(n).iter().map(|v| 1.0 + e2 * v).collect();
    let b: Vec<f64> = beta.sample_grid(n).iter().map(|v| e2 * v).collect();
    JacobiData::from_coefficients(a, b, eps)
}

impl JacobiData {
    /// Wraps explicit coefficient arrays of equal length `N ≥ 2`.
    pub fn from_coefficients(a: Vec<f64>, b: Vec<f64>, eps: f64) -> Result<Self> {
        if a.len() != b.len() || a.len() < 2 {
            return Err(Error::InvalidArgument("a and b must have equal length N >= 2".into()));
        }
        if let Some((index, &value)) = a.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::NonPositiveOffDiagonal { index, value });
        }
        Ok(JacobiData { n: a.len(), a, b, eps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// Dimension `2N` of the represented matrix.
    pub fn dim(&self) -> usize {
        2 * self.n
    }

    /// Off-diagonal entry `a_r` for any row index `r` of the doubled matrix.
    pub fn a_at(&self, r: usize) -> f64 {
        self.a[r % self.n]
    }

    pub fn b_at(&self, r: usize) -> f64 {
        self.b[r % self.n]
    }

    /// Row-major dense `2N × 2N` matrix.
    pub fn dense_matrix(&self) -> Vec<f64> {
        let m = self.dim();
        let mut out = vec![0.0; m * m];
        for r in 0..m {
            let s = (r + 1) % m;
            out[r * m + r] = self.b_at(r);
            out[r * m + s] = self.a_at(r);
            out[s * m + r] = self.a_at(r);
        }
        out
    }

    /// `L v` for a complex vector indexed by matrix row.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let m = self.dim();
        assert_eq!(v.len(), m, "vector length must be 2N");
        (0..m)
            .map(|r| {
                let up = (r + 1) % m;
                let down = (r + m - 1) % m;
                v[r] * self.b_at(r) + v[up] * self.a_at(r) + v[down] * self.a_at(down)
            })
            .collect()
    }

    /// Infinity norm of the matrix (maximum absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.n).map(|i| self.b[i].abs() + self.a[i] + self.a[(i + self.n - 1) % self.n]).fold(0.0, f64::max)
    }

    /// Absolute eigenvalue tolerance of the dense solver, `2N·ε_mach·‖L‖∞`.
    pub fn eigen_tolerance(&self) -> f64 {
        self.dim() as f64 * f64::EPSILON * self.norm_inf()
    }

    /// `κ = (Π a_i)^{-2}`, the leading-coefficient normalization in the
    /// product formula.
    pub fn kappa(&self) -> f64 {
        self.ln_kappa().exp()
    }

    pub fn ln_kappa(&self) -> f64 {
        -2.0 * self.a.iter().map(|a| a.ln()).sum::<f64>()
    }

    /// One-period transfer matrix and its λ-derivative.
    pub fn monodromy(&self, lambda: f64) -> Monodromy {
        const RESCALE_AT: f64 = 1e150;
        let n = self.n;
        let mut q = [[1.0, 0.0], [0.0, 1.0]];
        let mut dq = [[0.0, 0.0], [0.0, 0.0]];
        let mut log2_scale: i64 = 0;
        for i in 0..n {
            let d = lambda - self.b[i];
            let prev = self.a[(i + n - 1) % n];
            let ai = self.a[i];
            // B = [[d, -prev], [ai, 0]], dB/dλ = [[1, 0], [0, 0]]
            let nq = [[d * q[0][0] - prev * q[1][0], d * q[0][1] - prev * q[1][1]], [ai * q[0][0], ai * q[0][1]]];
            let ndq = [
                [q[0][0] + d * dq[0][0] - prev * dq[1][0], q[0][1] + d * dq[0][1] - prev * dq[1][1]],
                [ai * dq[0][0], ai * dq[0][1]],
            ];
            q = nq;
            dq = ndq;
            let big = q.iter().chain(dq.iter()).flatten().fold(0.0f64, |m, v| m.max(v.abs()));
            if big > RESCALE_AT {
                let s = (-500f64).exp2();
                for row in q.iter_mut().chain(dq.iter_mut()) {
                    for v in row.iter_mut() {
                        *v *= s;
                    }
                }
                log2_scale += 500;
            }
        }
        // Divide by Π a_i so that det M = 1.
        let ln_p: f64 = self.a.iter().map(|a| a.ln()).sum();
        let inv_p = (-ln_p).exp();
        let scale = |m: [[f64; 2]; 2]| [[m[0][0] * inv_p, m[0][1] * inv_p], [m[1][0] * inv_p, m[1][1] * inv_p]];
        Monodromy { m: scale(q), dm: scale(dq), log2_scale }
    }

    /// Self-check of the monodromy determinant at `lambda`.
    pub fn check_determinant(&self, lambda: f64) -> Result<()> {
        let mono = self.monodromy(lambda);
        match mono.det_deviation() {
            Some(dev) if dev > 1e-10 => Err(Error::DeterminantCheck { deviation: dev }),
            _ => Ok(()),
        }
    }
}

/// A real number `sign · exp(ln_abs)` that may lie outside the `f64` range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledValue {
    pub sign: f64,
    pub ln_abs: f64,
}

impl ScaledValue {
    pub fn from_f64(x: f64) -> Self {
        ScaledValue { sign: if x < 0.0 { -1.0 } else { 1.0 }, ln_abs: x.abs().ln() }
    }

    /// Saturates to `±∞` outside the representable range.
    pub fn to_f64(self) -> f64 {
        self.sign * self.ln_abs.exp()
    }
}

/// Transfer matrix over one period, stored as `m · 2^{log2_scale}`.
#[derive(Debug, Clone, Copy)]
pub struct Monodromy {
    pub m: [[f64; 2]; 2],
    pub dm: [[f64; 2]; 2],
    pub log2_scale: i64,
}

impl Monodromy {
    fn factor(&self) -> f64 {
        if self.log2_scale == 0 {
            1.0
        } else if self.log2_scale > 1000 {
            f64::INFINITY
        } else {
            (self.log2_scale as f64).exp2()
        }
    }

    pub fn is_scaled(&self) -> bool {
        self.log2_scale != 0
    }

    /// `Δ = tr M` (saturating).
    pub fn trace(&self) -> f64 {
        let t = self.m[0][0] + self.m[1][1];
        if t == 0.0 {
            0.0
        } else {
            t * self.factor()
        }
    }

    pub fn trace_scaled(&self) -> ScaledValue {
        let t = self.m[0][0] + self.m[1][1];
        ScaledValue { sign: if t < 0.0 { -1.0 } else { 1.0 }, ln_abs: t.abs().ln() + self.log2_scale as f64 * LN_2 }
    }

    /// `Δ'(λ)` (saturating); its sign is always reliable.
    pub fn derivative(&self) -> f64 {
        let t = self.dm[0][0] + self.dm[1][1];
        if t == 0.0 {
            0.0
        } else {
            t * self.factor()
        }
    }

    /// `det(M − σI)`, which equals `2 − σΔ` because `det M = 1`.
    ///
    /// Evaluated from the entries while `M` is moderate, so near a closed gap
    /// the result keeps its relative accuracy; from the trace otherwise.
    pub fn band_function(&self, sigma: f64) -> f64 {
        let m = &self.m;
        // the entry form loses ε‖M‖² to cancellation once M is large
        if self.is_scaled() || m.iter().flatten().any(|v| v.abs() > 1e4) {
            return 2.0 - sigma * self.trace();
        }
        (m[0][0] - sigma) * (m[1][1] - sigma) - m[0][1] * m[1][0]
    }

    /// `Δ² − 4 = −(2 − Δ)(2 + Δ)`, or `None` when not representable.
    pub fn discriminant_squared_minus_four(&self) -> Option<f64> {
        if self.is_scaled() {
            return None;
        }
        let v = -self.band_function(1.0) * self.band_function(-1.0);
        v.is_finite().then_some(v)
    }

    /// `|det M − 1| / max(1, ‖M‖²)`, or `None` when the matrix was rescaled.
    pub fn det_deviation(&self) -> Option<f64> {
        if self.is_scaled() {
            return None;
        }
        let m = &self.m;
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let norm2 = m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs())).powi(2);
        Some((det - 1.0).abs() / norm2.max(1.0))
    }
}

/// `Δ^N(λ)`; saturates to `±∞` when `|Δ|` exceeds the `f64` range (see
/// [`toda_discriminant_scaled`]).
pub fn toda_discriminant(j: &JacobiData, lambda: f64) -> Result<f64> {
    let mono = j.monodromy(lambda);
    if let Some(dev) = mono.det_deviation() {
        if dev > 1e-10 {
            return Err(Error::DeterminantCheck { deviation: dev });
        }
    }
    Ok(mono.trace())
}

/// `Δ^N(λ)` in sign/log form, valid for any `λ`.
pub fn toda_discriminant_scaled(j: &JacobiData, lambda: f64) -> ScaledValue {
    j.monodromy(lambda).trace_scaled()
}

/// Ordered eigenvalue list of a periodic operator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumList {
    pub values: Vec<f64>,
    pub tau: f64,
}

/// A spectral gap `[λ_{2n-1}, λ_{2n}]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gap {
    pub n: usize,
    pub left: f64,
    pub right: f64,
    pub closed: bool,
}

impl SpectrumList {
    pub fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        SpectrumList { values, tau: DEFAULT_TAU }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Checks `λ0 < λ1 ≤ λ2 < λ3 ≤ …` up to `tau`.
    pub fn check_interlacing(&self) -> Result<()> {
        for (i, w) in self.values.windows(2).enumerate() {
            let diff = w[1] - w[0];
            let ok = if i % 2 == 0 { diff > self.tau } else { diff >= -self.tau };
            if !ok {
                return Err(Error::CrossCheck { index: i + 1, first: w[0], second: w[1] });
            }
        }
        Ok(())
    }

    /// Gap `n ≥ 1`.
    pub fn gap(&self, n: usize) -> Result<Gap> {
        if n == 0 || 2 * n >= self.values.len() {
            return Err(Error::NotEnoughValues { requested: 2 * n + 1, available: self.values.len() });
        }
        let (left, right) = (self.values[2 * n - 1], self.values[2 * n]);
        Ok(Gap { n, left, right, closed: right - left <= self.tau })
    }

    /// CSV dump with columns `j,lambda` at 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "j,lambda")?;
        for (j, v) in self.values.iter().enumerate() {
            writeln!(w, "{j},{v:.16e}")?;
        }
        Ok(())
    }
}

/// All `2N` eigenvalues of `L_N` from the dense solver.
pub fn dense_spectrum(j: &JacobiData) -> Result<SpectrumList> {
    let m = j.dim();
    let mut a = j.dense_matrix();
    let values = symmetric_eigenvalues(&mut a, m)?;
    Ok(SpectrumList::new(values))
}

/// Eigenvalues of the equilibrium matrix `a ≡ 1, b ≡ 0` in closed form.
pub fn equilibrium_spectrum(n: usize) -> SpectrumList {
    let mut values = Vec::with_capacity(2 * n);
    values.push(-2.0);
    for l in 1..n {
        let v = -2.0 * (l as f64 * PI / n as f64).cos();
        values.push(v);
        values.push(v);
    }
    values.push(2.0);
    SpectrumList::new(values)
}

/// The `2N` roots of `Δ^N(λ)² = 4`.
///
/// The `N − 1` extrema of `Δ^N` are located as sign changes of `Δ'` on a
/// Chebyshev grid of `8N` points and refined with Brent; each monotone
/// segment between extrema then holds exactly one root of `Δ = ±2`. A gap
/// whose extremum does not reach beyond `±2` is reported as a double root.
pub fn discriminant_roots(j: &JacobiData) -> Result<SpectrumList> {
    let n = j.n();
    let excess =
        j.a.iter().map(|a| (a - 1.0).abs()).fold(0.0, f64::max) + j.b.iter().map(|b| b.abs()).fold(0.0, f64::max);
    let radius = 2.0 + 10.0 * excess + 1e-9;
    let points = 8 * n;
    let grid: Vec<f64> = (0..points).map(|k| -radius * (PI * k as f64 / (points - 1) as f64).cos()).collect();
    let extrema = sign_change_roots(|x| j.monodromy(x).derivative(), &grid, 0.0)?;
    if extrema.len() != n - 1 {
        return Err(Error::RootCountMismatch { found: 2 * extrema.len() + 2, expected: 2 * n });
    }

    let mut stops = Vec::with_capacity(n + 1);
    stops.push(-radius);
    stops.extend_from_slice(&extrema);
    stops.push(radius);
    let signs: Vec<f64> = stops.iter().map(|&x| j.monodromy(x).trace_scaled().sign).collect();

    let root_in = |lo: f64, hi: f64, sigma: f64| brent(|x| j.monodromy(x).band_function(sigma), lo, hi, 0.0);

    // One task per stop: the bottom edge, each interior gap, the top edge.
    let pieces: Vec<Result<Vec<f64>>> = (0..=n)
        .into_par_iter()
        .map(|l| {
            if l == 0 {
                return root_in(stops[0], stops[1], signs[0]).map(|r| vec![r]);
            }
            if l == n {
                return root_in(stops[n - 1], stops[n], signs[n]).map(|r| vec![r]);
            }
            let (x, sigma) = (stops[l], signs[l]);
            if j.monodromy(x).band_function(sigma) >= 0.0 {
                return Ok(vec![x, x]);
            }
            Ok(vec![root_in(stops[l - 1], x, sigma)?, root_in(x, stops[l + 1], sigma)?])
        })
        .collect();
    let mut values = Vec::with_capacity(2 * n);
    for p in pieces {
        values.extend(p?);
    }
    if values.len() != 2 * n {
        return Err(Error::RootCountMismatch { found: values.len(), expected: 2 * n });
    }
    Ok(SpectrumList::new(values))
}

/// Both readings of the product identity `Δ² − 4 = κ Π (λ_j − λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductResidual {
    /// With `κ = (Π a_i)^{-2}`.
    pub residual: f64,
    /// With `κ` replaced by 1.
    pub residual_without_kappa: f64,
    pub kappa: f64,
}

/// `|Δ²−4 − κΠ(λ_j−λ)| / (1 + |Δ²−4|)`, evaluated in log form when the
/// values leave the `f64` range.
pub fn product_formula_residual(j: &JacobiData, lambda: f64, spectrum: &SpectrumList) -> ProductResidual {
    let mono = j.monodromy(lambda);
    let lhs = match mono.discriminant_squared_minus_four() {
        Some(v) => ScaledValue::from_f64(v),
        None => {
            let d = mono.trace_scaled();
            // Δ² − 4 = Δ² (1 − 4/Δ²)
            let ratio = (-2.0 * d.ln_abs).exp() * 4.0;
            ScaledValue { sign: 1.0, ln_abs: 2.0 * d.ln_abs + (-ratio).ln_1p() }
        }
    };
    let mut sign = 1.0;
    let mut ln_prod = 0.0;
    for &v in &spectrum.values {
        let f = v - lambda;
        if f == 0.0 {
            ln_prod = f64::NEG_INFINITY;
            break;
        }
        if f < 0.0 {
            sign = -sign;
        }
        ln_prod += f.abs().ln();
    }
    let with = ScaledValue { sign, ln_abs: ln_prod + j.ln_kappa() };
    let without = ScaledValue { sign, ln_abs: ln_prod };
    ProductResidual {
        residual: relative_gap(lhs, with),
        residual_without_kappa: relative_gap(lhs, without),
        kappa: j.kappa(),
    }
}

/// `|x − y| / (1 + |x|)` for scaled values.
fn relative_gap(x: ScaledValue, y: ScaledValue) -> f64 {
    if x.ln_abs > 300.0 {
        // 1 + |x| ≈ |x|
        (x.sign - y.sign * (y.ln_abs - x.ln_abs).exp()).abs()
    } else {
        let (xv, yv) = (x.to_f64(), y.to_f64());
        (xv - yv).abs() / (1.0 + xv.abs())
    }
}
