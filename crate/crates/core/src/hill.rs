//! Hill operators `H = −d²/dx² + q` on the unit circle.
//!
//! The Floquet discriminant comes from a Gauss collocation integrator
//! (6 stages, order 12), which preserves the Wronskian of the linear
//! system to roundoff. The combined periodic/antiperiodic spectrum is
//! computed both as roots of `Δ² − 4` and by Fourier Galerkin on the
//! period-2 circle.

use std::cell::Cell;
use std::f64::consts::PI;
use std::io::{self, Write};
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::symmetric_eigenvalues;
use crate::error::{Error, Result};
use crate::profiles::PeriodicProfile;
use crate::quadrature::GaussLegendre;
use crate::roots::brent;

const STAGES: usize = 6;
const MAX_STEPS: usize = 1 << 14;
const ODE_TOL: f64 = 1e-12;
/// Relative agreement required between Galerkin and Floquet eigenvalues.
pub const CROSS_CHECK_TOL: f64 = 1e-8;

/// Which of the two operators `H±` a potential belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HillOperator {
    q: PeriodicProfile,
    sign: Sign,
}

/// `H± = −d²/dx² − 2α ∓ β`.
pub fn build_hill(alpha: &PeriodicProfile, beta: &PeriodicProfile, sign: Sign) -> HillOperator {
    HillOperator { q: alpha.combine(-2.0, beta, -sign.factor()), sign }
}

impl HillOperator {
    pub fn from_potential(q: PeriodicProfile, sign: Sign) -> Self {
        HillOperator { q, sign }
    }

    pub fn potential(&self) -> &PeriodicProfile {
        &self.q
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    /// The operator with potential `factor · q`.
    pub fn rescaled(&self, factor: f64) -> HillOperator {
        HillOperator { q: self.q.scale(factor), sign: self.sign }
    }

    /// Monodromy of `y'' = (q − λ) y` over one period, with its λ-derivative.
    pub fn monodromy(&self, lambda: f64) -> Result<HillMonodromy> {
        let omega = (lambda.abs() + self.q.sup_bound()).sqrt();
        let mut steps = 2 + (omega / 2.0).ceil() as usize;
        let mut coarse = self.integrate(lambda, steps);
        loop {
            steps *= 2;
            let fine = self.integrate(lambda, steps);
            let scale = fine.norm().max(1.0);
            let diff = coarse.distance(&fine);
            if !diff.is_finite() {
                return Err(Error::IntegratorTolerance { lambda, estimate: diff });
            }
            if diff <= ODE_TOL * scale {
                let wronskian = fine.m[0][0] * fine.m[1][1] - fine.m[0][1] * fine.m[1][0];
                let dev = (wronskian - 1.0).abs() / (scale * scale);
                if dev > 1e-10 {
                    return Err(Error::IntegratorTolerance { lambda, estimate: dev });
                }
                return Ok(fine);
            }
            if steps >= MAX_STEPS {
                return Err(Error::IntegratorTolerance { lambda, estimate: diff / scale });
            }
            coarse = fine;
        }
    }

    fn integrate(&self, lambda: f64, steps: usize) -> HillMonodromy {
        let tab = tableau();
        let h = 1.0 / steps as f64;
        let mut y = [[1.0, 0.0], [0.0, 1.0]];
        let mut dy = [[0.0; 2]; 2];
        let n = 2 * STAGES;
        let mut mat = [[0.0; 2 * STAGES]; 2 * STAGES];
        let mut w = [0.0; STAGES];
        for step in 0..steps {
            let x0 = step as f64 * h;
            for (i, wi) in w.iter_mut().enumerate() {
                *wi = self.q.evaluate(x0 + tab.c[i] * h) - lambda;
            }
            // Stage system (I − h a⊗A) Z = 1⊗Y with A_i = [[0, 1], [w_i, 0]].
            for (r, row) in mat.iter_mut().enumerate() {
                row.fill(0.0);
                row[r] = 1.0;
            }
            for i in 0..STAGES {
                for j in 0..STAGES {
                    let ha = h * tab.a[i][j];
                    mat[2 * i][2 * j + 1] -= ha;
                    mat[2 * i + 1][2 * j] -= ha * w[j];
                }
            }
            let lu = Lu::factor(mat);
            let mut z = [[0.0; 2]; 2 * STAGES];
            for i in 0..STAGES {
                z[2 * i] = y[0];
                z[2 * i + 1] = y[1];
            }
            lu.solve(&mut z);
            // Derivative stages: same matrix, extra source h a⊗A_λ Z with
            // A_λ = [[0, 0], [−1, 0]].
            let mut dz = [[0.0; 2]; 2 * STAGES];
            for i in 0..STAGES {
                dz[2 * i] = dy[0];
                dz[2 * i + 1] = dy[1];
                for j in 0..STAGES {
                    let ha = h * tab.a[i][j];
                    for col in 0..2 {
                        dz[2 * i + 1][col] -= ha * z[2 * j][col];
                    }
                }
            }
            lu.solve(&mut dz);
            for j in 0..STAGES {
                let hb = h * tab.b[j];
                for col in 0..2 {
                    y[0][col] += hb * z[2 * j + 1][col];
                    y[1][col] += hb * w[j] * z[2 * j][col];
                    dy[0][col] += hb * dz[2 * j + 1][col];
                    dy[1][col] += hb * (w[j] * dz[2 * j][col] - z[2 * j][col]);
                }
            }
            debug_assert_eq!(n, 2 * STAGES);
        }
        HillMonodromy { m: y, dm: dy }
    }
}

/// Fundamental matrix at `x = 1`: columns are `(y1, y1')`, `(y2, y2')`.
#[derive(Debug, Clone, Copy)]
pub struct HillMonodromy {
    pub m: [[f64; 2]; 2],
    pub dm: [[f64; 2]; 2],
}

impl HillMonodromy {
    fn norm(&self) -> f64 {
        self.m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    fn distance(&self, other: &HillMonodromy) -> f64 {
        let mut d = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                d = d.max((self.m[r][c] - other.m[r][c]).abs());
                d = d.max((self.dm[r][c] - other.dm[r][c]).abs() / 1e2);
            }
        }
        d
    }

    /// `Δ = y1(1) + y2'(1)`.
    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn derivative(&self) -> f64 {
        self.dm[0][0] + self.dm[1][1]
    }

    /// `det(M − σI) = 2 − σΔ`, evaluated from the entries.
    pub fn band_function(&self, sigma: f64) -> f64 {
        let m = &self.m;
        (m[0][0] - sigma) * (m[1][1] - sigma) - m[0][1] * m[1][0]
    }
}

struct Tableau {
    a: [[f64; STAGES]; STAGES],
    b: [f64; STAGES],
    c: [f64; STAGES],
}

fn tableau() -> &'static Tableau {
    static TAB: OnceLock<Tableau> = OnceLock::new();
    TAB.get_or_init(|| {
        let gl = GaussLegendre::new(STAGES);
        let mut c = [0.0; STAGES];
        let mut b = [0.0; STAGES];
        for i in 0..STAGES {
            c[i] = 0.5 * (gl.nodes[i] + 1.0);
            b[i] = 0.5 * gl.weights[i];
        }
        let lagrange =
            |j: usize, t: f64| (0..STAGES).filter(|&k| k != j).map(|k| (t - c[k]) / (c[j] - c[k])).product::<f64>();
        // a_ij = ∫_0^{c_i} ℓ_j, exact with the same rule since deg ℓ_j < STAGES.
        let mut a = [[0.0; STAGES]; STAGES];
        for i in 0..STAGES {
            for j in 0..STAGES {
                a[i][j] = (0..STAGES).map(|k| b[k] * c[i] * lagrange(j, c[i] * c[k])).sum();
            }
        }
        Tableau { a, b, c }
    })
}

struct Lu {
    lu: [[f64; 2 * STAGES]; 2 * STAGES],
    perm: [usize; 2 * STAGES],
}

impl Lu {
    fn factor(mut lu: [[f64; 2 * STAGES]; 2 * STAGES]) -> Self {
        let n = 2 * STAGES;
        let mut perm = [0; 2 * STAGES];
        for (i, p) in perm.iter_mut().enumerate() {
            *p = i;
        }
        for k in 0..n {
            let p = (k..n).max_by(|&x, &y| lu[x][k].abs().total_cmp(&lu[y][k].abs())).unwrap();
            lu.swap(k, p);
            perm.swap(k, p);
            let pivot = lu[k][k];
            for i in k + 1..n {
                let f = lu[i][k] / pivot;
                lu[i][k] = f;
                if f != 0.0 {
                    for j in k + 1..n {
                        lu[i][j] -= f * lu[k][j];
                    }
                }
            }
        }
        Lu { lu, perm }
    }

    fn solve(&self, rhs: &mut [[f64; 2]; 2 * STAGES]) {
        let n = 2 * STAGES;
        let src = *rhs;
        for i in 0..n {
            rhs[i] = src[self.perm[i]];
        }
        for i in 0..n {
            for j in 0..i {
                let f = self.lu[i][j];
                for c in 0..2 {
                    rhs[i][c] -= f * rhs[j][c];
                }
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let f = self.lu[i][j];
                for c in 0..2 {
                    rhs[i][c] -= f * rhs[j][c];
                }
            }
            for c in 0..2 {
                rhs[i][c] /= self.lu[i][i];
            }
        }
    }
}

/// Floquet discriminant `Δ_H(λ)`.
pub fn hill_discriminant(h: &HillOperator, lambda: f64) -> Result<f64> {
    Ok(h.monodromy(lambda)?.trace())
}

/// `2 − σΔ_H(λ)` in determinant form.
pub fn hill_band_function(h: &HillOperator, lambda: f64, sigma: f64) -> Result<f64> {
    Ok(h.monodromy(lambda)?.band_function(sigma))
}

/// First eigenvalues of a Hill operator in two enumerations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HillSpectrum {
    /// Zeros of `Δ² − 4` (periodic and antiperiodic), from the discriminant.
    pub combined: Vec<f64>,
    /// Eigenvalues with period-1 eigenfunctions.
    pub periodic_only: Vec<f64>,
    /// Combined spectrum from the Galerkin solver.
    pub galerkin_combined: Vec<f64>,
}

impl HillSpectrum {
    /// Gap `n ≥ 1` of the combined spectrum.
    pub fn gap(&self, n: usize) -> Result<crate::toda::Gap> {
        if n == 0 || 2 * n >= self.combined.len() {
            return Err(Error::NotEnoughValues { requested: 2 * n + 1, available: self.combined.len() });
        }
        let (left, right) = (self.combined[2 * n - 1], self.combined[2 * n]);
        Ok(crate::toda::Gap { n, left, right, closed: right - left <= crate::toda::DEFAULT_TAU * left.abs().max(1.0) })
    }
}

/// Galerkin eigenvalues `(combined, periodic)`, `count` of each.
pub fn galerkin_spectrum(h: &HillOperator, count: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let q = h.potential();
    // The count-th periodic eigenvalue sits near (π·count)².
    let lambda_max = (PI * (count as f64 + 1.0)).powi(2) + q.sup_bound();
    let k = 64usize.max(4 * (lambda_max.sqrt() / PI).ceil() as usize);
    let deg = q.degree();
    let grid = 2 * k + 2 * deg + 2;
    let qs: Vec<f64> = (0..grid).map(|g| q.evaluate(g as f64 / grid as f64)).collect();
    let ceiling = 0.95 * (PI * k as f64).powi(2);

    let block = |parity: usize| -> Result<Vec<f64>> {
        // Real basis: frequencies m ≡ parity (mod 2), 0 < m ≤ k, plus the
        // constant for the periodic block.
        let mut basis: Vec<(usize, bool)> = Vec::new();
        if parity == 0 {
            basis.push((0, true));
        }
        let mut m = if parity == 0 { 2 } else { 1 };
        while m <= k {
            basis.push((m, true));
            basis.push((m, false));
            m += 2;
        }
        let dim = basis.len();
        let values: Vec<Vec<f64>> = basis
            .iter()
            .map(|&(m, is_cos)| {
                (0..grid)
                    .map(|g| {
                        let x = g as f64 / grid as f64;
                        if m == 0 {
                            1.0
                        } else if is_cos {
                            2f64.sqrt() * (PI * m as f64 * x).cos()
                        } else {
                            2f64.sqrt() * (PI * m as f64 * x).sin()
                        }
                    })
                    .collect()
            })
            .collect();
        let mut mat = vec![0.0; dim * dim];
        for r in 0..dim {
            for c in 0..=r {
                let v: f64 = (0..grid).map(|g| values[r][g] * values[c][g] * qs[g]).sum::<f64>() / grid as f64;
                mat[r * dim + c] = v;
                mat[c * dim + r] = v;
            }
            mat[r * dim + r] += (PI * basis[r].0 as f64).powi(2);
        }
        let eig = symmetric_eigenvalues(&mut mat, dim)?;
        let out: Vec<f64> = eig.into_iter().take(count).collect();
        if let Some(&last) = out.last() {
            if last > ceiling {
                return Err(Error::TruncationInsufficient { k, value: last, ceiling });
            }
        }
        Ok(out)
    };
    let periodic = block(0)?;
    let anti = block(1)?;
    let mut combined: Vec<f64> = periodic.iter().chain(&anti).copied().collect();
    combined.sort_by(f64::total_cmp);
    combined.truncate(count);
    Ok((combined, periodic))
}

/// Runs `f` and records the first failure in `slot`, returning NaN instead.
fn guarded<'a>(slot: &'a Cell<Option<Error>>, f: impl Fn(f64) -> Result<f64> + 'a) -> impl FnMut(f64) -> f64 + 'a {
    move |x| match f(x) {
        Ok(v) => v,
        Err(e) => {
            let prev = slot.take();
            slot.set(Some(prev.unwrap_or(e)));
            f64::NAN
        }
    }
}

fn take_error(slot: &Cell<Option<Error>>) -> Result<()> {
    match slot.take() {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// Extrema `λ*_1 < λ*_2 < …` of `Δ_H` above the bottom of the spectrum, one
/// per gap.
fn gap_extrema(h: &HillOperator, gaps: usize, q_low: f64) -> Result<Vec<f64>> {
    let slot = Cell::new(None);
    let mut deriv = guarded(&slot, |x| Ok(h.monodromy(x)?.derivative()));
    let ds = PI / 16.0;
    let mut extrema = Vec::with_capacity(gaps);
    let (mut s, mut prev) = (0.0f64, deriv(q_low));
    while extrema.len() < gaps {
        let s_next = s + ds;
        let (x0, x1) = (q_low + s * s, q_low + s_next * s_next);
        let cur = deriv(x1);
        take_error(&slot)?;
        if cur == 0.0 {
            extrema.push(x1);
        } else if prev != 0.0 && prev.signum() != cur.signum() {
            let r = brent(&mut deriv, x0, x1, 0.0);
            take_error(&slot)?;
            extrema.push(r?);
        }
        s = s_next;
        prev = cur;
    }
    Ok(extrema)
}

/// First `count` zeros of `Δ_H² − 4` from the discriminant.
pub fn discriminant_spectrum(h: &HillOperator, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let q_low = -h.potential().sup_bound() - 1.0;
    let gaps = count / 2 + 1;
    let extrema = gap_extrema(h, gaps, q_low)?;
    let mut stops = vec![q_low];
    stops.extend_from_slice(&extrema);

    let root_in = |lo: f64, hi: f64, sigma: f64| -> Result<f64> {
        let slot = Cell::new(None);
        let r = brent(guarded(&slot, |x| hill_band_function(h, x, sigma)), lo, hi, 0.0);
        take_error(&slot)?;
        r
    };
    let pieces: Vec<Result<Vec<f64>>> = (0..gaps)
        .into_par_iter()
        .map(|k| {
            if k == 0 {
                return root_in(stops[0], stops[1], 1.0).map(|r| vec![r]);
            }
            let sigma = if k % 2 == 0 { 1.0 } else { -1.0 };
            let x = stops[k];
            if hill_band_function(h, x, sigma)? >= 0.0 {
                return Ok(vec![x, x]);
            }
            Ok(vec![root_in(stops[k - 1], x, sigma)?, root_in(x, stops[k + 1], sigma)?])
        })
        .collect();
    let mut values = Vec::with_capacity(2 * gaps);
    for p in pieces {
        values.extend(p?);
    }
    values.truncate(count);
    Ok(values)
}

/// First `count` values of both enumerations, with the Galerkin and
/// discriminant combined spectra cross-checked to `1e−8·max(1, |μ|)`.
pub fn hill_spectrum(h: &HillOperator, count: usize) -> Result<HillSpectrum> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be at least 1".into()));
    }
    let (galerkin_combined, periodic_only) = galerkin_spectrum(h, count)?;
    let combined = discriminant_spectrum(h, count)?;
    for (index, (g, d)) in galerkin_combined.iter().zip(&combined).enumerate() {
        if (g - d).abs() > CROSS_CHECK_TOL * d.abs().max(1.0) {
            return Err(Error::CrossCheck { index, first: *g, second: *d });
        }
    }
    Ok(HillSpectrum { combined, periodic_only, galerkin_combined })
}

/// Free combined eigenvalues `(π⌈j/2⌉)²`.
pub fn free_combined(j: usize) -> f64 {
    (PI * j.div_ceil(2) as f64).powi(2)
}

/// Outcome of [`hill_product_residual`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HillProductResidual {
    pub residual: f64,
    /// The evaluation point hit a free eigenvalue and was moved by 1e−9.
    pub shifted: bool,
    pub lambda: f64,
}

/// Ratio-form residual of `Δ² − 4 = 4 Π (μ_j − λ)/π_j²` truncated at `j_max`
/// eigenvalues.
pub fn hill_product_residual(
    h: &HillOperator,
    lambda: f64,
    spectrum: &HillSpectrum,
    j_max: usize,
) -> Result<HillProductResidual> {
    if spectrum.combined.len() < j_max {
        return Err(Error::NotEnoughValues { requested: j_max, available: spectrum.combined.len() });
    }
    let mut lambda = lambda;
    let mut shifted = false;
    if (0..j_max).any(|j| (free_combined(j) - lambda).abs() < 1e-9 * free_combined(j).max(1.0)) {
        lambda += 1e-9;
        shifted = true;
    }
    let mono = h.monodromy(lambda)?;
    let lhs = -mono.band_function(1.0) * mono.band_function(-1.0);
    let free = if lambda >= 0.0 { -4.0 * lambda.sqrt().sin().powi(2) } else { 4.0 * (-lambda).sqrt().sinh().powi(2) };
    let ratio: f64 = spectrum.combined[..j_max]
        .iter()
        .enumerate()
        .map(|(j, mu)| (mu - lambda) / (free_combined(j) - lambda))
        .product();
    let rhs = free * ratio;
    Ok(HillProductResidual { residual: (lhs - rhs).abs() / (1.0 + lhs.abs()), shifted, lambda })
}

/// How Hill eigenvalues enter the Toda edge predictions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScalingMode {
    /// Periodic eigenvalues of `−d²/dx² + q`.
    A,
    /// Four times the combined eigenvalues of `−d²/dx² + q`.
    B,
    /// Combined eigenvalues of `−4 d²/dx² + q`, i.e. four times those of
    /// `−d²/dx² + q/4`.
    C,
}

impl ScalingMode {
    pub const ALL: [ScalingMode; 3] = [ScalingMode::A, ScalingMode::B, ScalingMode::C];

    pub fn label(self) -> &'static str {
        match self {
            ScalingMode::A => "A",
            ScalingMode::B => "B",
            ScalingMode::C => "C",
        }
    }
}

/// Spectra of `q` and `q/4`, enough for every scaling mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeSpectra {
    pub direct: HillSpectrum,
    pub quarter: HillSpectrum,
}

impl EdgeSpectra {
    pub fn compute(h: &HillOperator, count: usize) -> Result<Self> {
        let (direct, quarter) = rayon::join(|| hill_spectrum(h, count), || hill_spectrum(&h.rescaled(0.25), count));
        Ok(EdgeSpectra { direct: direct?, quarter: quarter? })
    }
}

/// The edge values `λ_j` of a scaling mode, `j < count`.
pub fn scaled_edge_values(spectra: &EdgeSpectra, mode: ScalingMode, count: usize) -> Result<Vec<f64>> {
    let source: Vec<f64> = match mode {
        ScalingMode::A => spectra.direct.periodic_only.clone(),
        ScalingMode::B => spectra.direct.combined.iter().map(|v| 4.0 * v).collect(),
        ScalingMode::C => spectra.quarter.combined.iter().map(|v| 4.0 * v).collect(),
    };
    if source.len() < count {
        return Err(Error::NotEnoughValues { requested: count, available: source.len() });
    }
    Ok(source[..count].to_vec())
}

/// CSV with columns `j,mu_combined,lambda_modeA,lambda_modeB,lambda_modeC`.
pub fn write_edge_csv<W: Write>(spectra: &EdgeSpectra, count: usize, mut w: W) -> io::Result<()> {
    writeln!(w, "j,mu_combined,lambda_modeA,lambda_modeB,lambda_modeC")?;
    let cell = |v: Option<&f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
    for j in 0..count {
        writeln!(
            w,
            "{j},{},{},{},{}",
            cell(spectra.direct.combined.get(j)),
            cell(spectra.direct.periodic_only.get(j)),
            cell(spectra.direct.combined.get(j).map(|v| 4.0 * v).as_ref()),
            cell(spectra.quarter.combined.get(j).map(|v| 4.0 * v).as_ref()),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn free() -> HillOperator {
        HillOperator::from_potential(PeriodicProfile::zero(), Sign::Plus)
    }

    fn mathieu() -> HillOperator {
        HillOperator::from_potential(PeriodicProfile::cos_mode(1, -2.0), Sign::Plus)
    }

    #[test]
    fn build_examples() {
        let z = PeriodicProfile::zero();
        let c = PeriodicProfile::cos_mode(1, 1.0);
        assert!(build_hill(&z, &z, Sign::Plus).potential().is_zero());
        for s in [Sign::Plus, Sign::Minus] {
            assert_eq!(build_hill(&c, &z, s).potential(), &PeriodicProfile::cos_mode(1, -2.0));
        }
        assert_eq!(build_hill(&z, &c, Sign::Minus).potential(), &PeriodicProfile::cos_mode(1, 1.0));
    }

    #[test]
    fn tableau_is_consistent() {
        let t = tableau();
        assert_abs_diff_eq!(t.b.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        for i in 0..STAGES {
            assert_abs_diff_eq!(t.a[i].iter().sum::<f64>(), t.c[i], epsilon = 1e-14);
        }
    }

    #[test]
    fn free_discriminant() {
        let h = free();
        assert_abs_diff_eq!(hill_discriminant(&h, 0.0).unwrap(), 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hill_discriminant(&h, PI * PI).unwrap(), -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hill_discriminant(&h, -1.0).unwrap(), 3.0861612696304874, epsilon = 1e-12);
        for lambda in [0.5, 7.0, 300.0, 9000.0] {
            let d = hill_discriminant(&h, lambda).unwrap();
            assert_abs_diff_eq!(d, 2.0 * lambda.sqrt().cos(), epsilon = 1e-10);
            let dd = h.monodromy(lambda).unwrap().derivative();
            assert_abs_diff_eq!(dd, -lambda.sqrt().sin() / lambda.sqrt(), epsilon = 1e-10);
        }
    }

    #[test]
    fn constant_shift() {
        let h = HillOperator::from_potential(PeriodicProfile::constant(1.5), Sign::Plus);
        for lambda in [-3.0f64, 0.0, 4.0, 40.0] {
            let want =
                if lambda >= 1.5 { 2.0 * (lambda - 1.5).sqrt().cos() } else { 2.0 * (1.5 - lambda).sqrt().cosh() };
            assert_abs_diff_eq!(hill_discriminant(&h, lambda).unwrap(), want, epsilon = 1e-10);
        }
    }

    #[test]
    fn free_spectrum() {
        let s = hill_spectrum(&free(), 5).unwrap();
        let p2 = PI * PI;
        for (g, w) in s.combined.iter().zip([0.0, p2, p2, 4.0 * p2, 4.0 * p2]) {
            assert_abs_diff_eq!(*g, w, epsilon = 1e-10);
        }
        for (g, w) in s.periodic_only.iter().zip([0.0, 4.0 * p2, 4.0 * p2, 16.0 * p2, 16.0 * p2]) {
            assert_abs_diff_eq!(*g, w, epsilon = 1e-9);
        }
    }

    #[test]
    fn mathieu_dual_methods() {
        let s = hill_spectrum(&mathieu(), 10).unwrap();
        for (g, d) in s.galerkin_combined.iter().zip(&s.combined) {
            assert_abs_diff_eq!(*g, *d, epsilon = 1e-8 * d.abs().max(1.0));
        }
        // first gap is of order one for this potential
        assert!(s.combined[2] - s.combined[1] > 1.0);
    }

    #[test]
    fn product_residuals() {
        let h = mathieu();
        let s = hill_spectrum(&h, 60).unwrap();
        for lambda in [-5.0, -1.0, 0.3] {
            let r = hill_product_residual(&h, lambda, &s, 60).unwrap();
            assert!(r.residual <= 1e-6, "{lambda}: {r:?}");
        }
        let f = free();
        let s = hill_spectrum(&f, 40).unwrap();
        let r = hill_product_residual(&f, 2.0, &s, 40).unwrap();
        assert!(r.residual <= 1e-12, "{r:?}");
        let r = hill_product_residual(&f, PI * PI, &s, 40).unwrap();
        assert!(r.shifted);
    }

    #[test]
    fn edge_values_by_mode() {
        let spectra = EdgeSpectra::compute(&free(), 3).unwrap();
        let p2 = 4.0 * PI * PI;
        for mode in ScalingMode::ALL {
            let v = scaled_edge_values(&spectra, mode, 3).unwrap();
            for (g, w) in v.iter().zip([0.0, p2, p2]) {
                assert_abs_diff_eq!(*g, w, epsilon = 1e-8);
            }
        }
        assert!(scaled_edge_values(&spectra, ScalingMode::A, 4).is_err());
    }
}
