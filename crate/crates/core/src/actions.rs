//! Action variables: gap integrals of `arcosh(|Δ|/2)`.
//!
//! Integrands vanish like a square root at both gap edges, so every gap is
//! mapped to `θ ∈ [0, π]` through `λ = m + r cos θ` and integrated with
//! Gauss–Legendre in `θ`.

use std::f64::consts::PI;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hill::{build_hill, hill_spectrum, HillOperator, HillSpectrum, Sign};
use crate::profiles::PeriodicProfile;
use crate::quadrature::GaussLegendre;
use crate::toda::{build_jacobi, discriminant_roots, Gap, JacobiData, SpectrumList};

pub const DEFAULT_NODES: usize = 64;
const CLAMP: f64 = 1e-12;
const SIGN_TOL: f64 = 1e-9;

/// Bookkeeping for one gap integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ActionValue {
    pub value: f64,
    /// Nodes where the sign rule failed by between 1e−12 and 1e−9.
    pub soft_violations: usize,
}

/// `arcosh(1 + t)` without cancellation for small `t`.
fn arcosh_one_plus(t: f64) -> f64 {
    (t + (t * (2.0 + t)).sqrt()).ln_1p()
}

/// `∫_gap arcosh(1 + t(λ)) dλ` where `t = −g(λ)/2` and `g = 2 − σΔ`.
fn gap_integral<G>(gap: &Gap, nodes: usize, g: G) -> Result<ActionValue>
where
    G: Fn(f64) -> Result<f64>,
{
    if gap.closed || gap.right <= gap.left {
        return Ok(ActionValue { value: 0.0, soft_violations: 0 });
    }
    let rule = GaussLegendre::new(nodes);
    let (m, r) = (0.5 * (gap.left + gap.right), 0.5 * (gap.right - gap.left));
    let mut soft = 0;
    let mut sum = 0.0;
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        let theta = 0.5 * PI * (x + 1.0);
        let lambda = m + r * theta.cos();
        let t = -0.5 * g(lambda)?;
        let t = if t >= -CLAMP {
            t.max(0.0)
        } else if t >= -SIGN_TOL {
            soft += 1;
            0.0
        } else {
            return Err(Error::SignRule { gap: gap.n, lambda, deficit: -t });
        };
        sum += w * arcosh_one_plus(t) * r * theta.sin();
    }
    if soft > 0 {
        log::warn!("gap {}: {soft} nodes within the sign tolerance band", gap.n);
    }
    Ok(ActionValue { value: 0.5 * PI * sum, soft_violations: soft })
}

/// `I_n = (1/π) ∫ arcosh((−1)^{N−n} Δ^N / 2)` over Toda gap `n`.
pub fn toda_action(j: &JacobiData, spectrum: &SpectrumList, n: usize) -> Result<f64> {
    Ok(toda_action_with(j, spectrum, n, DEFAULT_NODES)?.value)
}

pub fn toda_action_with(j: &JacobiData, spectrum: &SpectrumList, n: usize, nodes: usize) -> Result<ActionValue> {
    if n == 0 || n >= j.n() {
        return Err(Error::InvalidArgument(format!("gap index {n} outside 1..{}", j.n() - 1)));
    }
    let gap = spectrum.gap(n)?;
    let sigma = if (j.n() - n) % 2 == 0 { 1.0 } else { -1.0 };
    let mut v = gap_integral(&gap, nodes, |x| Ok(j.monodromy(x).band_function(sigma)))?;
    v.value /= PI;
    Ok(v)
}

/// `I_n = (2/π) ∫ arcosh((−1)^n Δ_H / 2)` over combined Hill gap `n`.
pub fn hill_action(h: &HillOperator, spectrum: &HillSpectrum, n: usize) -> Result<f64> {
    Ok(hill_action_with(h, spectrum, n, DEFAULT_NODES)?.value)
}

pub fn hill_action_with(h: &HillOperator, spectrum: &HillSpectrum, n: usize, nodes: usize) -> Result<ActionValue> {
    let gap = spectrum.gap(n)?;
    let sigma = if n % 2 == 0 { 1.0 } else { -1.0 };
    let mut v = gap_integral(&gap, nodes, |x| Ok(h.monodromy(x)?.band_function(sigma)))?;
    v.value *= 2.0 / PI;
    Ok(v)
}

/// Where an [`ActionSpectrum`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ActionSource {
    Toda { n: usize },
    Hill { sign: Sign },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActionSpectrum {
    pub source: ActionSource,
    /// `values[i]` is the action of gap `i + 1`.
    pub values: Vec<f64>,
}

pub fn toda_actions(j: &JacobiData, spectrum: &SpectrumList, gaps: &[usize]) -> Result<ActionSpectrum> {
    let values = gaps.par_iter().map(|&n| toda_action(j, spectrum, n)).collect::<Result<Vec<_>>>()?;
    Ok(ActionSpectrum { source: ActionSource::Toda { n: j.n() }, values })
}

pub fn hill_actions(h: &HillOperator, spectrum: &HillSpectrum, n_max: usize) -> Result<ActionSpectrum> {
    let values = (1..=n_max).into_par_iter().map(|n| hill_action(h, spectrum, n)).collect::<Result<Vec<_>>>()?;
    Ok(ActionSpectrum { source: ActionSource::Hill { sign: h.sign() }, values })
}

/// Hill targets for one gap under the three scaling conventions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ActionTargets {
    /// The action of `−d²/dx² + q`.
    pub a: f64,
    /// Four times `a`.
    pub b: f64,
    /// Four times the action of `−d²/dx² + q/4`.
    pub c: f64,
}

impl ActionTargets {
    pub fn get(&self, mode: crate::hill::ScalingMode) -> f64 {
        match mode {
            crate::hill::ScalingMode::A => self.a,
            crate::hill::ScalingMode::B => self.b,
            crate::hill::ScalingMode::C => self.c,
        }
    }
}

/// Hill action targets for gaps `1..=n_max`.
pub fn hill_action_targets(h: &HillOperator, n_max: usize) -> Result<Vec<ActionTargets>> {
    let count = 2 * n_max + 1;
    let quarter = h.rescaled(0.25);
    let (direct, scaled) = rayon::join(
        || hill_spectrum(h, count).and_then(|s| hill_actions(h, &s, n_max)),
        || hill_spectrum(&quarter, count).and_then(|s| hill_actions(&quarter, &s, n_max)),
    );
    let (direct, scaled) = (direct?, scaled?);
    Ok(direct.values.iter().zip(&scaled.values).map(|(&a, &c)| ActionTargets { a, b: 4.0 * a, c: 4.0 * c }).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ActionRow {
    pub n: usize,
    /// `8N² I_n^N`.
    pub toda_bottom: f64,
    pub target_minus: ActionTargets,
    /// `8N² I_{N−n}^N`.
    pub toda_top: f64,
    pub target_plus: ActionTargets,
}

/// Rows `(n, 8N²I_n, targets⁻, 8N²I_{N−n}, targets⁺)` for `n = 1..=n_max`.
pub fn renormalized_action_table(
    alpha: &PeriodicProfile,
    beta: &PeriodicProfile,
    n: usize,
    n_max: usize,
) -> Result<Vec<ActionRow>> {
    if n_max == 0 || 4 * n_max > n {
        return Err(Error::InvalidArgument(format!("n_max = {n_max} must lie in 1..=N/4")));
    }
    let j = build_jacobi(alpha, beta, n)?;
    let spectrum = discriminant_roots(&j)?;
    let minus = build_hill(alpha, beta, Sign::Minus);
    let plus = build_hill(alpha, beta, Sign::Plus);
    let (tm, tp) = rayon::join(|| hill_action_targets(&minus, n_max), || hill_action_targets(&plus, n_max));
    let (tm, tp) = (tm?, tp?);
    let scale = 8.0 * (n * n) as f64;
    (1..=n_max)
        .into_par_iter()
        .map(|g| {
            Ok(ActionRow {
                n: g,
                toda_bottom: scale * toda_action(&j, &spectrum, g)?,
                target_minus: tm[g - 1],
                toda_top: scale * toda_action(&j, &spectrum, n - g)?,
                target_plus: tp[g - 1],
            })
        })
        .collect()
}

/// CSV with the scaled Toda actions and the Hill targets of every mode.
pub fn write_action_csv<W: Write>(rows: &[ActionRow], mut w: W) -> io::Result<()> {
    writeln!(
        w,
        "n,I_toda_scaled_bottom,target_minus_A,target_minus_B,I_toda_scaled_top,target_plus_A,target_plus_B,target_minus_C,target_plus_C"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.n,
            r.toda_bottom,
            r.target_minus.a,
            r.target_minus.b,
            r.toda_top,
            r.target_plus.a,
            r.target_plus.b,
            r.target_minus.c,
            r.target_plus.c
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toda::equilibrium_spectrum;

    #[test]
    fn arcosh_small_argument() {
        assert_eq!(arcosh_one_plus(0.0), 0.0);
        let t = 1e-20;
        assert!((arcosh_one_plus(t) - (2.0 * t).sqrt()).abs() < 1e-25);
        assert!((arcosh_one_plus(1.0) - 2f64.acosh()).abs() < 1e-15);
    }

    #[test]
    fn equilibrium_actions_vanish() {
        let z = PeriodicProfile::zero();
        let j = build_jacobi(&z, &z, 8).unwrap();
        let s = equilibrium_spectrum(8);
        for n in 1..8 {
            assert_eq!(toda_action(&j, &s, n).unwrap(), 0.0);
        }
    }

    #[test]
    fn open_gaps_are_positive() {
        let alpha = PeriodicProfile::cos_mode(1, 1.0);
        let beta = PeriodicProfile::sin_mode(1, 1.0);
        let j = build_jacobi(&alpha, &beta, 16).unwrap();
        let s = discriminant_roots(&j).unwrap();
        for n in [1, 15] {
            let v = toda_action_with(&j, &s, n, 64).unwrap();
            assert!(v.value > 0.0);
            let fine = toda_action_with(&j, &s, n, 128).unwrap();
            assert!((v.value - fine.value).abs() <= 1e-9 * fine.value);
        }
    }

    #[test]
    fn wrong_sign_is_rejected() {
        let alpha = PeriodicProfile::cos_mode(1, 1.0);
        let j = build_jacobi(&alpha, &PeriodicProfile::zero(), 16).unwrap();
        let s = discriminant_roots(&j).unwrap();
        let gap = s.gap(1).unwrap();
        let err = gap_integral(&gap, 16, |x| Ok(-j.monodromy(x).band_function(-1.0))).unwrap_err();
        assert!(matches!(err, Error::SignRule { gap: 1, .. }));
    }

    #[test]
    fn free_hill_actions_vanish() {
        let h = HillOperator::from_potential(PeriodicProfile::zero(), Sign::Plus);
        let s = hill_spectrum(&h, 9).unwrap();
        for n in 1..=4 {
            assert_eq!(hill_action(&h, &s, n).unwrap(), 0.0);
        }
    }

    #[test]
    fn table_rejects_large_n_max() {
        let z = PeriodicProfile::zero();
        assert!(renormalized_action_table(&z, &z, 16, 5).is_err());
    }
}
