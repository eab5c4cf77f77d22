//! Large-N comparisons and log-log rate fits.

use std::f64::consts::PI;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::actions::{hill_action_targets, toda_action, ActionTargets};
use crate::error::{Error, Result};
use crate::hill::{build_hill, hill_discriminant, scaled_edge_values, EdgeSpectra, HillOperator, ScalingMode, Sign};
use crate::kdv::{evolve_pair, spectral_distance, KdvParams, PairFlow};
use crate::profiles::PeriodicProfile;
use crate::quasimodes::{quasimode_residual, FourierSymbol};
use crate::toda::{build_jacobi, dense_spectrum, discriminant_roots, JacobiData};

/// Least-squares line through `(ln N, ln error)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit in log space.
    pub residual: f64,
}

/// `ln error ≈ slope · ln N + intercept` over all samples.
pub fn fit_rate(samples: &[(f64, f64)]) -> Result<RateFit> {
    if samples.len() < 3 {
        return Err(Error::NotEnoughValues { requested: 3, available: samples.len() });
    }
    if let Some(&(n, e)) = samples.iter().find(|(n, e)| !(*n > 0.0) || !(*e > 0.0)) {
        return Err(Error::InvalidArgument(format!("rate samples need N > 0 and error > 0, got ({n}, {e})")));
    }
    let k = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs.iter().zip(&ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum::<f64>() / k).sqrt();
    Ok(RateFit { slope, intercept, residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub n: usize,
    pub error: f64,
    /// Errors at or below this level are numerical noise.
    pub floor: f64,
}

impl Sample {
    pub fn floor_limited(&self) -> bool {
        !(self.error > self.floor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RateStatus {
    Fitted(RateFit),
    Indeterminate { usable: usize },
}

/// `(N, error)` samples with the fit over those above their floor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub samples: Vec<Sample>,
    pub rate: RateStatus,
}

impl ConvergenceReport {
    pub fn new(samples: Vec<Sample>) -> Self {
        let usable: Vec<(f64, f64)> =
            samples.iter().filter(|s| !s.floor_limited()).map(|s| (s.n as f64, s.error)).collect();
        let rate = if usable.len() < 3 {
            RateStatus::Indeterminate { usable: usable.len() }
        } else {
            match fit_rate(&usable) {
                Ok(fit) => RateStatus::Fitted(fit),
                Err(_) => RateStatus::Indeterminate { usable: usable.len() },
            }
        };
        ConvergenceReport { samples, rate }
    }

    pub fn slope(&self) -> Option<f64> {
        match self.rate {
            RateStatus::Fitted(f) => Some(f.slope),
            RateStatus::Indeterminate { .. } => None,
        }
    }

    /// The fitted slope, or an error naming the usable sample count.
    pub fn require_slope(&self) -> Result<f64> {
        match self.rate {
            RateStatus::Fitted(f) => Ok(f.slope),
            RateStatus::Indeterminate { usable } => Err(Error::RateIndeterminate { usable }),
        }
    }

    pub fn floor_limited(&self) -> bool {
        self.samples.iter().any(Sample::floor_limited)
    }

    pub fn terminal_error(&self) -> f64 {
        self.samples.last().map_or(f64::NAN, |s| s.error)
    }

    pub fn strictly_decreasing(&self) -> bool {
        self.samples.windows(2).all(|w| w[1].error < w[0].error)
    }
}

/// `10 × 2N·ε_mach·‖L‖∞`, the level below which eigenvalue errors are noise.
pub fn eigen_floor(j: &JacobiData) -> f64 {
    10.0 * j.eigen_tolerance()
}

/// `M_N = ⌊N^{1/4}⌋`.
pub fn edge_window(n: usize) -> usize {
    let mut m = (n as f64).powf(0.25).floor() as usize;
    while (m + 1).pow(4) <= n {
        m += 1;
    }
    while m.pow(4) > n {
        m -= 1;
    }
    m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Edge {
    Bottom,
    Top,
}

impl Edge {
    pub fn label(self) -> &'static str {
        match self {
            Edge::Bottom => "bottom",
            Edge::Top => "top",
        }
    }

    /// The Hill operator governing this edge.
    pub fn sign(self) -> Sign {
        match self {
            Edge::Bottom => Sign::Minus,
            Edge::Top => Sign::Plus,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeRow {
    pub edge: Edge,
    pub j: usize,
    pub toda: f64,
    /// Predictions and errors in the order A, B, C.
    pub predictions: [f64; 3],
    pub errors: [f64; 3],
}

impl EdgeRow {
    pub fn error(&self, mode: ScalingMode) -> f64 {
        self.errors[mode as usize]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BulkRow {
    pub l: usize,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeReport {
    pub n: usize,
    pub m_n: usize,
    pub floor: f64,
    pub rows: Vec<EdgeRow>,
    pub bulk: Vec<BulkRow>,
}

impl EdgeReport {
    pub fn row(&self, edge: Edge, j: usize) -> Option<&EdgeRow> {
        self.rows.iter().find(|r| r.edge == edge && r.j == j)
    }

    pub fn bulk_max(&self) -> f64 {
        self.bulk.iter().map(|b| b.deviation).fold(0.0, f64::max)
    }

    /// Number of eigenvalue slots covered by the two edge windows and the
    /// bulk window.
    pub fn covered_slots(&self) -> usize {
        self.rows.len() + 2 * self.bulk.len()
    }
}

/// Edge errors `|λ_j − (−2 + λ_j⁻/4N²)|`, `|λ_{2N−1−j} − (2 − λ_j⁺/4N²)|` for
/// `j ≤ 2M_N` in every scaling mode, and the bulk deviations from
/// `−2cos(lπ/N)`.
pub fn edge_comparison(alpha: &PeriodicProfile, beta: &PeriodicProfile, n: usize) -> Result<EdgeReport> {
    if n < 16 {
        return Err(Error::InvalidArgument(format!("edge comparison needs N ≥ 16, got {n}")));
    }
    let jac = build_jacobi(alpha, beta, n)?;
    let m_n = edge_window(n);
    let count = 2 * m_n + 1;
    let minus = build_hill(alpha, beta, Sign::Minus);
    let plus = build_hill(alpha, beta, Sign::Plus);
    let (spectrum, (sm, sp)) = rayon::join(
        || dense_spectrum(&jac),
        || rayon::join(|| EdgeSpectra::compute(&minus, count), || EdgeSpectra::compute(&plus, count)),
    );
    let (spectrum, sm, sp) = (spectrum?, sm?, sp?);
    let scale = 1.0 / (4.0 * (n * n) as f64);
    let mut rows = Vec::with_capacity(2 * count);
    for (edge, spectra) in [(Edge::Bottom, &sm), (Edge::Top, &sp)] {
        let per_mode: Vec<Vec<f64>> =
            ScalingMode::ALL.iter().map(|&m| scaled_edge_values(spectra, m, count)).collect::<Result<_>>()?;
        for j in 0..count {
            let toda = match edge {
                Edge::Bottom => spectrum.values[j],
                Edge::Top => spectrum.values[2 * n - 1 - j],
            };
            let mut predictions = [0.0; 3];
            let mut errors = [0.0; 3];
            for (i, values) in per_mode.iter().enumerate() {
                predictions[i] = match edge {
                    Edge::Bottom => -2.0 + scale * values[j],
                    Edge::Top => 2.0 - scale * values[j],
                };
                errors[i] = (toda - predictions[i]).abs();
            }
            rows.push(EdgeRow { edge, j, toda, predictions, errors });
        }
    }
    let bulk = bulk_rows(&spectrum.values, n, m_n);
    Ok(EdgeReport { n, m_n, floor: eigen_floor(&jac), rows, bulk })
}

fn bulk_rows(values: &[f64], n: usize, m_n: usize) -> Vec<BulkRow> {
    (m_n + 1..n - m_n)
        .map(|l| {
            let target = -2.0 * (l as f64 * PI / n as f64).cos();
            let deviation = (values[2 * l - 1] - target).abs().max((values[2 * l] - target).abs());
            BulkRow { l, deviation }
        })
        .collect()
}

/// Largest bulk deviation `|λ_{2l−1,2l} + 2cos(lπ/N)|`, `M_N < l < N − M_N`.
pub fn bulk_comparison(alpha: &PeriodicProfile, beta: &PeriodicProfile, n: usize) -> Result<f64> {
    if n < 16 {
        return Err(Error::InvalidArgument(format!("bulk comparison needs N ≥ 16, got {n}")));
    }
    let jac = build_jacobi(alpha, beta, n)?;
    let spectrum = dense_spectrum(&jac)?;
    Ok(bulk_rows(&spectrum.values, n, edge_window(n)).iter().map(|b| b.deviation).fold(0.0, f64::max))
}

/// Convergence of one edge eigenvalue in one scaling mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeSeries {
    pub edge: Edge,
    pub j: usize,
    pub mode: ScalingMode,
    pub report: ConvergenceReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeStudy {
    pub reports: Vec<EdgeReport>,
    pub series: Vec<EdgeSeries>,
    pub bulk: ConvergenceReport,
    /// Mode with the smallest summed terminal error over `j ≥ 1`.
    pub best_mode: ScalingMode,
}

impl EdgeStudy {
    pub fn series(&self, edge: Edge, j: usize, mode: ScalingMode) -> Option<&EdgeSeries> {
        self.series.iter().find(|s| s.edge == edge && s.j == j && s.mode == mode)
    }
}

/// Edge and bulk comparisons over a list of sizes; `j` runs over the window
/// of the smallest size.
pub fn edge_study(alpha: &PeriodicProfile, beta: &PeriodicProfile, n_list: &[usize]) -> Result<EdgeStudy> {
    let reports = n_list.par_iter().map(|&n| edge_comparison(alpha, beta, n)).collect::<Result<Vec<_>>>()?;
    let j_max = reports.iter().map(|r| 2 * r.m_n).min().unwrap_or(0);
    let mut series = Vec::new();
    for edge in [Edge::Bottom, Edge::Top] {
        for j in 0..=j_max {
            for mode in ScalingMode::ALL {
                let samples = reports
                    .iter()
                    .map(|r| Sample {
                        n: r.n,
                        error: r.row(edge, j).map_or(f64::NAN, |x| x.error(mode)),
                        floor: r.floor,
                    })
                    .collect();
                series.push(EdgeSeries { edge, j, mode, report: ConvergenceReport::new(samples) });
            }
        }
    }
    let best_mode = *ScalingMode::ALL
        .iter()
        .min_by(|a, b| {
            let total = |m: ScalingMode| -> f64 {
                series.iter().filter(|s| s.mode == m && s.j >= 1).map(|s| s.report.terminal_error()).sum()
            };
            total(**a).total_cmp(&total(**b))
        })
        .expect("three modes");
    let bulk = ConvergenceReport::new(
        reports.iter().map(|r| Sample { n: r.n, error: r.bulk_max(), floor: r.floor }).collect(),
    );
    Ok(EdgeStudy { reports, series, bulk, best_mode })
}

/// Bulk deviation over sizes.
pub fn bulk_study(alpha: &PeriodicProfile, beta: &PeriodicProfile, n_list: &[usize]) -> Result<ConvergenceReport> {
    let samples = n_list
        .par_iter()
        .map(|&n| {
            let floor = eigen_floor(&build_jacobi(alpha, beta, n)?);
            Ok(Sample { n, error: bulk_comparison(alpha, beta, n)?, floor })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport::new(samples))
}

/// The limits the rescaled Toda discriminant is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum DiscriminantTarget {
    /// `Δ_{H(q/4)}(λ/4)`, the discriminant of `−4 d²/dx² + q`.
    Calibrated,
    /// `Δ_{H(q)}(λ/4)`.
    QuarterArgument,
    /// `Δ_{H(q)}(λ)`.
    Literal,
}

impl DiscriminantTarget {
    pub const ALL: [DiscriminantTarget; 3] =
        [DiscriminantTarget::Calibrated, DiscriminantTarget::QuarterArgument, DiscriminantTarget::Literal];

    pub fn label(self) -> &'static str {
        match self {
            DiscriminantTarget::Calibrated => "calibrated",
            DiscriminantTarget::QuarterArgument => "quarter_argument",
            DiscriminantTarget::Literal => "literal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscriminantPoint {
    pub n: usize,
    pub lambda: f64,
    /// `(−1)^N Δ^N(−2 + ε²λ)` or `Δ^N(2 − ε²λ)`.
    pub toda: f64,
    /// Targets in the order of [`DiscriminantTarget::ALL`].
    pub targets: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscriminantStudy {
    pub edge: Edge,
    pub points: Vec<DiscriminantPoint>,
    /// Sup-error reports in the order of [`DiscriminantTarget::ALL`].
    pub reports: Vec<ConvergenceReport>,
}

impl DiscriminantStudy {
    pub fn report(&self, target: DiscriminantTarget) -> &ConvergenceReport {
        &self.reports[target as usize]
    }
}

fn hill_targets(h: &HillOperator, lambda: f64) -> Result<[f64; 3]> {
    Ok([
        hill_discriminant(&h.rescaled(0.25), 0.25 * lambda)?,
        hill_discriminant(h, 0.25 * lambda)?,
        hill_discriminant(h, lambda)?,
    ])
}

/// Sup over `grid` of the distance between the rescaled Toda discriminant
/// and each Hill target, for every `N`.
pub fn discriminant_convergence(
    alpha: &PeriodicProfile,
    beta: &PeriodicProfile,
    n_list: &[usize],
    grid: &[f64],
    edge: Edge,
) -> Result<DiscriminantStudy> {
    let hill = build_hill(alpha, beta, edge.sign());
    let targets = grid.par_iter().map(|&l| hill_targets(&hill, l)).collect::<Result<Vec<_>>>()?;
    let per_n = n_list
        .par_iter()
        .map(|&n| {
            let jac = build_jacobi(alpha, beta, n)?;
            let e2 = jac.eps() * jac.eps();
            grid.iter()
                .zip(&targets)
                .map(|(&lambda, t)| {
                    let toda = match edge {
                        Edge::Bottom => {
                            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                            sign * jac.monodromy(-2.0 + e2 * lambda).trace()
                        }
                        Edge::Top => jac.monodromy(2.0 - e2 * lambda).trace(),
                    };
                    Ok(DiscriminantPoint { n, lambda, toda, targets: *t })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let reports = (0..3)
        .map(|t| {
            ConvergenceReport::new(
                per_n
                    .iter()
                    .zip(n_list)
                    .map(|(pts, &n)| Sample {
                        n,
                        error: pts.iter().map(|p| (p.toda - p.targets[t]).abs()).fold(0.0, f64::max),
                        floor: 0.0,
                    })
                    .collect(),
            )
        })
        .collect();
    Ok(DiscriminantStudy { edge, points: per_n.into_iter().flatten().collect(), reports })
}

/// Renormalized Toda actions at one size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ActionSample {
    pub n: usize,
    pub gap: usize,
    pub bottom: f64,
    pub top: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActionSeries {
    pub gap: usize,
    pub edge: Edge,
    pub mode: ScalingMode,
    pub target: f64,
    pub report: ConvergenceReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActionStudy {
    pub samples: Vec<ActionSample>,
    pub targets_minus: Vec<ActionTargets>,
    pub targets_plus: Vec<ActionTargets>,
    pub series: Vec<ActionSeries>,
    pub best_mode: ScalingMode,
}

impl ActionStudy {
    pub fn series(&self, gap: usize, edge: Edge, mode: ScalingMode) -> Option<&ActionSeries> {
        self.series.iter().find(|s| s.gap == gap && s.edge == edge && s.mode == mode)
    }
}

/// `|8N² I_n^N − I_n⁻|` and `|8N² I_{N−n}^N − I_n⁺|` over sizes, for every
/// scaling mode.
pub fn action_convergence(
    alpha: &PeriodicProfile,
    beta: &PeriodicProfile,
    n_list: &[usize],
    n_max: usize,
) -> Result<ActionStudy> {
    if let Some(&n) = n_list.iter().find(|&&n| 4 * n_max > n) {
        return Err(Error::InvalidArgument(format!("n_max = {n_max} exceeds N/4 for N = {n}")));
    }
    let minus = build_hill(alpha, beta, Sign::Minus);
    let plus = build_hill(alpha, beta, Sign::Plus);
    let (tm, tp) = rayon::join(|| hill_action_targets(&minus, n_max), || hill_action_targets(&plus, n_max));
    let (tm, tp) = (tm?, tp?);
    let samples: Vec<ActionSample> = n_list
        .par_iter()
        .map(|&n| {
            let jac = build_jacobi(alpha, beta, n)?;
            let spectrum = discriminant_roots(&jac)?;
            let scale = 8.0 * (n * n) as f64;
            (1..=n_max)
                .map(|g| {
                    Ok(ActionSample {
                        n,
                        gap: g,
                        bottom: scale * toda_action(&jac, &spectrum, g)?,
                        top: scale * toda_action(&jac, &spectrum, n - g)?,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let mut series = Vec::new();
    for gap in 1..=n_max {
        for edge in [Edge::Bottom, Edge::Top] {
            for mode in ScalingMode::ALL {
                let target = match edge {
                    Edge::Bottom => tm[gap - 1].get(mode),
                    Edge::Top => tp[gap - 1].get(mode),
                };
                let report = ConvergenceReport::new(
                    samples
                        .iter()
                        .filter(|s| s.gap == gap)
                        .map(|s| {
                            let value = if edge == Edge::Bottom { s.bottom } else { s.top };
                            Sample { n: s.n, error: (value - target).abs(), floor: 0.0 }
                        })
                        .collect(),
                );
                series.push(ActionSeries { gap, edge, mode, target, report });
            }
        }
    }
    let best_mode = *ScalingMode::ALL
        .iter()
        .min_by(|a, b| {
            let total = |m: ScalingMode| -> f64 {
                series
                    .iter()
                    .filter(|s| s.mode == m)
                    .map(|s| s.report.terminal_error() / s.target.abs().max(f64::MIN_POSITIVE))
                    .sum()
            };
            total(**a).total_cmp(&total(**b))
        })
        .expect("three modes");
    Ok(ActionStudy { samples, targets_minus: tm, targets_plus: tp, series, best_mode })
}

/// `κ − 1` over sizes.
pub fn kappa_convergence(
    alpha: &PeriodicProfile,
    beta: &PeriodicProfile,
    n_list: &[usize],
) -> Result<ConvergenceReport> {
    let samples = n_list
        .iter()
        .map(|&n| {
            let jac = build_jacobi(alpha, beta, n)?;
            // κ − 1 = expm1(ln κ) keeps the small difference accurate
            Ok(Sample { n, error: jac.ln_kappa().exp_m1().abs(), floor: 0.0 })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport::new(samples))
}

/// Spectral drift of `L_N` under the pair flow, over sizes.
pub fn drift_convergence(
    alpha: &PeriodicProfile,
    beta: &PeriodicProfile,
    t: f64,
    n_list: &[usize],
    flow: PairFlow,
    params: KdvParams,
) -> Result<ConvergenceReport> {
    let (at, bt) = evolve_pair(alpha, beta, t, flow, params)?;
    let samples = n_list
        .par_iter()
        .map(|&n| {
            let floor = eigen_floor(&build_jacobi(alpha, beta, n)?);
            Ok(Sample { n, error: spectral_distance(alpha, beta, &at, &bt, n)?, floor })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport::new(samples))
}

/// Quasimode residuals over sizes; the rate in `ε = 1/2N` is minus the
/// fitted slope in `N`.
pub fn quasimode_convergence(
    k: usize,
    mu: &FourierSymbol,
    alpha: &PeriodicProfile,
    beta: &PeriodicProfile,
    n_list: &[usize],
) -> Result<ConvergenceReport> {
    let samples = n_list
        .par_iter()
        .map(|&n| Ok(Sample { n, error: quasimode_residual(k, mu, alpha, beta, n)?, floor: 1e-14 }))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConvergenceReport::new(samples))
}

/// CSV of convergence samples: `N,error,floor_limited`.
pub fn write_convergence_csv<W: Write>(report: &ConvergenceReport, mut w: W) -> io::Result<()> {
    writeln!(w, "N,error,floor_limited")?;
    for s in &report.samples {
        writeln!(w, "{},{:.16e},{}", s.n, s.error, s.floor_limited())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn fit_exact_power_laws() {
        let s: Vec<(f64, f64)> = [16.0, 32.0, 64.0, 128.0].iter().map(|&n: &f64| (n, 3.0 * n.powi(-3))).collect();
        assert_abs_diff_eq!(fit_rate(&s).unwrap().slope, -3.0, epsilon = 1e-12);
        let s: Vec<(f64, f64)> = [16.0, 32.0, 64.0].iter().map(|&n: &f64| (n, 0.5 * n.powi(-2))).collect();
        assert_abs_diff_eq!(fit_rate(&s).unwrap().slope, -2.0, epsilon = 1e-12);
        assert!(fit_rate(&[(16.0, 1.0)]).is_err());
    }

    #[test]
    fn floor_makes_rate_indeterminate() {
        let samples = (0..4).map(|i| Sample { n: 16 << i, error: 1e-16, floor: 1e-14 }).collect();
        let r = ConvergenceReport::new(samples);
        assert_eq!(r.rate, RateStatus::Indeterminate { usable: 0 });
        assert!(r.require_slope().is_err());
        assert!(r.floor_limited());
    }

    #[test]
    fn window_sizes() {
        assert_eq!(edge_window(16), 2);
        assert_eq!(edge_window(80), 2);
        assert_eq!(edge_window(81), 3);
        assert_eq!(edge_window(512), 4);
    }

    #[test]
    fn free_edges_are_exact() {
        let z = PeriodicProfile::zero();
        let r = edge_comparison(&z, &z, 32).unwrap();
        assert_eq!(r.covered_slots(), 64);
        for mode in ScalingMode::ALL {
            let row = r.row(Edge::Bottom, 0).unwrap();
            assert!(row.error(mode) <= r.floor);
            let row = r.row(Edge::Bottom, 1).unwrap();
            let want = (-2.0 * (PI / 32.0).cos() + 2.0 - PI * PI / 1024.0).abs();
            assert_abs_diff_eq!(row.error(mode), want, epsilon = r.floor);
        }
        assert!(r.bulk_max() <= r.floor);
    }

    #[test]
    fn top_bottom_swap_under_beta_reflection() {
        let a = PeriodicProfile::cos_mode(1, 1.0);
        let b = PeriodicProfile::sin_mode(1, 1.0);
        let r1 = edge_comparison(&a, &b, 32).unwrap();
        let r2 = edge_comparison(&a, &b.scale(-1.0), 32).unwrap();
        for j in 0..=2 * r1.m_n {
            let p1 = r1.row(Edge::Bottom, j).unwrap().predictions;
            let p2 = r2.row(Edge::Top, j).unwrap().predictions;
            for i in 0..3 {
                assert_abs_diff_eq!(p1[i] + 2.0, 2.0 - p2[i], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn free_discriminant_limit() {
        let z = PeriodicProfile::zero();
        let grid: Vec<f64> = (0..=21).map(|i| -2.0 + 2.0 * i as f64).collect();
        let study = discriminant_convergence(&z, &z, &[16, 32, 64], &grid, Edge::Bottom).unwrap();
        let p0 = study.points.iter().find(|p| p.lambda == 0.0).unwrap();
        assert_abs_diff_eq!(p0.toda, 2.0, epsilon = 1e-12);
        let slope = study.report(DiscriminantTarget::Calibrated).require_slope().unwrap();
        assert!(slope <= -1.9, "slope {slope}");
    }

    #[test]
    fn kappa_decay() {
        let a = PeriodicProfile::cos_mode(1, 1.0);
        let b = PeriodicProfile::sin_mode(1, 1.0);
        let r = kappa_convergence(&a, &b, &[32, 64, 128, 256, 512]).unwrap();
        assert!(r.require_slope().unwrap() <= -2.9);
    }
}
