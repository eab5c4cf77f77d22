//! Scenario files and their resolved form.
//!
//! Every key is optional; [`Resolved`] fills in the defaults and is embedded
//! verbatim in each `summary.json`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use toda_kdv::hill::ScalingMode;
use toda_kdv::kdv::{DEFAULT_DT, DEFAULT_GRID};
use toda_kdv::PeriodicProfile;

use crate::error::CliError;
use crate::Study;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum ModeSelection {
    A,
    B,
    C,
    #[serde(rename = "both")]
    #[value(name = "both")]
    Both,
    #[serde(rename = "all")]
    #[value(name = "all")]
    All,
}

impl ModeSelection {
    pub fn modes(self) -> Vec<ScalingMode> {
        match self {
            ModeSelection::A => vec![ScalingMode::A],
            ModeSelection::B => vec![ScalingMode::B],
            ModeSelection::C => vec![ScalingMode::C],
            ModeSelection::Both => vec![ScalingMode::A, ScalingMode::B],
            ModeSelection::All => ScalingMode::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeSelection {
    Bottom,
    Top,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flow {
    Literal,
    EdgeScaled,
}

impl From<Flow> for toda_kdv::kdv::PairFlow {
    fn from(f: Flow) -> Self {
        match f {
            Flow::Literal => toda_kdv::kdv::PairFlow::Literal,
            Flow::EdgeScaled => toda_kdv::kdv::PairFlow::EdgeScaled,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub points: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Grid { lambda_min: -2.0, lambda_max: 40.0, points: 85 }
    }
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        let h = (self.lambda_max - self.lambda_min) / (self.points - 1) as f64;
        (0..self.points).map(|i| self.lambda_min + i as f64 * h).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KdvOptions {
    pub grid: usize,
    pub dt: f64,
    /// Snapshots after `t = 0`.
    pub samples: usize,
}

impl Default for KdvOptions {
    fn default() -> Self {
        KdvOptions { grid: DEFAULT_GRID, dt: DEFAULT_DT, samples: 5 }
    }
}

/// One Fourier term `(re + i·im) e^{2πilx}` of a symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MuTerm {
    pub l: i64,
    #[serde(default)]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// Random trig-polynomial pairs for the dual-solver check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RandomProfiles {
    pub count: usize,
    pub degree: usize,
    pub amplitude: f64,
}

impl Default for RandomProfiles {
    fn default() -> Self {
        RandomProfiles { count: 20, degree: 3, amplitude: 2.0 }
    }
}

/// The file as written by the user.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub alpha: Option<PeriodicProfile>,
    pub beta: Option<PeriodicProfile>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[serde(rename = "N_list")]
    pub n_list: Option<Vec<usize>>,
    pub study: Option<Study>,
    pub mode: Option<ModeSelection>,
    pub edge: Option<EdgeSelection>,
    pub t_final: Option<f64>,
    pub n_max: Option<usize>,
    pub hill_count: Option<usize>,
    pub grid: Option<Grid>,
    pub kdv: Option<KdvOptions>,
    pub flow: Option<Flow>,
    pub k: Option<usize>,
    pub mu: Option<Vec<MuTerm>>,
    pub random: Option<RandomProfiles>,
    pub output: Option<String>,
}

/// Every option with its default applied.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolved {
    pub study: Study,
    pub alpha: PeriodicProfile,
    pub beta: PeriodicProfile,
    #[serde(rename = "N_list")]
    pub n_list: Vec<usize>,
    pub mode: ModeSelection,
    pub edge: EdgeSelection,
    pub t_final: f64,
    pub n_max: usize,
    pub hill_count: usize,
    pub grid: Grid,
    pub kdv: KdvOptions,
    pub flow: Flow,
    pub k: usize,
    pub mu: Vec<MuTerm>,
    pub random: Option<RandomProfiles>,
    pub seed: u64,
}

fn default_sizes(study: Study) -> Vec<usize> {
    match study {
        Study::Spectrum => vec![8],
        Study::Hill => vec![],
        Study::Kdv => vec![32, 64, 128, 256],
        Study::Quasimode => vec![16, 32, 64, 128],
        Study::Discriminant | Study::Actions | Study::Converge => vec![64, 128, 256, 512],
    }
}

fn config<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Config(msg.into()))
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Applies defaults; `mode` from the command line wins over the file.
    pub fn resolve(self, study: Study, mode: Option<ModeSelection>, seed: u64) -> Result<Resolved, CliError> {
        if let Some(s) = self.study {
            if s != study {
                return config(format!("scenario is for study {s:?}, invoked as {study:?}"));
            }
        }
        let n_list = match (self.n, self.n_list) {
            (Some(_), Some(_)) => return config("give N or N_list, not both"),
            (Some(n), None) => vec![n],
            (None, Some(l)) => l,
            (None, None) => default_sizes(study),
        };
        let r = Resolved {
            study,
            alpha: self.alpha.unwrap_or_else(PeriodicProfile::zero),
            beta: self.beta.unwrap_or_else(PeriodicProfile::zero),
            n_list,
            mode: mode.or(self.mode).unwrap_or(ModeSelection::All),
            edge: self.edge.unwrap_or(EdgeSelection::Both),
            t_final: self.t_final.unwrap_or(0.05),
            n_max: self.n_max.unwrap_or(2),
            hill_count: self.hill_count.unwrap_or(10),
            grid: self.grid.unwrap_or_default(),
            kdv: self.kdv.unwrap_or_default(),
            flow: self.flow.unwrap_or(Flow::EdgeScaled),
            k: self.k.unwrap_or(0),
            mu: self.mu.unwrap_or_else(|| vec![MuTerm { l: 0, re: 1.0, im: 0.0 }]),
            random: self.random,
            seed,
        };
        r.validate()?;
        Ok(r)
    }
}

impl Resolved {
    fn validate(&self) -> Result<(), CliError> {
        if self.study != Study::Hill && self.n_list.is_empty() {
            return config("N_list is empty");
        }
        if let Some(&n) = self.n_list.iter().find(|&&n| n < 2) {
            return config(format!("N = {n} is below 2"));
        }
        if self.n_list.windows(2).any(|w| w[1] <= w[0]) {
            return config("N_list must be strictly increasing");
        }
        let needs_16 = matches!(self.study, Study::Converge);
        if needs_16 && self.n_list[0] < 16 {
            return config("edge and bulk comparisons need N ≥ 16");
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return config("t_final must be positive");
        }
        if self.n_max == 0 {
            return config("n_max must be at least 1");
        }
        if self.hill_count == 0 {
            return config("hill_count must be at least 1");
        }
        let g = &self.grid;
        if g.points < 2 || !(g.lambda_min < g.lambda_max) {
            return config("grid needs lambda_min < lambda_max and at least 2 points");
        }
        if !(self.kdv.dt > 0.0) || self.kdv.samples == 0 {
            return config("kdv.dt must be positive and kdv.samples at least 1");
        }
        if let Some(r) = self.random {
            if !(r.amplitude >= 0.0) {
                return config("random.amplitude must be non-negative");
            }
        }
        if self.study == Study::Quasimode && self.k >= 2 * self.n_list[0] {
            return config(format!("k = {} must be below 2N", self.k));
        }
        Ok(())
    }
}
