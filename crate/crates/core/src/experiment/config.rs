//! JSON experiment configuration.

use std::fs;
use std::path::{Path as FsPath, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{Attenuation, Path, SnrProfile};
use crate::completion::CompletionMethod;
use crate::greedy::BerMetric;

use super::ExperimentError;

/// A channel given inline or as a path to a JSON file holding one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChannelSource {
    File(PathBuf),
    Inline(ChannelConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ChannelConfig {
    /// Either `snr` directly, or `gains` + `noise_vars` + `peak_power`
    /// (+ optional `power_fractions`).
    Explicit {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        snr: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gains: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        noise_vars: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        peak_power: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        power_fractions: Option<Vec<f64>>,
    },
    Rayleigh {
        n: usize,
        psdnr_db: f64,
    },
    Multipath {
        paths: Vec<Path>,
        attenuation: Attenuation,
        speed: f64,
        freq_start_hz: f64,
        freq_stop_hz: f64,
        count: usize,
        noise_psd: f64,
        peak_power: f64,
        /// Rescales the evaluated profile to this PSDNR when present.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        psdnr_db: Option<f64>,
    },
    /// A channel file, resolved relative to the referencing config.
    File {
        path: PathBuf,
    },
}

impl ChannelSource {
    /// Replaces file references by their contents, recursively.
    pub fn load(&self, base: &FsPath) -> Result<ChannelConfig, ExperimentError> {
        let path = match self {
            ChannelSource::Inline(ChannelConfig::File { path }) => path,
            ChannelSource::File(path) => path,
            ChannelSource::Inline(c) => return Ok(c.clone()),
        };
        let full = base.join(path);
        let text = fs::read_to_string(&full)
            .map_err(|e| ExperimentError::Config(format!("cannot read {}: {e}", full.display())))?;
        let inner: ChannelSource = serde_json::from_str(&text)
            .map_err(|e| ExperimentError::Config(format!("{}: {e}", full.display())))?;
        inner.load(full.parent().unwrap_or(FsPath::new(".")))
    }
}

/// Fixed bit count or `"auto"` for the reliability-driven target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RateSetting {
    Bits(u64),
    Keyword(RateKeyword),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateKeyword {
    Auto,
}

impl Default for RateSetting {
    fn default() -> Self {
        RateSetting::Keyword(RateKeyword::Auto)
    }
}

/// Allocation policies a run can compare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Continuous solution followed by integer completion.
    Analytic,
    GreedyMargin,
    GreedyBer,
    Oracle,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Analytic,
        Method::GreedyMargin,
        Method::GreedyBer,
        Method::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Analytic => "analytic",
            Method::GreedyMargin => "greedy_margin",
            Method::GreedyBer => "greedy_ber",
            Method::Oracle => "oracle",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        Method::ALL.into_iter().find(|m| m.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleObjective {
    #[default]
    Margin,
    Ber,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Target rate in bits.
    Rate,
    PsdnrDb,
    /// Channel draw seed; only meaningful for generated channels.
    Seed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    /// On a rate sweep, rescale the channel to the lowest PSDNR whose
    /// automatic target reaches each rate.
    #[serde(default)]
    pub match_psdnr: bool,
}

/// What each sweep point computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Study {
    /// Allocations and robustness per method.
    #[default]
    Allocation,
    /// Multiplier search iterations, log-shaped versus plain secant.
    SecantIterations,
    /// Integer completion iterations per method.
    CompletionIterations,
}

fn default_beta() -> u32 {
    1
}

fn default_r_max() -> u32 {
    15
}

fn default_methods() -> Vec<Method> {
    vec![Method::Analytic, Method::GreedyMargin, Method::GreedyBer]
}

fn default_ber_metric() -> BerMetric {
    BerMetric::Delta
}

fn default_completion() -> CompletionMethod {
    CompletionMethod::Secant
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub channel: ChannelSource,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub rate: RateSetting,
    #[serde(default = "default_beta")]
    pub beta: u32,
    /// Runs the whole sweep once per granularity when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub betas: Option<Vec<u32>>,
    #[serde(default = "default_r_max")]
    pub r_max: u32,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_ber_metric")]
    pub ber_metric: BerMetric,
    #[serde(default = "default_completion")]
    pub completion: CompletionMethod,
    #[serde(default)]
    pub oracle_objective: OracleObjective,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
    #[serde(default)]
    pub study: Study,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        serde_json::from_str(text)
            .map_err(|e| ExperimentError::Config(format!("invalid config: {e}")))
    }

    pub fn from_file(path: &FsPath) -> Result<Self, ExperimentError> {
        let text = fs::read_to_string(path)
            .map_err(|e| ExperimentError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Granularities the run iterates over.
    pub fn granularities(&self) -> Vec<u32> {
        self.betas.clone().unwrap_or_else(|| vec![self.beta])
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Config(m));
        if self.methods.is_empty() && self.study == Study::Allocation {
            return bad("at least one method is required".into());
        }
        for beta in self.granularities() {
            if beta == 0 || self.r_max == 0 || !self.r_max.is_multiple_of(beta) {
                return bad(format!(
                    "r_max {} must be a positive multiple of beta {beta}",
                    self.r_max
                ));
            }
        }
        if let RateSetting::Bits(0) = self.rate {
            return bad("rate must be positive".into());
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return bad("sweep has no values".into());
            }
            if let Some(v) = sweep.values.iter().find(|v| !v.is_finite()) {
                return bad(format!("sweep value {v} is not finite"));
            }
            if sweep.axis != SweepAxis::PsdnrDb
                && sweep.values.iter().any(|&v| v < 0.0 || v.fract() != 0.0)
            {
                return bad("rate and seed sweep values must be non-negative integers".into());
            }
            if sweep.match_psdnr && sweep.axis != SweepAxis::Rate {
                return bad("match_psdnr only applies to rate sweeps".into());
            }
        }
        Ok(())
    }
}

/// Draw-independent summary of a resolved channel, for the JSON sidecars.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelSummary {
    pub n: usize,
    pub psdnr_db: f64,
    pub min_snr_db: f64,
    pub max_snr_db: f64,
}

impl ChannelSummary {
    pub fn of(profile: &SnrProfile) -> Self {
        let snr = profile.as_slice();
        let min = snr.iter().copied().fold(f64::INFINITY, f64::min);
        Self {
            n: snr.len(),
            psdnr_db: profile.mean_db(),
            min_snr_db: 10.0 * min.log10(),
            max_snr_db: 10.0 * profile.max().log10(),
        }
    }
}
