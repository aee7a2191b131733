//! Preset defaults and `key=value` overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Named experiment layouts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    CapacityVsGamma1,
    CapacityVsDensity,
    SchemeComparison,
    SirError,
    GammaSurface,
    ProbingTradeoff,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::CapacityVsGamma1,
        Preset::CapacityVsDensity,
        Preset::SchemeComparison,
        Preset::SirError,
        Preset::GammaSurface,
        Preset::ProbingTradeoff,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::CapacityVsGamma1 => "capacity-vs-gamma1",
            Preset::CapacityVsDensity => "capacity-vs-density",
            Preset::SchemeComparison => "scheme-comparison",
            Preset::SirError => "sir-error",
            Preset::GammaSurface => "gamma-surface",
            Preset::ProbingTradeoff => "probing-tradeoff",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Preset::ALL.into_iter().find(|p| p.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Preset::ALL.iter().map(|p| p.name()).collect();
            CliError::UnknownPreset(s.to_string(), names.join(", "))
        })
    }
}

/// Scheme selected by a custom (preset-free) sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CustomScheme {
    Reference,
    SirThreshold,
    ProbabilityBased,
    ChannelThreshold,
}

impl CustomScheme {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "reference" => Some(CustomScheme::Reference),
            "sir-threshold" => Some(CustomScheme::SirThreshold),
            "probability-based" => Some(CustomScheme::ProbabilityBased),
            "channel-threshold" => Some(CustomScheme::ChannelThreshold),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CustomScheme::Reference => "reference",
            CustomScheme::SirThreshold => "sir-threshold",
            CustomScheme::ProbabilityBased => "probability-based",
            CustomScheme::ChannelThreshold => "channel-threshold",
        }
    }
}

/// Inclusive arithmetic grid `start, start + step, ..., stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Grid {
    pub const fn new(start: f64, stop: f64, step: f64) -> Self {
        Grid { start, stop, step }
    }

    /// Grid values, rounded to 12 decimals so that e.g. `0.1 * 3` prints
    /// as `0.3`.
    pub fn points(&self) -> Vec<f64> {
        if self.step <= 0.0 || self.stop < self.start {
            return vec![self.start];
        }
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=count)
            .map(|k| ((self.start + k as f64 * self.step) * 1e12).round() / 1e12)
            .collect()
    }
}

/// Every tunable of an experiment. Which fields matter depends on the preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub preset: Option<Preset>,
    pub lambda0: f64,
    pub d: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma1: f64,
    pub sigma2: f64,
    pub channel_threshold: f64,
    pub tau: Vec<f64>,
    pub slot_duration: f64,
    pub outer_min: f64,
    pub outer_max: f64,
    pub inner_min: f64,
    pub inner_max: f64,
    pub realizations: usize,
    pub seed: u64,
    pub max_points: usize,
    /// Primary sweep axis (γ₁ or λ₀ depending on the preset).
    pub grid: Grid,
    /// Secondary axis (γ₂ of the surface preset).
    pub grid2: Grid,
    pub max_stages: usize,
    pub scheme: CustomScheme,
    pub thresholds: Vec<f64>,
    pub stages: usize,
}

pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_REALIZATIONS: usize = 2000;

/// Override keys accepted by `--set` and `--config`.
pub const KEYS: [&str; 27] = [
    "lambda0",
    "d",
    "alpha",
    "beta",
    "gamma1",
    "sigma2",
    "channel_threshold",
    "tau",
    "slot_duration",
    "outer_min",
    "outer_max",
    "inner_min",
    "inner_max",
    "realizations",
    "seed",
    "max_points",
    "grid.start",
    "grid.stop",
    "grid.step",
    "grid2.start",
    "grid2.stop",
    "grid2.step",
    "max_stages",
    "scheme",
    "thresholds",
    "stages",
    "preset",
];

impl Settings {
    /// Parameters shared by every preset before preset-specific changes.
    fn base() -> Self {
        Settings {
            preset: None,
            lambda0: 0.0025,
            d: 10.0,
            alpha: 4.0,
            beta: 2.5,
            gamma1: 0.6,
            sigma2: 0.0,
            channel_threshold: 0.4,
            tau: vec![0.0],
            slot_duration: 1.0,
            outer_min: 0.0,
            outer_max: 600.0,
            inner_min: 200.0,
            inner_max: 400.0,
            realizations: DEFAULT_REALIZATIONS,
            seed: DEFAULT_SEED,
            max_points: probesched::montecarlo::DEFAULT_MAX_POINTS,
            grid: Grid::new(0.0005, 0.006, 0.0005),
            grid2: Grid::new(0.0, 0.0, 0.0),
            max_stages: 19,
            scheme: CustomScheme::SirThreshold,
            thresholds: vec![0.6],
            stages: 1,
        }
    }

    /// Frozen defaults of a preset, or of a custom λ₀ sweep for `None`.
    pub fn for_preset(preset: Option<Preset>) -> Self {
        let mut s = Settings::base();
        s.preset = preset;
        match preset {
            None => {}
            Some(Preset::CapacityVsGamma1) => {
                s.grid = Grid::new(0.0, 4.0, 0.1);
            }
            Some(Preset::CapacityVsDensity) => {
                s.gamma1 = 0.6;
            }
            Some(Preset::SchemeComparison) => {
                s.gamma1 = 0.4;
                s.channel_threshold = 0.4;
                s.grid = Grid::new(0.0002, 0.006, 0.0002);
            }
            Some(Preset::SirError) => {
                s.gamma1 = 0.4;
                s.sigma2 = 0.01;
            }
            Some(Preset::GammaSurface) => {
                s.beta = 2.0;
                s.grid = Grid::new(0.0, 2.0, 0.05);
                s.grid2 = Grid::new(0.0, 2.0, 0.05);
            }
            Some(Preset::ProbingTradeoff) => {
                s.beta = 2.0;
                s.tau = vec![0.0, 0.04];
                s.slot_duration = 1.0;
                s.max_stages = 19;
            }
        }
        s
    }

    /// Applies overrides in order; later entries win. Every unknown key is
    /// reported at once.
    pub fn apply(&mut self, overrides: &[(String, String)]) -> Result<(), CliError> {
        let unknown: Vec<&str> = overrides
            .iter()
            .map(|(k, _)| k.as_str())
            .filter(|k| !KEYS.contains(k) || *k == "preset")
            .collect();
        if !unknown.is_empty() {
            return Err(CliError::InvalidKeys {
                keys: unknown.join(", "),
                valid: KEYS[..KEYS.len() - 1].join(", "),
            });
        }
        for (k, v) in overrides {
            self.set(k, v)?;
        }
        Ok(())
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let bad = |reason: &str| CliError::BadValue {
            key: key.to_string(),
            value: value.to_string(),
            reason: reason.to_string(),
        };
        let float = || value.trim().parse::<f64>().map_err(|_| bad("expected a number"));
        let int = || value.trim().parse::<usize>().map_err(|_| bad("expected a nonnegative integer"));
        let list = || -> Result<Vec<f64>, CliError> {
            value
                .split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|_| bad("expected comma-separated numbers")))
                .collect()
        };
        match key {
            "lambda0" => self.lambda0 = float()?,
            "d" => self.d = float()?,
            "alpha" => self.alpha = float()?,
            "beta" => self.beta = float()?,
            "gamma1" => self.gamma1 = float()?,
            "sigma2" => self.sigma2 = float()?,
            "channel_threshold" => self.channel_threshold = float()?,
            "tau" => self.tau = list()?,
            "slot_duration" => self.slot_duration = float()?,
            "outer_min" => self.outer_min = float()?,
            "outer_max" => self.outer_max = float()?,
            "inner_min" => self.inner_min = float()?,
            "inner_max" => self.inner_max = float()?,
            "realizations" => self.realizations = int()?,
            "seed" => self.seed = value.trim().parse().map_err(|_| bad("expected a 64-bit unsigned integer"))?,
            "max_points" => self.max_points = int()?,
            "grid.start" => self.grid.start = float()?,
            "grid.stop" => self.grid.stop = float()?,
            "grid.step" => self.grid.step = float()?,
            "grid2.start" => self.grid2.start = float()?,
            "grid2.stop" => self.grid2.stop = float()?,
            "grid2.step" => self.grid2.step = float()?,
            "max_stages" => self.max_stages = int()?,
            "scheme" => {
                self.scheme = CustomScheme::parse(value.trim()).ok_or_else(|| {
                    bad("expected reference, sir-threshold, probability-based or channel-threshold")
                })?
            }
            "thresholds" => self.thresholds = list()?,
            "stages" => self.stages = int()?,
            _ => unreachable!("keys are checked before assignment"),
        }
        Ok(())
    }
}

/// Parses `key=value` text: one pair per line, `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, CliError> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(parse_pair)
        .collect()
}

/// Splits one `key=value` argument.
pub fn parse_pair(s: &str) -> Result<(String, String), CliError> {
    let (k, v) = s.split_once('=').ok_or_else(|| CliError::Malformed(s.to_string()))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(CliError::Malformed(s.to_string()));
    }
    Ok((k.to_string(), v.trim().to_string()))
}

/// Merges file overrides with command-line ones; command-line entries are
/// applied last and therefore win.
pub fn merge_overrides(file: Vec<(String, String)>, cli: Vec<(String, String)>) -> Vec<(String, String)> {
    let mut merged: BTreeMap<String, String> = BTreeMap::new();
    let mut order = Vec::new();
    for (k, v) in file.into_iter().chain(cli) {
        if merged.insert(k.clone(), v).is_none() {
            order.push(k);
        }
    }
    order
        .into_iter()
        .map(|k| {
            let v = merged[&k].clone();
            (k, v)
        })
        .collect()
}
