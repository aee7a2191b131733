//! Turns [`Settings`] into Monte Carlo plans plus analytic curves, and runs
//! them as one sweep so that all rows share realizations.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use probesched::analytic::{self, AnalyticParams};
use probesched::geometry::SimWindow;
use probesched::montecarlo::{sweep, SimPlan};
use probesched::scheduling::SchemeConfig;

use crate::error::CliError;
use crate::output::{self, Format};
use crate::settings::{CustomScheme, Preset, Settings};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub settings: Settings,
    pub output_path: PathBuf,
    pub format: Format,
}

/// One output row: a curve point with its Monte Carlo estimate and every
/// analytic value that applies to it. Non-applicable entries are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub series: String,
    pub lambda0: f64,
    pub gamma1: Option<f64>,
    pub gamma2: Option<f64>,
    pub stages: Option<usize>,
    pub gamma_last: Option<f64>,
    pub tau: Option<f64>,
    pub mc_mean: Option<f64>,
    pub mc_std_error: Option<f64>,
    pub mc_success_prob: Option<f64>,
    pub mc_error: Option<String>,
    pub reference: Option<f64>,
    pub high_threshold: Option<f64>,
    pub integral_approx: Option<f64>,
    pub closedform_approx: Option<f64>,
    pub conventional_approx: Option<f64>,
}

impl Record {
    fn new(series: impl Into<String>, lambda0: f64) -> Self {
        Record {
            series: series.into(),
            lambda0,
            gamma1: None,
            gamma2: None,
            stages: None,
            gamma_last: None,
            tau: None,
            mc_mean: None,
            mc_std_error: None,
            mc_success_prob: None,
            mc_error: None,
            reference: None,
            high_threshold: None,
            integral_approx: None,
            closedform_approx: None,
            conventional_approx: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub preset: String,
    pub seed: u64,
    pub realizations: usize,
    pub version: String,
    pub settings: Settings,
}

/// Full result of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub metadata: Metadata,
    pub columns: Vec<String>,
    pub records: Vec<Record>,
}

/// Location of the largest value of one curve of one series.
#[derive(Debug, Clone, PartialEq)]
pub struct Argmax {
    pub series: String,
    pub curve: String,
    pub coordinates: String,
    pub value: f64,
    pub row: usize,
}

/// `γ₁ = 0.01`, `γ_k = γ_{k-1} + 0.01 k`, i.e. `γ_k = 0.01 k (k + 1) / 2`.
pub fn probing_schedule(stages: usize) -> Vec<f64> {
    (1..=stages)
        .map(|k| (0.01 * (k * (k + 1) / 2) as f64 * 1e12).round() / 1e12)
        .collect()
}

/// Coordinate columns of a preset, followed by the value columns.
pub fn columns(preset: Option<Preset>) -> Vec<&'static str> {
    let mut cols = vec!["series", "lambda0"];
    let mut analytic = vec!["reference"];
    match preset {
        Some(Preset::CapacityVsGamma1) | Some(Preset::CapacityVsDensity) => {
            cols.push("gamma1");
            analytic = vec![
                "reference",
                "high_threshold",
                "integral_approx",
                "closedform_approx",
                "conventional_approx",
            ];
        }
        Some(Preset::SirError) => cols.push("gamma1"),
        Some(Preset::GammaSurface) => cols.extend(["gamma1", "gamma2"]),
        Some(Preset::ProbingTradeoff) => cols.extend(["stages", "gamma_last", "tau"]),
        Some(Preset::SchemeComparison) | None => {}
    }
    cols.extend(["mc_mean", "mc_std_error", "mc_success_prob", "mc_error"]);
    cols.extend(analytic);
    cols
}

struct Builder<'a> {
    s: &'a Settings,
    window: SimWindow,
    records: Vec<Record>,
    plans: Vec<(usize, SimPlan)>,
}

impl<'a> Builder<'a> {
    fn params(&self, lambda0: f64) -> Result<AnalyticParams, CliError> {
        Ok(AnalyticParams::new(lambda0, self.s.d, self.s.alpha, self.s.beta)?)
    }

    fn single_tau(&self) -> Result<f64, CliError> {
        match self.s.tau.as_slice() {
            [t] => Ok(*t),
            _ => Err(CliError::BadValue {
                key: "tau".into(),
                value: format!("{:?}", self.s.tau),
                reason: "only the probing-tradeoff preset accepts several values".into(),
            }),
        }
    }

    fn push(&mut self, mut rec: Record, scheme: SchemeConfig) -> Result<(), CliError> {
        let params = self.params(rec.lambda0)?;
        rec.reference = Some(analytic::reference_capacity(&params));
        let plan = SimPlan::new(params, scheme, self.window, self.s.realizations, self.s.seed)?
            .with_max_points(self.s.max_points);
        self.plans.push((self.records.len(), plan));
        self.records.push(rec);
        Ok(())
    }

    fn proposed(&self, thresholds: Vec<f64>, tau: f64) -> Result<SchemeConfig, CliError> {
        Ok(SchemeConfig::sir_threshold(thresholds, self.s.beta)?.with_timing(tau, self.s.slot_duration)?)
    }
}

/// Fills the single-stage analytic columns for threshold `gamma1`.
fn single_stage_curves(rec: &mut Record, params: &AnalyticParams, gamma1: f64) {
    let beta = params.beta();
    if gamma1 >= beta {
        rec.high_threshold = analytic::capacity_high_threshold(params, gamma1).ok();
    } else if gamma1 > 0.0 {
        if params.alpha() == 4.0 {
            rec.integral_approx = analytic::integral_capacity_approx(params, gamma1).ok();
        }
        rec.closedform_approx = analytic::closedform_capacity_approx(params, gamma1).ok();
        rec.conventional_approx = analytic::conventional_capacity_approx(params, gamma1).ok();
    }
}

/// Builds every row of the experiment without running the simulation.
fn build(s: &Settings) -> Result<Builder<'_>, CliError> {
    if s.realizations == 0 {
        return Err(CliError::BadValue {
            key: "realizations".into(),
            value: "0".into(),
            reason: "need at least one realization".into(),
        });
    }
    let window = SimWindow::new(s.outer_min, s.outer_max, s.inner_min, s.inner_max)?;
    let mut b = Builder {
        s,
        window,
        records: Vec::new(),
        plans: Vec::new(),
    };
    let beta = s.beta;
    match s.preset {
        Some(Preset::CapacityVsGamma1) => {
            let tau = b.single_tau()?;
            for g in s.grid.points() {
                let mut rec = Record::new("proposed", s.lambda0);
                rec.gamma1 = Some(g);
                single_stage_curves(&mut rec, &b.params(s.lambda0)?, g);
                let scheme = b.proposed(vec![g], tau)?;
                b.push(rec, scheme)?;
            }
        }
        Some(Preset::CapacityVsDensity) => {
            let tau = b.single_tau()?;
            for l in s.grid.points() {
                let mut rec = Record::new("proposed", l);
                rec.gamma1 = Some(s.gamma1);
                single_stage_curves(&mut rec, &b.params(l)?, s.gamma1);
                let scheme = b.proposed(vec![s.gamma1], tau)?;
                b.push(rec, scheme)?;
                b.push(Record::new("reference", l), SchemeConfig::reference(beta)?)?;
            }
        }
        Some(Preset::SchemeComparison) => {
            let tau = b.single_tau()?;
            for l in s.grid.points() {
                let scheme = b.proposed(vec![s.gamma1], tau)?;
                b.push(Record::new("proposed", l), scheme)?;
                let pb = SchemeConfig::probability_based(s.stages, beta)?.with_timing(tau, s.slot_duration)?;
                b.push(Record::new("probability-based", l), pb)?;
                b.push(
                    Record::new("channel-threshold", l),
                    SchemeConfig::channel_threshold(s.channel_threshold, beta)?,
                )?;
                b.push(Record::new("reference", l), SchemeConfig::reference(beta)?)?;
            }
        }
        Some(Preset::SirError) => {
            let tau = b.single_tau()?;
            for l in s.grid.points() {
                let mut clean = Record::new("error-free", l);
                clean.gamma1 = Some(s.gamma1);
                let mut noisy = clean.clone();
                noisy.series = "with-error".into();
                let scheme = b.proposed(vec![s.gamma1], tau)?;
                b.push(clean, scheme.clone())?;
                b.push(noisy, scheme.with_sir_error(s.sigma2)?)?;
            }
        }
        Some(Preset::GammaSurface) => {
            let tau = b.single_tau()?;
            for g1 in s.grid.points() {
                for g2 in s.grid2.points() {
                    let mut rec = Record::new("proposed", s.lambda0);
                    rec.gamma1 = Some(g1);
                    rec.gamma2 = Some(g2);
                    let scheme = b.proposed(vec![g1, g2], tau)?;
                    b.push(rec, scheme)?;
                }
            }
        }
        Some(Preset::ProbingTradeoff) => {
            let taus = s.tau.clone();
            for tau in taus {
                for n in 1..=s.max_stages {
                    let schedule = probing_schedule(n);
                    let mut rec = Record::new(format!("tau={tau}"), s.lambda0);
                    rec.stages = Some(n);
                    rec.gamma_last = schedule.last().copied();
                    rec.tau = Some(tau);
                    let scheme = b.proposed(schedule, tau)?;
                    b.push(rec, scheme)?;
                }
            }
        }
        None => {
            let tau = b.single_tau()?;
            for l in s.grid.points() {
                let scheme = match s.scheme {
                    CustomScheme::Reference => SchemeConfig::reference(beta)?,
                    CustomScheme::SirThreshold => b
                        .proposed(s.thresholds.clone(), tau)?
                        .with_sir_error(s.sigma2)?,
                    CustomScheme::ProbabilityBased => {
                        SchemeConfig::probability_based(s.stages, beta)?.with_timing(tau, s.slot_duration)?
                    }
                    CustomScheme::ChannelThreshold => SchemeConfig::channel_threshold(s.channel_threshold, beta)?,
                };
                b.push(Record::new(s.scheme.name(), l), scheme)?;
            }
        }
    }
    Ok(b)
}

/// Runs the simulation and assembles the table (no file output).
pub fn compute_table(settings: &Settings) -> Result<Table, CliError> {
    let b = build(settings)?;
    let mut records = b.records;
    let plans: Vec<SimPlan> = b.plans.iter().map(|(_, p)| p.clone()).collect();
    let rows = sweep(&plans);
    for ((idx, _), row) in b.plans.iter().zip(rows) {
        let rec = &mut records[*idx];
        match row.result {
            Ok(est) => {
                rec.mc_mean = Some(est.mean);
                rec.mc_std_error = Some(est.std_error);
                rec.mc_success_prob = Some(est.success_prob_mean);
            }
            Err(e) => rec.mc_error = Some(e.to_string()),
        }
    }
    Ok(Table {
        metadata: Metadata {
            preset: settings.preset.map_or("custom".to_string(), |p| p.name().to_string()),
            seed: settings.seed,
            realizations: settings.realizations,
            version: VERSION.to_string(),
            settings: settings.clone(),
        },
        columns: columns(settings.preset).into_iter().map(String::from).collect(),
        records,
    })
}

fn curve_value(rec: &Record, curve: &str) -> Option<f64> {
    match curve {
        "mc_mean" => rec.mc_mean,
        "reference" => rec.reference,
        "high_threshold" => rec.high_threshold,
        "integral_approx" => rec.integral_approx,
        "closedform_approx" => rec.closedform_approx,
        "conventional_approx" => rec.conventional_approx,
        _ => None,
    }
}

fn coordinates(table: &Table, rec: &Record) -> String {
    let mut parts = Vec::new();
    for col in &table.columns {
        let v = match col.as_str() {
            "lambda0" => Some(rec.lambda0.to_string()),
            "gamma1" => rec.gamma1.map(|v| v.to_string()),
            "gamma2" => rec.gamma2.map(|v| v.to_string()),
            "stages" => rec.stages.map(|v| v.to_string()),
            _ => None,
        };
        if let Some(v) = v {
            parts.push(format!("{col}={v}"));
        }
    }
    parts.join(", ")
}

/// Argmax of every curve within every series. Ties keep the first row.
pub fn argmaxes(table: &Table) -> Vec<Argmax> {
    let curves = [
        "mc_mean",
        "reference",
        "high_threshold",
        "integral_approx",
        "closedform_approx",
        "conventional_approx",
    ];
    let mut series: Vec<&str> = Vec::new();
    for r in &table.records {
        if !series.contains(&r.series.as_str()) {
            series.push(&r.series);
        }
    }
    let mut out = Vec::new();
    for s in series {
        for curve in curves.iter().filter(|c| table.columns.iter().any(|col| col == *c)) {
            let best = table
                .records
                .iter()
                .enumerate()
                .filter(|(_, r)| r.series == s)
                .filter_map(|(i, r)| curve_value(r, curve).map(|v| (i, v)))
                .fold(None::<(usize, f64)>, |acc, (i, v)| match acc {
                    Some((_, bv)) if bv >= v => acc,
                    _ => Some((i, v)),
                });
            if let Some((row, value)) = best {
                out.push(Argmax {
                    series: s.to_string(),
                    curve: curve.to_string(),
                    coordinates: coordinates(table, &table.records[row]),
                    value,
                    row,
                });
            }
        }
    }
    out
}

/// Runs an experiment, writes the output file atomically and returns the
/// table with its argmax summary.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(Table, Vec<Argmax>), CliError> {
    let table = compute_table(&cfg.settings)?;
    output::write_atomic(&cfg.output_path, &output::render(&table, cfg.format)?)?;
    let summary = argmaxes(&table);
    Ok((table, summary))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_matches_recursion() {
        let s = probing_schedule(19);
        assert_eq!(s[0], 0.01);
        let mut g = 0.01;
        for k in 2..=19 {
            g += 0.01 * k as f64;
            assert!((s[k - 1] - g).abs() < 1e-12);
        }
        assert_eq!(s[18], 1.9);
        assert!(s.windows(3).all(|w| w[1] - w[0] < w[2] - w[1]));
    }

    #[test]
    fn column_set_depends_only_on_preset() {
        for p in Preset::ALL {
            let mut s = Settings::for_preset(Some(p));
            s.realizations = 1;
            s.grid.stop = s.grid.start;
            s.grid2.stop = s.grid2.start;
            s.max_stages = 2;
            let t = compute_table(&s).unwrap();
            assert_eq!(t.columns, columns(Some(p)));
        }
    }
}
