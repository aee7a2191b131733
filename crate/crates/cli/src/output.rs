//! CSV and JSON rendering plus atomic file replacement.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::experiment::{Record, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

fn float(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn cell(rec: &Record, column: &str) -> String {
    match column {
        "series" => rec.series.clone(),
        "lambda0" => rec.lambda0.to_string(),
        "gamma1" => float(rec.gamma1),
        "gamma2" => float(rec.gamma2),
        "stages" => rec.stages.map(|n| n.to_string()).unwrap_or_default(),
        "gamma_last" => float(rec.gamma_last),
        "tau" => float(rec.tau),
        "mc_mean" => float(rec.mc_mean),
        "mc_std_error" => float(rec.mc_std_error),
        "mc_success_prob" => float(rec.mc_success_prob),
        "mc_error" => rec.mc_error.clone().unwrap_or_default(),
        "reference" => float(rec.reference),
        "high_threshold" => float(rec.high_threshold),
        "integral_approx" => float(rec.integral_approx),
        "closedform_approx" => float(rec.closedform_approx),
        "conventional_approx" => float(rec.conventional_approx),
        other => unreachable!("unknown column {other}"),
    }
}

/// CSV with one `# seed=..., realizations=..., version=...` comment line.
pub fn render_csv(table: &Table) -> Result<Vec<u8>, CliError> {
    let m = &table.metadata;
    let mut out = format!(
        "# seed={}, realizations={}, version={}, preset={}\n",
        m.seed, m.realizations, m.version, m.preset
    )
    .into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(&table.columns)?;
        for rec in &table.records {
            w.write_record(table.columns.iter().map(|c| cell(rec, c)))?;
        }
        w.flush().map_err(|source| CliError::Io {
            path: "<buffer>".into(),
            source,
        })?;
    }
    Ok(out)
}

pub fn render_json(table: &Table) -> Result<Vec<u8>, CliError> {
    let mut s = serde_json::to_string_pretty(table)?;
    s.push('\n');
    Ok(s.into_bytes())
}

pub fn render(table: &Table, format: Format) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Csv => render_csv(table),
        Format::Json => render_json(table),
    }
}

/// Writes `bytes` to a temporary file next to `path` and renames it over
/// `path`, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}
