use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use probesched_cli::output::Format;
use probesched_cli::settings::{merge_overrides, parse_config_text, parse_pair, Preset, Settings};
use probesched_cli::validate::{validate_suite, ValidateOptions};
use probesched_cli::{run_experiment, CliError, ExperimentConfig};

#[derive(Parser)]
#[command(name = "probesched", version, about = "Probe-and-transmit scheduling simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or custom sweep and write a table.
    Simulate {
        /// capacity-vs-gamma1, capacity-vs-density, scheme-comparison,
        /// sir-error, gamma-surface or probing-tradeoff. Without a preset a
        /// custom density sweep of `scheme` is run.
        #[arg(long)]
        preset: Option<String>,
        /// Parameter override `key=value`; repeatable.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// File of `key=value` lines; `--set` entries take precedence.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        realizations: Option<usize>,
    },
    /// Run the invariant and oracle battery.
    Validate {
        #[arg(long, default_value_t = 300)]
        realizations: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Replace the rho constant (fault injection).
        #[arg(long, hide = true)]
        rho_override: Option<f64>,
    },
}

fn simulate(
    preset: Option<String>,
    set: Vec<String>,
    config: Option<PathBuf>,
    out: PathBuf,
    format: Format,
    seed: Option<u64>,
    realizations: Option<usize>,
) -> Result<(), CliError> {
    let preset = preset.map(|p| p.parse::<Preset>()).transpose()?;
    let mut settings = Settings::for_preset(preset);
    let file = match &config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?;
            parse_config_text(&text)?
        }
        None => Vec::new(),
    };
    let cli: Vec<(String, String)> = set.iter().map(|s| parse_pair(s)).collect::<Result<_, _>>()?;
    settings.apply(&merge_overrides(file, cli))?;
    if let Some(s) = seed {
        settings.seed = s;
    }
    if let Some(r) = realizations {
        settings.realizations = r;
    }
    let cfg = ExperimentConfig {
        settings,
        output_path: out,
        format,
    };
    let (table, summary) = run_experiment(&cfg)?;
    println!(
        "wrote {} rows to {} ({} realizations, seed {})",
        table.records.len(),
        cfg.output_path.display(),
        table.metadata.realizations,
        table.metadata.seed
    );
    for a in summary {
        println!("argmax {}/{}: {} -> {:e}", a.series, a.curve, a.coordinates, a.value);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate {
            preset,
            set,
            config,
            out,
            format,
            seed,
            realizations,
        } => match simulate(preset, set, config, out, format, seed, realizations) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Command::Validate {
            realizations,
            seed,
            rho_override,
        } => {
            let mut opts = ValidateOptions {
                realizations,
                rho_override,
                ..Default::default()
            };
            if let Some(s) = seed {
                opts.seed = s;
            }
            let report = validate_suite(&opts);
            print!("{}", report.render());
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
