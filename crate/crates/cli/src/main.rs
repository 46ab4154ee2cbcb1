use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cfbmc_cli::config::PRESET_NAMES;
use cfbmc_cli::experiments::{run_leakage, run_spectrum, run_validate};
use cfbmc_cli::{CliError, ExperimentConfig, ExperimentKind};

const EXIT_VALIDATION_FAILED: u8 = 2;

#[derive(Parser)]
#[command(name = "cfbmc", version, about = "C-FBMC spectrum and asynchronous interference experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment named in the config
    Run(Source),
    /// Write per-symbol pulse and ESD curves
    Spectrum(Source),
    /// Write leakage maps for each source symbol and offset pair
    Leakage(Source),
    /// Check prototype identities and transceiver invariants
    Validate(Source),
    /// Print the resolved config as canonical JSON
    Config(Source),
    /// List the built-in presets
    Presets,
}

#[derive(Args)]
struct Source {
    /// JSON experiment config
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    config: Option<PathBuf>,

    /// Built-in preset (fig2, fig3, fig5, fig6)
    #[arg(long, value_name = "NAME")]
    preset: Option<String>,

    /// Output directory, overriding the config
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Frequency grid size for spectra, overriding the config
    #[arg(long, value_name = "SIZE")]
    grid: Option<usize>,
}

impl Source {
    fn resolve(&self, experiment: Option<ExperimentKind>) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => ExperimentConfig::load(path)?,
            (None, Some(name)) => ExperimentConfig::preset(name)?,
            (None, None) => ExperimentConfig::default(),
        };
        if let Some(kind) = experiment {
            cfg.experiment = kind;
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        if let Some(grid) = self.grid {
            cfg.spectrum.grid_size = grid;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn execute(cfg: &ExperimentConfig) -> Result<ExitCode, CliError> {
    let dir = cfg.output_dir.display();
    match cfg.experiment {
        ExperimentKind::Spectrum => {
            let curves = run_spectrum(cfg)?;
            for c in &curves {
                println!("k={} l={} oob={:.2} dB -> {}", c.k, c.l, c.oob_db, c.esd_file);
            }
            println!("wrote {} curves to {dir}", curves.len());
        }
        ExperimentKind::Leakage => {
            let maps = run_leakage(cfg)?;
            println!("wrote {} leakage maps to {dir}", maps.len());
        }
        ExperimentKind::Validate => {
            let report = run_validate(cfg)?;
            for c in &report.checks {
                println!("{:<28} {:?} ({:.3e})", c.name, c.status, c.max_deviation);
            }
            if !report.passed {
                let names: Vec<&str> = report.failed().map(|c| c.name.as_str()).collect();
                eprintln!("validation failed: {}", names.join(", "));
                return Ok(ExitCode::from(EXIT_VALIDATION_FAILED));
            }
            println!("all checks passed; report in {dir}/validate_report.json");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(src) => src.resolve(None).and_then(|cfg| execute(&cfg)),
        Command::Spectrum(src) => src.resolve(Some(ExperimentKind::Spectrum)).and_then(|cfg| execute(&cfg)),
        Command::Leakage(src) => src.resolve(Some(ExperimentKind::Leakage)).and_then(|cfg| execute(&cfg)),
        Command::Validate(src) => src.resolve(Some(ExperimentKind::Validate)).and_then(|cfg| execute(&cfg)),
        Command::Config(src) => src.resolve(None).map(|cfg| {
            println!("{}", cfg.to_canonical_json());
            ExitCode::SUCCESS
        }),
        Command::Presets => {
            PRESET_NAMES.iter().for_each(|name| println!("{name}"));
            Ok(ExitCode::SUCCESS)
        }
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        ExitCode::from(e.exit_code())
    })
}
