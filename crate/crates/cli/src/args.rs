//! Command-line and config-file parsing into an [`ExperimentConfig`].
//!
//! Precedence is flag, then config file, then built-in default.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use epr_core::chsh::ModelKind;
use epr_core::experiment::{Experiment, ExperimentConfig, OutputFormat, Polar, Submodel};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "epr-sim", version, about = "Seeded teleportation and CHSH experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Collapse-model teleportation on the exact statevector.
    TeleportQm {
        #[command(flatten)]
        common: Common,
        /// Input state as the + eigenstate along THETA,PHI (radians).
        /// Defaults to a fresh Haar-random input per trial.
        #[arg(long, value_name = "THETA,PHI")]
        input: Option<String>,
    },
    /// State-selection ensemble teleportation.
    TeleportEnsemble {
        #[command(flatten)]
        common: Common,
        /// Acceptance-cone half-angle in radians, 0 < RAD <= pi. Default 0.1.
        #[arg(long, value_name = "RAD", allow_negative_numbers = true)]
        epsilon: Option<f64>,
        #[arg(long, value_enum)]
        submodel: Option<SubmodelArg>,
        /// Alice's axis as THETA,PHI (radians). Default +z.
        #[arg(long, value_name = "THETA,PHI")]
        input: Option<String>,
    },
    /// CHSH estimate for one outcome model.
    Chsh {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        model: Option<ModelArg>,
        /// Shorthand for an ensemble model.
        #[arg(long, value_enum)]
        submodel: Option<SubmodelArg>,
        /// Eight radians: a, a', b, b' as THETA,PHI pairs.
        #[arg(long, value_name = "ANGLES", allow_negative_numbers = true)]
        settings: Option<String>,
    },
    /// Fidelity of the singlet built along random axes with the z singlet.
    Isotropy {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// TOML file with defaults for any flag.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    trials: Option<u64>,
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long, value_name = "PATH")]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Include per-trial records.
    #[arg(long)]
    emit_trials: bool,
    /// Worker threads. Output does not depend on this.
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SubmodelArg {
    Malus,
    Det,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    Qm,
    EnsembleMalus,
    EnsembleDet,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

impl From<SubmodelArg> for Submodel {
    fn from(s: SubmodelArg) -> Self {
        match s {
            SubmodelArg::Malus => Submodel::Malus,
            SubmodelArg::Det => Submodel::Det,
        }
    }
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Qm => ModelKind::Qm,
            ModelArg::EnsembleMalus => ModelKind::EnsembleMalus,
            ModelArg::EnsembleDet => ModelKind::EnsembleDet,
        }
    }
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Csv => OutputFormat::Csv,
        }
    }
}

/// Config-file schema. Keys mirror the long flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct FileConfig {
    trials: Option<u64>,
    seed: Option<u64>,
    epsilon: Option<f64>,
    submodel: Option<Submodel>,
    model: Option<ModelKind>,
    /// Eight radians.
    settings: Option<Vec<f64>>,
    /// Two radians.
    input: Option<Vec<f64>>,
    format: Option<OutputFormat>,
    output: Option<PathBuf>,
    emit_trials: Option<bool>,
    workers: Option<usize>,
}

fn load_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_owned(),
        source: e,
    })?;
    toml::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))
}

/// Parses one angle list. Degree markers are rejected outright.
fn parse_angles(field: &str, text: &str, count: usize) -> Result<Vec<f64>, CliError> {
    let lower = text.to_ascii_lowercase();
    if lower.contains('°') || lower.contains("deg") {
        return Err(CliError::Config(format!(
            "`{field}`: angles are radians only, got `{text}`"
        )));
    }
    let values = text
        .split(',')
        .map(|tok| {
            let tok = tok.trim();
            tok.parse::<f64>()
                .map_err(|_| CliError::Config(format!("`{field}`: not a number: `{tok}`")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    angles_from_vec(field, values, count)
}

fn angles_from_vec(field: &str, values: Vec<f64>, count: usize) -> Result<Vec<f64>, CliError> {
    if values.len() != count {
        return Err(CliError::Config(format!(
            "`{field}`: expected {count} comma-separated radians, got {}",
            values.len()
        )));
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(CliError::Config(format!("`{field}`: angle {bad} is not finite")));
    }
    Ok(values)
}

fn polar_pairs(v: &[f64]) -> Vec<Polar> {
    v.chunks_exact(2)
        .map(|c| Polar {
            theta: c[0],
            phi: c[1],
        })
        .collect()
}

fn resolve_input(flag: Option<String>, file: Option<Vec<f64>>) -> Result<Option<Polar>, CliError> {
    let v = match (flag, file) {
        (Some(s), _) => parse_angles("input", &s, 2)?,
        (None, Some(v)) => angles_from_vec("input", v, 2)?,
        (None, None) => return Ok(None),
    };
    Ok(Some(polar_pairs(&v)[0]))
}

fn resolve_settings(
    flag: Option<String>,
    file: Option<Vec<f64>>,
) -> Result<Option<[Polar; 4]>, CliError> {
    let v = match (flag, file) {
        (Some(s), _) => parse_angles("settings", &s, 8)?,
        (None, Some(v)) => angles_from_vec("settings", v, 8)?,
        (None, None) => return Ok(None),
    };
    let p = polar_pairs(&v);
    Ok(Some([p[0], p[1], p[2], p[3]]))
}

/// Builds and validates the effective configuration from `argv`
/// (including the program name).
pub fn parse_config<I, T>(argv: I) -> Result<ExperimentConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(CliError::Usage)?;
    let (experiment, common) = match &cli.command {
        Command::TeleportQm { common, .. } => (Experiment::TeleportQm, common),
        Command::TeleportEnsemble { common, .. } => (Experiment::TeleportEnsemble, common),
        Command::Chsh { common, .. } => (Experiment::Chsh, common),
        Command::Isotropy { common } => (Experiment::Isotropy, common),
    };
    let file = match &common.config {
        Some(path) => load_file(path)?,
        None => FileConfig::default(),
    };

    let mut cfg = ExperimentConfig::new(experiment);
    if let Some(t) = common.trials.or(file.trials) {
        cfg.trials = t;
    }
    if let Some(s) = common.seed.or(file.seed) {
        cfg.seed = s;
    }
    cfg.output = common.output.clone().or(file.output);
    cfg.format = common
        .format
        .map(OutputFormat::from)
        .or(file.format)
        .unwrap_or_default();
    cfg.emit_trials = common.emit_trials || file.emit_trials.unwrap_or(false);
    cfg.workers = common.workers.or(file.workers);

    match cli.command {
        Command::TeleportQm { input, .. } => {
            cfg.input = resolve_input(input, file.input)?;
            reject_file_key("epsilon", file.epsilon.is_some(), experiment)?;
            reject_file_key("submodel", file.submodel.is_some(), experiment)?;
            reject_file_key("model", file.model.is_some(), experiment)?;
            reject_file_key("settings", file.settings.is_some(), experiment)?;
        }
        Command::TeleportEnsemble {
            epsilon,
            submodel,
            input,
            ..
        } => {
            cfg.epsilon = epsilon.or(file.epsilon);
            cfg.submodel = submodel.map(Submodel::from).or(file.submodel);
            cfg.input = resolve_input(input, file.input)?;
            reject_file_key("model", file.model.is_some(), experiment)?;
            reject_file_key("settings", file.settings.is_some(), experiment)?;
        }
        Command::Chsh {
            model,
            submodel,
            settings,
            ..
        } => {
            cfg.model = model.map(ModelKind::from).or(file.model);
            cfg.submodel = submodel.map(Submodel::from).or(file.submodel);
            cfg.settings = resolve_settings(settings, file.settings)?;
            reject_file_key("epsilon", file.epsilon.is_some(), experiment)?;
            reject_file_key("input", file.input.is_some(), experiment)?;
        }
        Command::Isotropy { .. } => {
            for (key, present) in [
                ("epsilon", file.epsilon.is_some()),
                ("submodel", file.submodel.is_some()),
                ("model", file.model.is_some()),
                ("settings", file.settings.is_some()),
                ("input", file.input.is_some()),
            ] {
                reject_file_key(key, present, experiment)?;
            }
        }
    }

    cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(cfg)
}

fn reject_file_key(key: &str, present: bool, experiment: Experiment) -> Result<(), CliError> {
    if present {
        return Err(CliError::Config(format!(
            "config key `{key}` is not used by {}",
            experiment.as_str()
        )));
    }
    Ok(())
}
