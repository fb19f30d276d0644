//! Command-line flags and the optional JSON config file.

use std::f64::consts::PI;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use crate::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "dqpt",
    version,
    about = "Loschmidt echoes, rate functions and critical fluxes of quenched lattice models"
)]
pub struct Cli {
    /// Flat JSON object of flag values; flags given on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Rate function lambda(t) on a finite twisted lattice.
    #[command(args_override_self = true)]
    Rate(RateArgs),
    /// Critical momenta, fluxes and times.
    #[command(args_override_self = true)]
    Critical(CriticalArgs),
    /// Peak height of lambda(t) as a function of the flux.
    #[command(args_override_self = true)]
    FluxScan(FluxScanArgs),
    /// First peak of lambda(t) across chain lengths.
    #[command(args_override_self = true)]
    Scaling(ScalingArgs),
    /// Thermodynamic-limit rate function of a chain.
    #[command(args_override_self = true)]
    Thermo(ThermoArgs),
    /// Exact diagonalization of the interacting SSH chain at half filling.
    #[command(args_override_self = true)]
    Ed(EdArgs),
}

pub const SUBCOMMANDS: [&str; 6] = ["rate", "critical", "flux-scan", "scaling", "thermo", "ed"];

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Ssh,
    Creutz,
    #[value(name = "lr-ssh", alias = "long-range-ssh")]
    LrSsh,
    Qwz,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Both,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Peak {
    #[default]
    First,
    Highest,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: ModelKind,
    /// SSH: initial J2/J1.
    #[arg(long, allow_hyphen_values = true)]
    pub gi: Option<f64>,
    /// SSH: final J2/J1.
    #[arg(long, allow_hyphen_values = true)]
    pub gf: Option<f64>,
    /// Creutz: initial theta (radians or `0.1pi`).
    #[arg(long = "theta-i", value_parser = parse_real, allow_hyphen_values = true)]
    pub theta_i: Option<f64>,
    /// Creutz: final theta.
    #[arg(long = "theta-f", value_parser = parse_real, allow_hyphen_values = true)]
    pub theta_f: Option<f64>,
    /// Creutz: vertical hopping J_v / 2J.
    #[arg(long, default_value_t = 0.0)]
    pub jv: f64,
    /// Long-range SSH: intracell amplitude.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub j1: f64,
    /// Long-range SSH: initial intercell amplitude.
    #[arg(long, allow_hyphen_values = true)]
    pub j2i: Option<f64>,
    /// Long-range SSH: final intercell amplitude.
    #[arg(long, allow_hyphen_values = true)]
    pub j2f: Option<f64>,
    /// Long-range SSH: decay rate of the hopping.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// QWZ: initial mu.
    #[arg(long, allow_hyphen_values = true)]
    pub mui: Option<f64>,
    /// QWZ: final mu.
    #[arg(long, allow_hyphen_values = true)]
    pub muf: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct LatticeArgs {
    /// Chain length in unit cells (or both torus sides for QWZ).
    #[arg(long = "L")]
    pub l: Option<usize>,
    #[arg(long = "Lx")]
    pub lx: Option<usize>,
    #[arg(long = "Ly")]
    pub ly: Option<usize>,
    /// Twisted axis of the torus.
    #[arg(long, value_enum, default_value = "x")]
    pub axis: Axis,
}

#[derive(Args, Debug, Clone)]
pub struct TimeArgs {
    #[arg(long, default_value_t = 10.0)]
    pub tmax: f64,
    /// Sampling step; defaults to resolving the first critical time with 400 points.
    #[arg(long, conflicts_with = "steps")]
    pub dt: Option<f64>,
    /// Number of intervals on [0, tmax].
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output file; data goes to stdout (and the summary to stderr) when omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Args, Debug, Clone)]
pub struct RateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub lattice: LatticeArgs,
    /// Threaded flux (radians, or `0.783pi`).
    #[arg(long, value_parser = parse_angle, default_value = "0", allow_hyphen_values = true)]
    pub flux: f64,
    /// Flux along y when both axes are twisted (defaults to --flux).
    #[arg(long = "flux-y", value_parser = parse_angle, allow_hyphen_values = true)]
    pub flux_y: Option<f64>,
    #[command(flatten)]
    pub time: TimeArgs,
    /// Also sample the critical times t_n* inside the window.
    #[arg(long)]
    pub with_critical_times: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct CriticalArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub lattice: LatticeArgs,
    /// Number of critical times per pair.
    #[arg(long = "n", default_value_t = 2)]
    pub n_max: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct FluxScanArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub lattice: LatticeArgs,
    #[arg(long = "phi-min", value_parser = parse_angle, default_value = "0", allow_hyphen_values = true)]
    pub phi_min: f64,
    #[arg(long = "phi-max", value_parser = parse_real, default_value = "pi", allow_hyphen_values = true)]
    pub phi_max: f64,
    #[arg(long = "phi-count", default_value_t = 65)]
    pub phi_count: usize,
    /// Add the critical fluxes to the grid.
    #[arg(long)]
    pub with_critical_flux: bool,
    #[arg(long, value_enum, default_value = "first")]
    pub peak: Peak,
    #[command(flatten)]
    pub time: TimeArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct ScalingArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Comma-separated chain lengths.
    #[arg(long, value_delimiter = ',', required = true, action = clap::ArgAction::Set)]
    pub sizes: Vec<usize>,
    #[arg(long, value_parser = parse_angle, default_value = "0", allow_hyphen_values = true)]
    pub flux: f64,
    #[command(flatten)]
    pub time: TimeArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct ThermoArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Only used for the long-range model, whose hopping range is L/2.
    #[arg(long = "L")]
    pub l: Option<usize>,
    #[command(flatten)]
    pub time: TimeArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct EdArgs {
    /// Number of unit cells.
    #[arg(long = "L")]
    pub l: usize,
    #[arg(long = "U", default_value_t = 0.0)]
    pub u: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub j1: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub j2i: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub j2f: f64,
    #[arg(long, value_parser = parse_angle, default_value = "0", allow_hyphen_values = true)]
    pub flux: f64,
    #[command(flatten)]
    pub time: TimeArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Real number, optionally in units of pi (`0.5pi`, `pi`, `-0.1π`).
pub fn parse_real(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let stripped = s.strip_suffix("pi").or_else(|| s.strip_suffix('π'));
    match stripped {
        Some(head) => {
            let head = head.trim().trim_end_matches('*');
            let factor = match head {
                "" | "+" => 1.0,
                "-" => -1.0,
                h => h.parse::<f64>().map_err(|e| format!("bad multiple of pi '{s}': {e}"))?,
            };
            Ok(factor * PI)
        }
        None => s.parse::<f64>().map_err(|e| format!("bad number '{s}': {e}")),
    }
}

/// Flux in radians or pi units, reduced into `[0, 2pi)`.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let x = parse_real(s)?;
    if !x.is_finite() {
        return Err(format!("flux must be finite, got '{s}'"));
    }
    let r = x.rem_euclid(2.0 * PI);
    Ok(if r >= 2.0 * PI { 0.0 } else { r })
}

/// Splices the config file's entries in front of the command-line flags so
/// that explicit flags override them.
pub fn merge_config(argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let strings: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let mut path = None;
    for (i, a) in strings.iter().enumerate() {
        if a == "--config" {
            path = strings.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Usage(format!("cannot read config file {path}: {e}")))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("config file {path} is not valid JSON: {e}")))?;
    let Value::Object(map) = value else {
        return Err(CliError::Usage(format!("config file {path} must hold a JSON object")));
    };
    let pos = strings
        .iter()
        .position(|a| SUBCOMMANDS.contains(&a.as_str()))
        .ok_or_else(|| CliError::Usage("missing subcommand".into()))?;
    // a shared config may carry flags meant for other subcommands
    let known = |sub: &clap::Command| -> Vec<String> {
        sub.get_arguments().filter_map(|a| a.get_long().map(str::to_string)).collect()
    };
    let cmd = Cli::command();
    let accepted = cmd.find_subcommand(&strings[pos]).map(known).unwrap_or_default();
    let anywhere: Vec<String> = cmd.get_subcommands().flat_map(known).collect();
    let mut extra = Vec::new();
    for (key, v) in map {
        let name = key.trim_start_matches("--");
        if !accepted.iter().any(|a| a == name) {
            if anywhere.iter().any(|a| a == name) {
                continue;
            }
            return Err(CliError::Usage(format!("config file {path}: unknown flag '{key}'")));
        }
        let flag = format!("--{name}");
        match v {
            Value::Bool(true) => extra.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::Number(n) => {
                extra.push(flag);
                extra.push(n.to_string());
            }
            Value::String(s) => {
                extra.push(flag);
                extra.push(s);
            }
            Value::Array(items) => {
                let parts: Vec<String> = items
                    .iter()
                    .map(|x| match x {
                        Value::String(s) => s.clone(),
                        other => other.to_string(),
                    })
                    .collect();
                extra.push(flag);
                extra.push(parts.join(","));
            }
            Value::Object(_) => {
                return Err(CliError::Usage(format!("config key '{key}' must not be an object")));
            }
        }
    }
    let mut merged: Vec<OsString> = argv[..=pos].to_vec();
    merged.extend(extra.into_iter().map(OsString::from));
    merged.extend(argv[pos + 1..].iter().cloned());
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_units() {
        assert_eq!(parse_real("pi").unwrap(), PI);
        assert_eq!(parse_real("0.5pi").unwrap(), 0.5 * PI);
        assert_eq!(parse_real("-0.5π").unwrap(), -0.5 * PI);
        assert_eq!(parse_real("1.4111").unwrap(), 1.4111);
        assert!(parse_real("abc").is_err());
        assert!(parse_real("xpi").is_err());
    }

    #[test]
    fn angles_wrap() {
        assert_eq!(parse_angle("2pi").unwrap(), 0.0);
        assert!((parse_angle("-0.5pi").unwrap() - 1.5 * PI).abs() < 1e-15);
        assert_eq!(parse_angle("0.783pi").unwrap(), 0.783 * PI);
    }
}
