//! Configuration loading and machine-readable result emission.
//!
//! Scenario files are JSON objects whose keys mirror [`SimConfig`]; every key
//! is optional and missing keys keep their built-in defaults. Antenna gains
//! may be given either linear (`*_gain_linear`) or in dBi (`*_gain_dbi`);
//! conversion to linear happens here, never in the core. Results are written
//! as CSV (one row per sweep point) or JSON (same rows plus the config
//! snapshot). A sidecar manifest `<out>.manifest.json` records the tool
//! version, seed, config, and output paths; the timestamp lives only in the
//! manifest so result files are byte-reproducible.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use thznoma::config::ConfigError;
use thznoma::{SimConfig, SweepResult};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Header of every results CSV, in column order.
pub const CSV_HEADER: &str = "axis_value,mean_ee_bits_per_joule,mean_sum_rate_bps,\
mean_consumed_power_w,mean_center_rate_bps,infeasibility_rate,num_realizations,seed";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read `{path}`: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write `{path}`: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config: {detail}")]
    MalformedConfig { detail: String },
    #[error("bad override `{entry}`: expected KEY=VALUE")]
    MalformedOverride { entry: String },
    #[error("config sets both `{linear_key}` and `{db_key}`; pick one")]
    ConflictingGainKeys {
        linear_key: &'static str,
        db_key: &'static str,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// Scenario-file schema. Keys mirror `SimConfig` with the circuit block
/// flattened; the `*_gain_dbi` keys are accepted as alternatives to their
/// linear twins.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    carrier_frequency_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bandwidth_hz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    absorption_coeff_per_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    num_antennas: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    num_beams: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sector_start_rad: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sector_end_rad: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bs_gain_linear: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bs_gain_dbi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    user_gain_linear: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    user_gain_dbi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    side_gain_linear: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    side_gain_dbi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bs_power_w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    si_kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    si_channel_gain: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pa_inefficiency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    baseband_power_w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rf_chain_power_w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    amplifier_power_w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    phase_shifter_power_w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    num_rf_chains: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    min_rate_bps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    coverage_radius_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    center_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cooperator_band_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    num_pairs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise_figure_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    num_realizations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    master_seed: Option<u64>,
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

impl FileConfig {
    fn apply(self, base: SimConfig) -> Result<SimConfig, CliError> {
        let gain = |linear: Option<f64>,
                    db: Option<f64>,
                    fallback: f64,
                    linear_key: &'static str,
                    db_key: &'static str|
         -> Result<f64, CliError> {
            match (linear, db) {
                (Some(_), Some(_)) => Err(CliError::ConflictingGainKeys { linear_key, db_key }),
                (Some(l), None) => Ok(l),
                (None, Some(d)) => Ok(db_to_linear(d)),
                (None, None) => Ok(fallback),
            }
        };
        let mut cfg = SimConfig {
            bs_gain_linear: gain(
                self.bs_gain_linear,
                self.bs_gain_dbi,
                base.bs_gain_linear,
                "bs_gain_linear",
                "bs_gain_dbi",
            )?,
            user_gain_linear: gain(
                self.user_gain_linear,
                self.user_gain_dbi,
                base.user_gain_linear,
                "user_gain_linear",
                "user_gain_dbi",
            )?,
            side_gain_linear: gain(
                self.side_gain_linear,
                self.side_gain_dbi,
                base.side_gain_linear,
                "side_gain_linear",
                "side_gain_dbi",
            )?,
            ..base
        };
        macro_rules! set {
            ($($field:ident),* $(,)?) => {
                $(if let Some(v) = self.$field { cfg.$field = v; })*
            };
        }
        set!(
            carrier_frequency_hz,
            bandwidth_hz,
            absorption_coeff_per_m,
            num_antennas,
            num_beams,
            sector_start_rad,
            sector_end_rad,
            bs_power_w,
            si_kappa,
            si_channel_gain,
            pa_inefficiency,
            num_rf_chains,
            min_rate_bps,
            coverage_radius_m,
            center_fraction,
            cooperator_band_fraction,
            num_pairs,
            noise_figure_db,
            num_realizations,
            master_seed,
        );
        if let Some(v) = self.baseband_power_w {
            cfg.circuit.baseband_w = v;
        }
        if let Some(v) = self.rf_chain_power_w {
            cfg.circuit.rf_chain_w = v;
        }
        if let Some(v) = self.amplifier_power_w {
            cfg.circuit.amplifier_w = v;
        }
        if let Some(v) = self.phase_shifter_power_w {
            cfg.circuit.phase_shifter_w = v;
        }
        Ok(cfg)
    }

    fn from_config(cfg: &SimConfig) -> Self {
        FileConfig {
            carrier_frequency_hz: Some(cfg.carrier_frequency_hz),
            bandwidth_hz: Some(cfg.bandwidth_hz),
            absorption_coeff_per_m: Some(cfg.absorption_coeff_per_m),
            num_antennas: Some(cfg.num_antennas),
            num_beams: Some(cfg.num_beams),
            sector_start_rad: Some(cfg.sector_start_rad),
            sector_end_rad: Some(cfg.sector_end_rad),
            bs_gain_linear: Some(cfg.bs_gain_linear),
            bs_gain_dbi: None,
            user_gain_linear: Some(cfg.user_gain_linear),
            user_gain_dbi: None,
            side_gain_linear: Some(cfg.side_gain_linear),
            side_gain_dbi: None,
            bs_power_w: Some(cfg.bs_power_w),
            si_kappa: Some(cfg.si_kappa),
            si_channel_gain: Some(cfg.si_channel_gain),
            pa_inefficiency: Some(cfg.pa_inefficiency),
            baseband_power_w: Some(cfg.circuit.baseband_w),
            rf_chain_power_w: Some(cfg.circuit.rf_chain_w),
            amplifier_power_w: Some(cfg.circuit.amplifier_w),
            phase_shifter_power_w: Some(cfg.circuit.phase_shifter_w),
            num_rf_chains: Some(cfg.num_rf_chains),
            min_rate_bps: Some(cfg.min_rate_bps),
            coverage_radius_m: Some(cfg.coverage_radius_m),
            center_fraction: Some(cfg.center_fraction),
            cooperator_band_fraction: Some(cfg.cooperator_band_fraction),
            num_pairs: Some(cfg.num_pairs),
            noise_figure_db: Some(cfg.noise_figure_db),
            num_realizations: Some(cfg.num_realizations),
            master_seed: Some(cfg.master_seed),
        }
    }
}

/// Load a validated `SimConfig`: built-in defaults, overlaid with the file
/// (when given), overlaid with `KEY=VALUE` overrides, in that precedence
/// order. An empty file means "all defaults".
pub fn parse_config(path: Option<&Path>, overrides: &[String]) -> Result<SimConfig, CliError> {
    let raw = match path {
        Some(p) => fs::read_to_string(p).map_err(|source| CliError::Read {
            path: p.to_path_buf(),
            source,
        })?,
        None => String::new(),
    };
    let raw = if raw.trim().is_empty() { "{}".to_string() } else { raw };
    let mut value: serde_json::Value =
        serde_json::from_str(&raw).map_err(|e| CliError::MalformedConfig {
            detail: match path {
                Some(p) => format!("{}: {e}", p.display()),
                None => e.to_string(),
            },
        })?;
    let map = value
        .as_object_mut()
        .ok_or_else(|| CliError::MalformedConfig {
            detail: "top level must be a JSON object".into(),
        })?;

    for entry in overrides {
        let (key, val) = entry
            .split_once('=')
            .ok_or_else(|| CliError::MalformedOverride { entry: entry.clone() })?;
        let parsed: serde_json::Value = serde_json::from_str(val)
            .unwrap_or_else(|_| serde_json::Value::String(val.to_string()));
        map.insert(key.trim().to_string(), parsed);
    }

    let file_config: FileConfig =
        serde_json::from_value(value).map_err(|e| CliError::MalformedConfig {
            detail: e.to_string(),
        })?;
    let config = file_config.apply(SimConfig::default())?;
    config.validate()?;
    Ok(config)
}

/// Serialize a config to the canonical scenario-file form (linear units).
/// `parse_config` on the result reproduces the config bit-exactly.
pub fn emit_config(config: &SimConfig) -> String {
    let mut s = serde_json::to_string_pretty(&FileConfig::from_config(config))
        .expect("config serialization cannot fail");
    s.push('\n');
    s
}

fn result_rows(result: &SweepResult) -> Vec<[String; 8]> {
    result
        .points
        .iter()
        .map(|p| {
            [
                p.axis_value.to_string(),
                p.summary.mean_ee_bits_per_joule.to_string(),
                p.summary.mean_sum_rate_bps.to_string(),
                p.summary.mean_consumed_power_w.to_string(),
                p.summary.mean_center_rate_bps.to_string(),
                p.summary.infeasibility_rate.to_string(),
                p.summary.num_realizations.to_string(),
                p.summary.master_seed.to_string(),
            ]
        })
        .collect()
}

/// Render a sweep as CSV: pinned header, one row per point, LF endings,
/// full-precision decimal numbers (the shortest strings that parse back to
/// the identical doubles).
pub fn results_csv_string(result: &SweepResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{CSV_HEADER}");
    for row in result_rows(result) {
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

#[derive(Debug, Serialize)]
struct JsonRow {
    axis_value: f64,
    mean_ee_bits_per_joule: f64,
    mean_sum_rate_bps: f64,
    mean_consumed_power_w: f64,
    mean_center_rate_bps: f64,
    infeasibility_rate: f64,
    num_realizations: usize,
    seed: u64,
}

#[derive(Debug, Serialize)]
struct JsonDocument<'a> {
    tool_version: &'a str,
    axis: &'a str,
    master_seed: u64,
    config: &'a SimConfig,
    rows: Vec<JsonRow>,
}

/// Render a sweep as JSON: the CSV rows under `rows`, plus the config
/// snapshot and tool version needed to reproduce them.
pub fn results_json_string(result: &SweepResult) -> String {
    let rows = result
        .points
        .iter()
        .map(|p| JsonRow {
            axis_value: p.axis_value,
            mean_ee_bits_per_joule: p.summary.mean_ee_bits_per_joule,
            mean_sum_rate_bps: p.summary.mean_sum_rate_bps,
            mean_consumed_power_w: p.summary.mean_consumed_power_w,
            mean_center_rate_bps: p.summary.mean_center_rate_bps,
            infeasibility_rate: p.summary.infeasibility_rate,
            num_realizations: p.summary.num_realizations,
            seed: p.summary.master_seed,
        })
        .collect();
    let doc = JsonDocument {
        tool_version: TOOL_VERSION,
        axis: result.axis.as_str(),
        master_seed: result.master_seed,
        config: &result.config,
        rows,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("results serialization cannot fail");
    s.push('\n');
    s
}

/// Write a sweep to disk in the requested format.
pub fn emit_results(
    result: &SweepResult,
    format: OutputFormat,
    path: &Path,
) -> Result<(), CliError> {
    let body = match format {
        OutputFormat::Csv => results_csv_string(result),
        OutputFormat::Json => results_json_string(result),
    };
    fs::write(path, body).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Reproduction record for a set of emitted files.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub master_seed: u64,
    pub timestamp_unix_s: u64,
    pub outputs: Vec<PathBuf>,
    pub config: SimConfig,
}

impl RunManifest {
    pub fn new(config: &SimConfig, outputs: Vec<PathBuf>) -> Self {
        RunManifest {
            tool_version: TOOL_VERSION.to_string(),
            master_seed: config.master_seed,
            timestamp_unix_s: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            outputs,
            config: config.clone(),
        }
    }
}

/// Write the sidecar manifest next to `primary_output`
/// (`<primary_output>.manifest.json`). Returns the manifest path.
pub fn write_manifest(
    config: &SimConfig,
    primary_output: &Path,
    outputs: Vec<PathBuf>,
) -> Result<PathBuf, CliError> {
    let manifest = RunManifest::new(config, outputs);
    let mut name = primary_output
        .file_name()
        .unwrap_or_default()
        .to_os_string();
    name.push(".manifest.json");
    let path = primary_output.with_file_name(name);
    let mut body =
        serde_json::to_string_pretty(&manifest).expect("manifest serialization cannot fail");
    body.push('\n');
    fs::write(&path, body).map_err(|source| CliError::Write {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}
