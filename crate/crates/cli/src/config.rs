//! Versioned JSON configurations, one per subcommand. Unknown keys are rejected.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tcq_core::dynamics::SystemConfig;
use tcq_core::opcore::Axis;
use tcq_core::tcq::{FluxGrid, TcqParams};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

pub fn load<T: DeserializeOwned + Versioned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let cfg: T = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if cfg.schema_version() != SCHEMA_VERSION {
        return Err(CliError::Config(format!(
            "schema_version {} unsupported (expected {SCHEMA_VERSION})",
            cfg.schema_version()
        )));
    }
    Ok(cfg)
}

pub trait Versioned {
    fn schema_version(&self) -> u32;
}

macro_rules! versioned {
    ($($t:ty),*) => {$(
        impl Versioned for $t {
            fn schema_version(&self) -> u32 {
                self.schema_version
            }
        }
    )*};
}

versioned!(ScanConfig, SynthConfig, EvolveConfig, CompileConfig);

fn reference_params() -> TcqParams {
    TcqParams::reference()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub schema_version: u32,
    #[serde(default = "reference_params")]
    pub params: TcqParams,
    pub grid: FluxGrid,
}

fn default_phi_minus() -> f64 {
    0.4
}
fn default_curve_samples() -> usize {
    129
}
fn default_g_max() -> f64 {
    80.0
}
fn default_periods() -> usize {
    5
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub schema_version: u32,
    #[serde(default = "reference_params")]
    pub params: TcqParams,
    #[serde(default = "default_phi_minus")]
    pub phi_minus: f64,
    #[serde(default = "default_curve_samples")]
    pub curve_samples: usize,
    /// Calibrated maximum of `g₊` (MHz).
    #[serde(default = "default_g_max")]
    pub g_max_mhz: f64,
    pub g_s_mhz: f64,
    pub g_d_mhz: f64,
    pub delta_mhz: f64,
    /// Resonator frequency (GHz).
    pub omega_r: f64,
    /// Lower-mode frequency used to place the tones (GHz).
    pub omega_plus: f64,
    #[serde(default)]
    pub phase: f64,
    /// Window length in detuning periods.
    #[serde(default = "default_periods")]
    pub periods: usize,
}

fn default_output_dt() -> f64 {
    0.1
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub schema_version: u32,
    pub system: SystemConfig,
    pub t_end_ns: f64,
    #[serde(default = "default_output_dt")]
    pub output_dt_ns: f64,
    #[serde(default)]
    pub snapshot_times_ns: Vec<f64>,
    #[serde(default)]
    pub dt_ns: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompileConfig {
    pub schema_version: u32,
    pub axis: Axis,
    pub n_qubits: usize,
    pub theta: f64,
}
