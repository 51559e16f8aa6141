//! TOML experiment configuration: file schema, defaults, CLI overrides, and
//! resolution into validated run parameters.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::constants::UNITS;
use crate::error::{Error, Result};
use crate::magnus::MagnusOrder;
use crate::observables::ThermalWeighting;
use crate::pulse::{PulseParams, DEFAULT_PHI_C};
use crate::rotor::{MoleculeSpec, RotLabel, DEFAULT_BOLTZMANN_CUTOFF};
use crate::tdse::{DEFAULT_J_MAX, DEFAULT_TOL};

/// Raw configuration file contents; every section is optional and falls back
/// to the documented defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub molecule: MoleculeSection,
    #[serde(default)]
    pub pulse: PulseSection,
    #[serde(default)]
    pub initial: InitialSection,
    #[serde(default)]
    pub basis: BasisSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub magnus: MagnusSection,
    #[serde(default)]
    pub scan: ScanSection,
    #[serde(default)]
    pub simulate: SimulateSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoleculeSection {
    pub name: Option<String>,
    #[serde(rename = "B_cm1")]
    pub b_cm1: Option<f64>,
    pub mu_debye: Option<f64>,
}

impl Default for MoleculeSection {
    fn default() -> Self {
        MoleculeSection {
            name: Some("HCN".to_string()),
            b_cm1: None,
            mu_debye: None,
        }
    }
}

/// Carrier frequency: an ordinary frequency in THz or "resonant" for
/// omega_c = 2B of the configured molecule.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum CarrierFreq {
    Thz(f64),
    Keyword(String),
}

impl Default for CarrierFreq {
    fn default() -> Self {
        CarrierFreq::Keyword("resonant".to_string())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSection {
    #[serde(rename = "E0_V_per_m", default = "default_e0")]
    pub e0_v_per_m: f64,
    #[serde(rename = "freq_THz", default)]
    pub freq_thz: CarrierFreq,
    #[serde(rename = "phi_c_rad", default = "default_phi_c")]
    pub phi_c_rad: f64,
}

fn default_e0() -> f64 {
    7e6
}

fn default_phi_c() -> f64 {
    DEFAULT_PHI_C
}

impl Default for PulseSection {
    fn default() -> Self {
        PulseSection {
            e0_v_per_m: default_e0(),
            freq_thz: CarrierFreq::default(),
            phi_c_rad: default_phi_c(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    /// "thermal" or "single".
    #[serde(default = "default_mode")]
    pub mode: String,
    #[serde(rename = "temperature_K", default = "default_temperature")]
    pub temperature_k: f64,
    /// "per-level" or "per-sublevel".
    #[serde(default = "default_weighting")]
    pub weighting: String,
    #[serde(default = "default_cutoff")]
    pub cutoff: f64,
    #[serde(rename = "J", default)]
    pub j: u32,
    #[serde(rename = "M", default)]
    pub m: i32,
}

fn default_mode() -> String {
    "thermal".to_string()
}

fn default_temperature() -> f64 {
    2.0
}

fn default_weighting() -> String {
    "per-level".to_string()
}

fn default_cutoff() -> f64 {
    DEFAULT_BOLTZMANN_CUTOFF
}

impl Default for InitialSection {
    fn default() -> Self {
        InitialSection {
            mode: default_mode(),
            temperature_k: default_temperature(),
            weighting: default_weighting(),
            cutoff: default_cutoff(),
            j: 0,
            m: 0,
        }
    }
}

/// J_max: a number or "auto".
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum JMaxChoice {
    Fixed(u32),
    Keyword(String),
}

impl Default for JMaxChoice {
    fn default() -> Self {
        JMaxChoice::Fixed(DEFAULT_J_MAX)
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSection {
    #[serde(rename = "J_max", default)]
    pub j_max: JMaxChoice,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection { tol: default_tol() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MagnusSection {
    #[serde(default = "default_orders")]
    pub orders: Vec<u8>,
    #[serde(default)]
    pub standard_third_order: bool,
    #[serde(default = "default_time_points")]
    pub time_points: usize,
}

fn default_orders() -> Vec<u8> {
    vec![1, 2, 3]
}

fn default_time_points() -> usize {
    400
}

impl Default for MagnusSection {
    fn default() -> Self {
        MagnusSection {
            orders: default_orders(),
            standard_third_order: false,
            time_points: default_time_points(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    #[serde(rename = "E0_min_V_per_m", default = "default_e0_min")]
    pub e0_min: f64,
    #[serde(rename = "E0_max_V_per_m", default = "default_e0_max")]
    pub e0_max: f64,
    #[serde(rename = "E0_count", default = "default_grid_count")]
    pub e0_count: usize,
    #[serde(rename = "delta1_min_THz", default = "default_d1_min")]
    pub delta1_min_thz: f64,
    #[serde(rename = "delta1_max_THz", default = "default_d1_max")]
    pub delta1_max_thz: f64,
    #[serde(rename = "delta1_count", default = "default_grid_count")]
    pub delta1_count: usize,
    /// "exact" or "magnus".
    #[serde(default = "default_model")]
    pub model: String,
}

fn default_e0_min() -> f64 {
    1e5
}

fn default_e0_max() -> f64 {
    8e6
}

fn default_grid_count() -> usize {
    40
}

// Default detuning window places the carrier between 0.072 and 0.108 THz.
fn default_d1_min() -> f64 {
    0.072 - hcn_f0_thz()
}

fn default_d1_max() -> f64 {
    0.108 - hcn_f0_thz()
}

fn hcn_f0_thz() -> f64 {
    UNITS.angular_to_thz(MoleculeSpec::hcn().omega0())
}

fn default_model() -> String {
    "exact".to_string()
}

impl Default for ScanSection {
    fn default() -> Self {
        ScanSection {
            e0_min: default_e0_min(),
            e0_max: default_e0_max(),
            e0_count: default_grid_count(),
            delta1_min_thz: default_d1_min(),
            delta1_max_thz: default_d1_max(),
            delta1_count: default_grid_count(),
            model: default_model(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    #[serde(default = "default_trace_points")]
    pub trace_points: usize,
    #[serde(default = "default_theta_points")]
    pub theta_points: usize,
    #[serde(default = "default_density_time_points")]
    pub density_time_points: usize,
    /// Post-pulse window length in revival periods.
    #[serde(default = "default_free_periods")]
    pub free_periods: f64,
}

fn default_trace_points() -> usize {
    2048
}

fn default_theta_points() -> usize {
    181
}

fn default_density_time_points() -> usize {
    256
}

fn default_free_periods() -> f64 {
    2.0
}

impl Default for SimulateSection {
    fn default() -> Self {
        SimulateSection {
            trace_points: default_trace_points(),
            theta_points: default_theta_points(),
            density_time_points: default_density_time_points(),
            free_periods: default_free_periods(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    /// "csv" or "json".
    #[serde(default = "default_format")]
    pub format: String,
    #[serde(default)]
    pub threads: usize,
    #[serde(default = "default_plot_scripts")]
    pub plot_scripts: bool,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_format() -> String {
    "csv".to_string()
}

fn default_plot_scripts() -> bool {
    true
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: default_dir(),
            format: default_format(),
            threads: 0,
            plot_scripts: default_plot_scripts(),
        }
    }
}

/// CLI-level overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub e0_v_per_m: Option<f64>,
    pub freq_thz: Option<f64>,
    pub temperature_k: Option<f64>,
    pub j_max: Option<u32>,
    pub tol: Option<f64>,
    pub out_dir: Option<PathBuf>,
    pub format: Option<String>,
    pub threads: Option<usize>,
}

// ---------------------------------------------------------------------------
// Resolved configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialState {
    Single(RotLabel),
    Thermal {
        temperature_k: f64,
        weighting: ThermalWeighting,
        cutoff: f64,
    },
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum BasisChoice {
    Fixed(u32),
    Auto,
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Exact,
    Magnus,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        (0..self.count)
            .map(|i| self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputFormatting {
    pub dir: PathBuf,
    pub json: bool,
    pub threads: usize,
    pub plot_scripts: bool,
}

/// Fully validated run parameters.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub molecule: MoleculeSpec,
    pub pulse: PulseParams,
    pub initial: InitialState,
    pub basis: BasisChoice,
    pub tol: f64,
    pub magnus_orders: Vec<u8>,
    pub standard_third_order: bool,
    pub magnus_time_points: usize,
    pub e0_grid: GridSpec,
    pub delta1_grid_thz: GridSpec,
    pub model: ModelKind,
    pub trace_points: usize,
    pub theta_points: usize,
    pub density_time_points: usize,
    pub free_periods: f64,
    pub output: OutputFormatting,
}

impl RunConfig {
    pub fn magnus_order_set(&self) -> Result<Vec<MagnusOrder>> {
        let mut orders: Vec<MagnusOrder> = self
            .magnus_orders
            .iter()
            .map(|&n| MagnusOrder::from_u8(n))
            .collect::<Result<_>>()?;
        orders.sort();
        orders.dedup();
        if orders.is_empty() {
            return Err(Error::Config("magnus.orders must not be empty".into()));
        }
        Ok(orders)
    }

    pub fn magnus_options(&self) -> crate::magnus::MagnusOptions {
        crate::magnus::MagnusOptions {
            standard_third_order: self.standard_third_order,
            tol: self.tol.min(1e-11),
        }
    }
}

/// Load a config file, or the built-in defaults when no path is given.
pub fn load(path: Option<&Path>) -> Result<ConfigFile> {
    match path {
        None => Ok(ConfigFile::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| Error::Io {
                path: p.display().to_string(),
                source,
            })?;
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))
        }
    }
}

/// Apply overrides and validate everything into a [`RunConfig`].
pub fn resolve(file: ConfigFile, overrides: &Overrides) -> Result<RunConfig> {
    let molecule = match (&file.molecule.name, file.molecule.b_cm1, file.molecule.mu_debye) {
        (_, Some(b), Some(mu)) => {
            let name = file.molecule.name.clone().unwrap_or_else(|| "custom".into());
            MoleculeSpec::new(name, b, mu).map_err(|e| Error::Config(e.to_string()))?
        }
        (Some(name), None, None) => MoleculeSpec::preset(name)
            .ok_or_else(|| Error::Config(format!("unknown molecule preset '{name}'")))?,
        _ => {
            return Err(Error::Config(
                "molecule needs either a preset name or both B_cm1 and mu_debye".into(),
            ))
        }
    };

    let e0 = overrides.e0_v_per_m.unwrap_or(file.pulse.e0_v_per_m);
    let omega_c = match (&overrides.freq_thz, &file.pulse.freq_thz) {
        (Some(f), _) => UNITS.thz_to_angular(*f),
        (None, CarrierFreq::Thz(f)) => UNITS.thz_to_angular(*f),
        (None, CarrierFreq::Keyword(k)) if k == "resonant" => molecule.omega0(),
        (None, CarrierFreq::Keyword(k)) => {
            return Err(Error::Config(format!(
                "pulse.freq_THz must be a number or \"resonant\", got \"{k}\""
            )))
        }
    };
    let pulse = PulseParams::from_angular(e0, omega_c, file.pulse.phi_c_rad)
        .map_err(|e| Error::Config(e.to_string()))?;

    let weighting = match file.initial.weighting.as_str() {
        "per-level" => ThermalWeighting::PerLevel,
        "per-sublevel" => ThermalWeighting::PerSublevel,
        other => {
            return Err(Error::Config(format!(
                "initial.weighting must be per-level or per-sublevel, got \"{other}\""
            )))
        }
    };
    let initial = match file.initial.mode.as_str() {
        "thermal" => {
            let t = overrides.temperature_k.unwrap_or(file.initial.temperature_k);
            if !(t > 0.0) {
                return Err(Error::Config(format!("temperature must be positive, got {t} K")));
            }
            InitialState::Thermal {
                temperature_k: t,
                weighting,
                cutoff: file.initial.cutoff,
            }
        }
        "single" => InitialState::Single(
            RotLabel::new(file.initial.j, file.initial.m)
                .map_err(|e| Error::Config(e.to_string()))?,
        ),
        other => {
            return Err(Error::Config(format!(
                "initial.mode must be thermal or single, got \"{other}\""
            )))
        }
    };

    let basis = match (overrides.j_max, &file.basis.j_max) {
        (Some(j), _) => BasisChoice::Fixed(j),
        (None, JMaxChoice::Fixed(j)) => BasisChoice::Fixed(*j),
        (None, JMaxChoice::Keyword(k)) if k == "auto" => BasisChoice::Auto,
        (None, JMaxChoice::Keyword(k)) => {
            return Err(Error::Config(format!(
                "basis.J_max must be a number or \"auto\", got \"{k}\""
            )))
        }
    };

    let tol = overrides.tol.unwrap_or(file.solver.tol);
    if !(tol > 0.0 && tol < 1e-2) {
        return Err(Error::Config(format!("solver.tol must be in (0, 1e-2), got {tol}")));
    }

    let scan = &file.scan;
    if scan.e0_count < 1 || scan.delta1_count < 1 {
        return Err(Error::Config("scan grid counts must be at least 1".into()));
    }
    if !(scan.e0_min >= 0.0) || scan.e0_max < scan.e0_min {
        return Err(Error::Config(
            "scan E0 grid needs 0 <= E0_min <= E0_max".into(),
        ));
    }
    let model = match scan.model.as_str() {
        "exact" => ModelKind::Exact,
        "magnus" => ModelKind::Magnus,
        other => {
            return Err(Error::Config(format!(
                "scan.model must be exact or magnus, got \"{other}\""
            )))
        }
    };

    if file.simulate.trace_points < 16 || file.simulate.theta_points < 3 {
        return Err(Error::Config("simulate grids are too small".into()));
    }

    let format = overrides
        .format
        .clone()
        .unwrap_or_else(|| file.output.format.clone());
    let json = match format.as_str() {
        "csv" => false,
        "json" => true,
        other => {
            return Err(Error::Config(format!(
                "output.format must be csv or json, got \"{other}\""
            )))
        }
    };

    Ok(RunConfig {
        molecule,
        pulse,
        initial,
        basis,
        tol,
        magnus_orders: file.magnus.orders.clone(),
        standard_third_order: file.magnus.standard_third_order,
        magnus_time_points: file.magnus.time_points.max(2),
        e0_grid: GridSpec {
            min: scan.e0_min,
            max: scan.e0_max,
            count: scan.e0_count,
        },
        delta1_grid_thz: GridSpec {
            min: scan.delta1_min_thz,
            max: scan.delta1_max_thz,
            count: scan.delta1_count,
        },
        model,
        trace_points: file.simulate.trace_points,
        theta_points: file.simulate.theta_points,
        density_time_points: file.simulate.density_time_points,
        free_periods: file.simulate.free_periods,
        output: OutputFormatting {
            dir: overrides.out_dir.clone().unwrap_or(file.output.dir),
            json,
            threads: overrides.threads.unwrap_or(file.output.threads),
            plot_scripts: file.output.plot_scripts,
        },
    })
}
