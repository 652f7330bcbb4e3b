//! Run configuration: a TOML file with flat `[system]`, `[bath]`, `[grid]`,
//! `[schedule]` and `[run]` sections.
//!
//! ```toml
//! [system]
//! kappa = 0.05
//! g0 = 5e-5
//! drive_e = 300.0
//! m0 = 100.0
//! alpha0 = [100.0, 0.0]      # [re, im]
//!
//! [bath]
//! model = "ohmic"            # ohmic | band | flat
//! eta = 1e-5
//! s = 0.5
//! omega0 = 5.0
//! modes = 600
//!
//! [grid]
//! dt = 0.02
//! t_end = 200.0
//!
//! [schedule]
//! kappa = [[133.6, 10.0]]    # [switch time, value] pairs
//!
//! [run]
//! mode = "both"              # kernel | moments | both
//! ```
//!
//! Every key has a default; unknown keys are rejected. `n_th` sets the bath
//! temperature explicitly, otherwise the mirror starts thermal at `m0`.

use optocool::model::temperature_ratio_for_occupation;
use optocool::spectral::QuadOptions;
use optocool::{Complex64, Schedule, SpectralModel, SystemParams, TimeGrid};
use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    pub omega_m: f64,
    pub delta_c: f64,
    pub kappa: f64,
    pub g0: f64,
    pub drive_e: f64,
    pub m0: f64,
    pub n0: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_th: Option<f64>,
    pub alpha0: [f64; 2],
    pub beta0: [f64; 2],
}

impl Default for SystemSection {
    fn default() -> Self {
        let p = SystemParams::cooling_reference();
        Self {
            omega_m: p.omega_m,
            delta_c: p.delta_c,
            kappa: p.kappa,
            g0: 5e-5,
            drive_e: p.drive_e,
            m0: p.m0,
            n0: p.n0,
            n_th: None,
            alpha0: [p.alpha0.re, p.alpha0.im],
            beta0: [p.beta0.re, p.beta0.im],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BathKind {
    Ohmic,
    Band,
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureKind {
    Default,
    Reference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BathSection {
    pub model: BathKind,
    pub eta: f64,
    pub s: f64,
    pub omega0: f64,
    /// Power-law exponent of the band model.
    pub k: f64,
    /// Explicit band; defaults to `omega_m +- width/2`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub band: Option<[f64; 2]>,
    pub width: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_fixed_at: Option<f64>,
    /// Decay rate of the flat spectrum (and of the Markovian baseline).
    pub gamma_m: f64,
    pub modes: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode_band: Option<[f64; 2]>,
    pub quadrature: QuadratureKind,
    pub quad_refine: usize,
}

impl Default for BathSection {
    fn default() -> Self {
        Self {
            model: BathKind::Ohmic,
            eta: 1e-5,
            s: 0.5,
            omega0: 5.0,
            k: -2.0,
            band: None,
            width: 0.1,
            c_fixed_at: None,
            gamma_m: 1e-3,
            modes: 600,
            mode_band: None,
            quadrature: QuadratureKind::Default,
            quad_refine: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub dt: f64,
    pub t_end: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { dt: 0.02, t_end: 200.0 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleSection {
    pub kappa: Vec<[f64; 2]>,
    pub drive_e: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Kernel,
    Moments,
    Both,
}

impl Mode {
    pub fn kernel(self) -> bool {
        self != Mode::Moments
    }

    pub fn moments(self) -> bool {
        self != Mode::Kernel
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DriveKind {
    Locked,
    SelfConsistent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResponseKind {
    Derived,
    MainText,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputNoiseKind {
    TwoTime,
    AsPrinted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub mode: Mode,
    pub drive_model: DriveKind,
    pub constant_g: bool,
    pub rwa: bool,
    pub markovian: bool,
    pub response: ResponseKind,
    pub input_noise: InputNoiseKind,
    pub tolerance_rel: f64,
    pub tolerance_abs: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self {
            mode: Mode::Both,
            drive_model: DriveKind::Locked,
            constant_g: false,
            rwa: false,
            markovian: false,
            response: ResponseKind::Derived,
            input_noise: InputNoiseKind::TwoTime,
            tolerance_rel: 0.02,
            tolerance_abs: 0.05,
            output_dir: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSection,
    pub bath: BathSection,
    pub grid: GridSection,
    pub schedule: ScheduleSection,
    pub run: RunSection,
}

/// Configurations shipped with the binary, addressable by name.
pub const SHIPPED: &[(&str, &str)] = &[
    ("fig2_subohmic", include_str!("../../../configs/fig2_subohmic.toml")),
    ("fig2_ohmic", include_str!("../../../configs/fig2_ohmic.toml")),
    ("fig2_supohmic", include_str!("../../../configs/fig2_supohmic.toml")),
    ("fig2_markovian", include_str!("../../../configs/fig2_markovian.toml")),
    ("fig3_narrowband", include_str!("../../../configs/fig3_narrowband.toml")),
    ("fig3_qswitch", include_str!("../../../configs/fig3_qswitch.toml")),
];

pub fn shipped(name: &str) -> Option<&'static str> {
    SHIPPED.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// Sweepable axes and the dotted keys they drive.
pub const SWEEP_AXES: &[(&str, &str)] =
    &[("drive_E", "system.drive_e"), ("s", "bath.s"), ("eta", "bath.eta"), ("k", "bath.k"), ("kappa", "system.kappa")];

pub fn sweep_key(axis: &str) -> Option<&'static str> {
    SWEEP_AXES.iter().find(|(a, _)| *a == axis).map(|(_, k)| *k)
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        Self::from_table(parse_table(text)?)
    }

    fn from_table(table: toml::Table) -> Result<Self, CliError> {
        toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| config_err(e.message().to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Loads a file, or a shipped configuration when `spec` names one and no
    /// such file exists. Overrides (`section.key=value`) apply on top.
    pub fn load(spec: Option<&str>, overrides: &[String]) -> Result<Self, CliError> {
        let mut table = match spec {
            None => toml::Table::new(),
            Some(s) if Path::new(s).exists() => {
                let text = std::fs::read_to_string(s).map_err(|e| config_err(format!("{s}: {e}")))?;
                parse_table(&text)?
            }
            Some(s) => match shipped(s.trim_end_matches(".toml")) {
                Some(text) => parse_table(text)?,
                None => return Err(config_err(format!("no config file or shipped config named `{s}`"))),
            },
        };
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        Self::from_table(table)
    }

    pub fn with_override(&self, assignment: &str) -> Result<Self, CliError> {
        let mut table = parse_table(&self.to_toml())?;
        apply_override(&mut table, assignment)?;
        Self::from_table(table)
    }

    pub fn params(&self) -> SystemParams {
        let s = &self.system;
        let (temperature_ratio, thermal_init) = match s.n_th {
            Some(n) => (temperature_ratio_for_occupation(n), false),
            None => (temperature_ratio_for_occupation(s.m0), true),
        };
        SystemParams {
            omega_m: s.omega_m,
            delta_c: s.delta_c,
            kappa: s.kappa,
            g0: s.g0,
            drive_e: s.drive_e,
            m0: s.m0,
            n0: s.n0,
            temperature_ratio,
            alpha0: Complex64::new(s.alpha0[0], s.alpha0[1]),
            beta0: Complex64::new(s.beta0[0], s.beta0[1]),
            gamma_m: self.bath.gamma_m,
            thermal_init,
        }
    }

    pub fn spectral_model(&self) -> SpectralModel {
        let b = &self.bath;
        match b.model {
            BathKind::Ohmic => SpectralModel::OhmicFamily { eta: b.eta, s: b.s, omega0: b.omega0 },
            BathKind::Flat => SpectralModel::Flat { gamma_m: b.gamma_m },
            BathKind::Band => {
                let band = match b.band {
                    Some([lo, hi]) => (lo, hi),
                    None => {
                        let half = 0.5 * b.width;
                        (self.system.omega_m - half, self.system.omega_m + half)
                    }
                };
                SpectralModel::BandPowerLaw { eta: b.eta, omega0: b.omega0, k: b.k, band, c_fixed_at: b.c_fixed_at }
            }
        }
    }

    pub fn quad_options(&self) -> QuadOptions {
        let base = match self.bath.quadrature {
            QuadratureKind::Default => QuadOptions::default(),
            QuadratureKind::Reference => QuadOptions::reference(),
        };
        if self.bath.quad_refine > 1 {
            base.refined(self.bath.quad_refine)
        } else {
            base
        }
    }

    pub fn time_grid(&self) -> Result<TimeGrid, CliError> {
        let g = &self.grid;
        if !(g.dt > 0.0) || !g.dt.is_finite() {
            return Err(config_err(format!("grid.dt must be > 0, got {}", g.dt)));
        }
        TimeGrid::with_end(g.dt, g.t_end).map_err(|e| config_err(e.to_string()))
    }

    pub fn schedule(&self) -> Schedule {
        let pairs = |v: &[[f64; 2]]| v.iter().map(|p| (p[0], p[1])).collect();
        Schedule { kappa_steps: pairs(&self.schedule.kappa), drive_steps: pairs(&self.schedule.drive_e) }
    }
}

fn parse_table(text: &str) -> Result<toml::Table, CliError> {
    text.parse::<toml::Table>().map_err(|e| config_err(e.message().to_string()))
}

/// `section.key=value`; the value is read as a TOML literal, falling back to
/// a bare string (`run.mode=kernel`).
fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<(), CliError> {
    let (key, raw) =
        assignment.split_once('=').ok_or_else(|| config_err(format!("override `{assignment}` is not key=value")))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.len() != 2 || path.iter().any(|p| p.is_empty()) {
        return Err(config_err(format!("override key `{key}` must be section.key")));
    }
    let raw = raw.trim();
    let value = match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let section = table
        .entry(path[0].to_string())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()))
        .as_table_mut()
        .ok_or_else(|| config_err(format!("`{}` is not a section", path[0])))?;
    section.insert(path[1].to_string(), value);
    Ok(())
}
