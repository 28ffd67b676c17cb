//! Run configuration. Every physical quantity is in SI units; unknown keys are
//! rejected.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use pushgate_core::units::{IonSpecies, TrapMode};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub species: Option<SpeciesBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trap: Option<TrapBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulse: Option<PulseBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<SequenceBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub laser: Option<LaserBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub design: Option<DesignBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<ToleranceBlock>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// kg
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
    /// C
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charge: Option<f64>,
    /// m
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transition_wavelength: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapBlock {
    pub n_ions: usize,
    /// rad/s
    pub omega: f64,
    pub mode: TrapMode,
    /// m; required for separate microtraps unless `epsilon` and `d_over_a` are given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d0: Option<f64>,
    /// Model chain: coupling and neighbour separation (units of the
    /// ground-state length) given directly instead of solving the statics.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_over_a: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseBlock {
    /// Peak force in units of `hbar omega / a`; alternative to `force`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    /// Peak force (N).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub force: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_tau: Option<f64>,
    /// Gaussian width (s); alternative to `omega_tau`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<bool>>,
    /// Light-shift offsets per ion (m).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub light_shift: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window_factor: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceKind {
    Single,
    SpinEcho,
    DetuningSwap,
    ForceSwap,
    /// Simultaneous pushes on three ions followed by the CCZ network.
    Toffoli,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceBlock {
    pub kind: SequenceKind,
    #[serde(default)]
    pub with_pi_pulses: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleBlock {
    /// K
    pub temperature: f64,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaserKind {
    TravellingWave,
    StandingWave,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserBlock {
    pub configuration: LaserKind,
    /// m
    pub waist: f64,
    /// W
    pub power: f64,
    /// m
    pub wavelength: f64,
    /// Ion offset from the beam axis (m); default `waist / 2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
    /// Angle between the standing-wave beams (rad); default `pi/2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beam_angle: Option<f64>,
    /// Ion position along the standing wave (m); default `k_alpha z0 = pi/4`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub standing_wave_position: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignModelChoice {
    Analytic,
    Simulated,
    #[default]
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FreeVariable {
    #[default]
    Tau,
    Xi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignBlock {
    /// rad
    pub target_phase: f64,
    #[serde(default)]
    pub model: DesignModelChoice,
    #[serde(default)]
    pub free: FreeVariable,
    #[serde(default = "default_min_omega_tau")]
    pub min_omega_tau: f64,
}

fn default_min_omega_tau() -> f64 {
    5.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Omega,
    Temperature,
    Waist,
    Power,
    Epsilon,
    Xi,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Omega => "omega",
            SweepAxis::Temperature => "temperature",
            SweepAxis::Waist => "waist",
            SweepAxis::Power => "power",
            SweepAxis::Epsilon => "epsilon",
            SweepAxis::Xi => "xi",
        }
    }

    pub fn parse(s: &str) -> Option<SweepAxis> {
        Some(match s {
            "omega" => SweepAxis::Omega,
            "temperature" | "T" => SweepAxis::Temperature,
            "waist" | "w" => SweepAxis::Waist,
            "power" | "P" => SweepAxis::Power,
            "epsilon" => SweepAxis::Epsilon,
            "xi" => SweepAxis::Xi,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Log,
    Linear,
}

/// Temperature in kelvin, or the named value `hbar_omega_over_kb_ln2`, the
/// temperature at which the mean phonon number is one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TemperatureSpec {
    Kelvin(f64),
    Named(String),
}

pub const ONE_PHONON: &str = "hbar_omega_over_kb_ln2";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveBlock {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waist: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<TemperatureSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub axis: SweepAxis,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: Spacing,
    /// Overall gate phase used in the dynamic term (rad).
    #[serde(default = "default_vartheta")]
    pub vartheta_l: f64,
    /// Pulse width `omega tau` of the gate; derived from `xi` on the xi axis.
    #[serde(default = "default_sweep_omega_tau")]
    pub omega_tau: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub curves: Vec<CurveBlock>,
}

fn default_vartheta() -> f64 {
    PI
}

fn default_sweep_omega_tau() -> f64 {
    5.0
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<String>,
    /// Base name of the sweep CSV (without extension).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub trajectories: bool,
    #[serde(default = "default_trajectory_points")]
    pub trajectory_points: usize,
}

fn default_trajectory_points() -> usize {
    400
}

/// Overrides for integrator settings, gate checks and the verification suite.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator_rtol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integrator_atol: Option<f64>,
    /// Allowed distance of a synthesised gate from its target (rad).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub small_eps_phase: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub general_phase: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statics_separation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub statics_epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub non_neighbour_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub toffoli: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cancellation: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature_exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub separation_exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simplex_grid: Option<f64>,
}

/// Parse TOML text. Unknown keys are collected and reported together.
pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    let value: toml::Value =
        toml::from_str(text).map_err(|e| CliError::Config(format!("malformed TOML: {e}")))?;
    let unknown = unknown_keys(&value);
    if !unknown.is_empty() {
        return Err(CliError::Config(format!(
            "unknown keys: {}",
            unknown.into_iter().collect::<Vec<_>>().join(", ")
        )));
    }
    toml::from_str(text).map_err(|e| CliError::Config(format!("schema error: {e}")))
}

pub fn load(path: &std::path::Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn to_toml(cfg: &RunConfig) -> String {
    toml::to_string(cfg).expect("configuration serialises")
}

const TOP: &[&str] = &[
    "species", "trap", "pulse", "sequence", "ensemble", "laser", "design", "sweep", "output",
    "tolerances",
];

fn block_keys(block: &str) -> &'static [&'static str] {
    match block {
        "species" => &["preset", "mass", "charge", "transition_wavelength"],
        "trap" => &["n_ions", "omega", "mode", "d0", "epsilon", "d_over_a"],
        "pulse" => &["xi", "force", "omega_tau", "tau", "targets", "light_shift", "window_factor"],
        "sequence" => &["kind", "with_pi_pulses"],
        "ensemble" => &["temperature", "samples", "seed"],
        "laser" => &[
            "configuration", "waist", "power", "wavelength", "offset", "beam_angle",
            "standing_wave_position",
        ],
        "design" => &["target_phase", "model", "free", "min_omega_tau"],
        "sweep" => &[
            "axis", "start", "stop", "points", "spacing", "vartheta_l", "omega_tau", "curves",
        ],
        "output" => &["directory", "name", "trajectories", "trajectory_points"],
        "tolerances" => &[
            "integrator_rtol", "integrator_atol", "gate", "small_eps_phase", "general_phase",
            "statics_separation", "statics_epsilon", "non_neighbour_ratio", "toffoli",
            "cancellation", "temperature_exponent", "separation_exponent", "simplex_grid",
        ],
        _ => &[],
    }
}

fn unknown_keys(value: &toml::Value) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let Some(top) = value.as_table() else { return out };
    for (k, v) in top {
        if !TOP.contains(&k.as_str()) {
            out.insert(k.clone());
            continue;
        }
        let Some(t) = v.as_table() else { continue };
        let allowed = block_keys(k);
        for (kk, vv) in t {
            if !allowed.contains(&kk.as_str()) {
                out.insert(format!("{k}.{kk}"));
            }
            if k == "sweep" && kk == "curves" {
                for (i, c) in vv.as_array().into_iter().flatten().enumerate() {
                    for ck in c.as_table().into_iter().flat_map(|t| t.keys()) {
                        if !["label", "waist", "power", "temperature"].contains(&ck.as_str()) {
                            out.insert(format!("sweep.curves[{i}].{ck}"));
                        }
                    }
                }
            }
        }
    }
    out
}

impl SpeciesBlock {
    /// Preset values overridden by any explicit fields.
    pub fn resolve(&self) -> Result<IonSpecies, CliError> {
        let mut s = match &self.preset {
            Some(p) => IonSpecies::preset(p).map_err(|e| CliError::Config(e.to_string()))?,
            None => {
                let (Some(_), Some(_), Some(_)) = (self.mass, self.charge, self.transition_wavelength) else {
                    return Err(CliError::Config(
                        "species needs a preset or all of mass, charge, transition_wavelength".into(),
                    ));
                };
                IonSpecies {
                    label: "custom".into(),
                    mass: 0.0,
                    charge: 0.0,
                    transition_wavelength: 0.0,
                    doppler_temperature: None,
                }
            }
        };
        if let Some(m) = self.mass {
            s.mass = m;
        }
        if let Some(q) = self.charge {
            s.charge = q;
        }
        if let Some(l) = self.transition_wavelength {
            s.transition_wavelength = l;
        }
        s.validate().map_err(|e| CliError::Config(format!("species: {e}")))?;
        Ok(s)
    }

    pub fn resolved(&self) -> Result<SpeciesBlock, CliError> {
        let s = self.resolve()?;
        Ok(SpeciesBlock {
            preset: self.preset.clone(),
            mass: Some(s.mass),
            charge: Some(s.charge),
            transition_wavelength: Some(s.transition_wavelength),
        })
    }
}

/// `Err` naming the missing block.
pub fn require<'a, T>(block: &'a Option<T>, name: &str, command: &str) -> Result<&'a T, CliError> {
    block
        .as_ref()
        .ok_or_else(|| CliError::Config(format!("command '{command}' needs a [{name}] block")))
}

pub fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{name} must be positive and finite, got {v}")))
    }
}
