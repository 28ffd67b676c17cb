//! Closed-form infidelity budgets along one parameter axis.

use pushgate_core::fidelity::{
    appendix_dynamic_infidelity, photon_scattering, shared_trap_budget, spatial_infidelity,
    total_infidelity, DynamicRegime, InfidelityBreakdown, LaserGeometry,
};
use pushgate_core::phases::{
    analytic_vartheta_general, analytic_vartheta_linear, invert_vartheta_general, linear_trap_omega_tau,
};
use pushgate_core::statics::solve_equilibrium;
use pushgate_core::units::{IonSpecies, PhysicalConstants, TrapArray, TrapMode};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::*;
use crate::error::{tag, CliError};

pub const SCHEMA_VERSION: u32 = 1;

pub const UNITS: &str = "omega rad/s, temperature K, waist m, power W; epsilon, xi, omega_tau, \
                         a_over_d, kt dimensionless";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub curve: String,
    pub axis: String,
    pub axis_value: f64,
    pub omega: f64,
    pub temperature: f64,
    pub waist: f64,
    pub power: f64,
    pub epsilon: f64,
    pub xi: f64,
    pub omega_tau: f64,
    pub a_over_d: f64,
    pub kt: f64,
    pub p_spatial: f64,
    pub p_dynamic: f64,
    pub n_scattered: f64,
    pub p_total: f64,
    pub valid: bool,
}

/// Axis values. A single point gives `[start]`; zero points is an error.
pub fn grid(sweep: &SweepBlock) -> Result<Vec<f64>, CliError> {
    let (a, b, n) = (sweep.start, sweep.stop, sweep.points);
    if n == 0 {
        return Err(CliError::Config("sweep range is empty (points = 0)".into()));
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(CliError::Config("sweep bounds must be finite".into()));
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    let step = |i: usize| i as f64 / (n - 1) as f64;
    match sweep.spacing {
        Spacing::Linear => Ok((0..n).map(|i| a + (b - a) * step(i)).collect()),
        Spacing::Log => {
            positive("sweep.start", a)?;
            positive("sweep.stop", b)?;
            let (la, lb) = (a.ln(), b.ln());
            Ok((0..n)
                .map(|i| match i {
                    0 => a,
                    _ if i == n - 1 => b,
                    _ => (la + (lb - la) * step(i)).exp(),
                })
                .collect())
        }
    }
}

/// Resolve a temperature at trap frequency `omega`.
pub fn temperature(spec: &TemperatureSpec, species: &IonSpecies, omega: f64) -> Result<f64, CliError> {
    let k = PhysicalConstants::CODATA2018;
    match spec {
        TemperatureSpec::Kelvin(t) if *t >= 0.0 && t.is_finite() => Ok(*t),
        TemperatureSpec::Kelvin(t) => Err(CliError::Config(format!("temperature must be >= 0, got {t}"))),
        TemperatureSpec::Named(n) if n == ONE_PHONON => Ok(k.hbar * omega / (k.k_b * 2f64.ln())),
        TemperatureSpec::Named(n) if n == "doppler" => species
            .doppler_temperature
            .ok_or_else(|| CliError::Config(format!("no Doppler temperature for {}", species.label))),
        TemperatureSpec::Named(n) => Err(CliError::Config(format!(
            "unknown temperature '{n}'; use kelvin, '{ONE_PHONON}' or 'doppler'"
        ))),
    }
}

pub fn geometry(laser: &LaserBlock, waist: f64, power: f64) -> LaserGeometry {
    let mut g = match laser.configuration {
        LaserKind::TravellingWave => LaserGeometry::travelling_wave(waist, power, laser.wavelength),
        LaserKind::StandingWave => LaserGeometry::standing_wave(
            waist,
            power,
            laser.wavelength,
            laser.beam_angle.unwrap_or(std::f64::consts::FRAC_PI_2),
        ),
    };
    if let Some(x) = laser.offset {
        g.offset = x;
    }
    if let Some(z) = laser.standing_wave_position {
        g.standing_wave_position = z;
    }
    g
}

/// Budget for a two-qubit gate of phase `vartheta` and width `omega_tau`.
/// Returns the breakdown, `a/d` and `k_B T / hbar omega`.
#[allow(clippy::too_many_arguments)]
pub fn budget(
    species: &IonSpecies,
    mode: TrapMode,
    geom: &LaserGeometry,
    omega: f64,
    temperature: f64,
    epsilon: f64,
    vartheta: f64,
    omega_tau: f64,
) -> Result<(InfidelityBreakdown, f64, f64), CliError> {
    let k = PhysicalConstants::CODATA2018;
    let ell = k.coulomb_ell(species.charge);
    let m = species.mass;
    let a = (k.hbar / (m * omega)).sqrt();
    let kt = k.k_b * temperature / (k.hbar * omega);
    match mode {
        TrapMode::SharedLinearTrap => {
            let d = (2.0 * ell / (m * omega * omega)).cbrt();
            let b = shared_trap_budget(geom, species, omega, temperature, vartheta, omega_tau)
                .map_err(tag("fidelity"))?;
            Ok((b, a / d, kt))
        }
        TrapMode::SeparateMicrotraps => {
            if !(epsilon > 0.0 && epsilon < 2.0) {
                return Err(CliError::Config(format!("epsilon must lie in (0, 2), got {epsilon}")));
            }
            let d = (4.0 * ell / (m * omega * omega * epsilon)).cbrt();
            let spatial = spatial_infidelity(geom, species, omega, temperature).map_err(tag("fidelity"))?;
            let dynamic = appendix_dynamic_infidelity(DynamicRegime::SmallEpsilon, kt, a / d);
            let n = photon_scattering(geom, species, omega).map_err(tag("fidelity"))?;
            let b = total_infidelity(spatial, dynamic, n).map_err(tag("fidelity"))?;
            Ok((b, a / d, kt))
        }
    }
}

/// Everything a sweep needs besides the axis values.
pub struct SweepSetup<'a> {
    pub species: &'a IonSpecies,
    pub trap: &'a TrapBlock,
    pub laser: &'a LaserBlock,
    pub sweep: &'a SweepBlock,
    pub default_temperature: Option<f64>,
}

impl SweepSetup<'_> {
    fn point(&self, curve: &CurveBlock, x: f64) -> Result<SweepRow, CliError> {
        let s = self.sweep;
        let axis = s.axis;
        let omega = if axis == SweepAxis::Omega { x } else { self.trap.omega };
        positive("omega", omega)?;
        let temperature = match (axis, &curve.temperature) {
            (SweepAxis::Temperature, _) => x,
            (_, Some(t)) => temperature(t, self.species, omega)?,
            (_, None) => self.default_temperature.ok_or_else(|| {
                CliError::Config("sweep needs a temperature from [ensemble] or the curve".into())
            })?,
        };
        let waist = if axis == SweepAxis::Waist { x } else { curve.waist.unwrap_or(self.laser.waist) };
        let power = if axis == SweepAxis::Power { x } else { curve.power.unwrap_or(self.laser.power) };
        let mode = self.trap.mode;
        let epsilon = match (mode, axis) {
            (TrapMode::SharedLinearTrap, SweepAxis::Epsilon) => {
                return Err(CliError::Config("epsilon is fixed at 2 in a shared trap".into()))
            }
            (TrapMode::SharedLinearTrap, _) => 2.0,
            (_, SweepAxis::Epsilon) => x,
            _ => match (self.trap.epsilon, self.trap.d0) {
                (Some(e), _) => e,
                (None, Some(d0)) => {
                    let t = TrapArray { n_ions: 2, omega, d0, mode };
                    solve_equilibrium(self.species, &t).map_err(tag("statics"))?.epsilon
                }
                (None, None) => {
                    return Err(CliError::Config("separate traps need trap.epsilon or trap.d0".into()))
                }
            },
        };
        let law = |wt: f64, xi: f64| match mode {
            TrapMode::SharedLinearTrap => analytic_vartheta_linear(wt, xi),
            TrapMode::SeparateMicrotraps => analytic_vartheta_general(epsilon, wt, xi),
        };
        let (xi, omega_tau) = if axis == SweepAxis::Xi {
            positive("xi", x)?;
            let wt = match mode {
                TrapMode::SharedLinearTrap => linear_trap_omega_tau(s.vartheta_l, x),
                TrapMode::SeparateMicrotraps => invert_vartheta_general(epsilon, x, s.vartheta_l),
            };
            (x, wt)
        } else {
            (((s.vartheta_l / law(s.omega_tau, 1.0)).sqrt()), s.omega_tau)
        };
        let geom = geometry(self.laser, waist, power);
        let (b, a_over_d, kt) =
            budget(self.species, mode, &geom, omega, temperature, epsilon, s.vartheta_l, omega_tau)?;
        Ok(SweepRow {
            curve: curve.label.clone(),
            axis: axis.name().into(),
            axis_value: x,
            omega,
            temperature,
            waist,
            power,
            epsilon,
            xi,
            omega_tau,
            a_over_d,
            kt,
            p_spatial: b.p_spatial,
            p_dynamic: b.p_dynamic,
            n_scattered: b.n_scattered,
            p_total: b.p_total,
            valid: b.valid,
        })
    }

    /// Rows for every curve, curve-major, in axis order.
    pub fn run(&self) -> Result<Vec<SweepRow>, CliError> {
        let values = grid(self.sweep)?;
        let default_curve = [CurveBlock { label: "default".into(), waist: None, power: None, temperature: None }];
        let curves: &[CurveBlock] =
            if self.sweep.curves.is_empty() { &default_curve } else { &self.sweep.curves };
        let jobs: Vec<(&CurveBlock, f64)> =
            curves.iter().flat_map(|c| values.iter().map(move |&x| (c, x))).collect();
        jobs.par_iter().map(|(c, x)| self.point(c, *x)).collect()
    }
}

/// `#`-prefixed header lines followed by the table.
pub fn to_csv(rows: &[SweepRow], header: &[String]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Check(format!("csv: {e}")))?;
    }
    if rows.is_empty() {
        return Err(CliError::Check("sweep produced no rows".into()));
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| CliError::Check(e.to_string()))?)
        .expect("csv output is utf-8");
    let mut s = String::new();
    for h in header {
        s.push_str("# ");
        s.push_str(h);
        s.push('\n');
    }
    s.push_str(&body);
    Ok(s)
}

/// Parse a CSV written by `to_csv`, skipping comment lines.
pub fn from_csv(text: &str) -> Result<Vec<SweepRow>, CliError> {
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    csv::Reader::from_reader(body.as_bytes())
        .deserialize()
        .collect::<Result<Vec<SweepRow>, _>>()
        .map_err(|e| CliError::Check(format!("csv: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sweep(points: usize, spacing: Spacing) -> SweepBlock {
        SweepBlock {
            axis: SweepAxis::Omega,
            start: 1.0,
            stop: 100.0,
            points,
            spacing,
            vartheta_l: std::f64::consts::PI,
            omega_tau: 5.0,
            curves: vec![],
        }
    }

    #[test]
    fn grid_endpoints() {
        assert!(grid(&sweep(0, Spacing::Log)).is_err());
        assert_eq!(grid(&sweep(1, Spacing::Log)).unwrap(), vec![1.0]);
        let g = grid(&sweep(3, Spacing::Log)).unwrap();
        assert_eq!(g[0], 1.0);
        assert_eq!(g[2], 100.0);
        assert!((g[1] - 10.0).abs() < 1e-12);
        assert_eq!(grid(&sweep(3, Spacing::Linear)).unwrap(), vec![1.0, 50.5, 100.0]);
    }

    #[test]
    fn one_phonon_temperature() {
        let ca = IonSpecies::calcium40();
        let k = PhysicalConstants::CODATA2018;
        let w = 2.0 * std::f64::consts::PI * 1e6;
        let t = temperature(&TemperatureSpec::Named(ONE_PHONON.into()), &ca, w).unwrap();
        // Mean occupation 1/(e^{x} - 1) = 1 at x = ln 2.
        let nbar = 1.0 / ((k.hbar * w / (k.k_b * t)).exp() - 1.0);
        assert!((nbar - 1.0).abs() < 1e-12);
    }
}
