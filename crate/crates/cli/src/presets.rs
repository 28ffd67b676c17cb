//! Named configurations.

use std::f64::consts::{PI, TAU};

use pushgate_core::phases::{analytic_vartheta_general, linear_trap_omega_tau};
use pushgate_core::units::TrapMode;

use crate::config::*;
use crate::error::CliError;

pub const NAMES: [&str; 5] = ["fig3", "fig4", "two_ion_smalleps", "linear_trap", "toffoli"];

const MHZ: f64 = TAU * 1e6;
const CA_LINE: f64 = 397e-9;
const DOPPLER: f64 = 538e-6;

pub fn preset(name: &str) -> Result<RunConfig, CliError> {
    match name {
        "fig3" => Ok(figure(LaserKind::TravellingWave, "fig3")),
        "fig4" => Ok(figure(LaserKind::StandingWave, "fig4")),
        "two_ion_smalleps" => Ok(two_ion_smalleps()),
        "linear_trap" => Ok(linear_trap()),
        "toffoli" => Ok(toffoli()),
        other => Err(CliError::Config(format!(
            "unknown preset '{other}'; expected one of {}",
            NAMES.join(", ")
        ))),
    }
}

fn calcium() -> Option<SpeciesBlock> {
    Some(SpeciesBlock { preset: Some("ca40".into()), ..Default::default() })
}

fn laser(kind: LaserKind, waist: f64, power: f64) -> LaserBlock {
    LaserBlock {
        configuration: kind,
        waist,
        power,
        wavelength: CA_LINE,
        offset: None,
        beam_angle: (kind == LaserKind::StandingWave).then_some(PI / 2.0),
        standing_wave_position: None,
    }
}

fn ensemble(temperature: f64) -> Option<EnsembleBlock> {
    Some(EnsembleBlock { temperature, samples: 2000, seed: 42 })
}

/// Total infidelity against trap frequency for two ions in one trap: two
/// beam settings times two temperatures.
fn figure(kind: LaserKind, name: &str) -> RunConfig {
    let curve = |label: &str, waist: f64, power: f64, t: TemperatureSpec| CurveBlock {
        label: label.into(),
        waist: Some(waist),
        power: Some(power),
        temperature: Some(t),
    };
    let doppler = TemperatureSpec::Kelvin(DOPPLER);
    let one = TemperatureSpec::Named(ONE_PHONON.into());
    RunConfig {
        species: calcium(),
        trap: Some(TrapBlock {
            n_ions: 2,
            omega: MHZ,
            mode: TrapMode::SharedLinearTrap,
            d0: None,
            epsilon: None,
            d_over_a: None,
        }),
        ensemble: ensemble(DOPPLER),
        laser: Some(laser(kind, 4e-6, 10e-3)),
        sweep: Some(SweepBlock {
            axis: SweepAxis::Omega,
            start: 0.05 * MHZ,
            stop: 50.0 * MHZ,
            points: 61,
            spacing: Spacing::Log,
            vartheta_l: PI,
            omega_tau: 5.0,
            curves: vec![
                curve("w4um_P10mW_Tdoppler", 4e-6, 10e-3, doppler.clone()),
                curve("w2um_P100mW_Tdoppler", 2e-6, 100e-3, doppler),
                curve("w4um_P10mW_Tone", 4e-6, 10e-3, one.clone()),
                curve("w2um_P100mW_Tone", 2e-6, 100e-3, one),
            ],
        }),
        output: Some(OutputBlock { name: Some(name.into()), trajectory_points: 400, ..Default::default() }),
        ..Default::default()
    }
}

fn two_ion_smalleps() -> RunConfig {
    RunConfig {
        species: calcium(),
        trap: Some(TrapBlock {
            n_ions: 2,
            omega: MHZ,
            mode: TrapMode::SeparateMicrotraps,
            d0: None,
            epsilon: Some(1e-3),
            d_over_a: Some(1000.0),
        }),
        pulse: Some(PulseBlock { xi: Some(1.0), omega_tau: Some(50.0), ..Default::default() }),
        sequence: Some(SequenceBlock { kind: SequenceKind::Single, with_pi_pulses: false }),
        design: Some(DesignBlock {
            target_phase: PI,
            model: DesignModelChoice::Both,
            free: FreeVariable::Tau,
            min_omega_tau: 5.0,
        }),
        ..Default::default()
    }
}

fn linear_trap() -> RunConfig {
    RunConfig {
        species: calcium(),
        trap: Some(TrapBlock {
            n_ions: 2,
            omega: MHZ,
            mode: TrapMode::SharedLinearTrap,
            d0: None,
            epsilon: None,
            d_over_a: None,
        }),
        pulse: Some(PulseBlock {
            xi: Some(0.8),
            // Each of the two echo halves contributes pi/2.
            omega_tau: Some(linear_trap_omega_tau(PI / 2.0, 0.8)),
            ..Default::default()
        }),
        sequence: Some(SequenceBlock { kind: SequenceKind::SpinEcho, with_pi_pulses: false }),
        ensemble: Some(EnsembleBlock { temperature: DOPPLER, samples: 200, seed: 42 }),
        laser: Some(laser(LaserKind::TravellingWave, 4e-6, 10e-3)),
        design: Some(DesignBlock {
            target_phase: PI / 2.0,
            model: DesignModelChoice::Both,
            free: FreeVariable::Tau,
            min_omega_tau: 5.0,
        }),
        ..Default::default()
    }
}

/// Three ions, nearest-neighbour angle 4 pi from one simultaneous push.
fn toffoli() -> RunConfig {
    let eps = 1e-4;
    let omega_tau = 20.0;
    let xi = (4.0 * PI / analytic_vartheta_general(eps, omega_tau, 1.0)).sqrt();
    RunConfig {
        species: calcium(),
        trap: Some(TrapBlock {
            n_ions: 3,
            omega: MHZ,
            mode: TrapMode::SeparateMicrotraps,
            d0: None,
            epsilon: Some(eps),
            d_over_a: Some(1000.0 * xi),
        }),
        pulse: Some(PulseBlock { xi: Some(xi), omega_tau: Some(omega_tau), ..Default::default() }),
        sequence: Some(SequenceBlock { kind: SequenceKind::Toffoli, with_pi_pulses: false }),
        ..Default::default()
    }
}
