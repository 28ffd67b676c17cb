//! Physical constants, ion species, trap descriptions and the natural unit system.
//!
//! Natural units: length `a = sqrt(hbar / (m omega))`, time `1/omega`, energy
//! `hbar omega`, mass `m`. Momentum is then measured in `hbar / a` and force in
//! `hbar omega / a`.

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};

/// CODATA 2018 exact and recommended values (SI).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Reduced Planck constant (J s).
    pub hbar: f64,
    /// Vacuum permittivity (F/m).
    pub epsilon0: f64,
    /// Speed of light (m/s).
    pub c: f64,
    /// Boltzmann constant (J/K).
    pub k_b: f64,
    /// Elementary charge (C).
    pub elementary_charge: f64,
    /// Unified atomic mass unit (kg).
    pub atomic_mass_unit: f64,
    /// Electron mass (kg).
    pub electron_mass: f64,
}

impl PhysicalConstants {
    pub const CODATA2018: PhysicalConstants = PhysicalConstants {
        hbar: 1.054_571_817e-34,
        epsilon0: 8.854_187_812_8e-12,
        c: 299_792_458.0,
        k_b: 1.380_649e-23,
        elementary_charge: 1.602_176_634e-19,
        atomic_mass_unit: 1.660_539_066_60e-27,
        electron_mass: 9.109_383_701_5e-31,
    };

    pub fn validate(&self) -> Result<()> {
        require_positive("hbar", self.hbar)?;
        require_positive("epsilon0", self.epsilon0)?;
        require_positive("c", self.c)?;
        require_positive("k_b", self.k_b)?;
        require_positive("elementary_charge", self.elementary_charge)?;
        require_positive("atomic_mass_unit", self.atomic_mass_unit)?;
        require_positive("electron_mass", self.electron_mass)?;
        Ok(())
    }

    /// `q^2 / (4 pi epsilon0)` for an ion of charge `q` (J m).
    pub fn coulomb_ell(&self, charge: f64) -> f64 {
        charge * charge / (4.0 * std::f64::consts::PI * self.epsilon0)
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA2018
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IonSpecies {
    pub label: String,
    /// kg
    pub mass: f64,
    /// C
    pub charge: f64,
    /// Cooling transition wavelength (m).
    pub transition_wavelength: f64,
    /// Doppler-limit temperature (K), if tabulated.
    pub doppler_temperature: Option<f64>,
}

impl IonSpecies {
    /// Singly charged 40Ca: isotope mass 39.962590863 u minus one electron,
    /// 397 nm S-P line, 538 uK Doppler limit.
    pub fn calcium40() -> Self {
        let k = PhysicalConstants::CODATA2018;
        IonSpecies {
            label: "40Ca+".to_string(),
            mass: 39.962_590_863 * k.atomic_mass_unit - k.electron_mass,
            charge: k.elementary_charge,
            transition_wavelength: 397e-9,
            doppler_temperature: Some(538e-6),
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "ca40" | "40ca" | "40ca+" | "ca40+" => Ok(Self::calcium40()),
            other => Err(Error::Input(format!("unknown species preset '{other}'"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("ion mass", self.mass)?;
        require_positive("ion charge magnitude", self.charge.abs())?;
        require_positive("transition wavelength", self.transition_wavelength)?;
        if let Some(t) = self.doppler_temperature {
            require_positive("Doppler temperature", t)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrapMode {
    /// One harmonic well per ion, wells a distance `d0` apart.
    SeparateMicrotraps,
    /// All ions share a single harmonic well.
    SharedLinearTrap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapArray {
    pub n_ions: usize,
    /// Secular angular frequency (rad/s).
    pub omega: f64,
    /// Trap-centre separation (m); ignored for a shared trap.
    pub d0: f64,
    pub mode: TrapMode,
}

impl TrapArray {
    pub fn validate(&self) -> Result<()> {
        if !(1..=4).contains(&self.n_ions) {
            return Err(Error::Domain(format!(
                "n_ions must lie in 1..=4, got {}",
                self.n_ions
            )));
        }
        require_positive("trap frequency omega", self.omega)?;
        if self.mode == TrapMode::SeparateMicrotraps && self.n_ions > 1 {
            require_positive("trap separation d0", self.d0)?;
        }
        Ok(())
    }
}

/// Conversion factors between SI and natural units for one species and trap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitScales {
    /// Ground-state length `a` (m).
    pub a: f64,
    /// `1/omega` (s).
    pub time_unit: f64,
    /// `hbar omega` (J).
    pub energy_unit: f64,
    /// `q^2 / (4 pi epsilon0)` (J m).
    pub coulomb_ell: f64,
    pub omega: f64,
    pub mass: f64,
    pub hbar: f64,
    pub k_b: f64,
}

impl UnitScales {
    /// Force unit `hbar omega / a` (N).
    pub fn force_unit(&self) -> f64 {
        self.energy_unit / self.a
    }

    /// Momentum unit `hbar / a` (kg m/s).
    pub fn momentum_unit(&self) -> f64 {
        self.hbar / self.a
    }

    /// Dimensionless Coulomb strength `kappa = ell / (a hbar omega)`.
    pub fn kappa(&self) -> f64 {
        self.coulomb_ell / (self.a * self.energy_unit)
    }

    /// `k_B T / (hbar omega)`.
    pub fn thermal_energy(&self, temperature: f64) -> f64 {
        self.k_b * temperature / self.energy_unit
    }

    pub fn length_to_si(&self, x: f64) -> f64 {
        x * self.a
    }
    pub fn length_from_si(&self, x: f64) -> f64 {
        x / self.a
    }
    pub fn time_to_si(&self, t: f64) -> f64 {
        t * self.time_unit
    }
    pub fn time_from_si(&self, t: f64) -> f64 {
        t / self.time_unit
    }
    pub fn energy_to_si(&self, e: f64) -> f64 {
        e * self.energy_unit
    }
    pub fn energy_from_si(&self, e: f64) -> f64 {
        e / self.energy_unit
    }
    pub fn force_to_si(&self, f: f64) -> f64 {
        f * self.force_unit()
    }
    pub fn force_from_si(&self, f: f64) -> f64 {
        f / self.force_unit()
    }
    pub fn momentum_to_si(&self, p: f64) -> f64 {
        p * self.momentum_unit()
    }
    pub fn momentum_from_si(&self, p: f64) -> f64 {
        p / self.momentum_unit()
    }
}

/// Natural units for `species` in `trap`, using CODATA 2018 constants.
pub fn derive_scales(species: &IonSpecies, trap: &TrapArray) -> Result<UnitScales> {
    derive_scales_with(&PhysicalConstants::CODATA2018, species, trap)
}

pub fn derive_scales_with(
    constants: &PhysicalConstants,
    species: &IonSpecies,
    trap: &TrapArray,
) -> Result<UnitScales> {
    constants.validate()?;
    species.validate()?;
    trap.validate()?;
    let omega = trap.omega;
    Ok(UnitScales {
        a: (constants.hbar / (species.mass * omega)).sqrt(),
        time_unit: 1.0 / omega,
        energy_unit: constants.hbar * omega,
        coulomb_ell: constants.coulomb_ell(species.charge),
        omega,
        mass: species.mass,
        hbar: constants.hbar,
        k_b: constants.k_b,
    })
}
