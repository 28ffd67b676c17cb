//! Worst-case gate fidelity from thermal phase samples, Monte Carlo sampling of
//! the thermal ensemble, and the closed-form infidelity and scattering budget.

use std::f64::consts::{PI, SQRT_2, TAU};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{Chain, ForcePulse, InitialConditions, IntegratorOptions, ModeExcitation};
use crate::error::{require_positive, Error, Result};
use crate::gates::phase_distance;
use crate::phases::{simulate_phase_table, PhaseTable};
use crate::units::{IonSpecies, PhysicalConstants, UnitScales};

/// Sum with pairwise splitting; the result does not depend on how the input
/// was produced, only on its order.
pub fn pairwise_sum(x: &[f64]) -> f64 {
    if x.len() <= 8 {
        return x.iter().sum();
    }
    let (a, b) = x.split_at(x.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

fn mean(x: &[f64]) -> f64 {
    pairwise_sum(x) / x.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalEnsemble {
    /// `k_B T / hbar omega`.
    pub kt: f64,
    pub n_samples: usize,
    pub seed: u64,
    /// Per-mode `k_B T / hbar omega`, overriding `kt`. For two ions the order
    /// is (centre of mass, relative); otherwise one entry per ion.
    pub mode_kt: Option<Vec<f64>>,
}

impl ThermalEnsemble {
    pub fn new(kt: f64, n_samples: usize, seed: u64) -> ThermalEnsemble {
        ThermalEnsemble { kt, n_samples, seed, mode_kt: None }
    }

    pub fn from_kelvin(temperature: f64, scales: &UnitScales, n_samples: usize, seed: u64) -> ThermalEnsemble {
        ThermalEnsemble::new(scales.thermal_energy(temperature), n_samples, seed)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kt >= 0.0) || !self.kt.is_finite() {
            return Err(Error::Domain(format!("temperature must be >= 0, got kT = {}", self.kt)));
        }
        if self.n_samples == 0 {
            return Err(Error::Input("ensemble needs at least one sample".into()));
        }
        if let Some(m) = &self.mode_kt {
            if m.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
                return Err(Error::Domain("mode temperatures must be >= 0".into()));
            }
        }
        Ok(())
    }

    fn mode_kt(&self, n_modes: usize) -> Result<Vec<f64>> {
        match &self.mode_kt {
            Some(m) if m.len() != n_modes => Err(Error::Dimension { expected: n_modes, got: m.len() }),
            Some(m) => Ok(m.clone()),
            None => Ok(vec![self.kt; n_modes]),
        }
    }

    /// Reproducible initial conditions of sample `index`: exponential mode
    /// energies with mean `k_B T` and uniform phases.
    pub fn draw(&self, n_ions: usize, index: u64) -> Result<InitialConditions> {
        let kts = self.mode_kt(n_ions)?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        let mut modes = Vec::with_capacity(n_ions);
        for kt in kts {
            let e: f64 = rng.sample(Exp1);
            let mut phase = rng.random::<f64>() * TAU;
            if phase >= TAU {
                phase = 0.0;
            }
            modes.push(ModeExcitation { energy: e * kt, phase });
        }
        Ok(if n_ions == 2 {
            InitialConditions::TwoIonModes { com: modes[0], relative: modes[1] }
        } else {
            InitialConditions::LocalModes(modes)
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSampleSet {
    pub ensemble: ThermalEnsemble,
    pub tables: Vec<PhaseTable>,
    /// Ensemble mean phase per branch.
    pub mean: Vec<f64>,
    /// Sample phase minus ensemble mean, per sample and branch.
    pub deltas: Vec<Vec<f64>>,
    /// Phases with the ions initially at rest, when computed.
    pub reference: Option<Vec<f64>>,
}

impl PhaseSampleSet {
    pub fn from_tables(ensemble: ThermalEnsemble, tables: Vec<PhaseTable>) -> Result<PhaseSampleSet> {
        let first = tables.first().ok_or_else(|| Error::Input("empty sample set".into()))?;
        let nb = first.len();
        if let Some(t) = tables.iter().find(|t| t.len() != nb) {
            return Err(Error::Dimension { expected: nb, got: t.len() });
        }
        // Offsets from the first sample are exact for nearby values, which keeps
        // the mean of the deltas at rounding level of the deltas themselves.
        let origin = first.phases.clone();
        let offsets: Vec<Vec<f64>> = tables
            .iter()
            .map(|t| t.phases.iter().zip(&origin).map(|(p, o)| p - o).collect())
            .collect();
        let mut mean_off = vec![0.0; nb];
        for (k, m) in mean_off.iter_mut().enumerate() {
            let col: Vec<f64> = offsets.iter().map(|o| o[k]).collect();
            *m = mean(&col);
        }
        let deltas = offsets
            .iter()
            .map(|o| o.iter().zip(&mean_off).map(|(x, m)| x - m).collect())
            .collect();
        let mean = origin.iter().zip(&mean_off).map(|(o, m)| o + m).collect();
        Ok(PhaseSampleSet { ensemble, tables, mean, deltas, reference: None })
    }

    pub fn n_branches(&self) -> usize {
        self.mean.len()
    }

    /// `dTheta_k + dTheta_{complement k}` per sample.
    pub fn echoed_deltas(&self) -> Vec<Vec<f64>> {
        self.deltas.iter().map(|d| echo_deltas(d)).collect()
    }

    /// Sample variance of each branch delta.
    pub fn variances(&self) -> Vec<f64> {
        (0..self.n_branches())
            .map(|k| {
                let sq: Vec<f64> = self.deltas.iter().map(|d| d[k] * d[k]).collect();
                mean(&sq)
            })
            .collect()
    }

    /// One row per sample, one column per branch delta.
    pub fn to_csv(&self, header: &[String]) -> String {
        let mut s = String::new();
        for h in header {
            s.push_str("# ");
            s.push_str(h);
            s.push('\n');
        }
        let n = (self.n_branches() as f64).log2().round() as usize;
        s.push_str("sample");
        for k in 0..self.n_branches() {
            s.push_str(&format!(",delta_{k:0n$b}"));
        }
        s.push('\n');
        for (i, d) in self.deltas.iter().enumerate() {
            s.push_str(&i.to_string());
            for v in d {
                s.push_str(&format!(",{v:e}"));
            }
            s.push('\n');
        }
        s
    }
}

fn echo_deltas(d: &[f64]) -> Vec<f64> {
    let mask = d.len() - 1;
    (0..d.len()).map(|k| d[k] + d[k ^ mask]).collect()
}

/// Run every branch for each thermal sample. Samples are independent and are
/// processed in parallel; results do not depend on the number of workers.
pub fn monte_carlo_phase_samples(
    chain: &Chain,
    pulses: &[ForcePulse],
    ensemble: &ThermalEnsemble,
    opts: &IntegratorOptions,
) -> Result<PhaseSampleSet> {
    ensemble.validate()?;
    let n = chain.n_ions();
    let tables = (0..ensemble.n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let run = || -> Result<PhaseTable> {
                let init = ensemble.draw(n, i)?;
                let mut t = simulate_phase_table(chain, pulses, &init, opts)?;
                t.metadata.sample = Some(i);
                Ok(t)
            };
            run().map_err(|e| Error::Sample { index: i, source: Box::new(e) })
        })
        .collect::<Result<Vec<_>>>()?;
    let reference = simulate_phase_table(chain, pulses, &InitialConditions::Rest, opts)?;
    let mut set = PhaseSampleSet::from_tables(ensemble.clone(), tables)?;
    set.reference = Some(reference.phases);
    Ok(set)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MinimizationOrder {
    /// Minimise the thermally averaged overlap over the input state.
    #[default]
    StateFirst,
    /// Average the per-sample minimum.
    SampleFirst,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstCaseFidelity {
    pub fidelity: f64,
    /// `1 - fidelity`, computed without cancellation.
    pub infidelity: f64,
    /// Minimising populations `|c_k|^2` (state-first order only).
    pub weights: Option<Vec<f64>>,
    pub order: MinimizationOrder,
    pub echo: bool,
}

pub fn worst_case_fidelity(
    samples: &PhaseSampleSet,
    echo: bool,
    order: MinimizationOrder,
) -> Result<WorstCaseFidelity> {
    worst_case_fidelity_from_deltas(&samples.deltas, echo, order)
}

/// As `worst_case_fidelity` for raw per-sample phase deviations.
pub fn worst_case_fidelity_from_deltas(
    deltas: &[Vec<f64>],
    echo: bool,
    order: MinimizationOrder,
) -> Result<WorstCaseFidelity> {
    let first = deltas.first().ok_or_else(|| Error::Input("empty sample set".into()))?;
    let nb = first.len();
    if nb == 0 || !nb.is_power_of_two() {
        return Err(Error::Input(format!("{nb} branches is not a power of two")));
    }
    if let Some(d) = deltas.iter().find(|d| d.len() != nb) {
        return Err(Error::Dimension { expected: nb, got: d.len() });
    }
    let phases: Vec<Vec<f64>> =
        if echo { deltas.iter().map(|d| echo_deltas(d)).collect() } else { deltas.to_vec() };
    match order {
        MinimizationOrder::StateFirst => {
            let m = dephasing_matrix(&phases);
            let (inf, p) = max_simplex_quadratic(&m);
            Ok(WorstCaseFidelity {
                fidelity: 1.0 - inf,
                infidelity: inf,
                weights: Some(p),
                order,
                echo,
            })
        }
        MinimizationOrder::SampleFirst => {
            let zero = vec![0.0; nb];
            let per: Vec<f64> = phases
                .iter()
                .map(|d| {
                    // Squared distance from the origin to the hull of the phasors.
                    let half_arc = phase_distance(d, &zero);
                    if half_arc >= 0.5 * PI {
                        1.0
                    } else {
                        half_arc.sin().powi(2)
                    }
                })
                .collect();
            let inf = mean(&per);
            Ok(WorstCaseFidelity { fidelity: 1.0 - inf, infidelity: inf, weights: None, order, echo })
        }
    }
}

/// `D_kl = < 2 sin^2((d_k - d_l)/2) > = 1 - < cos(d_k - d_l) >`.
pub fn dephasing_matrix(phases: &[Vec<f64>]) -> DMatrix<f64> {
    let nb = phases[0].len();
    let mut m = DMatrix::zeros(nb, nb);
    for k in 0..nb {
        for l in k + 1..nb {
            let v: Vec<f64> = phases
                .iter()
                .map(|d| 2.0 * (0.5 * (d[k] - d[l])).sin().powi(2))
                .collect();
            let x = mean(&v);
            m[(k, l)] = x;
            m[(l, k)] = x;
        }
    }
    m
}

/// Maximum of `p^T D p` over the probability simplex for a dephasing matrix
/// `D` (so that `1 - D` is positive semidefinite and the problem is concave).
///
/// Every support set is tried: the stationary point on each face solves the
/// bordered system `[D 1; 1^T 0] [p; -mu] = [0; 1]`, and the best admissible
/// candidate is returned with its weights.
pub fn max_simplex_quadratic(d: &DMatrix<f64>) -> (f64, Vec<f64>) {
    let n = d.nrows();
    let objective = |p: &[f64]| {
        let mut s = 0.0;
        for k in 0..n {
            for l in 0..n {
                s += p[k] * d[(k, l)] * p[l];
            }
        }
        s
    };
    let mut best_p = vec![0.0; n];
    best_p[0] = 1.0;
    let mut best = objective(&best_p);
    for mask in 1usize..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let s = support.len();
        if s < 2 {
            continue;
        }
        let mut a = DMatrix::zeros(s + 1, s + 1);
        let mut b = DVector::zeros(s + 1);
        for (i, &k) in support.iter().enumerate() {
            for (j, &l) in support.iter().enumerate() {
                a[(i, j)] = d[(k, l)];
            }
            a[(i, s)] = 1.0;
            a[(s, i)] = 1.0;
        }
        b[s] = 1.0;
        let sol = match a.clone().lu().solve(&b) {
            Some(x) if x.iter().all(|v| v.is_finite()) => x,
            _ => match a.svd(true, true).solve(&b, 1e-14) {
                Ok(x) => x,
                Err(_) => continue,
            },
        };
        if sol.iter().take(s).any(|&v| v < -1e-12) {
            continue;
        }
        let mut p = vec![0.0; n];
        for (i, &k) in support.iter().enumerate() {
            p[k] = sol[i].max(0.0);
        }
        let total: f64 = p.iter().sum();
        if !(total > 0.0) {
            continue;
        }
        p.iter_mut().for_each(|v| *v /= total);
        let val = objective(&p);
        if val > best {
            best = val;
            best_p = p;
        }
    }
    (best, best_p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaserConfiguration {
    TravellingWave,
    StandingWave,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaserGeometry {
    pub configuration: LaserConfiguration,
    /// Beam waist `w` (m).
    pub waist: f64,
    /// Ion offset `x0` in the beam profile (m).
    pub offset: f64,
    /// Laser wavelength (m).
    pub wavelength: f64,
    /// Angle `alpha` between the two standing-wave beams (rad).
    pub beam_angle: f64,
    /// Ion position `z0` in the standing wave (m).
    pub standing_wave_position: f64,
    /// Laser power (W).
    pub power: f64,
}

impl LaserGeometry {
    /// Travelling wave with the ions at `x0 = w/2`.
    pub fn travelling_wave(waist: f64, power: f64, wavelength: f64) -> LaserGeometry {
        LaserGeometry {
            configuration: LaserConfiguration::TravellingWave,
            waist,
            offset: 0.5 * waist,
            wavelength,
            beam_angle: 0.5 * PI,
            standing_wave_position: 0.0,
            power,
        }
    }

    /// Standing wave at angle `alpha` with `k_alpha z0 = pi/4`.
    pub fn standing_wave(waist: f64, power: f64, wavelength: f64, alpha: f64) -> LaserGeometry {
        let mut g = LaserGeometry {
            configuration: LaserConfiguration::StandingWave,
            waist,
            offset: 0.0,
            wavelength,
            beam_angle: alpha,
            standing_wave_position: 0.0,
            power,
        };
        g.standing_wave_position = 0.25 * PI / g.k_alpha();
        g
    }

    /// `k_alpha = (4 pi / lambda) sin(alpha/2)`.
    pub fn k_alpha(&self) -> f64 {
        4.0 * PI / self.wavelength * (0.5 * self.beam_angle).sin()
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("beam waist", self.waist)?;
        require_positive("wavelength", self.wavelength)?;
        require_positive("laser power", self.power)?;
        if !(self.beam_angle > 0.0 && self.beam_angle <= PI) {
            return Err(Error::Domain(format!(
                "beam angle must lie in (0, pi], got {}",
                self.beam_angle
            )));
        }
        if !self.offset.is_finite() || !self.standing_wave_position.is_finite() {
            return Err(Error::Domain("ion position must be finite".into()));
        }
        Ok(())
    }
}

/// `Q(y) = 12 y^4 - 64 y^2 + 89 - 34/y^2 + 1/y^4`.
pub fn q_polynomial(y: f64) -> f64 {
    let y2 = y * y;
    12.0 * y2 * y2 - 64.0 * y2 + 89.0 - 34.0 / y2 + 1.0 / (y2 * y2)
}

fn thermal_ratio(constants: &PhysicalConstants, omega: f64, temperature: f64) -> f64 {
    constants.k_b * temperature / (constants.hbar * omega)
}

fn oscillator_length(constants: &PhysicalConstants, mass: f64, omega: f64) -> f64 {
    (constants.hbar / (mass * omega)).sqrt()
}

/// Infidelity from thermal motion across the force profile, for a spin-echo
/// gate made of two halves of phase `pi/2` each.
pub fn spatial_infidelity(geom: &LaserGeometry, species: &IonSpecies, omega: f64, temperature: f64) -> Result<f64> {
    geom.validate()?;
    require_positive("trap frequency", omega)?;
    if !(temperature >= 0.0) || !temperature.is_finite() {
        return Err(Error::Domain(format!("temperature must be >= 0, got {temperature}")));
    }
    let k = PhysicalConstants::CODATA2018;
    let kt = thermal_ratio(&k, omega, temperature);
    let a = oscillator_length(&k, species.mass, omega);
    match geom.configuration {
        LaserConfiguration::TravellingWave => {
            if geom.offset == 0.0 {
                return Err(Error::Domain("travelling-wave formula needs x0 != 0".into()));
            }
            let y = 2.0 * geom.offset / geom.waist;
            let aw2 = (a / geom.waist).powi(2);
            let t = 3.0 * PI * kt;
            let first = PI / 3.0 * t * aw2 * (y - 1.0 / y).powi(2);
            let second = 2.0 / 9.0 * t * t * aw2 * aw2 * q_polynomial(y);
            Ok(first + second)
        }
        LaserConfiguration::StandingWave => {
            let ka = geom.k_alpha() * a;
            let x = -(-16.0 * ka * ka * kt).exp_m1();
            Ok(PI * PI / 128.0 * x * x)
        }
    }
}

/// `C' = (pi^4 c / 2 sqrt 2) m / lambda^3`.
pub fn c_prime(species: &IonSpecies, wavelength: f64) -> f64 {
    let c = PhysicalConstants::CODATA2018.c;
    PI.powi(4) * c / (2.0 * SQRT_2) * species.mass / wavelength.powi(3)
}

/// `C'' = (pi^2 c / 4 sqrt 2) (m / lambda) / sin^2(alpha/2)`.
pub fn c_double_prime(species: &IonSpecies, wavelength: f64, alpha: f64) -> f64 {
    let c = PhysicalConstants::CODATA2018.c;
    PI * PI * c / (4.0 * SQRT_2) * species.mass / wavelength / (0.5 * alpha).sin().powi(2)
}

/// Number of photons scattered during the spin-echo gate.
pub fn photon_scattering(geom: &LaserGeometry, species: &IonSpecies, omega: f64) -> Result<f64> {
    geom.validate()?;
    require_positive("trap frequency", omega)?;
    let w = geom.waist;
    let rate = omega * omega / geom.power;
    match geom.configuration {
        LaserConfiguration::TravellingWave => {
            let x0 = geom.offset;
            if x0 == 0.0 {
                return Err(Error::Domain("travelling-wave scattering needs x0 != 0".into()));
            }
            Ok(c_prime(species, geom.wavelength) * w.powi(6) / (x0 * x0)
                * rate
                * (2.0 * (x0 / w).powi(2)).exp())
        }
        LaserConfiguration::StandingWave => {
            let cz = (geom.k_alpha() * geom.standing_wave_position).cos();
            if cz.abs() < 1e-12 {
                return Err(Error::Domain("ion sits at a node: cos(k_alpha z0) = 0".into()));
            }
            Ok(c_double_prime(species, geom.wavelength, geom.beam_angle) * w * w * rate / (cz * cz))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DynamicRegime {
    SmallEpsilon,
    /// Two ions in one trap with overall phase `vartheta_l` and pulse length `omega_tau`.
    SharedTrap { vartheta_l: f64, omega_tau: f64 },
}

/// `[2 (2 / 3 omega tau)^2 + 1]^2`.
pub fn shared_trap_bracket(omega_tau: f64) -> f64 {
    let x = 2.0 / (3.0 * omega_tau);
    (2.0 * x * x + 1.0).powi(2)
}

/// Infidelity from thermal averaging of the dynamic phases, given
/// `kt = k_B T / hbar omega` and `a/d`.
pub fn appendix_dynamic_infidelity(regime: DynamicRegime, kt: f64, a_over_d: f64) -> f64 {
    let ad4 = a_over_d.powi(4);
    match regime {
        DynamicRegime::SmallEpsilon => (3.0 * PI * kt).powi(2) * ad4,
        DynamicRegime::SharedTrap { vartheta_l, omega_tau } => {
            (vartheta_l * kt / 3.0).powi(2) * ad4 * shared_trap_bracket(omega_tau)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfidelityBreakdown {
    pub p_spatial: f64,
    pub p_dynamic: f64,
    /// `p_spatial + p_dynamic`.
    pub p_thermal: f64,
    pub n_scattered: f64,
    pub p_total: f64,
    /// False when either contribution exceeds 0.1 and the additive form is unreliable.
    pub valid: bool,
}

pub fn total_infidelity(p_spatial: f64, p_dynamic: f64, n_scattered: f64) -> Result<InfidelityBreakdown> {
    for (name, v) in [("spatial infidelity", p_spatial), ("dynamic infidelity", p_dynamic), ("scattered photons", n_scattered)] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::Domain(format!("{name} must be finite and >= 0, got {v}")));
        }
    }
    let p = p_spatial + p_dynamic;
    Ok(InfidelityBreakdown {
        p_spatial,
        p_dynamic,
        p_thermal: p,
        n_scattered,
        p_total: p + n_scattered,
        valid: p <= 0.1 && n_scattered <= 0.1,
    })
}

/// Full closed-form budget for two ions in one trap at trap frequency
/// `omega` (rad/s) and temperature (K).
pub fn shared_trap_budget(
    geom: &LaserGeometry,
    species: &IonSpecies,
    omega: f64,
    temperature: f64,
    vartheta_l: f64,
    omega_tau: f64,
) -> Result<InfidelityBreakdown> {
    let k = PhysicalConstants::CODATA2018;
    let ell = k.coulomb_ell(species.charge);
    let d = (2.0 * ell / (species.mass * omega * omega)).cbrt();
    let a = oscillator_length(&k, species.mass, omega);
    let spatial = spatial_infidelity(geom, species, omega, temperature)?;
    let dynamic = appendix_dynamic_infidelity(
        DynamicRegime::SharedTrap { vartheta_l, omega_tau },
        thermal_ratio(&k, omega, temperature),
        a / d,
    );
    let n = photon_scattering(geom, species, omega)?;
    total_infidelity(spatial, dynamic, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_at_one() {
        assert_eq!(q_polynomial(1.0), 4.0);
    }

    #[test]
    fn bracket_at_five() {
        let b = shared_trap_bracket(5.0);
        assert!((b - 1.0724).abs() < 1e-4);
        assert_eq!(format!("{b:.2}"), "1.07");
    }

    #[test]
    fn total_flags_large_terms() {
        let b = total_infidelity(0.01, 0.0, 0.02).unwrap();
        assert!((b.p_total - 0.03).abs() < 1e-15 && b.valid);
        assert!(!total_infidelity(0.5, 0.0, 0.0).unwrap().valid);
    }

    #[test]
    fn zero_deltas_give_unit_fidelity() {
        let d = vec![vec![0.0; 4]; 3];
        for order in [MinimizationOrder::StateFirst, MinimizationOrder::SampleFirst] {
            let f = worst_case_fidelity_from_deltas(&d, false, order).unwrap();
            assert_eq!(f.fidelity, 1.0);
        }
    }

    #[test]
    fn antipodal_phasors_give_zero() {
        let d = vec![vec![0.0, PI, 0.0, 0.0]; 2];
        let f = worst_case_fidelity_from_deltas(&d, false, MinimizationOrder::StateFirst).unwrap();
        assert!(f.fidelity.abs() < 1e-14);
        let p = f.weights.unwrap();
        assert!((p[1] - 0.5).abs() < 1e-12);
        let g = worst_case_fidelity_from_deltas(&d, false, MinimizationOrder::SampleFirst).unwrap();
        assert!(g.fidelity.abs() < 1e-14);
    }

    #[test]
    fn empty_sample_set_is_rejected() {
        assert!(worst_case_fidelity_from_deltas(&[], false, MinimizationOrder::StateFirst).is_err());
    }

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let x: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&x), 499500.0);
    }
}
