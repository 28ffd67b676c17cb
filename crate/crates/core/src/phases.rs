//! Branch phase tables, overall gate phases and the closed-form phase laws.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    integrate_branch_over, pulse_window, Branch, Chain, ForcePulse, InitialConditions,
    IntegratorOptions, PulseVariant, Trajectory,
};
use crate::error::{require_positive, Error, Result};
use crate::roots::brent;

/// Additive decomposition of one branch phase `Theta = -(1/hbar) int H dt` (rad).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseBreakdown {
    pub kinetic: f64,
    /// Trap energy relative to the static offset, including the term linear
    /// in the displacements.
    pub trap_potential: f64,
    /// `+int F u dt`
    pub force_term: f64,
    pub light_shift_term: f64,
    /// Coulomb phase with the static baseline `-kappa T / d` removed.
    pub coulomb: f64,
    /// Static energy of the chain times the window, branch independent.
    pub global_constant: f64,
}

impl PhaseBreakdown {
    pub fn total(&self) -> f64 {
        self.kinetic
            + self.trap_potential
            + self.force_term
            + self.light_shift_term
            + self.coulomb
            + self.global_constant
    }

    /// Coulomb plus light-shift part.
    pub fn interaction(&self) -> f64 {
        self.coulomb + self.light_shift_term
    }

    fn from_trajectory(t: &Trajectory) -> (PhaseBreakdown, f64) {
        let i = &t.integrals;
        let duration = t.window.1 - t.window.0;
        let b = PhaseBreakdown {
            kinetic: -i.kinetic,
            trap_potential: -(i.trap_harmonic + i.linear),
            force_term: -i.force,
            light_shift_term: -i.light_shift,
            coulomb: -(i.coulomb_remainder - i.linear),
            global_constant: -t.static_energy * duration,
        };
        // The linear terms cancel exactly, so the total is formed without them.
        let total = -(i.kinetic + i.trap_harmonic + i.coulomb_remainder + i.force + i.light_shift)
            - t.static_energy * duration;
        (b, total)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TableMetadata {
    pub window: (f64, f64),
    pub epsilon: f64,
    pub d_over_a: f64,
    pub kappa: f64,
    /// `-sum kappa / d_ij` times the window; already inside `global_constant`.
    pub coulomb_baseline: f64,
    pub variant: PulseVariant,
    pub light_shift_zeroed: bool,
    pub pulses: Vec<ForcePulse>,
    pub sample: Option<u64>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseTable {
    pub n_qubits: usize,
    /// Unwrapped phases indexed by branch (qubit 0 is the most significant bit).
    pub phases: Vec<f64>,
    pub breakdown: Vec<PhaseBreakdown>,
    pub metadata: TableMetadata,
}

impl PhaseTable {
    /// Table with given phases; each phase is booked under `coulomb`.
    pub fn from_phases(n_qubits: usize, phases: Vec<f64>) -> Result<PhaseTable> {
        if n_qubits == 0 || n_qubits > 4 {
            return Err(Error::Domain(format!("n_qubits must lie in 1..=4, got {n_qubits}")));
        }
        if phases.len() != 1 << n_qubits {
            return Err(Error::Dimension { expected: 1 << n_qubits, got: phases.len() });
        }
        if let Some(bad) = phases.iter().find(|p| !p.is_finite()) {
            return Err(Error::Input(format!("non-finite phase {bad}")));
        }
        let breakdown = phases
            .iter()
            .map(|&p| PhaseBreakdown { coulomb: p, ..Default::default() })
            .collect();
        Ok(PhaseTable { n_qubits, phases, breakdown, metadata: TableMetadata::default() })
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    /// Table of the Coulomb plus light-shift entries only.
    pub fn interaction_table(&self) -> PhaseTable {
        let breakdown: Vec<PhaseBreakdown> = self
            .breakdown
            .iter()
            .map(|b| PhaseBreakdown {
                coulomb: b.coulomb,
                light_shift_term: b.light_shift_term,
                ..Default::default()
            })
            .collect();
        PhaseTable {
            n_qubits: self.n_qubits,
            phases: breakdown.iter().map(|b| b.interaction()).collect(),
            breakdown,
            metadata: self.metadata.clone(),
        }
    }

    /// Phases with the branch-independent `global_constant` removed.
    pub fn dynamic_phases(&self) -> Vec<f64> {
        self.phases
            .iter()
            .zip(&self.breakdown)
            .map(|(p, b)| p - b.global_constant)
            .collect()
    }

    /// Full Coulomb phase `-(1/hbar) int ell/|x_j - x_i| dt` for branch `k`.
    pub fn phi(&self, k: usize) -> f64 {
        self.breakdown[k].coulomb + self.metadata.coulomb_baseline
    }

    /// Largest `|sum(breakdown) - phase|` over the branches.
    pub fn breakdown_mismatch(&self) -> f64 {
        self.phases
            .iter()
            .zip(&self.breakdown)
            .map(|(p, b)| (b.total() - p).abs())
            .fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        if self.phases.len() != 1 << self.n_qubits {
            return Err(Error::Dimension { expected: 1 << self.n_qubits, got: self.phases.len() });
        }
        if self.breakdown.len() != self.phases.len() {
            return Err(Error::Dimension { expected: self.phases.len(), got: self.breakdown.len() });
        }
        if self.phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::Input("phase table holds non-finite entries".into()));
        }
        Ok(())
    }
}

fn variant_of(pulse: &ForcePulse) -> PulseVariant {
    if pulse.detuning < 0.0 {
        PulseVariant::DetuningFlipped
    } else if pulse.direction < 0.0 {
        PulseVariant::SignFlipped
    } else {
        PulseVariant::Normal
    }
}

/// Collect one trajectory per branch into a phase table.
pub fn accumulate_phases(trajectories: &[Trajectory]) -> Result<PhaseTable> {
    let first = trajectories
        .first()
        .ok_or_else(|| Error::Input("no trajectories given".into()))?;
    let n = first.branch.n;
    if trajectories.len() != 1 << n {
        return Err(Error::Input(format!(
            "{} trajectories given for {n} qubits; need {}",
            trajectories.len(),
            1 << n
        )));
    }
    let mut ordered: Vec<Option<&Trajectory>> = vec![None; 1 << n];
    for t in trajectories {
        if t.branch.n != n {
            return Err(Error::Input("trajectories mix different qubit counts".into()));
        }
        if t.window != first.window {
            return Err(Error::Input(format!(
                "branch {} window {:?} differs from {:?}",
                t.branch, t.window, first.window
            )));
        }
        if t.static_energy != first.static_energy {
            return Err(Error::Input(format!(
                "branch {} was integrated for a different chain",
                t.branch
            )));
        }
        if ordered[t.branch.index].replace(t).is_some() {
            return Err(Error::Input(format!("branch {} given twice", t.branch)));
        }
    }
    let mut phases = Vec::with_capacity(1 << n);
    let mut breakdown = Vec::with_capacity(1 << n);
    for t in ordered.into_iter().flatten() {
        let (b, total) = PhaseBreakdown::from_trajectory(t);
        breakdown.push(b);
        phases.push(total);
    }
    Ok(PhaseTable {
        n_qubits: n,
        phases,
        breakdown,
        metadata: TableMetadata { window: first.window, ..Default::default() },
    })
}

/// Integrate every branch and return the phase table with metadata filled in.
pub fn simulate_phase_table(
    chain: &Chain,
    pulses: &[ForcePulse],
    init: &InitialConditions,
    opts: &IntegratorOptions,
) -> Result<PhaseTable> {
    let window = pulse_window(pulses)?;
    let n = chain.n_ions();
    let trajectories = Branch::all(n)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|b| integrate_branch_over(chain, pulses, b, init, window, opts))
        .collect::<Result<Vec<_>>>()?;
    let mut table = accumulate_phases(&trajectories)?;
    let duration = window.1 - window.0;
    let mut baseline = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            baseline -= chain.kappa() / (chain.equilibrium()[j] - chain.equilibrium()[i]);
        }
    }
    table.metadata = TableMetadata {
        window,
        epsilon: chain.epsilon(),
        d_over_a: chain.neighbour_separation(),
        kappa: chain.kappa(),
        coulomb_baseline: baseline * duration,
        variant: variant_of(&pulses[0]),
        light_shift_zeroed: pulses.iter().all(|p| p.light_shift.iter().all(|&s| s == 0.0)),
        pulses: pulses.to_vec(),
        sample: None,
        notes: Vec::new(),
    };
    Ok(table)
}

/// `Theta11 - Theta10 - Theta01 + Theta00`.
pub fn overall_phase_2q(table: &PhaseTable) -> Result<f64> {
    if table.n_qubits != 2 {
        return Err(Error::Dimension { expected: 2, got: table.n_qubits });
    }
    let t = &table.phases;
    Ok(t[3] - t[2] - t[1] + t[0])
}

/// `Theta111 - Theta100 - Theta010 - Theta001 + 2 Theta000`.
pub fn overall_phase_3q(table: &PhaseTable) -> Result<f64> {
    if table.n_qubits != 3 {
        return Err(Error::Dimension { expected: 3, got: table.n_qubits });
    }
    let t = &table.phases;
    Ok(t[7] - t[4] - t[2] - t[1] + 2.0 * t[0])
}

/// Pairwise controlled-phase angle between qubits `a` and `b` with all other
/// qubits in |0>: `Theta(1_a 1_b) - Theta(1_a) - Theta(1_b) + Theta(0)`.
pub fn pair_phase(table: &PhaseTable, a: usize, b: usize) -> Result<f64> {
    let n = table.n_qubits;
    if a >= n || b >= n || a == b {
        return Err(Error::Input(format!("qubit pair ({a}, {b}) invalid for {n} qubits")));
    }
    let ma = 1 << (n - 1 - a);
    let mb = 1 << (n - 1 - b);
    let t = &table.phases;
    Ok(t[ma | mb] - t[ma] - t[mb] + t[0])
}

/// `theta = sqrt(pi/8) eps omega tau xi^2`.
pub fn analytic_theta(eps: f64, omega_tau: f64, xi: f64) -> f64 {
    (std::f64::consts::PI / 8.0).sqrt() * eps * omega_tau * xi * xi
}

/// `theta/(eps+1) [1 - (2+eps)/((1+eps)(omega tau)^2)]`, valid to leading
/// order in `a/d`.
pub fn analytic_vartheta_general(eps: f64, omega_tau: f64, xi: f64) -> f64 {
    let theta = analytic_theta(eps, omega_tau, xi);
    theta / (eps + 1.0) * (1.0 - (2.0 + eps) / ((1.0 + eps) * omega_tau * omega_tau))
}

/// Shared-trap phase, `theta(eps = 2) / 3` (adiabatic limit).
pub fn analytic_vartheta_linear(omega_tau: f64, xi: f64) -> f64 {
    analytic_theta(2.0, omega_tau, xi) / 3.0
}

/// Force ratio `xi_L / xi = sqrt(3 eps / 2)` giving equal phases at equal
/// `omega tau` in a shared trap and in separate traps at small `eps`.
pub fn linear_trap_force_ratio(eps: f64) -> f64 {
    (1.5 * eps).sqrt()
}

/// `omega tau` for a shared-trap phase `target` at force `xi_l` in the
/// adiabatic limit: `3 target / (sqrt(pi/8) 2 xi_l^2)`; for `target = pi/2`
/// this is `3 sqrt(pi) / (sqrt(2) xi_l^2)`.
pub fn linear_trap_omega_tau(target: f64, xi_l: f64) -> f64 {
    3.0 * target / (2.0 * (std::f64::consts::PI / 8.0).sqrt() * xi_l * xi_l)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticPhases {
    pub theta: f64,
    pub vartheta_general: f64,
    pub vartheta_linear: f64,
    /// Linear-term coefficient predicted from the Coulomb term alone,
    /// `-theta / (sqrt 2 (1 + eps))`.
    pub theta1: f64,
    pub theta2: f64,
    /// Three-ion interaction phases
    /// `-theta/2 [(a-b)^2 + (b-c)^2 + (a-c)^2/8]` per branch.
    pub phi3_table: Vec<f64>,
}

impl AnalyticPhases {
    pub fn evaluate(eps: f64, omega_tau: f64, xi: f64) -> AnalyticPhases {
        let theta = analytic_theta(eps, omega_tau, xi);
        let phi3_table = (0..8)
            .map(|k| {
                let (a, b, c) = (((k >> 2) & 1) as f64, ((k >> 1) & 1) as f64, (k & 1) as f64);
                -0.5 * theta * ((a - b).powi(2) + (b - c).powi(2) + (a - c).powi(2) / 8.0)
            })
            .collect();
        AnalyticPhases {
            theta,
            vartheta_general: analytic_vartheta_general(eps, omega_tau, xi),
            vartheta_linear: analytic_vartheta_linear(omega_tau, xi),
            theta1: -theta / (std::f64::consts::SQRT_2 * (1.0 + eps)),
            theta2: -0.5 * theta,
            phi3_table,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaCoefficients {
    /// Normalized linear coefficient: `(Theta10 - Theta01) xi a / (2 d)` using
    /// the part linear in the force.
    pub theta1: f64,
    /// Quadratic coefficient `(Theta01 + Theta10 - 2 Theta00)/2` using the part
    /// quadratic in the force.
    pub theta2: f64,
    /// Raw antisymmetric phase `Theta10 - Theta01` of the first table.
    pub antisymmetric_phase: f64,
    /// Per-branch residual of the two-term model against the first table.
    pub residuals: Vec<f64>,
}

/// Fit `Theta(xi) = L xi + Q xi^2` per branch from two two-qubit tables that
/// differ only in force (magnitude or sign), using their Coulomb plus
/// light-shift entries relative to branch 00.
pub fn extract_theta_coefficients(a: &PhaseTable, b: &PhaseTable) -> Result<ThetaCoefficients> {
    for t in [a, b] {
        if t.n_qubits != 2 {
            return Err(Error::Dimension { expected: 2, got: t.n_qubits });
        }
        if t.metadata.pulses.is_empty() {
            return Err(Error::Input("tables carry no pulse metadata".into()));
        }
    }
    let force = |t: &PhaseTable| {
        let p = &t.metadata.pulses[0];
        p.xi * p.direction * p.detuning
    };
    let (x1, x2) = (force(a), force(b));
    let d = a.metadata.d_over_a;
    require_positive("d/a", d)?;
    let ia = a.interaction_table();
    let ib = b.interaction_table();
    let flat = |t: &PhaseTable| t.phases.iter().all(|&p| p == t.phases[0]);
    if flat(&ia) && flat(&ib) {
        return Ok(ThetaCoefficients {
            theta1: 0.0,
            theta2: 0.0,
            antisymmetric_phase: 0.0,
            residuals: vec![0.0; 4],
        });
    }
    if x1 == x2 || x1 == 0.0 || x2 == 0.0 {
        return Err(Error::Input(format!(
            "forces {x1} and {x2} cannot separate linear and quadratic parts"
        )));
    }
    let det = x1 * x2 * x2 - x2 * x1 * x1;
    let mut lin = [0.0; 4];
    let mut quad = [0.0; 4];
    for k in 0..4 {
        let y1 = ia.phases[k] - ia.phases[0];
        let y2 = ib.phases[k] - ib.phases[0];
        let l = (y1 * x2 * x2 - y2 * x1 * x1) / det;
        let q = (x1 * y2 - x2 * y1) / det;
        lin[k] = l * x1;
        quad[k] = q * x1 * x1;
    }
    let xi = x1.abs();
    let theta1 = (lin[2] - lin[1]) * xi / (2.0 * d);
    let theta2 = 0.5 * (quad[1] + quad[2]);
    let model = |k: usize| {
        let (al, be) = (((k >> 1) & 1) as f64, (k & 1) as f64);
        (al - be) * theta1 * d / xi + (al - be).powi(2) * theta2
    };
    let residuals = (0..4).map(|k| ia.phases[k] - ia.phases[0] - model(k)).collect();
    Ok(ThetaCoefficients {
        theta1,
        theta2,
        antisymmetric_phase: ia.phases[2] - ia.phases[1],
        residuals,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignModel {
    Analytic,
    Simulated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignProblem {
    pub epsilon: f64,
    pub xi: f64,
    pub target_phase: f64,
    pub model: DesignModel,
    /// Neighbour separation used by the simulated model.
    pub d_over_a: f64,
    pub min_omega_tau: f64,
    pub integrator: IntegratorOptions,
}

impl DesignProblem {
    pub fn new(epsilon: f64, xi: f64, target_phase: f64, model: DesignModel) -> DesignProblem {
        DesignProblem {
            epsilon,
            xi,
            target_phase,
            model,
            d_over_a: 1000.0,
            min_omega_tau: 5.0,
            integrator: IntegratorOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateDesign {
    pub omega_tau: f64,
    pub model: DesignModel,
    pub analytic_phase: f64,
    pub simulated_phase: Option<f64>,
}

/// Leading-order inversion of `theta = pi`: `omega tau = target / (sqrt(pi/8) eps xi^2)`.
pub fn leading_order_omega_tau(eps: f64, xi: f64, target: f64) -> f64 {
    target / ((std::f64::consts::PI / 8.0).sqrt() * eps * xi * xi)
}

/// Inverse of `analytic_vartheta_general` in `omega tau`.
pub fn invert_vartheta_general(eps: f64, xi: f64, target: f64) -> f64 {
    let a = (std::f64::consts::PI / 8.0).sqrt() * eps * xi * xi;
    let b = target * (1.0 + eps) / a;
    let c = (2.0 + eps) / (1.0 + eps);
    0.5 * (b + (b * b + 4.0 * c).sqrt())
}

/// Simulated two-ion gate phase for a single pulse at zero temperature.
pub fn simulated_vartheta(
    eps: f64,
    xi: f64,
    omega_tau: f64,
    d_over_a: f64,
    opts: &IntegratorOptions,
) -> Result<f64> {
    let chain = Chain::uniform(2, eps, d_over_a)?;
    let pulse = ForcePulse::new(2, xi, omega_tau);
    let table = simulate_phase_table(&chain, &[pulse], &InitialConditions::Rest, opts)?;
    overall_phase_2q(&table)
}

/// Pulse width giving gate phase `target_phase`; `omega tau >= min_omega_tau`.
pub fn design_gate_time(problem: &DesignProblem) -> Result<GateDesign> {
    let DesignProblem { epsilon, xi, target_phase, .. } = *problem;
    if !(target_phase > 0.0) || !target_phase.is_finite() {
        return Err(Error::Design(format!("target phase must be positive, got {target_phase}")));
    }
    if !(xi > 0.0) || !xi.is_finite() {
        return Err(Error::Design(format!("xi must be positive, got {xi}")));
    }
    if !(epsilon > 0.0 && epsilon <= 2.0) {
        return Err(Error::Design(format!("epsilon must lie in (0, 2], got {epsilon}")));
    }
    let min_x = problem.min_omega_tau;
    let floor = analytic_vartheta_general(epsilon, min_x, xi);
    let x_analytic = invert_vartheta_general(epsilon, xi, target_phase);
    let infeasible = |floor: f64| {
        Error::Design(format!(
            "target {target_phase:.6} rad lies below the phase {floor:.6} rad reached at \
             omega tau = {min_x}; lower xi to about {:.4} or raise the target",
            xi * (target_phase / floor).sqrt()
        ))
    };
    match problem.model {
        DesignModel::Analytic => {
            if x_analytic < min_x {
                return Err(infeasible(floor));
            }
            Ok(GateDesign {
                omega_tau: x_analytic,
                model: DesignModel::Analytic,
                analytic_phase: analytic_vartheta_general(epsilon, x_analytic, xi),
                simulated_phase: None,
            })
        }
        DesignModel::Simulated => {
            let f = |x: f64| {
                simulated_vartheta(epsilon, xi, x, problem.d_over_a, &problem.integrator)
                    .map(|v| v - target_phase)
            };
            let f_lo = f(min_x)?;
            if f_lo > 0.0 {
                return Err(infeasible(f_lo + target_phase));
            }
            let mut hi = 1.25 * x_analytic.max(min_x) + 1.0;
            let mut f_hi = f(hi)?;
            let mut tries = 0;
            while f_hi < 0.0 {
                hi *= 2.0;
                f_hi = f(hi)?;
                tries += 1;
                if tries > 8 {
                    return Err(Error::Design("simulated phase never reaches the target".into()));
                }
            }
            let mut failure = None;
            let x = brent(
                |x| match f(x) {
                    Ok(v) => v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        f64::NAN
                    }
                },
                min_x,
                hi,
                1e-7 * hi,
                100,
            );
            if let Some(e) = failure {
                return Err(e);
            }
            let x = x?;
            Ok(GateDesign {
                omega_tau: x,
                model: DesignModel::Simulated,
                analytic_phase: analytic_vartheta_general(epsilon, x, xi),
                simulated_phase: Some(f(x)? + target_phase),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_reference_value() {
        // sqrt(pi/8) * 0.1 * 50 * 0.25
        let oracle = 0.626_657_068_657_750_1 * 0.1 * 50.0 * 0.25;
        assert!((analytic_theta(0.1, 50.0, 0.5) - oracle).abs() < 1e-15);
        // Quoted as 0.7834 to four places; the exact value is 0.78332.
        assert!((analytic_theta(0.1, 50.0, 0.5) - 0.7834).abs() < 1e-4);
    }

    #[test]
    fn general_law_limits() {
        let t = analytic_theta(2.0, 1e8, 0.3);
        assert!((analytic_vartheta_general(2.0, 1e8, 0.3) / (t / 3.0) - 1.0).abs() < 1e-12);
        let ratio = analytic_vartheta_general(2.0, 5.0, 1.0) / (analytic_theta(2.0, 5.0, 1.0) / 3.0);
        assert!((ratio - (1.0 - 4.0 / 75.0)).abs() < 1e-15);
        assert!((ratio - 0.94667).abs() < 1e-5);
        assert_eq!(analytic_vartheta_linear(7.0, 0.4), analytic_theta(2.0, 7.0, 0.4) / 3.0);
    }

    #[test]
    fn overall_phase_definitions() {
        let t = PhaseTable::from_phases(2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(overall_phase_2q(&t).unwrap(), 0.0);
        let t = PhaseTable::from_phases(2, vec![0.0, 0.0, 0.0, std::f64::consts::PI]).unwrap();
        assert_eq!(overall_phase_2q(&t).unwrap(), std::f64::consts::PI);
        let mut p = vec![0.0; 8];
        p[7] = std::f64::consts::PI;
        let t = PhaseTable::from_phases(3, p).unwrap();
        assert_eq!(overall_phase_3q(&t).unwrap(), std::f64::consts::PI);
    }

    #[test]
    fn three_qubit_form_gives_seventeen_eighths() {
        let theta = 0.37;
        let a = AnalyticPhases::evaluate(0.01, 20.0, 1.0);
        let scale = theta / a.theta;
        let p: Vec<f64> = a.phi3_table.iter().map(|v| v * scale).collect();
        let t = PhaseTable::from_phases(3, p).unwrap();
        let v = overall_phase_3q(&t).unwrap();
        assert!((v - 17.0 * theta / 8.0).abs() < 1e-14);
    }

    #[test]
    fn design_inversion() {
        let d = design_gate_time(&DesignProblem::new(2.0, 0.5, 1.0, DesignModel::Analytic)).unwrap();
        assert!((analytic_vartheta_general(2.0, d.omega_tau, 0.5) - 1.0).abs() < 1e-12);
        let eps = 1e-6;
        let x = invert_vartheta_general(eps, 1.0, std::f64::consts::PI);
        let lead = leading_order_omega_tau(eps, 1.0, std::f64::consts::PI);
        assert!((x / lead - 1.0).abs() < 1e-5);
        assert!(design_gate_time(&DesignProblem::new(2.0, 0.5, 0.0, DesignModel::Analytic)).is_err());
        let err = design_gate_time(&DesignProblem::new(2.0, 3.0, 0.01, DesignModel::Analytic));
        assert!(matches!(err, Err(Error::Design(_))));
    }

    #[test]
    fn linear_trap_relations() {
        // Echoed half gate at eps = 2: target pi/2.
        let xi_l = 0.8;
        let x = linear_trap_omega_tau(std::f64::consts::FRAC_PI_2, xi_l);
        let expected = 3.0 * std::f64::consts::PI.sqrt() / (std::f64::consts::SQRT_2 * xi_l * xi_l);
        assert!((x / expected - 1.0).abs() < 1e-14);
        // Equal adiabatic phases when xi_L = xi sqrt(3 eps / 2).
        let (eps, xi) = (0.01, 2.0);
        let xl = xi * linear_trap_force_ratio(eps);
        assert!((analytic_vartheta_linear(9.0, xl) / analytic_theta(eps, 9.0, xi) - 1.0).abs() < 1e-12);
    }
}
