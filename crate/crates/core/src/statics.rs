//! Two-ion equilibrium geometry and the anharmonic relative-coordinate potential.

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::roots::brent;
use crate::units::{derive_scales_with, IonSpecies, PhysicalConstants, TrapArray, TrapMode};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumSolution {
    /// Equilibrium separation (m).
    pub d: f64,
    /// `d - d0` (m). Equals `d` for a shared trap.
    pub delta_d: f64,
    /// `ell / (m omega^2 (d0/3)^3)`; infinite for a shared trap.
    pub eta: f64,
    pub epsilon: f64,
    /// Relative-mode frequency `omega sqrt(1 + epsilon)` (rad/s).
    pub omega_tilde: f64,
    pub omega: f64,
    /// Single-ion mass (kg).
    pub mass: f64,
    /// `q^2 / (4 pi epsilon0)` (J m).
    pub coulomb_ell: f64,
    pub mode: TrapMode,
    /// `d/d0 - 1` from the bracketed root search (separate traps only).
    pub root_find_ratio: Option<f64>,
    /// Force-balance residual `mu omega^2 delta_d - ell/d^2` divided by `mu omega^2 d`.
    pub residual: f64,
}

impl EquilibriumSolution {
    pub fn reduced_mass(&self) -> f64 {
        0.5 * self.mass
    }

    /// Curvature of the relative potential, `mu omega_tilde^2`.
    pub fn relative_stiffness(&self) -> f64 {
        self.reduced_mass() * self.omega_tilde * self.omega_tilde
    }

    /// Trap-centre separation, zero for a shared trap.
    pub fn d0(&self) -> f64 {
        self.d - self.delta_d
    }
}

/// `eta = ell / (m omega^2 (d0/3)^3)`.
pub fn eta(coulomb_ell: f64, mass: f64, omega: f64, d0: f64) -> f64 {
    let third = d0 / 3.0;
    coulomb_ell / (mass * omega * omega * third * third * third)
}

/// Closed-form `delta_d / d0` as a function of `eta`.
///
/// Uses `acosh(1 + eta) = 2 asinh(sqrt(eta/2))`, which keeps full precision for
/// small `eta`.
pub fn delta_d_ratio_closed_form(eta: f64) -> f64 {
    let s = ((eta / 2.0).sqrt().asinh() / 3.0).sinh();
    4.0 / 3.0 * s * s
}

/// `delta_d / d0` from a bracketed root search on the force balance
/// `x - 1 - (2 eta / 27) / x^2 = 0`, `x = d/d0`.
pub fn delta_d_ratio_root_find(eta: f64) -> Result<f64> {
    require_positive("eta", eta)?;
    let c = 2.0 * eta / 27.0;
    let hi = 10.0 * eta.cbrt();
    // Solve for y = x - 1 so that small shifts keep relative precision.
    let g = |y: f64| y - c / ((1.0 + y) * (1.0 + y));
    let y = brent(g, 0.0, hi, 1e-300_f64.max(1e-16 * c.min(hi)), 500)?;
    Ok(y)
}

/// `epsilon` as a function of `eta` for two ions in separate traps.
pub fn epsilon_from_eta(eta: f64) -> f64 {
    let x = 1.0 + delta_d_ratio_closed_form(eta);
    4.0 * eta / 27.0 / (x * x * x)
}

/// `epsilon = q^2 / (pi epsilon0 m omega^2 d^3) = 4 ell / (m omega^2 d^3)`.
pub fn epsilon_from_separation(coulomb_ell: f64, mass: f64, omega: f64, d: f64) -> f64 {
    4.0 * coulomb_ell / (mass * omega * omega * d * d * d)
}

pub fn solve_equilibrium(species: &IonSpecies, trap: &TrapArray) -> Result<EquilibriumSolution> {
    solve_equilibrium_with(&PhysicalConstants::CODATA2018, species, trap)
}

pub fn solve_equilibrium_with(
    constants: &PhysicalConstants,
    species: &IonSpecies,
    trap: &TrapArray,
) -> Result<EquilibriumSolution> {
    let scales = derive_scales_with(constants, species, trap)?;
    if trap.n_ions != 2 {
        return Err(Error::Domain(format!(
            "equilibrium solver handles two ions, got {}",
            trap.n_ions
        )));
    }
    let ell = scales.coulomb_ell;
    let m = species.mass;
    let w = trap.omega;
    let k = 0.5 * m * w * w;
    match trap.mode {
        TrapMode::SharedLinearTrap => {
            let d = (2.0 * ell / (m * w * w)).cbrt();
            let residual = (k * d - ell / (d * d)) / (k * d);
            Ok(EquilibriumSolution {
                d,
                delta_d: d,
                eta: f64::INFINITY,
                epsilon: 2.0,
                omega_tilde: w * 3f64.sqrt(),
                omega: w,
                mass: m,
                coulomb_ell: ell,
                mode: trap.mode,
                root_find_ratio: None,
                residual,
            })
        }
        TrapMode::SeparateMicrotraps => {
            let d0 = trap.d0;
            let eta = eta(ell, m, w, d0);
            let closed = delta_d_ratio_closed_form(eta);
            let rooted = delta_d_ratio_root_find(eta)?;
            let scale = closed.abs().max(f64::MIN_POSITIVE);
            if (closed - rooted).abs() / scale > 1e-10 {
                return Err(Error::Numerical(format!(
                    "closed form delta_d/d0 = {closed:e} disagrees with root search {rooted:e}"
                )));
            }
            let delta_d = d0 * closed;
            let d = d0 + delta_d;
            let epsilon = epsilon_from_separation(ell, m, w, d);
            let residual = (k * delta_d - ell / (d * d)) / (k * d);
            Ok(EquilibriumSolution {
                d,
                delta_d,
                eta,
                epsilon,
                omega_tilde: w * (1.0 + epsilon).sqrt(),
                omega: w,
                mass: m,
                coulomb_ell: ell,
                mode: trap.mode,
                root_find_ratio: Some(rooted),
                residual,
            })
        }
    }
}

fn check_inside(r: f64, d: f64) -> Result<()> {
    if !r.is_finite() || r.abs() >= d {
        return Err(Error::Domain(format!(
            "relative displacement {r:e} outside |r| < d = {d:e}"
        )));
    }
    Ok(())
}

/// Anharmonic relative potential
/// `V = mu w~^2 r^2 [1 - eps'(r/d)(1 - r/d)]/2 - r (F'_b - F_a)/2`, with
/// `eps' = eps/(eps+1)` and the constant term dropped.
pub fn anharmonic_potential(r: f64, eq: &EquilibriumSolution, relative_force: f64) -> Result<f64> {
    check_inside(r, eq.d)?;
    Ok(potential_unchecked(r, eq, relative_force))
}

fn potential_unchecked(r: f64, eq: &EquilibriumSolution, relative_force: f64) -> f64 {
    let k = eq.relative_stiffness();
    let ep = eq.epsilon / (eq.epsilon + 1.0);
    let s = r / eq.d;
    0.5 * k * r * r * (1.0 - ep * s * (1.0 - s)) - 0.5 * r * relative_force
}

fn potential_slope(r: f64, eq: &EquilibriumSolution, relative_force: f64) -> f64 {
    let k = eq.relative_stiffness();
    let ep = eq.epsilon / (eq.epsilon + 1.0);
    let d = eq.d;
    0.5 * k * (2.0 * r - 3.0 * ep * r * r / d + 4.0 * ep * r * r * r / (d * d)) - 0.5 * relative_force
}

/// Mean turning-point offset `zeta` from the Taylor series in `E_r`:
/// `zeta = eps' E_r/(mu w~^2 d) [1 + 6 eps' f/(mu w~^2 d)]`, `f = relative_force/2`.
pub fn turning_point_shift(eq: &EquilibriumSolution, e_r: f64, relative_force: f64) -> Result<f64> {
    if !(e_r >= 0.0) || !e_r.is_finite() {
        return Err(Error::Domain(format!("E_r must be non-negative, got {e_r}")));
    }
    let k = eq.relative_stiffness();
    let ep = eq.epsilon / (eq.epsilon + 1.0);
    let f = 0.5 * relative_force;
    let zeta = ep * e_r / (k * eq.d) * (1.0 + 6.0 * ep * f / (k * eq.d));
    // The same energy must keep the motion inside the domain.
    let amplitude = (2.0 * e_r / k).sqrt();
    check_inside(f / k + amplitude + zeta, eq.d)?;
    check_inside(f / k - amplitude + zeta, eq.d)?;
    Ok(zeta)
}

/// Potential minimum `r_bar` of the anharmonic potential under `relative_force`.
pub fn potential_minimum(eq: &EquilibriumSolution, relative_force: f64) -> Result<f64> {
    let k = eq.relative_stiffness();
    let guess = 0.5 * relative_force / k;
    let slope = |r: f64| potential_slope(r, eq, relative_force);
    let mut width = guess.abs().max(1e-6 * eq.d);
    let (lo, hi) = loop {
        let (lo, hi) = (guess - width, guess + width);
        if slope(lo) <= 0.0 && slope(hi) >= 0.0 {
            break (lo, hi);
        }
        width *= 2.0;
        if width > 2.0 * eq.d {
            return Err(Error::Domain(
                "no potential minimum inside |r| < d for this force".to_string(),
            ));
        }
    };
    let r = brent(slope, lo, hi, 1e-15 * eq.d, 300)?;
    check_inside(r, eq.d)?;
    Ok(r)
}

/// Exact variant of `turning_point_shift`: the two roots of
/// `V(r) = E_r + V(r_bar)` on either side of `r_bar`, averaged, minus `r_bar`.
pub fn turning_point_shift_exact(
    eq: &EquilibriumSolution,
    e_r: f64,
    relative_force: f64,
) -> Result<f64> {
    if !(e_r >= 0.0) || !e_r.is_finite() {
        return Err(Error::Domain(format!("E_r must be non-negative, got {e_r}")));
    }
    let r_bar = potential_minimum(eq, relative_force)?;
    if e_r == 0.0 {
        return Ok(0.0);
    }
    let target = e_r + potential_unchecked(r_bar, eq, relative_force);
    let g = |r: f64| potential_unchecked(r, eq, relative_force) - target;
    let k = eq.relative_stiffness();
    let amplitude = (2.0 * e_r / k).sqrt();
    let mut roots = [0.0; 2];
    for (slot, dir) in roots.iter_mut().zip([-1.0, 1.0]) {
        let mut reach = amplitude;
        loop {
            let edge = r_bar + dir * reach;
            check_inside(edge, eq.d)?;
            if g(edge) > 0.0 {
                break;
            }
            reach *= 1.5;
        }
        let edge = r_bar + dir * reach;
        let (lo, hi) = if dir < 0.0 { (edge, r_bar) } else { (r_bar, edge) };
        *slot = brent(g, lo, hi, 1e-15 * eq.d, 300)?;
    }
    Ok(0.5 * (roots[0] + roots[1]) - r_bar)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ca_trap(mode: TrapMode, d0: f64) -> (IonSpecies, TrapArray) {
        let trap = TrapArray {
            n_ions: 2,
            omega: 2.0 * std::f64::consts::PI * 1e6,
            d0,
            mode,
        };
        (IonSpecies::calcium40(), trap)
    }

    #[test]
    fn closed_form_matches_log_expression() {
        for &eta in &[1e-3_f64, 0.1, 1.0, 10.0, 1e4] {
            let log_form =
                4.0 / 3.0 * (((eta + 1.0 + (eta * (eta + 2.0)).sqrt()).ln() / 6.0).sinh()).powi(2);
            let ours = delta_d_ratio_closed_form(eta);
            assert!((ours - log_form).abs() / log_form < 1e-12, "eta {eta}");
        }
    }

    #[test]
    fn closed_form_and_root_search_agree_on_grid() {
        let mut eta = 1e-6;
        while eta <= 1e6 {
            let c = delta_d_ratio_closed_form(eta);
            let r = delta_d_ratio_root_find(eta).unwrap();
            assert!((c - r).abs() / c < 1e-10, "eta {eta}: {c} vs {r}");
            let x = 1.0 + c;
            let residual = x - 1.0 - 2.0 * eta / 27.0 / (x * x);
            assert!(residual.abs() < 1e-10);
            eta *= 10f64.sqrt();
        }
    }

    #[test]
    fn epsilon_is_increasing_in_eta() {
        let mut prev = 0.0;
        let mut eta = 1e-6;
        while eta <= 1e6 {
            let e = epsilon_from_eta(eta);
            assert!(e > prev && e < 2.0);
            prev = e;
            eta *= 1.2;
        }
    }

    #[test]
    fn small_eta_limit() {
        let eta = 1e-8;
        let ratio = delta_d_ratio_closed_form(eta);
        assert!((ratio / (eta / 13.5) - 1.0).abs() < 1e-6);
        // eps -> 4 eta / 27 = q^2/(pi eps0 m w^2 d0^3)
        assert!((epsilon_from_eta(eta) / (4.0 * eta / 27.0) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn large_eta_approaches_two() {
        // 2 - eps(eta) falls off as eta^(-1/3).
        let gap = |eta: f64| 2.0 - epsilon_from_eta(eta);
        let expected = |eta: f64| 2.0 * (27.0 / (2.0 * eta)).cbrt();
        for &eta in &[1e9, 1e15, 1e24] {
            assert!((gap(eta) / expected(eta) - 1.0).abs() < 0.01, "eta {eta}");
        }
        assert!(gap(1e24) < 1e-6);
    }

    #[test]
    fn shared_trap_separation_for_calcium() {
        let (sp, trap) = ca_trap(TrapMode::SharedLinearTrap, 0.0);
        let eq = solve_equilibrium(&sp, &trap).unwrap();
        // Oracle: (q^2 / (2 pi eps0 m w^2))^(1/3) with CODATA constants.
        let k = PhysicalConstants::CODATA2018;
        let q = k.elementary_charge;
        let w = trap.omega;
        let oracle = (q * q / (2.0 * std::f64::consts::PI * k.epsilon0 * sp.mass * w * w)).cbrt();
        assert!((eq.d / oracle - 1.0).abs() < 1e-12);
        assert!((eq.d / 5.60e-6 - 1.0).abs() < 5e-3);
        assert_eq!(eq.epsilon, 2.0);
        assert!(eq.residual.abs() < 1e-14);
    }

    #[test]
    fn separate_traps_satisfy_force_balance() {
        let (sp, trap) = ca_trap(TrapMode::SeparateMicrotraps, 20e-6);
        let eq = solve_equilibrium(&sp, &trap).unwrap();
        assert!(eq.d > trap.d0);
        assert!(eq.residual.abs() < 1e-12);
        assert!(eq.omega_tilde > eq.omega);
        assert!(eq.epsilon > 0.0 && eq.epsilon < 2.0);
    }

    #[test]
    fn curvature_of_exact_coulomb_potential_at_eps_two() {
        let (sp, trap) = ca_trap(TrapMode::SharedLinearTrap, 0.0);
        let eq = solve_equilibrium(&sp, &trap).unwrap();
        let mu = eq.reduced_mass();
        let w = eq.omega;
        // Exact relative potential: trap part about d0 = 0 plus ell/(d + r).
        let exact = |r: f64| 0.5 * mu * w * w * (r + eq.delta_d).powi(2) + eq.coulomb_ell / (eq.d + r);
        let h = 1e-4 * eq.d;
        let fd = (exact(h) - 2.0 * exact(0.0) + exact(-h)) / (h * h);
        assert!((fd / (3.0 * mu * w * w) - 1.0).abs() < 1e-6);
        let model = |r: f64| anharmonic_potential(r, &eq, 0.0).unwrap();
        let fd_model = (model(h) - 2.0 * model(0.0) + model(-h)) / (h * h);
        assert!((fd_model / (3.0 * mu * w * w) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn potential_basics() {
        let (sp, trap) = ca_trap(TrapMode::SharedLinearTrap, 0.0);
        let eq = solve_equilibrium(&sp, &trap).unwrap();
        assert_eq!(anharmonic_potential(0.0, &eq, 1e-21).unwrap(), 0.0);
        assert!(anharmonic_potential(eq.d, &eq, 0.0).is_err());
        let mut harmonic = eq;
        harmonic.epsilon = 0.0;
        harmonic.omega_tilde = harmonic.omega;
        let k = harmonic.relative_stiffness();
        for &r in &[-0.5 * eq.d, 0.1 * eq.d, 0.9 * eq.d] {
            let v = anharmonic_potential(r, &harmonic, 0.0).unwrap();
            assert!((v - 0.5 * k * r * r).abs() <= 1e-15 * v.abs());
        }
    }

    #[test]
    fn turning_point_shift_closed_vs_exact() {
        let (sp, trap) = ca_trap(TrapMode::SharedLinearTrap, 0.0);
        let eq = solve_equilibrium(&sp, &trap).unwrap();
        let e_r = PhysicalConstants::CODATA2018.k_b * 1e-3;
        let closed = turning_point_shift(&eq, e_r, 0.0).unwrap();
        let exact = turning_point_shift_exact(&eq, e_r, 0.0).unwrap();
        assert!(closed > 0.0);
        assert!((closed / exact - 1.0).abs() < 0.05, "{closed:e} vs {exact:e}");
        assert_eq!(turning_point_shift(&eq, 0.0, 0.0).unwrap(), 0.0);
        assert_eq!(turning_point_shift_exact(&eq, 0.0, 0.0).unwrap(), 0.0);
        let mut harmonic = eq;
        harmonic.epsilon = 0.0;
        assert_eq!(turning_point_shift(&harmonic, e_r, 0.0).unwrap(), 0.0);
        assert!(turning_point_shift_exact(&harmonic, e_r, 0.0).unwrap().abs() < 1e-12 * eq.d);
        assert!(turning_point_shift(&eq, 1e-10, 0.0).is_err());
    }
}
