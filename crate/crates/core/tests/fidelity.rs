use std::f64::consts::PI;

use nalgebra::DMatrix;
use proptest::prelude::*;
use pushgate_core::dynamics::*;
use pushgate_core::fidelity::*;
use pushgate_core::phases::analytic_vartheta_linear;
use pushgate_core::units::IonSpecies;

/// Shared-trap pulse with overall phase pi at the given width.
fn shared_trap_pulse(omega_tau: f64) -> ForcePulse {
    let xi = (PI / analytic_vartheta_linear(omega_tau, 1.0)).sqrt();
    ForcePulse::new(2, xi, omega_tau)
}

fn run(kt: f64, n: usize, seed: u64, d_over_xi: f64, omega_tau: f64) -> PhaseSampleSet {
    let p = shared_trap_pulse(omega_tau);
    let chain = Chain::uniform(2, 2.0, d_over_xi * p.xi).unwrap();
    let ens = ThermalEnsemble::new(kt, n, seed);
    monte_carlo_phase_samples(&chain, &[p], &ens, &IntegratorOptions::default()).unwrap()
}

#[test]
fn monte_carlo_is_independent_of_worker_count() {
    let go = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run(5.0, 12, 42, 100.0, 5.0))
    };
    let a = go(1);
    let b = go(3);
    assert_eq!(a.deltas, b.deltas);
    assert_eq!(a.mean, b.mean);
    let c = go(2);
    assert_eq!(a, c);
}

#[test]
fn seeds_change_the_samples() {
    let a = ThermalEnsemble::new(3.0, 10, 1).draw(2, 0).unwrap();
    let b = ThermalEnsemble::new(3.0, 10, 2).draw(2, 0).unwrap();
    let c = ThermalEnsemble::new(3.0, 10, 1).draw(2, 1).unwrap();
    assert_ne!(a, b);
    assert_ne!(a, c);
    assert_eq!(a, ThermalEnsemble::new(3.0, 10, 1).draw(2, 0).unwrap());
}

#[test]
fn deltas_have_zero_mean() {
    let s = run(10.0, 64, 7, 100.0, 5.0);
    for k in 0..4 {
        let col: Vec<f64> = s.deltas.iter().map(|d| d[k]).collect();
        let scale = col.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(pairwise_sum(&col).abs() < 1e-12 * scale * col.len() as f64);
    }
    assert!(s.reference.is_some());
}

#[test]
fn echo_suppresses_thermal_dephasing() {
    for kt in [1.0, 30.0] {
        let s = run(kt, 200, 11, 1e3, 5.0);
        let plain = worst_case_fidelity(&s, false, MinimizationOrder::StateFirst).unwrap();
        let echo = worst_case_fidelity(&s, true, MinimizationOrder::StateFirst).unwrap();
        let ratio = echo.infidelity / plain.infidelity;
        assert!(ratio < 0.2, "kT = {kt}: ratio {ratio}");
    }
}

#[test]
fn phase_variance_is_linear_in_temperature_for_short_pulses() {
    // Below the adiabatic regime the residual motion gives a phase linear in
    // the thermal amplitude, so its variance grows as T.
    let lo = run(0.5, 400, 3, 100.0, 4.0);
    let hi = run(2.0, 400, 3, 100.0, 4.0);
    let v = |s: &PhaseSampleSet| {
        let d = s.deltas.iter().map(|d| d[1] - d[0]).map(|x| x * x).collect::<Vec<_>>();
        pairwise_sum(&d)
    };
    let exponent = (v(&hi) / v(&lo)).ln() / 4f64.ln();
    assert!((exponent - 1.0).abs() < 0.15, "exponent {exponent}");
}

#[test]
fn sample_csv_layout() {
    let s = run(1.0, 3, 5, 100.0, 5.0);
    let csv = s.to_csv(&["seed = 5".into()]);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "# seed = 5");
    assert_eq!(lines[1], "sample,delta_00,delta_01,delta_10,delta_11");
    assert_eq!(lines.len(), 5);
}

#[test]
fn scattering_scales_with_power_and_waist() {
    let ca = IonSpecies::calcium40();
    let w = 2.0 * PI * 1e6;
    let n = |waist: f64, power: f64| {
        photon_scattering(&LaserGeometry::travelling_wave(waist, power, 397e-9), &ca, w).unwrap()
    };
    assert!((n(4e-6, 20e-3) / n(4e-6, 10e-3) - 0.5).abs() < 1e-12);
    // x0 = w/2: N scales as w^4.
    assert!((n(4e-6, 10e-3) / n(2e-6, 10e-3) - 16.0).abs() < 1e-10);
    let sw = |power| photon_scattering(&LaserGeometry::standing_wave(4e-6, power, 397e-9, PI / 2.0), &ca, w).unwrap();
    assert!((sw(20e-3) / sw(10e-3) - 0.5).abs() < 1e-12);
}

#[test]
fn scattering_is_stationary_at_waist_over_root_two() {
    let ca = IonSpecies::calcium40();
    let w = 4e-6;
    let n = |x0: f64| {
        let mut g = LaserGeometry::travelling_wave(w, 10e-3, 397e-9);
        g.offset = x0;
        photon_scattering(&g, &ca, 2.0 * PI * 1e6).unwrap()
    };
    let x = w / 2f64.sqrt();
    let h = 1e-4 * x;
    let grad = (n(x + h) - n(x - h)) / (2.0 * h) * x / n(x);
    assert!(grad.abs() < 1e-8, "relative gradient {grad}");
    assert!(n(0.9 * x) > n(x) && n(1.1 * x) > n(x));
}

#[test]
fn spatial_infidelity_limits() {
    let ca = IonSpecies::calcium40();
    let w = 2.0 * PI * 1e6;
    let sw = LaserGeometry::standing_wave(4e-6, 10e-3, 397e-9, PI / 2.0);
    assert_eq!(spatial_infidelity(&sw, &ca, w, 0.0).unwrap(), 0.0);
    let lo = spatial_infidelity(&sw, &ca, w, 1e-9).unwrap();
    let hi = spatial_infidelity(&sw, &ca, w, 2e-9).unwrap();
    // (1 - e^{-x})^2 with x ~ 4e-5 here; the ratio is 4 to first order in x.
    assert!((hi / lo - 4.0).abs() < 1e-3);
    // Travelling wave at 2 x0 = w: only the quadratic term, which goes as T^2.
    let mut tw = LaserGeometry::travelling_wave(4e-6, 10e-3, 397e-9);
    tw.offset = 2e-6;
    let a = spatial_infidelity(&tw, &ca, w, 1e-4).unwrap();
    let b = spatial_infidelity(&tw, &ca, w, 2e-4).unwrap();
    assert!((b / a - 4.0).abs() < 1e-12);
}

#[test]
fn dynamic_closed_form_scales_as_fourth_power_of_a_over_d() {
    for regime in [DynamicRegime::SmallEpsilon, DynamicRegime::SharedTrap { vartheta_l: PI, omega_tau: 5.0 }] {
        let a = appendix_dynamic_infidelity(regime, 10.0, 1e-2);
        let b = appendix_dynamic_infidelity(regime, 10.0, 5e-3);
        assert!((a / b - 16.0).abs() < 1e-10);
        let c = appendix_dynamic_infidelity(regime, 20.0, 1e-2);
        assert!((c / a - 4.0).abs() < 1e-10);
    }
    assert_eq!(format!("{:.2}", shared_trap_bracket(5.0)), "1.07");
}

fn grid_max(d: &DMatrix<f64>, steps: usize) -> f64 {
    let mut best = 0.0f64;
    for i in 0..=steps {
        for j in 0..=steps - i {
            for k in 0..=steps - i - j {
                let l = steps - i - j - k;
                let p = [i, j, k, l].map(|c| c as f64 / steps as f64);
                let mut v = 0.0;
                for a in 0..4 {
                    for b in 0..4 {
                        v += p[a] * d[(a, b)] * p[b];
                    }
                }
                best = best.max(v);
            }
        }
    }
    best
}

fn delta_strategy() -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-1.0..1.0f64, 4), 2..20)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn simplex_maximum_satisfies_kkt(deltas in delta_strategy()) {
        let m = dephasing_matrix(&deltas);
        let (v, p) = max_simplex_quadratic(&m);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|x| *x >= 0.0));
        let g = &m * nalgebra::DVector::from_vec(p.clone());
        for k in 0..4 {
            prop_assert!(g[k] <= v + 1e-9, "gradient {k}: {} > {v}", g[k]);
        }
        prop_assert!(v + 1e-12 >= grid_max(&m, 20));
    }

    #[test]
    fn state_first_is_not_worse_than_sample_first(deltas in delta_strategy()) {
        let a = worst_case_fidelity_from_deltas(&deltas, false, MinimizationOrder::StateFirst).unwrap();
        let b = worst_case_fidelity_from_deltas(&deltas, false, MinimizationOrder::SampleFirst).unwrap();
        prop_assert!(a.infidelity <= b.infidelity + 1e-12);
        prop_assert!((0.0..=1.0).contains(&a.infidelity));
    }

    #[test]
    fn pairwise_sum_matches_naive(x in prop::collection::vec(-1e3..1e3f64, 0..200)) {
        let naive: f64 = x.iter().sum();
        prop_assert!((pairwise_sum(&x) - naive).abs() < 1e-9);
    }
}
