use proptest::prelude::*;
use pushgate_core::dynamics::*;
use pushgate_core::phases::{pair_phase, simulate_phase_table};

fn energy_series(chain: &Chain, tr: &Trajectory) -> Vec<f64> {
    tr.positions
        .iter()
        .zip(&tr.momenta)
        .map(|(x, p)| {
            let u: Vec<f64> = x.iter().zip(chain.equilibrium()).map(|(x, e)| x - e).collect();
            chain.motional_energy(&u, p)
        })
        .collect()
}

#[test]
fn free_motion_conserves_energy() {
    let chain = Chain::uniform(3, 0.5, 40.0).unwrap();
    let pulse = ForcePulse::new(3, 0.0, 10.0);
    let init = InitialConditions::LocalModes(vec![
        ModeExcitation { energy: 4.0, phase: 0.3 },
        ModeExcitation { energy: 1.0, phase: 2.0 },
        ModeExcitation { energy: 9.0, phase: 5.1 },
    ]);
    let opts = IntegratorOptions { record: Recording::Uniform(200), ..Default::default() };
    let tr = integrate_branch(&chain, &[pulse], Branch::new(3, 5).unwrap(), &init, &opts).unwrap();
    let e = energy_series(&chain, &tr);
    assert_eq!(e.len(), 200);
    for v in &e {
        assert!((v - e[0]).abs() < 1e-9 * e[0], "{v} vs {}", e[0]);
    }
}

#[test]
fn adiabatic_pulse_leaves_rest_state_unexcited() {
    let chain = Chain::uniform(2, 0.5, 200.0).unwrap();
    let pulse = ForcePulse::new(2, 2.0, 20.0);
    let tr = integrate_branch(
        &chain,
        &[pulse],
        Branch::new(2, 2).unwrap(),
        &InitialConditions::Rest,
        &IntegratorOptions::default(),
    )
    .unwrap();
    let e = chain.motional_energy(&tr.final_displacement, &tr.final_momentum);
    assert!(e < 1e-10, "residual energy {e}");
}

#[test]
fn trajectory_tracks_adiabatic_solution() {
    let chain = Chain::uniform(2, 0.5, 100.0).unwrap();
    let pulse = ForcePulse::new(2, 3.0, 20.0);
    let opts = IntegratorOptions { record: Recording::Uniform(101), ..Default::default() };
    let d = chain.neighbour_separation();
    // The adiabatic path lags by O(xi / (omega tau)^2).
    let tol = 4.0 * pulse.xi / pulse.omega_tau.powi(2);
    for b in Branch::all(2) {
        let tr = integrate_branch(&chain, std::slice::from_ref(&pulse), b, &InitialConditions::Rest, &opts).unwrap();
        let ad = adiabatic_trajectory(&chain, &pulse, b, &InitialConditions::Rest, true).unwrap();
        for (t, (x, p)) in tr.times.iter().zip(tr.positions.iter().zip(&tr.momenta)) {
            let m = mode_transform([x[0], x[1]], [p[0], p[1]], d);
            assert!((m.r - ad.r(*t)).abs() < tol, "r at t = {t}: {} vs {}", m.r, ad.r(*t));
            assert!((m.big_r - ad.big_r(*t)).abs() < tol, "R at t = {t}");
        }
    }
}

#[test]
fn csv_export_has_header_and_columns() {
    let chain = Chain::uniform(2, 0.01, 1000.0).unwrap();
    let pulse = ForcePulse::new(2, 0.2, 5.0);
    let opts = IntegratorOptions { record: Recording::Uniform(5), ..Default::default() };
    let tr = integrate_branch(&chain, &[pulse], Branch::new(2, 1).unwrap(), &InitialConditions::Rest, &opts)
        .unwrap();
    let csv = tr.to_csv(&["seed = 7".to_string()]);
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines.contains(&"# branch = 01"));
    assert!(lines.contains(&"# seed = 7"));
    let data: Vec<&&str> = lines.iter().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data[0].split(',').count(), 5);
    assert_eq!(data.len(), 6);
}

#[test]
fn three_ion_chain_reduces_to_pair_when_third_ion_idle() {
    let opts = IntegratorOptions::default();
    let eps = 1e-3;
    let xi = 1.0;
    let two = Chain::uniform(2, eps, 1000.0).unwrap();
    let t2 = simulate_phase_table(&two, &[ForcePulse::new(2, xi, 20.0)], &InitialConditions::Rest, &opts)
        .unwrap();
    let three = Chain::uniform(3, eps, 1000.0).unwrap();
    let mut p3 = ForcePulse::new(3, xi, 20.0);
    p3.targets = vec![true, true, false];
    let t3 = simulate_phase_table(&three, &[p3], &InitialConditions::Rest, &opts).unwrap();
    let a = pair_phase(&t2, 0, 1).unwrap();
    let b = pair_phase(&t3, 0, 1).unwrap();
    assert!(((b - a) / a).abs() < 10.0 * eps, "{a} vs {b}");
}

#[test]
fn untargeted_ion_gives_branch_independent_phase() {
    let chain = Chain::uniform(2, 0.1, 300.0).unwrap();
    let mut p = ForcePulse::new(2, 1.0, 10.0);
    p.targets = vec![true, false];
    let t = simulate_phase_table(&chain, &[p], &InitialConditions::Rest, &IntegratorOptions::default()).unwrap();
    assert_eq!(t.phases[0], t.phases[1]);
    assert_eq!(t.phases[2], t.phases[3]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn branch_bits_round_trip(n in 1usize..=4, seed in 0usize..16) {
        let index = seed % (1 << n);
        let b = Branch::new(n, index).unwrap();
        let bits: Vec<u8> = (0..n).map(|i| b.bit(i)).collect();
        prop_assert_eq!(Branch::from_bits(&bits).unwrap(), b);
    }

    #[test]
    fn mode_transform_inverts(x0 in -5.0..5.0f64, x1 in 5.0..15.0f64, p0 in -3.0..3.0f64, p1 in -3.0..3.0f64) {
        let d = 10.0;
        let m = mode_transform([x0, x1], [p0, p1], d);
        let (x, p) = m.to_ions(d);
        prop_assert!((x[0] - x0).abs() < 1e-12 && (x[1] - x1).abs() < 1e-12);
        prop_assert!((p[0] - p0).abs() < 1e-12 && (p[1] - p1).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    // Reflection x -> -x exchanges the ions and reverses the push.
    #[test]
    fn mirror_symmetry(eps in 0.01..2.0f64, xi in 0.2..3.0f64, wt in 5.0..15.0f64) {
        let chain = Chain::uniform(2, eps, 200.0).unwrap();
        let opts = IntegratorOptions::default();
        let p = ForcePulse::new(2, xi, wt);
        let m = p.variant(PulseVariant::SignFlipped);
        let fwd = simulate_phase_table(&chain, &[p], &InitialConditions::Rest, &opts).unwrap();
        let rev = simulate_phase_table(&chain, &[m], &InitialConditions::Rest, &opts).unwrap();
        let a = fwd.dynamic_phases();
        let b = rev.dynamic_phases();
        let scale = a.iter().fold(1.0f64, |s, v| s.max(v.abs()));
        prop_assert!((a[1] - b[2]).abs() < 1e-8 * scale, "{} vs {}", a[1], b[2]);
        prop_assert!((a[3] - b[3]).abs() < 1e-8 * scale);
    }
}
