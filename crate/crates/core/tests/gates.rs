use std::f64::consts::PI;

use proptest::prelude::*;
use pushgate_core::dynamics::PulseVariant;
use pushgate_core::gates::*;
use pushgate_core::phases::PhaseTable;

fn table(n: usize, phases: Vec<f64>, variant: PulseVariant, zeroed: bool) -> PhaseTable {
    let mut t = PhaseTable::from_phases(n, phases).unwrap();
    t.metadata.variant = variant;
    t.metadata.light_shift_zeroed = zeroed;
    t
}

fn dyadic() -> impl Strategy<Value = f64> {
    (-4096i64..4096).prop_map(|k| k as f64 / 1024.0)
}

#[test]
fn toffoli_network_at_four_pi_is_ccz() {
    let net = ccz_network(4.0 * PI).unwrap();
    assert!(net.ccz_error < 1e-10, "{}", net.ccz_error);
    let stage = toffoli_stage(4.0 * PI);
    let target = DiagonalGate::controlled_phase(3, 0, 2, PI / 2.0);
    assert!(stage.local_equivalence_error(&target) < 1e-10);
}

#[test]
fn cnot_from_cz_truth_table() {
    let u = circuit_unitary(2, &cnot_via_cz(0, 1)).unwrap();
    let expect = [0usize, 1, 3, 2];
    for (k, col) in u.iter().enumerate() {
        assert!((col[expect[k]].norm() - 1.0).abs() < 1e-12, "column {k}");
    }
}

#[test]
fn symmetric_dfs_doubles_phase_exactly() {
    let t = PhaseTable::from_phases(2, vec![0.125, -0.5, 0.75, 1.5]).unwrap();
    let r = dfs_gate_check(DfsGeometry::SymmetricB, &[&t]).unwrap();
    assert!(r.doubles_physical_phase);
    let v = t.phases[3] - t.phases[2] - t.phases[1] + t.phases[0];
    assert_eq!(r.logical_vartheta, 2.0 * v);
}

#[test]
fn linear_dfs_with_pi_central_coupling_is_cz() {
    let phases: Vec<f64> = (0..16).map(|k| if (k >> 2) & 1 == 1 && (k >> 1) & 1 == 1 { PI } else { 0.0 }).collect();
    let t = PhaseTable::from_phases(4, phases).unwrap();
    let r = dfs_gate_check(DfsGeometry::LinearA, &[&t]).unwrap();
    assert!((r.logical_vartheta.abs() - PI).abs() < 1e-15);
    assert!(r.cz_error < 1e-12, "{}", r.cz_error);
}

#[test]
fn global_pi_pulses_keep_dfs_population() {
    let seq = PulseSequence { n_qubits: 4, elements: vec![SequenceElement::PiPulseAll] };
    let out = compose_sequence(&seq, &[]).unwrap();
    assert!(out.diagonal().is_none());
    check_dfs_leakage(&out, 2).unwrap();
    let leak = SequenceOutcome::Permuted { n_qubits: 4, map: (0..16).map(|k| k ^ 1).collect(), phases: vec![0.0; 16] };
    assert!(check_dfs_leakage(&leak, 2).is_err());
}

#[test]
fn symbolic_spin_echo_is_exact() {
    let f = spin_echo_forms_2q();
    assert_eq!(f[0], f[1]);
    assert_eq!(f[1], f[2]);
    assert_eq!(f[3].minus(&f[0]), PhaseForm::overall_2q().scaled(2, 1));
}

#[test]
fn sequence_checks_table_variants() {
    let rot = LocalRotationSet::zero(2);
    let normal = table(2, vec![0.0; 4], PulseVariant::Normal, false);
    let seq = PulseSequence::detuning_swap(rot.clone());
    assert!(compose_sequence(&seq, &[&normal, &normal]).is_err());
    let seq = PulseSequence::force_swap(rot);
    let flipped = table(2, vec![0.0; 4], PulseVariant::SignFlipped, false);
    assert!(compose_sequence(&seq, &[&normal, &flipped]).is_err());
}

#[test]
fn timing_totals() {
    assert_eq!(timing_report(TimingMode::FixedForce, false).total, 8.0);
    assert_eq!(timing_report(TimingMode::FixedDuration, false).total, 5.0);
    assert_eq!(timing_report(TimingMode::FixedDuration, true).total, 6.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn two_qubit_gauge_does_not_change_gate(
        t in prop::collection::vec(-20.0..20.0f64, 4),
        a0 in -10.0..10.0f64,
    ) {
        let tab = PhaseTable::from_phases(2, t).unwrap();
        let s = solve_rotations_2q(&tab).unwrap();
        let g = solve_rotations_2q_with_gauge(&tab, a0).unwrap();
        prop_assert_eq!(s.vartheta, g.vartheta);
        prop_assert!(s.gate(&tab).distance(&g.gate(&tab)) < 1e-9);
        let cp = DiagonalGate::controlled_phase(2, 0, 1, s.vartheta);
        prop_assert!(s.gate(&tab).distance(&cp) < 1e-9);
        prop_assert!(residual_2q(&tab, &s) < 1e-12);
    }

    #[test]
    fn three_qubit_rotations_clear_low_weight_entries(
        t in prop::collection::vec(-20.0..20.0f64, 8),
        echo in any::<bool>(),
    ) {
        let tab = PhaseTable::from_phases(3, t).unwrap();
        let s = solve_rotations_3q(&tab, echo, None).unwrap();
        let g = s.gate(&tab);
        for k in [0usize, 1, 2, 4] {
            prop_assert!(wrap(g.phases[k]).abs() < 1e-9, "entry {k}: {}", g.phases[k]);
        }
        // The weight-two entries hold the pairwise residuals.
        prop_assert!(wrap(g.phases[6] - s.residuals[0]).abs() < 1e-9);
        prop_assert!(wrap(g.phases[5] - s.residuals[1]).abs() < 1e-9);
        prop_assert!(wrap(g.phases[3] - s.residuals[2]).abs() < 1e-9);
    }

    #[test]
    fn spin_echo_composition_is_bit_exact(t in prop::collection::vec(dyadic(), 4)) {
        let tab = table(2, t, PulseVariant::Normal, false);
        let v = PhaseForm::overall_2q().evaluate(&tab.phases);
        let seq = PulseSequence::spin_echo(spin_echo_rotations(2, v));
        let out = compose_sequence(&seq, &[&tab, &tab]).unwrap();
        let g = out.diagonal().unwrap();
        let c = tab.phases[1] + tab.phases[2];
        prop_assert_eq!(&g.phases[..3], &[c, c, c][..]);
        prop_assert_eq!(g.phases[3], c + 2.0 * v);
    }

    // Entries odd in the force drop out of both paired sequences.
    #[test]
    fn paired_sequences_cancel_linear_terms(
        quad in prop::collection::vec(dyadic(), 4),
        lin_a in prop::collection::vec(dyadic(), 4),
        lin_b in prop::collection::vec(dyadic(), 4),
    ) {
        let compose = |lin: &[f64], second: PulseVariant, zeroed: bool| {
            let plus: Vec<f64> = quad.iter().zip(lin).map(|(q, l)| q + l).collect();
            let minus: Vec<f64> = quad.iter().zip(lin).map(|(q, l)| q - l).collect();
            let t1 = table(2, plus, PulseVariant::Normal, zeroed);
            let t2 = table(2, minus, second, zeroed);
            let rot = LocalRotationSet::zero(2);
            let seq = match second {
                PulseVariant::DetuningFlipped => PulseSequence::detuning_swap(rot),
                _ => PulseSequence::force_swap(rot),
            };
            compose_sequence(&seq, &[&t1, &t2]).unwrap().diagonal().unwrap().phases.clone()
        };
        for (variant, zeroed) in [(PulseVariant::DetuningFlipped, false), (PulseVariant::SignFlipped, true)] {
            let a = compose(&lin_a, variant, zeroed);
            let b = compose(&lin_b, variant, zeroed);
            prop_assert_eq!(&a, &b);
            let doubled: Vec<f64> = quad.iter().map(|q| 2.0 * q).collect();
            prop_assert_eq!(a, doubled);
        }
    }

    #[test]
    fn phase_distance_ignores_global_phase(
        a in prop::collection::vec(-10.0..10.0f64, 8),
        b in prop::collection::vec(-10.0..10.0f64, 8),
        g in -10.0..10.0f64,
    ) {
        let shifted: Vec<f64> = b.iter().map(|x| x + g).collect();
        let d = phase_distance(&a, &b);
        prop_assert!((d - phase_distance(&a, &shifted)).abs() < 1e-9);
        prop_assert!((d - phase_distance(&b, &a)).abs() < 1e-9);
        prop_assert!((0.0..=PI).contains(&d));
    }

    #[test]
    fn network_is_diagonal_and_unitary(theta in -20.0..20.0f64) {
        let net = ccz_network(theta).unwrap();
        let u = circuit_unitary(3, &net.gates).unwrap();
        prop_assert!(as_diagonal(3, &u, 1e-10).is_some());
        for col in &u {
            let n: f64 = col.iter().map(|z| z.norm_sqr()).sum();
            prop_assert!((n - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn hadamard_squares_to_identity(q in 0usize..3, k in 0usize..8) {
        let s = StateVector::basis(3, k).unwrap();
        let h = Gate::Hadamard(q);
        let back = apply_gate(&apply_gate(&s, &h).unwrap(), &h).unwrap();
        for (x, y) in back.amplitudes.iter().zip(&s.amplitudes) {
            prop_assert!((x - y).norm() < 1e-14);
        }
    }
}
