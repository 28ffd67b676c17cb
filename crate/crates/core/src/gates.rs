//! From phase tables to gates: local-rotation solvers, pulse sequences, the
//! three-qubit network, logical-subspace checks and a state-vector engine.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::PulseVariant;
use crate::error::{Error, Result};
use crate::phases::PhaseTable;

/// Reduce to `(-pi, pi]`.
pub fn wrap(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Largest per-entry phase difference between two diagonal gates after the
/// best global-phase alignment (half the shortest arc holding all differences).
pub fn phase_distance(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "phase vectors differ in length");
    if a.is_empty() {
        return 0.0;
    }
    let mut d: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - y).rem_euclid(TAU)).collect();
    d.sort_by(|x, y| x.total_cmp(y));
    let mut gap = d[0] + TAU - d[d.len() - 1];
    for w in d.windows(2) {
        gap = gap.max(w[1] - w[0]);
    }
    (0.5 * (TAU - gap)).max(0.0)
}

/// Per-qubit phase pairs `(X0, X1)` applied to |0> and |1>.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalRotationSet {
    pub pairs: Vec<[f64; 2]>,
    pub gauge: String,
}

impl LocalRotationSet {
    pub fn zero(n: usize) -> LocalRotationSet {
        LocalRotationSet { pairs: vec![[0.0; 2]; n], gauge: "zero".into() }
    }

    pub fn n_qubits(&self) -> usize {
        self.pairs.len()
    }

    /// Phase added to basis state `k`.
    pub fn phase(&self, k: usize) -> f64 {
        let n = self.pairs.len();
        (0..n).map(|q| self.pairs[q][(k >> (n - 1 - q)) & 1]).sum()
    }

    pub fn phases(&self) -> Vec<f64> {
        (0..1usize << self.pairs.len()).map(|k| self.phase(k)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalGate {
    pub n_qubits: usize,
    pub phases: Vec<f64>,
}

impl DiagonalGate {
    pub fn new(n_qubits: usize, phases: Vec<f64>) -> Result<DiagonalGate> {
        if phases.len() != 1 << n_qubits {
            return Err(Error::Dimension { expected: 1 << n_qubits, got: phases.len() });
        }
        Ok(DiagonalGate { n_qubits, phases })
    }

    pub fn identity(n_qubits: usize) -> DiagonalGate {
        DiagonalGate { n_qubits, phases: vec![0.0; 1 << n_qubits] }
    }

    /// Phase `angle` on states with qubits `a` and `b` both in |1>.
    pub fn controlled_phase(n_qubits: usize, a: usize, b: usize, angle: f64) -> DiagonalGate {
        let ma = 1 << (n_qubits - 1 - a);
        let mb = 1 << (n_qubits - 1 - b);
        let phases = (0..1usize << n_qubits)
            .map(|k| if k & ma != 0 && k & mb != 0 { angle } else { 0.0 })
            .collect();
        DiagonalGate { n_qubits, phases }
    }

    pub fn cz() -> DiagonalGate {
        DiagonalGate::controlled_phase(2, 0, 1, PI)
    }

    pub fn ccz() -> DiagonalGate {
        let mut phases = vec![0.0; 8];
        phases[7] = PI;
        DiagonalGate { n_qubits: 3, phases }
    }

    pub fn then(&self, other: &DiagonalGate) -> DiagonalGate {
        DiagonalGate {
            n_qubits: self.n_qubits,
            phases: self.phases.iter().zip(&other.phases).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn with_rotations(&self, rot: &LocalRotationSet) -> DiagonalGate {
        DiagonalGate {
            n_qubits: self.n_qubits,
            phases: self.phases.iter().enumerate().map(|(k, p)| p + rot.phase(k)).collect(),
        }
    }

    pub fn distance(&self, other: &DiagonalGate) -> f64 {
        phase_distance(&self.phases, &other.phases)
    }

    /// Largest deviation of `self - other` from a product of single-qubit
    /// phase gates (an affine function of the bits), modulo `2 pi`.
    pub fn local_equivalence_error(&self, other: &DiagonalGate) -> f64 {
        let n = self.n_qubits;
        let d: Vec<f64> = self.phases.iter().zip(&other.phases).map(|(a, b)| a - b).collect();
        let w: Vec<f64> = (0..n).map(|q| d[1 << (n - 1 - q)] - d[0]).collect();
        let fit: Vec<f64> = (0..1usize << n)
            .map(|k| d[0] + (0..n).filter(|&q| k >> (n - 1 - q) & 1 == 1).map(|q| w[q]).sum::<f64>())
            .collect();
        phase_distance(&d, &fit)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoQubitSynthesis {
    pub rotations: LocalRotationSet,
    pub vartheta: f64,
}

impl TwoQubitSynthesis {
    /// Gate obtained by applying the rotations after the evolution `table`.
    pub fn gate(&self, table: &PhaseTable) -> DiagonalGate {
        DiagonalGate { n_qubits: 2, phases: table.phases.clone() }.with_rotations(&self.rotations)
    }
}

/// Rotations with `A0 = -Theta00/2` turning the evolution into
/// `diag(1, 1, 1, e^{i vartheta})`.
pub fn solve_rotations_2q(table: &PhaseTable) -> Result<TwoQubitSynthesis> {
    let t = &table.phases;
    if table.n_qubits != 2 || t.len() != 4 {
        return Err(Error::Dimension { expected: 2, got: table.n_qubits });
    }
    solve_rotations_2q_with_gauge(table, -0.5 * t[0])
}

/// As `solve_rotations_2q` with the free parameter `A0` chosen by the caller.
pub fn solve_rotations_2q_with_gauge(table: &PhaseTable, a0: f64) -> Result<TwoQubitSynthesis> {
    let t = &table.phases;
    if table.n_qubits != 2 || t.len() != 4 {
        return Err(Error::Dimension { expected: 2, got: table.n_qubits });
    }
    let b0 = -t[0] - a0;
    let a1 = -t[2] - b0;
    let b1 = -t[1] - a0;
    Ok(TwoQubitSynthesis {
        rotations: LocalRotationSet { pairs: vec![[a0, a1], [b0, b1]], gauge: format!("A0 = {a0}") },
        vartheta: t[3] - t[2] - t[1] + t[0],
    })
}

/// Largest residual of the two-qubit defining system `Theta_ab + A_a + B_b = 0`
/// for `ab != 11`.
pub fn residual_2q(table: &PhaseTable, s: &TwoQubitSynthesis) -> f64 {
    (0..3).map(|k| (table.phases[k] + s.rotations.phase(k)).abs()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThreeQubitSynthesis {
    pub rotations: LocalRotationSet,
    pub vartheta: f64,
    /// `Phi000 + Phi110 - Phi100 - Phi010` and the 101, 011 analogues; these are
    /// the pairwise controlled-phase angles left after the rotations.
    pub residuals: [f64; 3],
    /// Whether the table was combined with its bit complement.
    pub echoed: bool,
}

impl ThreeQubitSynthesis {
    pub fn gate(&self, table: &PhaseTable) -> DiagonalGate {
        let base = if self.echoed { echo_combine(&table.phases) } else { table.phases.clone() };
        DiagonalGate { n_qubits: 3, phases: base }.with_rotations(&self.rotations)
    }
}

/// `Phi_k = Theta_k + Theta_{complement k}`: the phases of `(R G)^2`.
pub fn echo_combine(phases: &[f64]) -> Vec<f64> {
    let mask = phases.len() - 1;
    (0..phases.len()).map(|k| phases[k] + phases[k ^ mask]).collect()
}

/// Three-qubit rotations with `A0 = B0 = C0 = -Phi000/3`. With
/// `with_pi_pulses` the table is first echoed. When `tol_compat` is given the
/// compatibility conditions are enforced (modulo `2 pi`); otherwise their
/// residuals are only reported.
pub fn solve_rotations_3q(
    table: &PhaseTable,
    with_pi_pulses: bool,
    tol_compat: Option<f64>,
) -> Result<ThreeQubitSynthesis> {
    if table.n_qubits != 3 || table.phases.len() != 8 {
        return Err(Error::Dimension { expected: 3, got: table.n_qubits });
    }
    let p = if with_pi_pulses { echo_combine(&table.phases) } else { table.phases.clone() };
    let residuals = [
        p[0] + p[6] - p[4] - p[2],
        p[0] + p[5] - p[4] - p[1],
        p[0] + p[3] - p[2] - p[1],
    ];
    if let Some(tol) = tol_compat {
        if residuals.iter().any(|r| wrap(*r).abs() > tol) {
            return Err(Error::Compatibility { residuals, tol });
        }
    }
    let g0 = -p[0] / 3.0;
    let two_thirds = 2.0 * p[0] / 3.0;
    let rotations = LocalRotationSet {
        pairs: vec![
            [g0, -p[4] + two_thirds],
            [g0, -p[2] + two_thirds],
            [g0, -p[1] + two_thirds],
        ],
        gauge: "A0 = B0 = C0 = -Phi000/3".into(),
    };
    Ok(ThreeQubitSynthesis {
        rotations,
        vartheta: p[7] - p[4] - p[2] - p[1] + 2.0 * p[0],
        residuals,
        echoed: with_pi_pulses,
    })
}

/// Spin-echo rotations: each qubit gets `-v/2` on |0> and `+v/2` on |1>.
pub fn spin_echo_rotations(n_qubits: usize, vartheta: f64) -> LocalRotationSet {
    LocalRotationSet {
        pairs: vec![[-0.5 * vartheta, 0.5 * vartheta]; n_qubits],
        gauge: "spin echo".into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceElement {
    Push { variant: PulseVariant, light_shift_zeroed: bool },
    PiPulseAll,
    LocalRotations(LocalRotationSet),
}

/// Elements in time order (the first element acts first).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    pub n_qubits: usize,
    pub elements: Vec<SequenceElement>,
}

impl PulseSequence {
    fn push(variant: PulseVariant, light_shift_zeroed: bool) -> SequenceElement {
        SequenceElement::Push { variant, light_shift_zeroed }
    }

    /// `S G`.
    pub fn single(rot: LocalRotationSet) -> PulseSequence {
        PulseSequence {
            n_qubits: rot.n_qubits(),
            elements: vec![
                Self::push(PulseVariant::Normal, false),
                SequenceElement::LocalRotations(rot),
            ],
        }
    }

    /// `S' (R G)^2`.
    pub fn spin_echo(rot: LocalRotationSet) -> PulseSequence {
        PulseSequence {
            n_qubits: rot.n_qubits(),
            elements: vec![
                Self::push(PulseVariant::Normal, false),
                SequenceElement::PiPulseAll,
                Self::push(PulseVariant::Normal, false),
                SequenceElement::PiPulseAll,
                SequenceElement::LocalRotations(rot),
            ],
        }
    }

    /// `S G_b G_r`: second pulse with reversed detuning.
    pub fn detuning_swap(rot: LocalRotationSet) -> PulseSequence {
        PulseSequence {
            n_qubits: rot.n_qubits(),
            elements: vec![
                Self::push(PulseVariant::Normal, false),
                Self::push(PulseVariant::DetuningFlipped, false),
                SequenceElement::LocalRotations(rot),
            ],
        }
    }

    /// `S G_+ G_-`: second pulse pushes the other way; light shift zeroed.
    pub fn force_swap(rot: LocalRotationSet) -> PulseSequence {
        PulseSequence {
            n_qubits: rot.n_qubits(),
            elements: vec![
                Self::push(PulseVariant::Normal, true),
                Self::push(PulseVariant::SignFlipped, true),
                SequenceElement::LocalRotations(rot),
            ],
        }
    }

    pub fn push_count(&self) -> usize {
        self.elements.iter().filter(|e| matches!(e, SequenceElement::Push { .. })).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceOutcome {
    Diagonal(DiagonalGate),
    /// Input basis state `k` ends in state `map[k]` with phase `phases[k]`.
    Permuted { n_qubits: usize, map: Vec<usize>, phases: Vec<f64> },
}

impl SequenceOutcome {
    pub fn diagonal(&self) -> Option<&DiagonalGate> {
        match self {
            SequenceOutcome::Diagonal(g) => Some(g),
            SequenceOutcome::Permuted { .. } => None,
        }
    }
}

/// Net action of `seq` with one phase table per push element, in order.
pub fn compose_sequence(seq: &PulseSequence, tables: &[&PhaseTable]) -> Result<SequenceOutcome> {
    if seq.elements.is_empty() {
        return Err(Error::Input("pulse sequence is empty".into()));
    }
    if tables.len() != seq.push_count() {
        return Err(Error::Input(format!(
            "{} tables supplied for {} push elements",
            tables.len(),
            seq.push_count()
        )));
    }
    let n = seq.n_qubits;
    let dim = 1usize << n;
    let mut map: Vec<usize> = (0..dim).collect();
    let mut phases = vec![0.0; dim];
    let mut next = tables.iter();
    for (i, el) in seq.elements.iter().enumerate() {
        match el {
            SequenceElement::Push { variant, light_shift_zeroed } => {
                let t = next.next().expect("table count checked above");
                if t.n_qubits != n {
                    return Err(Error::Dimension { expected: n, got: t.n_qubits });
                }
                if t.metadata.variant != *variant {
                    return Err(Error::Input(format!(
                        "element {i} expects a {variant:?} push, table is {:?}",
                        t.metadata.variant
                    )));
                }
                if *light_shift_zeroed && !t.metadata.light_shift_zeroed {
                    return Err(Error::Input(format!(
                        "element {i} expects the light shift zeroed"
                    )));
                }
                for k in 0..dim {
                    phases[k] += t.phases[map[k]];
                }
            }
            SequenceElement::PiPulseAll => {
                for m in map.iter_mut() {
                    *m ^= dim - 1;
                }
            }
            SequenceElement::LocalRotations(rot) => {
                if rot.n_qubits() != n {
                    return Err(Error::Dimension { expected: n, got: rot.n_qubits() });
                }
                for k in 0..dim {
                    phases[k] += rot.phase(map[k]);
                }
            }
        }
    }
    if map.iter().enumerate().all(|(k, &m)| k == m) {
        Ok(SequenceOutcome::Diagonal(DiagonalGate { n_qubits: n, phases }))
    } else {
        Ok(SequenceOutcome::Permuted { n_qubits: n, map, phases })
    }
}

/// Linear combination of phase-table entries with coefficients in units of
/// 1/6, so that the identities of the phase algebra can be checked exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseForm {
    pub sixths: Vec<i64>,
}

impl PhaseForm {
    pub fn zero(len: usize) -> PhaseForm {
        PhaseForm { sixths: vec![0; len] }
    }

    pub fn entry(len: usize, k: usize) -> PhaseForm {
        let mut f = PhaseForm::zero(len);
        f.sixths[k] = 6;
        f
    }

    pub fn plus(&self, o: &PhaseForm) -> PhaseForm {
        PhaseForm { sixths: self.sixths.iter().zip(&o.sixths).map(|(a, b)| a + b).collect() }
    }

    pub fn minus(&self, o: &PhaseForm) -> PhaseForm {
        PhaseForm { sixths: self.sixths.iter().zip(&o.sixths).map(|(a, b)| a - b).collect() }
    }

    pub fn scaled(&self, num: i64, den: i64) -> PhaseForm {
        assert!(self.sixths.iter().all(|c| (c * num) % den == 0), "coefficient leaves 1/6 grid");
        PhaseForm { sixths: self.sixths.iter().map(|c| c * num / den).collect() }
    }

    pub fn evaluate(&self, phases: &[f64]) -> f64 {
        self.sixths.iter().zip(phases).map(|(c, p)| *c as f64 * p).sum::<f64>() / 6.0
    }

    /// `Theta11 - Theta10 - Theta01 + Theta00` on a four-entry table.
    pub fn overall_2q() -> PhaseForm {
        PhaseForm { sixths: vec![6, -6, -6, 6] }
    }
}

/// Gate phases of `S' (R G)^2` for a symbolic two-qubit table, with `S'` built
/// from the symbolic overall phase.
pub fn spin_echo_forms_2q() -> Vec<PhaseForm> {
    let e = |k| PhaseForm::entry(4, k);
    let v = PhaseForm::overall_2q();
    let half = v.scaled(1, 2);
    (0..4)
        .map(|k: usize| {
            let echoed = e(k).plus(&e(k ^ 3));
            let (a, b) = ((k >> 1) & 1, k & 1);
            let rot = |bit| if bit == 1 { half.clone() } else { half.scaled(-1, 1) };
            echoed.plus(&rot(a)).plus(&rot(b))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DfsGeometry {
    /// Two pairs in a line; only the central two ions are pushed.
    LinearA,
    /// Pairs side by side; each ion is pushed against its partner in the other pair.
    SymmetricB,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DfsReport {
    pub geometry: DfsGeometry,
    /// Phases of logical |00>, |01>, |10>, |11> before logical rotations.
    pub logical_phases: [f64; 4],
    /// `P11 - P10 - P01 + P00`.
    pub logical_vartheta: f64,
    /// Logical gate after logical rotations.
    pub logical_gate: DiagonalGate,
    /// Distance of `logical_gate` from CZ.
    pub cz_error: f64,
    /// `logical_vartheta` as an exact combination of the physical table entries.
    pub logical_form: PhaseForm,
    /// Whether `logical_form` is exactly twice the physical overall-phase form.
    pub doubles_physical_phase: bool,
}

fn logical_index_linear(la: usize, lb: usize) -> usize {
    // Ions (a1, a2, b1, b2); |0>_L = |01>, |1>_L = |10>.
    let bits = [la, 1 - la, lb, 1 - lb];
    bits.iter().fold(0, |acc, &b| (acc << 1) | b)
}

/// Logical-subspace check for the two encoded-gate geometries.
///
/// `LinearA` takes one four-qubit table for the pushed central pair.
/// `SymmetricB` takes one two-qubit table shared by both pushed pairs, or two
/// tables (first pair, second pair).
pub fn dfs_gate_check(geometry: DfsGeometry, tables: &[&PhaseTable]) -> Result<DfsReport> {
    let (logical, form) = match geometry {
        DfsGeometry::LinearA => {
            let [t] = tables else {
                return Err(Error::Input("linear geometry takes one four-qubit table".into()));
            };
            if t.n_qubits != 4 {
                return Err(Error::Dimension { expected: 4, got: t.n_qubits });
            }
            let idx = |la, lb| logical_index_linear(la, lb);
            let logical = [t.phases[idx(0, 0)], t.phases[idx(0, 1)], t.phases[idx(1, 0)], t.phases[idx(1, 1)]];
            let e = |k| PhaseForm::entry(16, k);
            let form = e(idx(1, 1)).minus(&e(idx(1, 0))).minus(&e(idx(0, 1))).plus(&e(idx(0, 0)));
            (logical, form)
        }
        DfsGeometry::SymmetricB => {
            let (t1, t2) = match tables {
                [t] => (*t, *t),
                [t1, t2] => (*t1, *t2),
                _ => return Err(Error::Input("symmetric geometry takes one or two tables".into())),
            };
            for t in [t1, t2] {
                if t.n_qubits != 2 {
                    return Err(Error::Dimension { expected: 2, got: t.n_qubits });
                }
            }
            // Logical (LA, LB): ions a1 = 1-LA... a1 pairs with b1, a2 with b2.
            let phase = |la: usize, lb: usize| {
                let (a1, a2, b1, b2) = (la, 1 - la, lb, 1 - lb);
                t1.phases[(a1 << 1) | b1] + t2.phases[(a2 << 1) | b2]
            };
            let logical = [phase(0, 0), phase(0, 1), phase(1, 0), phase(1, 1)];
            // Symbolic version with both pushes drawn from one four-entry table.
            let e = |k| PhaseForm::entry(4, k);
            let pf = |la: usize, lb: usize| {
                let (a1, a2, b1, b2) = (la, 1 - la, lb, 1 - lb);
                e((a1 << 1) | b1).plus(&e((a2 << 1) | b2))
            };
            let form = pf(1, 1).minus(&pf(1, 0)).minus(&pf(0, 1)).plus(&pf(0, 0));
            (logical, form)
        }
    };
    if logical.iter().any(|p| !p.is_finite()) {
        return Err(Error::Encoding("non-finite logical phase".into()));
    }
    let logical_vartheta = logical[3] - logical[2] - logical[1] + logical[0];
    let logical_table = PhaseTable::from_phases(2, logical.to_vec())?;
    let synth = solve_rotations_2q(&logical_table)?;
    // For LinearA the logical Z on the second qubit is one of these local
    // rotations, so it is absorbed here.
    let gate = synth.gate(&logical_table);
    let doubles = match geometry {
        DfsGeometry::SymmetricB => form == PhaseForm::overall_2q().scaled(2, 1),
        DfsGeometry::LinearA => false,
    };
    Ok(DfsReport {
        geometry,
        logical_phases: logical,
        logical_vartheta,
        cz_error: gate.distance(&DiagonalGate::cz()),
        logical_gate: gate,
        logical_form: form,
        doubles_physical_phase: doubles,
    })
}

/// Reject outcomes that move population out of the encoded subspace
/// (`n_pairs` pairs, |0>_L = |01>, |1>_L = |10>).
pub fn check_dfs_leakage(outcome: &SequenceOutcome, n_pairs: usize) -> Result<()> {
    let in_dfs = |k: usize| {
        (0..n_pairs).all(|p| {
            let shift = 2 * (n_pairs - 1 - p);
            let pair = (k >> shift) & 3;
            pair == 1 || pair == 2
        })
    };
    match outcome {
        SequenceOutcome::Diagonal(_) => Ok(()),
        SequenceOutcome::Permuted { map, .. } => {
            for (k, &m) in map.iter().enumerate() {
                if in_dfs(k) && !in_dfs(m) {
                    return Err(Error::Encoding(format!(
                        "logical basis state {k:b} is mapped to {m:b} outside the subspace"
                    )));
                }
            }
            Ok(())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub n_qubits: usize,
    pub amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn basis(n_qubits: usize, k: usize) -> Result<StateVector> {
        if n_qubits == 0 || n_qubits > 4 || k >= 1 << n_qubits {
            return Err(Error::Input(format!("basis state {k} invalid for {n_qubits} qubits")));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amplitudes[k] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amplitudes })
    }

    pub fn new(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<StateVector> {
        if n_qubits == 0 || n_qubits > 4 {
            return Err(Error::Input(format!("state vectors hold 1..=4 qubits, got {n_qubits}")));
        }
        if amplitudes.len() != 1 << n_qubits {
            return Err(Error::Dimension { expected: 1 << n_qubits, got: amplitudes.len() });
        }
        let s = StateVector { n_qubits, amplitudes };
        if (s.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Input(format!("state norm {} differs from 1", s.norm())));
        }
        Ok(s)
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gate {
    Diagonal(DiagonalGate),
    Hadamard(usize),
    PauliX(usize),
    PiPulseAll,
    ControlledPhase { a: usize, b: usize, angle: f64 },
}

pub fn apply_gate(state: &StateVector, gate: &Gate) -> Result<StateVector> {
    let n = state.n_qubits;
    let dim = 1usize << n;
    let amp = &state.amplitudes;
    let check_qubit = |q: usize| {
        if q >= n {
            Err(Error::Dimension { expected: n, got: q + 1 })
        } else {
            Ok(1usize << (n - 1 - q))
        }
    };
    let out = match gate {
        Gate::Diagonal(g) => {
            if g.n_qubits != n {
                return Err(Error::Dimension { expected: n, got: g.n_qubits });
            }
            amp.iter().zip(&g.phases).map(|(a, p)| a * Complex64::from_polar(1.0, *p)).collect()
        }
        Gate::ControlledPhase { a, b, angle } => {
            let (ma, mb) = (check_qubit(*a)?, check_qubit(*b)?);
            (0..dim)
                .map(|k| {
                    if k & ma != 0 && k & mb != 0 {
                        amp[k] * Complex64::from_polar(1.0, *angle)
                    } else {
                        amp[k]
                    }
                })
                .collect()
        }
        Gate::Hadamard(q) => {
            let m = check_qubit(*q)?;
            let s = std::f64::consts::FRAC_1_SQRT_2;
            (0..dim)
                .map(|k| {
                    if k & m == 0 {
                        (amp[k] + amp[k | m]) * s
                    } else {
                        (amp[k & !m] - amp[k]) * s
                    }
                })
                .collect()
        }
        Gate::PauliX(q) => {
            let m = check_qubit(*q)?;
            (0..dim).map(|k| amp[k ^ m]).collect()
        }
        Gate::PiPulseAll => (0..dim).map(|k| amp[k ^ (dim - 1)]).collect(),
    };
    Ok(StateVector { n_qubits: n, amplitudes: out })
}

/// Columns of the unitary realised by `gates` (applied in order).
pub fn circuit_unitary(n_qubits: usize, gates: &[Gate]) -> Result<Vec<Vec<Complex64>>> {
    (0..1usize << n_qubits)
        .map(|k| {
            let mut s = StateVector::basis(n_qubits, k)?;
            for g in gates {
                s = apply_gate(&s, g)?;
            }
            Ok(s.amplitudes)
        })
        .collect()
}

/// Diagonal phases of a unitary given by columns, if it is diagonal within `tol`.
pub fn as_diagonal(n_qubits: usize, columns: &[Vec<Complex64>], tol: f64) -> Option<DiagonalGate> {
    let mut phases = Vec::with_capacity(columns.len());
    for (k, col) in columns.iter().enumerate() {
        for (j, a) in col.iter().enumerate() {
            if j != k && a.norm() > tol {
                return None;
            }
        }
        if (col[k].norm() - 1.0).abs() > tol {
            return None;
        }
        phases.push(col[k].arg());
    }
    Some(DiagonalGate { n_qubits, phases })
}

/// CNOT from `c` to `t` as `H_t CZ H_t`.
pub fn cnot_via_cz(c: usize, t: usize) -> Vec<Gate> {
    vec![
        Gate::Hadamard(t),
        Gate::ControlledPhase { a: c, b: t, angle: PI },
        Gate::Hadamard(t),
    ]
}

/// Ideal phases after the three simultaneous pushes and their local
/// rotations: `CP12(theta) CP23(theta) CP13(theta/8)`.
pub fn toffoli_stage(theta: f64) -> DiagonalGate {
    DiagonalGate::controlled_phase(3, 0, 1, theta)
        .then(&DiagonalGate::controlled_phase(3, 1, 2, theta))
        .then(&DiagonalGate::controlled_phase(3, 0, 2, theta / 8.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CczNetwork {
    pub theta: f64,
    pub stage: DiagonalGate,
    pub gates: Vec<Gate>,
    pub net: DiagonalGate,
    /// Distance of `net` from CCZ.
    pub ccz_error: f64,
}

/// Network gates following the push stage: CNOT(1->2), CP23(3 theta/8),
/// CNOT(1->2), CP23(5 theta/8).
pub fn network_gates(theta: f64) -> Vec<Gate> {
    let mut g = cnot_via_cz(0, 1);
    g.push(Gate::ControlledPhase { a: 1, b: 2, angle: 3.0 * theta / 8.0 });
    g.extend(cnot_via_cz(0, 1));
    g.push(Gate::ControlledPhase { a: 1, b: 2, angle: 5.0 * theta / 8.0 });
    g
}

pub fn ccz_network(theta: f64) -> Result<CczNetwork> {
    ccz_network_from_stage(&toffoli_stage(theta), theta)
}

/// Network with an externally supplied push stage (for example a simulated one).
pub fn ccz_network_from_stage(stage: &DiagonalGate, theta: f64) -> Result<CczNetwork> {
    if stage.n_qubits != 3 {
        return Err(Error::Dimension { expected: 3, got: stage.n_qubits });
    }
    let mut gates = vec![Gate::Diagonal(stage.clone())];
    gates.extend(network_gates(theta));
    let cols = circuit_unitary(3, &gates)?;
    let net = as_diagonal(3, &cols, 1e-12)
        .ok_or_else(|| Error::Synthesis("network output is not diagonal".into()))?;
    Ok(CczNetwork {
        theta,
        stage: stage.clone(),
        ccz_error: net.distance(&DiagonalGate::ccz()),
        gates: gates[1..].to_vec(),
        net,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimingMode {
    /// All pushes use the same force; gate time scales with the phase needed.
    FixedForce,
    /// Every push lasts `tau`; forces are adjusted.
    FixedDuration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub mode: TimingMode,
    pub with_pi_pulses: bool,
    /// Stage name and duration in units of the adjacent-pair CZ time `tau`.
    pub stages: Vec<(String, f64)>,
    pub total: f64,
}

/// Duration of the three-qubit network in units of `tau`.
pub fn timing_report(mode: TimingMode, with_pi_pulses: bool) -> TimingReport {
    let push_stage: Vec<(String, f64)> = match (mode, with_pi_pulses) {
        (TimingMode::FixedForce, false) => vec![("G (theta = 4 pi)".into(), 4.0)],
        (TimingMode::FixedForce, true) => {
            vec![("G (first half)".into(), 2.0), ("G (second half)".into(), 2.0)]
        }
        (TimingMode::FixedDuration, false) => vec![("G".into(), 1.0)],
        (TimingMode::FixedDuration, true) => {
            vec![("G (first half)".into(), 1.0), ("G (second half)".into(), 1.0)]
        }
    };
    let rest: Vec<(String, f64)> = match mode {
        TimingMode::FixedForce => vec![
            ("CNOT(1->2)".into(), 1.0),
            ("CP23(3 pi/2)".into(), 1.5),
            ("CNOT(1->2)".into(), 1.0),
            ("CP23(5 pi/2 = pi/2)".into(), 0.5),
        ],
        TimingMode::FixedDuration => vec![
            ("CNOT(1->2)".into(), 1.0),
            ("CP23".into(), 1.0),
            ("CNOT(1->2)".into(), 1.0),
            ("CP23".into(), 1.0),
        ],
    };
    let stages: Vec<(String, f64)> = push_stage.into_iter().chain(rest).collect();
    let total = stages.iter().map(|s| s.1).sum();
    TimingReport { mode, with_pi_pulses, stages, total }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_ignores_global_phase() {
        let a = [0.0, 1.0, 2.0, 3.0];
        let b = [0.5, 1.5, 2.5, 3.5];
        assert!(phase_distance(&a, &b) < 1e-15);
        let c = [0.0, 0.0, 0.0, PI];
        assert!((phase_distance(&c, &[0.0; 4]) - PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn cz_on_state_vectors() {
        let s = StateVector::basis(2, 3).unwrap();
        let out = apply_gate(&s, &Gate::Diagonal(DiagonalGate::cz())).unwrap();
        assert!((out.amplitudes[3] + Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let mut s = StateVector::basis(2, 2).unwrap();
        for g in cnot_via_cz(0, 1) {
            s = apply_gate(&s, &g).unwrap();
        }
        assert!((s.amplitudes[3].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn two_qubit_solver_examples() {
        let t = PhaseTable::from_phases(2, vec![0.0, 0.0, 0.0, PI]).unwrap();
        let s = solve_rotations_2q(&t).unwrap();
        assert!(s.rotations.pairs.iter().flatten().all(|v| *v == 0.0));
        assert_eq!(s.vartheta, PI);
        let t = PhaseTable::from_phases(2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(solve_rotations_2q(&t).unwrap().vartheta, 0.0);
    }

    #[test]
    fn three_qubit_solver_on_quadratic_form() {
        let theta = 0.9;
        let p: Vec<f64> = (0..8)
            .map(|k| {
                let (a, b, c) = (((k >> 2) & 1) as f64, ((k >> 1) & 1) as f64, (k & 1) as f64);
                -0.5 * theta * ((a - b).powi(2) + (b - c).powi(2) + (a - c).powi(2) / 8.0)
            })
            .collect();
        let t = PhaseTable::from_phases(3, p).unwrap();
        let s = solve_rotations_3q(&t, false, None).unwrap();
        // Residuals are the pairwise controlled phases theta, theta/8, theta.
        assert!((s.residuals[0] - theta).abs() < 1e-15);
        assert!((s.residuals[1] - theta / 8.0).abs() < 1e-15);
        assert!((s.residuals[2] - theta).abs() < 1e-15);
        assert!((s.vartheta - 17.0 * theta / 8.0).abs() < 1e-14);
        let g = s.gate(&t);
        assert!(g.distance(&toffoli_stage(theta)) < 1e-14);
        assert!(matches!(
            solve_rotations_3q(&t, false, Some(1e-2)),
            Err(Error::Compatibility { .. })
        ));
    }

    #[test]
    fn compatibility_residual_from_single_entry() {
        let mut p = vec![0.0; 8];
        p[6] = 0.1;
        let t = PhaseTable::from_phases(3, p).unwrap();
        match solve_rotations_3q(&t, false, Some(1e-2)) {
            Err(Error::Compatibility { residuals, .. }) => {
                assert!((residuals[0] - 0.1).abs() < 1e-15);
                assert_eq!(residuals[1], 0.0);
                assert_eq!(residuals[2], 0.0);
            }
            other => panic!("expected compatibility error, got {other:?}"),
        }
        let z = PhaseTable::from_phases(3, vec![0.0; 8]).unwrap();
        let s = solve_rotations_3q(&z, false, Some(1e-2)).unwrap();
        assert_eq!(s.vartheta, 0.0);
        assert!(s.rotations.pairs.iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn pi_pulse_variant_phase() {
        let p: Vec<f64> = (0..8).map(|k| (k * k) as f64 * 0.1 + 0.3).collect();
        let t = PhaseTable::from_phases(3, p.clone()).unwrap();
        let s = solve_rotations_3q(&t, true, None).unwrap();
        let rest: f64 = (1..7).map(|k| p[k]).sum();
        assert!((s.vartheta - (3.0 * (p[0] + p[7]) - rest)).abs() < 1e-12);
        assert!((s.rotations.pairs[0][0] + (p[0] + p[7]) / 3.0).abs() < 1e-15);
    }

    #[test]
    fn toffoli_network_at_four_pi() {
        let net = ccz_network(4.0 * PI).unwrap();
        assert!(net.ccz_error < 1e-10, "{}", net.ccz_error);
        let cp13 = DiagonalGate::controlled_phase(3, 0, 2, PI / 2.0);
        assert!(net.stage.local_equivalence_error(&cp13) < 1e-10);
        let zero = ccz_network(0.0).unwrap();
        assert!(zero.net.distance(&DiagonalGate::identity(3)) < 1e-12);
    }

    #[test]
    fn timing_totals() {
        assert_eq!(timing_report(TimingMode::FixedForce, false).total, 8.0);
        assert_eq!(timing_report(TimingMode::FixedDuration, false).total, 5.0);
        let pi = timing_report(TimingMode::FixedForce, true);
        assert!(pi.stages.iter().filter(|s| s.0.starts_with('G')).all(|s| s.1 == 2.0));
    }

    #[test]
    fn symmetric_dfs_doubles_phase() {
        let t = PhaseTable::from_phases(2, vec![0.0, 0.0, 0.0, PI / 2.0]).unwrap();
        let r = dfs_gate_check(DfsGeometry::SymmetricB, &[&t]).unwrap();
        assert!(r.doubles_physical_phase);
        assert!((r.logical_vartheta - PI).abs() < 1e-15);
        assert!(r.cz_error < 1e-15);
        let flat = PhaseTable::from_phases(2, vec![0.7; 4]).unwrap();
        let r = dfs_gate_check(DfsGeometry::SymmetricB, &[&flat]).unwrap();
        assert!(r.logical_gate.distance(&DiagonalGate::identity(2)) < 1e-15);
    }
}
