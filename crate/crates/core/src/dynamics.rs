//! Classical motion of a short ion chain under state-selective force pulses.
//!
//! All quantities are in natural units: lengths in `a`, time in `1/omega`,
//! energy in `hbar omega`, unit ion mass. Positions are written as
//! `x_i = e_i + u_i` with `e_i` the equilibrium position. The equations of
//! motion use the exact Coulomb interaction with the equilibrium force
//! subtracted analytically, so that no large cancelling terms appear.

use serde::{Deserialize, Serialize};

use crate::error::{require_finite, require_positive, Error, Result};
use crate::ode::{self, Dopri5Options, OdeSystem, StepStats};
use crate::statics::EquilibriumSolution;
use crate::units::UnitScales;

/// Equilibrium geometry and Coulomb strength of a linear chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    /// `ell / (a hbar omega)`.
    kappa: f64,
    /// Equilibrium positions `e_i`, strictly increasing.
    equilibrium: Vec<f64>,
    /// Trap centres from force balance at equilibrium.
    trap_centres: Vec<f64>,
}

impl Chain {
    /// Chain with the given equilibrium positions; trap centres follow from
    /// force balance `e_i - c_i = F_i^Coulomb`.
    pub fn new(kappa: f64, equilibrium: Vec<f64>) -> Result<Chain> {
        require_finite("kappa", kappa)?;
        if kappa < 0.0 {
            return Err(Error::Domain(format!("kappa must be non-negative, got {kappa}")));
        }
        if equilibrium.is_empty() || equilibrium.len() > 4 {
            return Err(Error::Domain(format!(
                "chain length must lie in 1..=4, got {}",
                equilibrium.len()
            )));
        }
        for w in equilibrium.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Domain("equilibrium positions must increase".into()));
            }
        }
        let n = equilibrium.len();
        let mut trap_centres = equilibrium.clone();
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let sep = equilibrium[i] - equilibrium[j];
                trap_centres[i] -= kappa * sep.signum() / (sep * sep);
            }
        }
        Ok(Chain { kappa, equilibrium, trap_centres })
    }

    /// Equally spaced chain with neighbour separation `d_over_a`, centred on
    /// zero, with `kappa = epsilon D^3 / 4`.
    pub fn uniform(n_ions: usize, epsilon: f64, d_over_a: f64) -> Result<Chain> {
        require_positive("d/a", d_over_a)?;
        require_finite("epsilon", epsilon)?;
        if !(0.0..=2.0).contains(&epsilon) {
            return Err(Error::Domain(format!("epsilon must lie in [0, 2], got {epsilon}")));
        }
        let mid = 0.5 * (n_ions as f64 - 1.0);
        let e = (0..n_ions).map(|i| (i as f64 - mid) * d_over_a).collect();
        Chain::new(epsilon * d_over_a.powi(3) / 4.0, e)
    }

    /// Two-ion chain for a solved SI equilibrium.
    pub fn from_equilibrium(eq: &EquilibriumSolution, scales: &UnitScales) -> Result<Chain> {
        let d = scales.length_from_si(eq.d);
        Chain::new(scales.kappa(), vec![-0.5 * d, 0.5 * d])
    }

    pub fn n_ions(&self) -> usize {
        self.equilibrium.len()
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn equilibrium(&self) -> &[f64] {
        &self.equilibrium
    }

    pub fn trap_centres(&self) -> &[f64] {
        &self.trap_centres
    }

    /// Separation of the first neighbour pair (units of `a`).
    pub fn neighbour_separation(&self) -> f64 {
        if self.n_ions() < 2 {
            return f64::INFINITY;
        }
        self.equilibrium[1] - self.equilibrium[0]
    }

    /// `4 kappa / D^3` for the first neighbour pair.
    pub fn epsilon(&self) -> f64 {
        let d = self.neighbour_separation();
        4.0 * self.kappa / (d * d * d)
    }

    /// Relative-mode frequency of a two-ion chain, `sqrt(1 + epsilon)`.
    pub fn relative_frequency(&self) -> f64 {
        (1.0 + self.epsilon()).sqrt()
    }

    /// Potential energy at equilibrium: trap offsets plus pair Coulomb energies.
    pub fn static_energy(&self) -> f64 {
        let mut v = 0.0;
        for i in 0..self.n_ions() {
            let s = self.equilibrium[i] - self.trap_centres[i];
            v += 0.5 * s * s;
            for j in i + 1..self.n_ions() {
                v += self.kappa / (self.equilibrium[j] - self.equilibrium[i]);
            }
        }
        v
    }

    /// Motional energy relative to equilibrium for displacements `u`, momenta `p`.
    pub fn motional_energy(&self, u: &[f64], p: &[f64]) -> f64 {
        let n = self.n_ions();
        let mut e = 0.0;
        for i in 0..n {
            e += 0.5 * (p[i] * p[i] + u[i] * u[i]);
            for j in i + 1..n {
                let de = self.equilibrium[j] - self.equilibrium[i];
                let du = u[j] - u[i];
                e += self.kappa * du * du / (de * de * (de + du));
            }
        }
        e
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PulseShape {
    #[default]
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PulseVariant {
    #[default]
    Normal,
    /// Push direction reversed; the light shift is unchanged.
    SignFlipped,
    /// Laser detuning reversed; force and light shift both change sign.
    DetuningFlipped,
}

/// State-selective force pulse in natural units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForcePulse {
    /// Peak force `a F0 / (hbar omega)`.
    pub xi: f64,
    /// Gaussian width `omega tau`.
    pub omega_tau: f64,
    /// Centre time (units of `1/omega`).
    pub t_center: f64,
    /// Half window length in units of `tau`.
    pub window_factor: f64,
    /// +1 pushes towards +x.
    pub direction: f64,
    /// +1 or -1 for the two detuning signs.
    pub detuning: f64,
    /// Light-shift offsets `s_i` (units of `a`), one per ion.
    pub light_shift: Vec<f64>,
    /// Ions addressed by the beam.
    pub targets: Vec<bool>,
    pub shape: PulseShape,
}

impl ForcePulse {
    /// Pulse on all `n_ions` ions, centred at zero, window `5 tau`, no light shift.
    pub fn new(n_ions: usize, xi: f64, omega_tau: f64) -> ForcePulse {
        ForcePulse {
            xi,
            omega_tau,
            t_center: 0.0,
            window_factor: 5.0,
            direction: 1.0,
            detuning: 1.0,
            light_shift: vec![0.0; n_ions],
            targets: vec![true; n_ions],
            shape: PulseShape::Gaussian,
        }
    }

    pub fn validate(&self, n_ions: usize) -> Result<()> {
        require_finite("xi", self.xi)?;
        require_positive("omega tau", self.omega_tau)?;
        require_finite("pulse centre", self.t_center)?;
        if !(self.window_factor >= 4.0) || !self.window_factor.is_finite() {
            return Err(Error::Domain(format!(
                "window factor must be at least 4, got {}",
                self.window_factor
            )));
        }
        for (name, v) in [("direction", self.direction), ("detuning", self.detuning)] {
            if v != 1.0 && v != -1.0 {
                return Err(Error::Domain(format!("{name} must be +1 or -1, got {v}")));
            }
        }
        if self.light_shift.len() != n_ions {
            return Err(Error::Dimension { expected: n_ions, got: self.light_shift.len() });
        }
        if self.targets.len() != n_ions {
            return Err(Error::Dimension { expected: n_ions, got: self.targets.len() });
        }
        for &s in &self.light_shift {
            require_finite("light-shift offset", s)?;
        }
        Ok(())
    }

    pub fn variant(&self, v: PulseVariant) -> ForcePulse {
        let mut p = self.clone();
        match v {
            PulseVariant::Normal => {}
            PulseVariant::SignFlipped => p.direction = -p.direction,
            PulseVariant::DetuningFlipped => p.detuning = -p.detuning,
        }
        p
    }

    pub fn without_light_shift(&self) -> ForcePulse {
        let mut p = self.clone();
        p.light_shift.iter_mut().for_each(|s| *s = 0.0);
        p
    }

    pub fn envelope(&self, t: f64) -> f64 {
        match self.shape {
            PulseShape::Gaussian => {
                let s = (t - self.t_center) / self.omega_tau;
                (-s * s).exp()
            }
        }
    }

    /// Signed force on an addressed ion in state |1> (units `hbar omega / a`).
    pub fn force_at(&self, t: f64) -> f64 {
        self.direction * self.detuning * self.xi * self.envelope(t)
    }

    /// `force_at` converted to newtons, with `t` in seconds.
    pub fn force_at_si(&self, scales: &UnitScales, t: f64) -> f64 {
        scales.force_to_si(self.force_at(scales.time_from_si(t)))
    }

    /// Light-shift energy of ion `i` in state |1> (units `hbar omega`).
    pub fn light_shift_at(&self, i: usize, t: f64) -> f64 {
        self.light_shift[i] * self.detuning * self.xi * self.envelope(t)
    }

    pub fn window(&self) -> (f64, f64) {
        let half = self.window_factor * self.omega_tau;
        (self.t_center - half, self.t_center + half)
    }
}

/// Computational-basis branch; bit `i` is the internal state of ion `i`,
/// ion 0 being the most significant bit of `index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Branch {
    pub n: usize,
    pub index: usize,
}

impl Branch {
    pub fn new(n: usize, index: usize) -> Result<Branch> {
        if n == 0 || n > 4 || index >= 1 << n {
            return Err(Error::Input(format!("branch {index} invalid for {n} qubits")));
        }
        Ok(Branch { n, index })
    }

    pub fn from_bits(bits: &[u8]) -> Result<Branch> {
        let mut index = 0;
        for &b in bits {
            if b > 1 {
                return Err(Error::Input(format!("bit value {b} is not 0 or 1")));
            }
            index = (index << 1) | b as usize;
        }
        Branch::new(bits.len(), index)
    }

    pub fn bit(&self, i: usize) -> u8 {
        ((self.index >> (self.n - 1 - i)) & 1) as u8
    }

    pub fn all(n: usize) -> impl Iterator<Item = Branch> {
        (0..1usize << n).map(move |index| Branch { n, index })
    }

    pub fn label(&self) -> String {
        (0..self.n).map(|i| char::from(b'0' + self.bit(i))).collect()
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeExcitation {
    /// Oscillation energy (units `hbar omega`).
    pub energy: f64,
    /// Phase at the start of the window (rad).
    pub phase: f64,
}

impl ModeExcitation {
    pub const REST: ModeExcitation = ModeExcitation { energy: 0.0, phase: 0.0 };

    fn validate(&self) -> Result<()> {
        if !(self.energy >= 0.0) || !self.energy.is_finite() {
            return Err(Error::Domain(format!("mode energy must be >= 0, got {}", self.energy)));
        }
        if !(0.0..std::f64::consts::TAU).contains(&self.phase) {
            return Err(Error::Domain(format!("mode phase must lie in [0, 2pi), got {}", self.phase)));
        }
        Ok(())
    }
}

/// Motional state at the start of the pulse window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialConditions {
    Rest,
    /// Two ions: centre-of-mass mode at `omega`, relative mode at `omega sqrt(1+eps)`.
    TwoIonModes { com: ModeExcitation, relative: ModeExcitation },
    /// One local oscillator at `omega` per ion.
    LocalModes(Vec<ModeExcitation>),
    /// Raw displacements from equilibrium and momenta.
    PhaseSpace { displacement: Vec<f64>, momentum: Vec<f64> },
}

impl InitialConditions {
    /// Displacements and momenta at the start of the window.
    pub fn phase_space(&self, chain: &Chain) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = chain.n_ions();
        match self {
            InitialConditions::Rest => Ok((vec![0.0; n], vec![0.0; n])),
            InitialConditions::TwoIonModes { com, relative } => {
                if n != 2 {
                    return Err(Error::Dimension { expected: 2, got: n });
                }
                com.validate()?;
                relative.validate()?;
                // M = 2, mu = 1/2 in units of the ion mass.
                let a_com = com.energy.sqrt();
                let wr = chain.relative_frequency();
                let a_rel = 2.0 * relative.energy.sqrt() / wr;
                let r_com = a_com * com.phase.cos();
                let v_com = -a_com * com.phase.sin();
                let r_rel = a_rel * relative.phase.cos();
                let v_rel = -wr * a_rel * relative.phase.sin();
                Ok((
                    vec![r_com - 0.5 * r_rel, r_com + 0.5 * r_rel],
                    vec![v_com - 0.5 * v_rel, v_com + 0.5 * v_rel],
                ))
            }
            InitialConditions::LocalModes(modes) => {
                if modes.len() != n {
                    return Err(Error::Dimension { expected: n, got: modes.len() });
                }
                let mut u = Vec::with_capacity(n);
                let mut p = Vec::with_capacity(n);
                for m in modes {
                    m.validate()?;
                    let amp = (2.0 * m.energy).sqrt();
                    u.push(amp * m.phase.cos());
                    p.push(-amp * m.phase.sin());
                }
                Ok((u, p))
            }
            InitialConditions::PhaseSpace { displacement, momentum } => {
                if displacement.len() != n {
                    return Err(Error::Dimension { expected: n, got: displacement.len() });
                }
                if momentum.len() != n {
                    return Err(Error::Dimension { expected: n, got: momentum.len() });
                }
                for &v in displacement.iter().chain(momentum) {
                    require_finite("initial coordinate", v)?;
                }
                Ok((displacement.clone(), momentum.clone()))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Recording {
    None,
    /// Every accepted step.
    Steps,
    /// `n` equally spaced points over the window, endpoints included.
    Uniform(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub record: Recording,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            rtol: 1e-12,
            atol: 1e-12,
            max_steps: 5_000_000,
            record: Recording::None,
        }
    }
}

/// Time integrals of the energy terms along one trajectory (units `hbar`,
/// i.e. `hbar omega * (1/omega)`).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyIntegrals {
    /// `sum p^2 / 2`
    pub kinetic: f64,
    /// `sum u^2 / 2`
    pub trap_harmonic: f64,
    /// `L = sum_pairs kappa du / de^2`; appears as `+L` in the trap energy and
    /// `-L` in the Coulomb energy.
    pub linear: f64,
    /// `sum_pairs kappa du^2 / (de^2 (de + du))`
    pub coulomb_remainder: f64,
    /// `-sum F_i u_i`
    pub force: f64,
    /// `sum s_i F_i`-type light-shift energy
    pub light_shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub branch: Branch,
    pub window: (f64, f64),
    /// Sample times (units `1/omega`).
    pub times: Vec<f64>,
    /// Absolute positions per sample, one entry per ion (units `a`).
    pub positions: Vec<Vec<f64>>,
    /// Momenta per sample (units `hbar / a`).
    pub momenta: Vec<Vec<f64>>,
    pub stats: StepStats,
    pub rtol: f64,
    pub integrals: EnergyIntegrals,
    /// `int u_i dt` over the window.
    pub displacement_integrals: Vec<f64>,
    /// Equilibrium energy of the chain.
    pub static_energy: f64,
    pub final_displacement: Vec<f64>,
    pub final_momentum: Vec<f64>,
    /// Smallest neighbour separation met at accepted steps.
    pub min_separation: f64,
}

const NQ: usize = 6;

struct BranchSystem<'a> {
    chain: &'a Chain,
    pulses: &'a [ForcePulse],
    bits: Vec<f64>,
    inv_de2: Vec<f64>,
}

impl BranchSystem<'_> {
    fn n(&self) -> usize {
        self.chain.n_ions()
    }
}

impl OdeSystem for BranchSystem<'_> {
    fn dim(&self) -> usize {
        3 * self.n() + NQ
    }

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        let n = self.n();
        let (u, rest) = y.split_at(n);
        let p = &rest[..n];
        let kappa = self.chain.kappa;
        let e = &self.chain.equilibrium;
        let mut kin = 0.0;
        let mut harm = 0.0;
        let mut lin = 0.0;
        let mut rem = 0.0;
        let mut work = 0.0;
        let mut ls = 0.0;
        for i in 0..n {
            dy[i] = p[i];
            dy[n + i] = -u[i];
            dy[2 * n + NQ + i] = u[i];
            kin += 0.5 * p[i] * p[i];
            harm += 0.5 * u[i] * u[i];
        }
        let mut pair = 0;
        for i in 0..n {
            for j in i + 1..n {
                let de = e[j] - e[i];
                let du = u[j] - u[i];
                let sep = de + du;
                let inv = self.inv_de2[pair];
                pair += 1;
                let excess = -kappa * du * (2.0 * de + du) * inv / (sep * sep);
                dy[n + j] += excess;
                dy[n + i] -= excess;
                lin += kappa * du * inv;
                rem += kappa * du * du * inv / sep;
            }
        }
        for pulse in self.pulses {
            let g = pulse.envelope(t);
            if g == 0.0 {
                continue;
            }
            let f = pulse.direction * pulse.detuning * pulse.xi * g;
            for i in 0..n {
                if !pulse.targets[i] || self.bits[i] == 0.0 {
                    continue;
                }
                dy[n + i] += f;
                work -= f * u[i];
                ls += pulse.light_shift[i] * pulse.detuning * pulse.xi * g;
            }
        }
        let q = 2 * n;
        dy[q] = kin;
        dy[q + 1] = harm;
        dy[q + 2] = lin;
        dy[q + 3] = rem;
        dy[q + 4] = work;
        dy[q + 5] = ls;
    }
}

/// Common window of a set of pulses.
pub fn pulse_window(pulses: &[ForcePulse]) -> Result<(f64, f64)> {
    if pulses.is_empty() {
        return Err(Error::Input("at least one pulse is required".into()));
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in pulses {
        let (a, b) = p.window();
        lo = lo.min(a);
        hi = hi.max(b);
    }
    Ok((lo, hi))
}

/// Integrate one branch across the pulse window.
pub fn integrate_branch(
    chain: &Chain,
    pulses: &[ForcePulse],
    branch: Branch,
    init: &InitialConditions,
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    let window = pulse_window(pulses)?;
    integrate_branch_over(chain, pulses, branch, init, window, opts)
}

/// As `integrate_branch` but over an explicit window.
pub fn integrate_branch_over(
    chain: &Chain,
    pulses: &[ForcePulse],
    branch: Branch,
    init: &InitialConditions,
    window: (f64, f64),
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    let n = chain.n_ions();
    if branch.n != n {
        return Err(Error::Dimension { expected: n, got: branch.n });
    }
    for p in pulses {
        p.validate(n)?;
    }
    let (u0, p0) = init.phase_space(chain)?;
    let mut inv_de2 = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let de = chain.equilibrium[j] - chain.equilibrium[i];
            inv_de2.push(1.0 / (de * de));
        }
    }
    let sys = BranchSystem {
        chain,
        pulses,
        bits: (0..n).map(|i| branch.bit(i) as f64).collect(),
        inv_de2,
    };
    let dim = sys.dim();
    let mut y0 = vec![0.0; dim];
    y0[..n].copy_from_slice(&u0);
    y0[n..2 * n].copy_from_slice(&p0);

    let dense = matches!(opts.record, Recording::Uniform(_));
    let ode_opts = Dopri5Options {
        rtol: opts.rtol,
        atol: opts.atol,
        max_steps: opts.max_steps,
        dense,
        ..Default::default()
    };

    let mut times = Vec::new();
    let mut positions = Vec::new();
    let mut momenta = Vec::new();
    let mut record = |t: f64, y: &[f64]| {
        times.push(t);
        positions.push((0..n).map(|i| chain.equilibrium[i] + y[i]).collect::<Vec<_>>());
        momenta.push(y[n..2 * n].to_vec());
    };
    let sample_times: Vec<f64> = match opts.record {
        Recording::Uniform(m) if m >= 2 => (0..m)
            .map(|k| window.0 + (window.1 - window.0) * k as f64 / (m - 1) as f64)
            .collect(),
        Recording::Uniform(m) => {
            return Err(Error::Input(format!("uniform recording needs >= 2 points, got {m}")))
        }
        _ => Vec::new(),
    };
    let mut next_sample = 0;
    if !matches!(opts.record, Recording::None) {
        record(window.0, &y0);
        next_sample = 1;
    }

    let mut min_sep = f64::INFINITY;
    let mut buf = vec![0.0; dim];
    let (y, stats) = ode::integrate(&sys, window.0, window.1, &y0, &ode_opts, |step| {
        for i in 0..n.saturating_sub(1) {
            let sep = chain.equilibrium[i + 1] - chain.equilibrium[i] + step.y_new[i + 1]
                - step.y_new[i];
            min_sep = min_sep.min(sep);
            if !(sep > 0.0) {
                return Err(Error::Dynamics(format!(
                    "ions {i} and {} crossed at t = {:.6}",
                    i + 1,
                    step.t_new
                )));
            }
        }
        match opts.record {
            Recording::None => {}
            Recording::Steps => record(step.t_new, step.y_new),
            Recording::Uniform(_) => {
                while next_sample < sample_times.len() && sample_times[next_sample] <= step.t_new {
                    let t = sample_times[next_sample];
                    if t == step.t_new {
                        record(t, step.y_new);
                    } else {
                        step.interpolate(t, &mut buf);
                        record(t, &buf);
                    }
                    next_sample += 1;
                }
            }
        }
        Ok(())
    })?;

    let q = 2 * n;
    Ok(Trajectory {
        branch,
        window,
        times,
        positions,
        momenta,
        stats,
        rtol: opts.rtol,
        integrals: EnergyIntegrals {
            kinetic: y[q],
            trap_harmonic: y[q + 1],
            linear: y[q + 2],
            coulomb_remainder: y[q + 3],
            force: y[q + 4],
            light_shift: y[q + 5],
        },
        displacement_integrals: y[q + NQ..].to_vec(),
        static_energy: chain.static_energy(),
        final_displacement: y[..n].to_vec(),
        final_momentum: y[n..2 * n].to_vec(),
        min_separation: min_sep,
    })
}

impl Trajectory {
    /// CSV text with columns `t, x_i..., p_i...`; `header` lines are written
    /// first, each prefixed by `# `.
    pub fn to_csv(&self, header: &[String]) -> String {
        let n = self.final_displacement.len();
        let mut s = String::new();
        s.push_str(&format!("# branch = {}\n", self.branch));
        for h in header {
            s.push_str("# ");
            s.push_str(h);
            s.push('\n');
        }
        s.push('t');
        for i in 0..n {
            s.push_str(&format!(",x{}", i + 1));
        }
        for i in 0..n {
            s.push_str(&format!(",p{}", i + 1));
        }
        s.push('\n');
        for (k, t) in self.times.iter().enumerate() {
            s.push_str(&format!("{t:.17e}"));
            for v in self.positions[k].iter().chain(&self.momenta[k]) {
                s.push_str(&format!(",{v:.17e}"));
            }
            s.push('\n');
        }
        s
    }
}

/// Centre-of-mass and relative coordinates of a two-ion configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalModes {
    pub big_r: f64,
    pub big_p: f64,
    pub r: f64,
    pub p: f64,
}

/// `R = (x1 + x2)/2`, `r = x2 - x1 - d`, `P = M dR/dt = p1 + p2`,
/// `p = mu dr/dt = (p2 - p1)/2`.
pub fn mode_transform(positions: [f64; 2], momenta: [f64; 2], d: f64) -> NormalModes {
    NormalModes {
        big_r: 0.5 * (positions[0] + positions[1]),
        big_p: momenta[0] + momenta[1],
        r: positions[1] - positions[0] - d,
        p: 0.5 * (momenta[1] - momenta[0]),
    }
}

impl NormalModes {
    /// Inverse of `mode_transform`: `(positions, momenta)`.
    pub fn to_ions(&self, d: f64) -> ([f64; 2], [f64; 2]) {
        let half = 0.5 * (self.r + d);
        (
            [self.big_r - half, self.big_r + half],
            [0.5 * self.big_p - self.p, 0.5 * self.big_p + self.p],
        )
    }
}

/// Adiabatic two-ion solution: displaced paths plus free oscillations and the
/// anharmonic offset estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticSolution {
    pub epsilon: f64,
    pub d: f64,
    pub pulse: ForcePulse,
    pub bits: [u8; 2],
    pub com: ModeExcitation,
    pub relative: ModeExcitation,
    /// Reference time of the oscillation phases.
    pub t0: f64,
    pub warnings: Vec<String>,
}

impl AdiabaticSolution {
    fn k_rel(&self) -> f64 {
        0.5 * (1.0 + self.epsilon)
    }

    fn ep(&self) -> f64 {
        self.epsilon / (self.epsilon + 1.0)
    }

    pub fn omega_tilde(&self) -> f64 {
        (1.0 + self.epsilon).sqrt()
    }

    /// Single-ion displacement `xi e^{-(t/tau)^2}` with sign.
    pub fn x_bar(&self, t: f64) -> f64 {
        self.pulse.force_at(t)
    }

    /// Relative force `f = (F'_b - F_a)/2`.
    pub fn relative_force(&self, t: f64) -> f64 {
        0.5 * (self.bits[1] as f64 - self.bits[0] as f64) * self.x_bar(t)
    }

    pub fn big_r_bar(&self, t: f64) -> f64 {
        0.5 * (self.bits[0] + self.bits[1]) as f64 * self.x_bar(t)
    }

    /// `f/(mu w~^2) [1 + 3 eps'/2 f/(mu w~^2 d)]`.
    pub fn r_bar(&self, t: f64) -> f64 {
        let y = self.relative_force(t) / self.k_rel();
        y * (1.0 + 1.5 * self.ep() * y / self.d)
    }

    /// First-order form `(b - a) x_bar / (eps + 1)`.
    pub fn r_bar_linear(&self, t: f64) -> f64 {
        (self.bits[1] as f64 - self.bits[0] as f64) * self.x_bar(t) / (1.0 + self.epsilon)
    }

    pub fn delta_com(&self, t: f64) -> f64 {
        self.com.energy.sqrt() * ((t - self.t0) + self.com.phase).cos()
    }

    pub fn zeta(&self, t: f64) -> f64 {
        let k = self.k_rel();
        self.ep() * self.relative.energy / (k * self.d)
            * (1.0 + 6.0 * self.ep() * self.relative_force(t) / (k * self.d))
    }

    pub fn delta_rel(&self, t: f64) -> f64 {
        let amp = (2.0 * self.relative.energy / self.k_rel()).sqrt();
        amp * (self.omega_tilde() * (t - self.t0) + self.relative.phase).cos() + self.zeta(t)
    }

    pub fn big_r(&self, t: f64) -> f64 {
        self.big_r_bar(t) + self.delta_com(t)
    }

    pub fn r(&self, t: f64) -> f64 {
        self.r_bar(t) + self.delta_rel(t)
    }
}

/// Adiabatic approximation for a two-ion chain. Outside the adiabatic regime
/// (`omega tau < 4`) a warning is attached, or an error returned when `strict`.
pub fn adiabatic_trajectory(
    chain: &Chain,
    pulse: &ForcePulse,
    branch: Branch,
    init: &InitialConditions,
    strict: bool,
) -> Result<AdiabaticSolution> {
    if chain.n_ions() != 2 || branch.n != 2 {
        return Err(Error::Dimension { expected: 2, got: chain.n_ions() });
    }
    pulse.validate(2)?;
    let mut warnings = Vec::new();
    if pulse.omega_tau < 4.0 {
        let msg = format!("omega tau = {} is outside the adiabatic regime (< 4)", pulse.omega_tau);
        if strict {
            return Err(Error::Domain(msg));
        }
        warnings.push(msg);
    }
    let (com, relative) = match init {
        InitialConditions::Rest => (ModeExcitation::REST, ModeExcitation::REST),
        InitialConditions::TwoIonModes { com, relative } => (*com, *relative),
        _ => {
            return Err(Error::Input(
                "adiabatic solution needs two-ion normal-mode initial conditions".into(),
            ))
        }
    };
    Ok(AdiabaticSolution {
        epsilon: chain.epsilon(),
        d: chain.neighbour_separation(),
        pulse: pulse.clone(),
        bits: [branch.bit(0), branch.bit(1)],
        com,
        relative,
        t0: pulse.window().0,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_chain_trap_centres_balance_forces() {
        let c = Chain::uniform(2, 2.0, 100.0).unwrap();
        // Shared trap: both centres at the origin.
        assert!(c.trap_centres()[0].abs() < 1e-10);
        assert!(c.trap_centres()[1].abs() < 1e-10);
        let c3 = Chain::uniform(3, 0.01, 1000.0).unwrap();
        assert_eq!(c3.trap_centres()[1], 0.0);
        assert!((c3.epsilon() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn gaussian_force_profile() {
        let p = ForcePulse::new(2, 0.7, 10.0);
        assert_eq!(p.force_at(0.0), 0.7);
        assert!((p.force_at(10.0) - 0.7 / std::f64::consts::E).abs() < 1e-15);
        let f = p.variant(PulseVariant::SignFlipped);
        assert_eq!(f.force_at(0.0), -0.7);
    }

    #[test]
    fn branch_bits_and_labels() {
        let b = Branch::from_bits(&[1, 0, 1]).unwrap();
        assert_eq!(b.index, 5);
        assert_eq!(b.label(), "101");
        assert_eq!(b.bit(0), 1);
        assert_eq!(b.bit(1), 0);
    }

    #[test]
    fn two_ion_modes_round_trip() {
        let chain = Chain::uniform(2, 0.5, 200.0).unwrap();
        let ic = InitialConditions::TwoIonModes {
            com: ModeExcitation { energy: 3.0, phase: 0.4 },
            relative: ModeExcitation { energy: 2.0, phase: 1.1 },
        };
        let (u, p) = ic.phase_space(&chain).unwrap();
        let m = mode_transform([u[0], u[1]], [p[0], p[1]], 0.0);
        // E_R = P^2/(2M) + M R^2/2, M = 2.
        let e_com = m.big_p * m.big_p / 4.0 + m.big_r * m.big_r;
        let wr2 = 1.5;
        let e_rel = m.p * m.p + 0.25 * wr2 * m.r * m.r;
        assert!((e_com - 3.0).abs() < 1e-12);
        assert!((e_rel - 2.0).abs() < 1e-12);
    }
}
