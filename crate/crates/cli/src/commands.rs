//! Subcommand implementations. Each writes its files into the output
//! directory and returns a short text summary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use pushgate_core::dynamics::*;
use pushgate_core::fidelity::{
    monte_carlo_phase_samples, worst_case_fidelity, MinimizationOrder, ThermalEnsemble,
};
use pushgate_core::gates::*;
use pushgate_core::phases::*;
use pushgate_core::statics::solve_equilibrium;
use pushgate_core::units::{derive_scales, IonSpecies, TrapArray, TrapMode, UnitScales};
use serde_json::json;

use crate::config::*;
use crate::error::{tag, CliError};
use crate::sweep::{self, SweepSetup, SCHEMA_VERSION, UNITS};
use crate::verify;

/// Command-line values that take precedence over the configuration file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub out: Option<PathBuf>,
    pub strict: bool,
    pub axis: Option<String>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct CommandOutput {
    pub summary: String,
    pub files: Vec<PathBuf>,
}

pub struct Context {
    /// Configuration after overrides, with the species written out in full.
    pub cfg: RunConfig,
    pub species: IonSpecies,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub strict: bool,
    pub samples: Option<usize>,
}

impl Context {
    pub fn new(mut cfg: RunConfig, ov: &Overrides) -> Result<Context, CliError> {
        let species_block = cfg.species.clone().unwrap_or(SpeciesBlock {
            preset: Some("ca40".into()),
            ..Default::default()
        });
        let species = species_block.resolve()?;
        cfg.species = Some(species_block.resolved()?);
        if let Some(e) = cfg.ensemble.as_mut() {
            if let Some(s) = ov.seed {
                e.seed = s;
            }
            if let Some(n) = ov.samples {
                e.samples = n;
            }
        }
        if let Some(s) = cfg.sweep.as_mut() {
            if let Some(a) = &ov.axis {
                s.axis = SweepAxis::parse(a)
                    .ok_or_else(|| CliError::Config(format!("unknown sweep axis '{a}'")))?;
            }
            if let Some(v) = ov.start {
                s.start = v;
            }
            if let Some(v) = ov.stop {
                s.stop = v;
            }
            if let Some(v) = ov.points {
                s.points = v;
            }
        } else if ov.axis.is_some() || ov.start.is_some() || ov.stop.is_some() || ov.points.is_some() {
            return Err(CliError::Config("sweep overrides need a [sweep] block".into()));
        }
        let seed = ov.seed.or(cfg.ensemble.as_ref().map(|e| e.seed)).unwrap_or(0);
        let out_dir = ov
            .out
            .clone()
            .or_else(|| cfg.output.as_ref().and_then(|o| o.directory.clone()).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("pushgate-out"));
        Ok(Context { cfg, species, seed, out_dir, strict: ov.strict, samples: ov.samples })
    }

    fn tolerances(&self) -> ToleranceBlock {
        self.cfg.tolerances.clone().unwrap_or_default()
    }

    pub fn integrator(&self) -> IntegratorOptions {
        let t = self.tolerances();
        let mut o = IntegratorOptions::default();
        if let Some(r) = t.integrator_rtol {
            o.rtol = r;
        }
        if let Some(a) = t.integrator_atol {
            o.atol = a;
        }
        o
    }

    fn gate_tol(&self) -> f64 {
        self.tolerances().gate.unwrap_or(1e-2)
    }

    pub fn header(&self, command: &str) -> Vec<String> {
        let mut h = vec![
            format!("schema_version = {SCHEMA_VERSION}"),
            format!("command = {command}"),
            format!("seed = {}", self.seed),
            format!("units: {UNITS}"),
            "config:".to_string(),
        ];
        h.extend(to_toml(&self.cfg).lines().map(|l| format!("  {l}")));
        h
    }

    fn json_envelope(&self, command: &str, body: serde_json::Value) -> serde_json::Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": command,
            "seed": self.seed,
            "config": self.cfg,
            "result": body,
        })
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        std::fs::create_dir_all(&self.out_dir)?;
        let p = self.out_dir.join(name);
        std::fs::write(&p, contents)?;
        Ok(p)
    }

    fn write_json(&self, name: &str, command: &str, body: serde_json::Value) -> Result<PathBuf, CliError> {
        let v = self.json_envelope(command, body);
        self.write(name, &serde_json::to_string_pretty(&v).expect("json serialises"))
    }

    fn scales(&self) -> Result<UnitScales, CliError> {
        let trap = require(&self.cfg.trap, "trap", "this command")?;
        // The scales depend only on mass and frequency.
        let t = TrapArray { n_ions: trap.n_ions, omega: trap.omega, d0: 0.0, mode: TrapMode::SharedLinearTrap };
        derive_scales(&self.species, &t).map_err(tag("units"))
    }

    /// Chain from explicit `epsilon` and `d_over_a`, or from the two-ion statics.
    pub fn chain(&self) -> Result<Chain, CliError> {
        let trap = require(&self.cfg.trap, "trap", "this command")?;
        match (trap.epsilon, trap.d_over_a) {
            (Some(e), Some(d)) => Chain::uniform(trap.n_ions, e, d).map_err(tag("dynamics")),
            (None, None) => {
                if trap.n_ions != 2 {
                    return Err(CliError::Config(
                        "chains of more than two ions need trap.epsilon and trap.d_over_a".into(),
                    ));
                }
                let d0 = match trap.mode {
                    TrapMode::SharedLinearTrap => trap.d0.unwrap_or(0.0),
                    TrapMode::SeparateMicrotraps => trap
                        .d0
                        .ok_or_else(|| CliError::Config("separate traps need trap.d0".into()))?,
                };
                let arr = TrapArray { n_ions: 2, omega: trap.omega, d0, mode: trap.mode };
                let eq = solve_equilibrium(&self.species, &arr).map_err(tag("statics"))?;
                Chain::from_equilibrium(&eq, &self.scales()?).map_err(tag("dynamics"))
            }
            _ => Err(CliError::Config("trap.epsilon and trap.d_over_a must be given together".into())),
        }
    }

    pub fn pulse(&self, n: usize) -> Result<ForcePulse, CliError> {
        let pb = require(&self.cfg.pulse, "pulse", "this command")?;
        let scales = self.scales()?;
        let xi = match (pb.xi, pb.force) {
            (Some(x), None) => x,
            (None, Some(f)) => scales.force_from_si(f),
            _ => return Err(CliError::Config("give exactly one of pulse.xi and pulse.force".into())),
        };
        let omega_tau = match (pb.omega_tau, pb.tau) {
            (Some(w), None) => w,
            (None, Some(t)) => scales.time_from_si(t),
            _ => return Err(CliError::Config("give exactly one of pulse.omega_tau and pulse.tau".into())),
        };
        positive("pulse width", omega_tau)?;
        let mut p = ForcePulse::new(n, xi, omega_tau);
        if let Some(t) = &pb.targets {
            if t.len() != n {
                return Err(CliError::Config(format!("pulse.targets has {} entries for {n} ions", t.len())));
            }
            p.targets = t.clone();
        }
        if let Some(s) = &pb.light_shift {
            if s.len() != n {
                return Err(CliError::Config(format!("pulse.light_shift has {} entries for {n} ions", s.len())));
            }
            p.light_shift = s.iter().map(|&x| scales.length_from_si(x)).collect();
        }
        if let Some(w) = pb.window_factor {
            p.window_factor = positive("pulse.window_factor", w)?;
        }
        p.validate(n).map_err(|e| CliError::Config(format!("pulse: {e}")))?;
        Ok(p)
    }

    fn ensemble(&self, scales: &UnitScales) -> Option<ThermalEnsemble> {
        self.cfg
            .ensemble
            .as_ref()
            .filter(|e| e.samples > 0)
            .map(|e| ThermalEnsemble::from_kelvin(e.temperature, scales, e.samples, self.seed))
    }
}

pub fn design(ctx: &Context) -> Result<CommandOutput, CliError> {
    let d = require(&ctx.cfg.design, "design", "design")?;
    let trap = require(&ctx.cfg.trap, "trap", "design")?;
    if !(d.target_phase > 0.0 && d.target_phase.is_finite()) {
        return Err(CliError::Config(format!("design.target_phase must be positive, got {}", d.target_phase)));
    }
    let chain = ctx.chain()?;
    if chain.n_ions() != 2 {
        return Err(CliError::Config("design handles two-ion gates".into()));
    }
    let eps = chain.epsilon();
    let big_d = chain.neighbour_separation();
    let scales = ctx.scales()?;
    let pb = require(&ctx.cfg.pulse, "pulse", "design")?;
    let opts = ctx.integrator();
    let target = d.target_phase;
    let want = |m: DesignModelChoice| d.model == DesignModelChoice::Both || d.model == m;
    let mut out = String::new();
    writeln!(out, "design: target phase {target:.6} rad, epsilon {eps:.6e}, d/a {big_d:.3}").unwrap();

    let mut result = serde_json::Map::new();
    result.insert("epsilon".into(), json!(eps));
    result.insert("d_over_a".into(), json!(big_d));
    result.insert("target_phase".into(), json!(target));
    let chosen: (f64, f64);
    match d.free {
        FreeVariable::Tau => {
            let xi = ctx.pulse(2)?.xi;
            let mut wt = None;
            result.insert("xi".into(), json!(xi));
            result.insert("leading_order_omega_tau".into(), json!(leading_order_omega_tau(eps, xi, target)));
            if trap.mode == TrapMode::SharedLinearTrap {
                let wl = linear_trap_omega_tau(target, xi);
                writeln!(out, "  shared trap (adiabatic): omega tau = {wl:.6}").unwrap();
                result.insert("shared_trap_omega_tau".into(), json!(wl));
            }
            for (choice, model) in [
                (DesignModelChoice::Analytic, DesignModel::Analytic),
                (DesignModelChoice::Simulated, DesignModel::Simulated),
            ] {
                if !want(choice) {
                    continue;
                }
                let mut prob = DesignProblem::new(eps, xi, target, model);
                prob.d_over_a = big_d;
                prob.min_omega_tau = d.min_omega_tau;
                prob.integrator = opts.clone();
                let g = design_gate_time(&prob).map_err(tag("phases"))?;
                let tau = scales.time_to_si(g.omega_tau);
                writeln!(
                    out,
                    "  {model:?}: omega tau = {:.6} (tau = {tau:.6e} s), analytic phase {:.6}{}",
                    g.omega_tau,
                    g.analytic_phase,
                    g.simulated_phase.map(|p| format!(", simulated phase {p:.6}")).unwrap_or_default()
                )
                .unwrap();
                result.insert(
                    format!("{model:?}").to_lowercase(),
                    json!({ "omega_tau": g.omega_tau, "tau_s": tau, "analytic_phase": g.analytic_phase,
                            "simulated_phase": g.simulated_phase }),
                );
                wt = Some(g.omega_tau);
            }
            chosen = (xi, wt.expect("at least one model runs"));
        }
        FreeVariable::Xi => {
            let wt = match (pb.omega_tau, pb.tau) {
                (Some(w), None) => w,
                (None, Some(t)) => scales.time_from_si(t),
                _ => return Err(CliError::Config("free = xi needs exactly one of pulse.omega_tau, pulse.tau".into())),
            };
            positive("pulse width", wt)?;
            result.insert("omega_tau".into(), json!(wt));
            let xi_a = (target / analytic_vartheta_general(eps, wt, 1.0)).sqrt();
            let mut xi = xi_a;
            if want(DesignModelChoice::Analytic) {
                writeln!(out, "  analytic: xi = {xi_a:.6} (force {:.6e} N)", scales.force_to_si(xi_a)).unwrap();
                result.insert("analytic".into(), json!({ "xi": xi_a, "force_n": scales.force_to_si(xi_a) }));
            }
            if want(DesignModelChoice::Simulated) {
                let mut phase = 0.0;
                for _ in 0..4 {
                    phase = simulated_vartheta(eps, xi, wt, big_d, &opts).map_err(tag("phases"))?;
                    if !(phase > 0.0) {
                        return Err(CliError::Physics {
                            module: "phases",
                            source: pushgate_core::Error::Design(format!("simulated phase {phase} is not positive")),
                        });
                    }
                    xi *= (target / phase).sqrt();
                }
                writeln!(out, "  simulated: xi = {xi:.6} (phase {phase:.6} before the last step)").unwrap();
                result.insert("simulated".into(), json!({ "xi": xi, "force_n": scales.force_to_si(xi), "phase": phase }));
            }
            chosen = (xi, wt);
        }
    }

    let mut warnings = Vec::new();
    if chosen.1 < 5.0 {
        warnings.push(format!("omega tau = {:.3} is below 5; adiabatic estimates are unreliable", chosen.1));
    }
    if let (Some(laser), Some(ens)) = (&ctx.cfg.laser, &ctx.cfg.ensemble) {
        let geom = sweep::geometry(laser, laser.waist, laser.power);
        let (b, a_over_d, kt) =
            sweep::budget(&ctx.species, trap.mode, &geom, trap.omega, ens.temperature, eps, target, chosen.1)?;
        writeln!(
            out,
            "  budget at {:.3e} K: spatial {:.3e}, dynamic {:.3e}, scattered photons {:.3e}, total {:.3e}",
            ens.temperature, b.p_spatial, b.p_dynamic, b.n_scattered, b.p_total
        )
        .unwrap();
        if !b.valid {
            warnings.push("infidelity terms are not small; the budget is outside its range of validity".into());
        }
        result.insert("budget".into(), json!({ "breakdown": b, "a_over_d": a_over_d, "kt": kt }));
    }
    for w in &warnings {
        writeln!(out, "  warning: {w}").unwrap();
    }
    result.insert("warnings".into(), json!(warnings));
    let f = ctx.write_json("design.json", "design", serde_json::Value::Object(result))?;
    let o = CommandOutput { summary: out, files: vec![f] };
    strict_check(ctx, &warnings)?;
    Ok(o)
}

fn strict_check(ctx: &Context, warnings: &[String]) -> Result<(), CliError> {
    if ctx.strict && !warnings.is_empty() {
        return Err(CliError::Check(format!("strict mode: {}", warnings.join("; "))));
    }
    Ok(())
}

pub fn simulate(ctx: &Context) -> Result<CommandOutput, CliError> {
    let chain = ctx.chain()?;
    let n = chain.n_ions();
    let p = ctx.pulse(n)?;
    let opts = ctx.integrator();
    let scales = ctx.scales()?;
    let trap = require(&ctx.cfg.trap, "trap", "simulate")?;
    let (kind, with_pi) = ctx.cfg.sequence.as_ref().map(|s| (s.kind, s.with_pi_pulses)).unwrap_or((SequenceKind::Single, false));

    let pulses = match kind {
        SequenceKind::Single | SequenceKind::SpinEcho | SequenceKind::Toffoli => vec![p.clone()],
        SequenceKind::DetuningSwap => vec![p.clone(), p.variant(PulseVariant::DetuningFlipped)],
        SequenceKind::ForceSwap => {
            let q = p.without_light_shift();
            vec![q.clone(), q.variant(PulseVariant::SignFlipped)]
        }
    };
    let tables = pulses
        .iter()
        .map(|q| simulate_phase_table(&chain, std::slice::from_ref(q), &InitialConditions::Rest, &opts))
        .collect::<Result<Vec<_>, _>>()
        .map_err(tag("phases"))?;

    let mut out = String::new();
    let mut warnings = Vec::new();
    let mut failures = Vec::new();
    let mut files = Vec::new();
    writeln!(
        out,
        "simulate: {n} ions, epsilon {:.6e}, d/a {:.3}, xi {:.6}, omega tau {:.6}, sequence {kind:?}",
        chain.epsilon(),
        chain.neighbour_separation(),
        p.xi,
        p.omega_tau
    )
    .unwrap();
    if p.omega_tau < 5.0 {
        warnings.push(format!("omega tau = {:.3} is below 5; the pulse is not adiabatic", p.omega_tau));
    }

    let mut gate = serde_json::Map::new();
    if kind == SequenceKind::Toffoli {
        if n != 3 {
            return Err(CliError::Config(format!("the toffoli sequence needs 3 ions, got {n}")));
        }
        let t = &tables[0];
        let synth = solve_rotations_3q(t, with_pi, None).map_err(tag("gate_synthesis"))?;
        let stage = synth.gate(t);
        let theta = synth.residuals[0];
        let net = ccz_network_from_stage(&stage, theta).map_err(tag("gate_synthesis"))?;
        let ratio = synth.residuals[1] / synth.residuals[0];
        writeln!(
            out,
            "  pair phases (0,1) {:.6}, (0,2) {:.6}, (1,2) {:.6}; non-neighbour ratio {ratio:.6}",
            synth.residuals[0], synth.residuals[1], synth.residuals[2]
        )
        .unwrap();
        writeln!(out, "  CCZ network distance {:.3e} (tolerance {:.1e})", net.ccz_error, ctx.gate_tol()).unwrap();
        if !(net.ccz_error < ctx.gate_tol()) {
            failures.push(format!("CCZ network distance {:.3e} exceeds {:.1e}", net.ccz_error, ctx.gate_tol()));
        }
        gate.insert("synthesis".into(), json!(synth));
        gate.insert("stage".into(), json!(stage));
        gate.insert("network".into(), json!({ "theta": theta, "net": net.net, "ccz_error": net.ccz_error }));
    } else {
        let seq = match kind {
            SequenceKind::SpinEcho => PulseSequence::spin_echo(LocalRotationSet::zero(n)),
            SequenceKind::DetuningSwap => PulseSequence::detuning_swap(LocalRotationSet::zero(n)),
            SequenceKind::ForceSwap => PulseSequence::force_swap(LocalRotationSet::zero(n)),
            _ => PulseSequence::single(LocalRotationSet::zero(n)),
        };
        let refs: Vec<&PhaseTable> = match kind {
            SequenceKind::SpinEcho => vec![&tables[0], &tables[0]],
            _ => tables.iter().collect(),
        };
        let outcome = compose_sequence(&seq, &refs).map_err(tag("gate_synthesis"))?;
        let composed = outcome
            .diagonal()
            .ok_or_else(|| CliError::Check("sequence does not return to the computational basis".into()))?;
        let ctable = PhaseTable::from_phases(n, composed.phases.clone()).map_err(tag("phases"))?;
        gate.insert("composed_phases".into(), json!(composed.phases));
        let mut pairs = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                let v = pair_phase(&ctable, a, b).map_err(tag("phases"))?;
                writeln!(out, "  pair phase ({a},{b}) = {v:.9}").unwrap();
                pairs.push(json!({ "a": a, "b": b, "phase": v }));
            }
        }
        gate.insert("pair_phases".into(), json!(pairs));
        if n == 2 {
            let synth = solve_rotations_2q(&ctable).map_err(tag("gate_synthesis"))?;
            let g = synth.gate(&ctable);
            let target = DiagonalGate::controlled_phase(2, 0, 1, synth.vartheta);
            let err = g.distance(&target);
            writeln!(out, "  gate: controlled phase {:.9} rad (synthesis error {err:.3e})", synth.vartheta).unwrap();
            writeln!(out, "  distance from CZ: {:.3e}", g.distance(&DiagonalGate::cz())).unwrap();
            if !(err < ctx.gate_tol()) {
                failures.push(format!("synthesised gate misses its target by {err:.3e}"));
            }
            let pushes = refs.len() as f64;
            let law = pushes * analytic_vartheta_general(chain.epsilon(), p.omega_tau, p.xi);
            let theta = pushes * analytic_theta(chain.epsilon(), p.omega_tau, p.xi);
            if kind != SequenceKind::ForceSwap && kind != SequenceKind::DetuningSwap {
                if trap.mode == TrapMode::SeparateMicrotraps {
                    writeln!(
                        out,
                        "  small-epsilon law: theta {theta:.9} (relative deviation {:.3e})",
                        (synth.vartheta - theta) / theta
                    )
                    .unwrap();
                }
                writeln!(out, "  closed form: {law:.9} (relative deviation {:.3e})", (synth.vartheta - law) / law)
                    .unwrap();
            }
            gate.insert("synthesis".into(), json!(synth));
            gate.insert("gate".into(), json!(g));
            gate.insert("analytic".into(), json!({ "theta": theta, "vartheta_law": law }));
        } else if n == 3 {
            let synth = solve_rotations_3q(&ctable, false, None).map_err(tag("gate_synthesis"))?;
            writeln!(out, "  overall phase {:.9}", synth.vartheta).unwrap();
            gate.insert("synthesis".into(), json!(synth));
        }
    }

    if let Some(ens) = ctx.ensemble(&scales) {
        let set = monte_carlo_phase_samples(&chain, std::slice::from_ref(&pulses[0]), &ens, &opts)
            .map_err(tag("fidelity"))?;
        let mut fid = serde_json::Map::new();
        for (echo, order) in [
            (false, MinimizationOrder::StateFirst),
            (true, MinimizationOrder::StateFirst),
            (false, MinimizationOrder::SampleFirst),
            (true, MinimizationOrder::SampleFirst),
        ] {
            let f = worst_case_fidelity(&set, echo, order).map_err(tag("fidelity"))?;
            let name = format!("{}_{:?}", if echo { "echo" } else { "plain" }, order).to_lowercase();
            writeln!(out, "  thermal worst-case infidelity ({name}): {:.6e}", f.infidelity).unwrap();
            fid.insert(name, json!(f));
        }
        fid.insert("variances".into(), json!(set.variances()));
        fid.insert("samples".into(), json!(ens.n_samples));
        gate.insert("thermal".into(), serde_json::Value::Object(fid));
        files.push(ctx.write("samples.csv", &set.to_csv(&ctx.header("simulate")))?);
    }

    if let (Some(laser), Some(ens), 2) = (&ctx.cfg.laser, &ctx.cfg.ensemble, n) {
        let geom = sweep::geometry(laser, laser.waist, laser.power);
        let vartheta = gate
            .get("synthesis")
            .and_then(|s| s.get("vartheta"))
            .and_then(|v| v.as_f64())
            .unwrap_or(std::f64::consts::PI)
            .abs();
        let (b, a_over_d, kt) = sweep::budget(
            &ctx.species,
            trap.mode,
            &geom,
            trap.omega,
            ens.temperature,
            chain.epsilon(),
            vartheta,
            p.omega_tau,
        )?;
        writeln!(out, "  closed-form budget: total {:.3e} (valid: {})", b.p_total, b.valid).unwrap();
        if !b.valid {
            warnings.push("closed-form budget outside its range of validity".into());
        }
        gate.insert("budget".into(), json!({ "breakdown": b, "a_over_d": a_over_d, "kt": kt }));
    }

    let output = ctx.cfg.output.clone().unwrap_or_default();
    if output.trajectories {
        let mut o = opts.clone();
        o.record = Recording::Uniform(output.trajectory_points.max(2));
        for b in Branch::all(n) {
            let tr = integrate_branch(&chain, std::slice::from_ref(&pulses[0]), b, &InitialConditions::Rest, &o)
                .map_err(tag("dynamics"))?;
            files.push(ctx.write(&format!("trajectory_{}.csv", b.label()), &tr.to_csv(&ctx.header("simulate")))?);
        }
    }

    for w in &warnings {
        writeln!(out, "  warning: {w}").unwrap();
    }
    gate.insert("warnings".into(), json!(warnings));
    gate.insert("failures".into(), json!(failures));
    files.push(ctx.write_json("phase_tables.json", "simulate", json!(tables))?);
    files.push(ctx.write_json("gate_report.json", "simulate", serde_json::Value::Object(gate))?);
    files.push(ctx.write("report.txt", &out)?);
    if !failures.is_empty() {
        return Err(CliError::Check(failures.join("; ")));
    }
    strict_check(ctx, &warnings)?;
    Ok(CommandOutput { summary: out, files })
}

/// Rows of the configured sweep.
pub fn sweep_rows(ctx: &Context) -> Result<Vec<sweep::SweepRow>, CliError> {
    let setup = SweepSetup {
        species: &ctx.species,
        trap: require(&ctx.cfg.trap, "trap", "sweep")?,
        laser: require(&ctx.cfg.laser, "laser", "sweep")?,
        sweep: require(&ctx.cfg.sweep, "sweep", "sweep")?,
        default_temperature: ctx.cfg.ensemble.as_ref().map(|e| e.temperature),
    };
    setup.run()
}

pub fn sweep(ctx: &Context) -> Result<CommandOutput, CliError> {
    let rows = sweep_rows(ctx)?;
    let csv = sweep::to_csv(&rows, &ctx.header("sweep"))?;
    let name = ctx.cfg.output.as_ref().and_then(|o| o.name.clone()).unwrap_or_else(|| "sweep".into());
    let f = ctx.write(&format!("{name}.csv"), &csv)?;
    let mut out = format!("sweep: {} rows written to {}\n", rows.len(), f.display());
    let mut labels: Vec<&str> = rows.iter().map(|r| r.curve.as_str()).collect();
    labels.dedup();
    for l in labels {
        let best = rows
            .iter()
            .filter(|r| r.curve == l)
            .min_by(|a, b| a.p_total.total_cmp(&b.p_total))
            .expect("curve has rows");
        writeln!(out, "  {l}: minimum total infidelity {:.3e} at {} = {:.4e}", best.p_total, best.axis, best.axis_value)
            .unwrap();
    }
    let warnings: Vec<String> = rows
        .iter()
        .filter(|r| !r.valid)
        .map(|r| format!("{} at {:.4e} outside the range of validity", r.curve, r.axis_value))
        .collect();
    if !warnings.is_empty() {
        writeln!(out, "  {} rows outside the range of validity", warnings.len()).unwrap();
    }
    strict_check(ctx, &warnings)?;
    Ok(CommandOutput { summary: out, files: vec![f] })
}

/// `fig3.csv` and `fig4.csv` from the figure presets.
pub fn figures_data(ov: &Overrides) -> Result<CommandOutput, CliError> {
    let mut out = CommandOutput::default();
    for name in ["fig3", "fig4"] {
        let ctx = Context::new(crate::presets::preset(name)?, ov)?;
        let o = sweep(&ctx)?;
        out.summary.push_str(&o.summary);
        out.files.extend(o.files);
    }
    Ok(out)
}

pub fn verify(ctx: &Context, suite: verify::Suite) -> Result<CommandOutput, CliError> {
    let settings = verify::Settings::from_config(&ctx.cfg, ctx.seed, ctx.samples);
    let reports = verify::run_suite(suite, &settings);
    let mut out = String::new();
    for r in &reports {
        writeln!(out, "{}", r.line()).unwrap();
    }
    let f = ctx.write_json("verify_report.json", "verify", json!(reports))?;
    let failed: Vec<String> = reports.iter().filter(|r| !r.passed).map(|r| r.id.to_string()).collect();
    if !failed.is_empty() {
        return Err(CliError::Check(format!("{out}criteria failed: {}", failed.join(", "))));
    }
    Ok(CommandOutput { summary: out, files: vec![f] })
}

pub fn load_config(config: Option<&Path>, preset: Option<&str>) -> Result<RunConfig, CliError> {
    match (config, preset) {
        (Some(_), Some(_)) => Err(CliError::Config("give either --config or --preset, not both".into())),
        (Some(p), None) => load(p),
        (None, Some(n)) => crate::presets::preset(n),
        (None, None) => Ok(RunConfig::default()),
    }
}
