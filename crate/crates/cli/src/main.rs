use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pushgate_cli::commands::{self, CommandOutput, Context, Overrides};
use pushgate_cli::error::CliError;
use pushgate_cli::verify::Suite;

/// Design and simulate state-selective pushing gates for trapped ions.
#[derive(Parser)]
#[command(name = "pushgate", version)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Named configuration (fig3, fig4, two_ion_smalleps, linear_trap, toffoli).
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Seed of the thermal sampler.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of thermal samples.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Treat warnings as failures.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Fast,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Pulse width or force for a target gate phase, with the infidelity budget.
    Design,
    /// Integrate every branch, build the phase tables and synthesise the gate.
    Simulate,
    /// Closed-form infidelity budget along one axis, written as CSV.
    Sweep {
        /// omega, temperature, waist, power, epsilon or xi.
        #[arg(long)]
        axis: Option<String>,
        /// First axis value (SI units).
        #[arg(long)]
        start: Option<f64>,
        /// Last axis value (SI units).
        #[arg(long)]
        stop: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Run the numerical acceptance checks.
    Verify {
        #[arg(long, value_enum, default_value = "fast")]
        suite: SuiteArg,
    },
    /// Write fig3.csv and fig4.csv.
    FiguresData,
}

fn run(cli: Cli) -> Result<CommandOutput, CliError> {
    let mut ov = Overrides {
        seed: cli.seed,
        samples: cli.samples,
        out: cli.out.clone(),
        strict: cli.strict,
        ..Default::default()
    };
    if let Command::Sweep { axis, start, stop, points } = &cli.command {
        ov.axis = axis.clone();
        ov.start = *start;
        ov.stop = *stop;
        ov.points = *points;
    }
    if let Command::FiguresData = cli.command {
        if cli.config.is_some() || cli.preset.is_some() {
            return Err(CliError::Config("figures-data uses the fig3 and fig4 presets".into()));
        }
        return commands::figures_data(&ov);
    }
    let cfg = commands::load_config(cli.config.as_deref(), cli.preset.as_deref())?;
    let ctx = Context::new(cfg, &ov)?;
    match cli.command {
        Command::Design => commands::design(&ctx),
        Command::Simulate => commands::simulate(&ctx),
        Command::Sweep { .. } => commands::sweep(&ctx),
        Command::Verify { suite } => commands::verify(
            &ctx,
            match suite {
                SuiteArg::Fast => Suite::Fast,
                SuiteArg::Full => Suite::Full,
            },
        ),
        Command::FiguresData => unreachable!("handled above"),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Ok(n) = std::env::var("PUSHGATE_THREADS") {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("warning: could not size the thread pool: {e}");
                }
            }
            _ => {
                eprintln!("error: PUSHGATE_THREADS must be a positive integer, got '{n}'");
                return ExitCode::from(2);
            }
        }
    }
    match run(cli) {
        Ok(out) => {
            print!("{}", out.summary);
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
