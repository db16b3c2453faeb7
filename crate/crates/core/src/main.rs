use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use twmeas::scenario::{parse_config, run_batch, OutputFormat, RunError, ScenarioKind};
use twmeas::single_photon::optimize_pulse_length;

#[derive(Parser)]
#[command(
    name = "twmeas",
    version,
    about = "Continuous measurement of a two-level atom by traveling-wave light"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every scenario in a config file.
    Run {
        config: PathBuf,
        /// Directory that output paths are resolved against.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Override every scenario's output format.
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Square single-photon pulse length maximizing the excitation.
    OptimizePulse {
        #[arg(long)]
        kappa_over_gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
    },
    /// Scenario names and their config keys.
    ListScenarios,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            out,
            format,
        } => run(config, out, format),
        Command::OptimizePulse {
            kappa_over_gamma,
            gamma,
        } => optimize(kappa_over_gamma, gamma),
        Command::ListScenarios => {
            list();
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

type Failure = (u8, String);

fn run(config: PathBuf, out: PathBuf, format: Option<Format>) -> Result<(), Failure> {
    let text = fs::read_to_string(&config)
        .map_err(|e| (4, format!("cannot read {}: {e}", config.display())))?;
    let fail = |e: RunError| (e.exit_code(), e.to_string());
    let mut batch = parse_config(&text).map_err(|e| fail(e.into()))?;
    if let Some(f) = format {
        batch = batch.with_format(f.into()).map_err(|e| fail(e.into()))?;
    }
    for s in run_batch(&batch, &out).map_err(fail)? {
        println!(
            "{}\t{}\t{} rows\t{} warnings\t{}",
            s.name,
            s.kind,
            s.rows,
            s.warnings,
            s.path.display()
        );
    }
    Ok(())
}

fn optimize(kappa_over_gamma: f64, gamma: f64) -> Result<(), Failure> {
    if !(kappa_over_gamma.is_finite() && kappa_over_gamma >= 0.0) {
        return Err((
            2,
            format!("--kappa-over-gamma must be >= 0, got {kappa_over_gamma}"),
        ));
    }
    if kappa_over_gamma > 1.0 {
        eprintln!("warning: kappa/gamma = {kappa_over_gamma} exceeds diffraction-limited bound");
    }
    let opt =
        optimize_pulse_length(gamma * kappa_over_gamma, gamma).map_err(|e| (2, e.to_string()))?;
    println!("gamma_tau = {:.10}", gamma * opt.tau);
    println!("tau = {:.10}", opt.tau);
    println!("p_e = {:.10e}", opt.p_e);
    if kappa_over_gamma > 0.0 {
        println!("p_e / (kappa/gamma) = {:.10}", opt.p_e / kappa_over_gamma);
    }
    Ok(())
}

fn list() {
    // a closed pipe (e.g. `| head`) is not an error worth reporting
    let mut out = io::stdout().lock();
    for kind in ScenarioKind::ALL {
        if writeln!(out, "{kind}: {}", kind.description()).is_err() {
            return;
        }
        for key in kind.keys() {
            let tag = if key.required { "required" } else { "optional" };
            let _ = writeln!(out, "    {:<18} {tag}", key.name);
        }
    }
}
