use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};
use serde::Serialize;

use hamiltonian_noether::cli::{
    cmd_check, cmd_examples, cmd_identity_check, cmd_integral, cmd_simulate, cmd_verify, CliError, Settings,
    SimulateOptions, SystemSource, EXIT_USAGE,
};
use hamiltonian_noether::numerics::Method;
use hamiltonian_noether::parser::SystemSpec;

/// Symmetries, invariance checks and first integrals of canonical
/// Hamiltonian equations.
#[derive(Parser)]
#[command(name = "hnoether", version)]
#[command(group(ArgGroup::new("source").args(["example", "file"])))]
struct Args {
    /// Print the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Seed for random sample points.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Relative tolerance of numerical zero tests.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Built-in system (see `hnoether examples`).
    #[arg(long, global = true)]
    example: Option<String>,
    /// System definition file.
    #[arg(long, global = true)]
    file: Option<PathBuf>,
    /// Build integrals even when invariance fails.
    #[arg(long, global = true)]
    force: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check every declared symmetry.
    Check {
        #[arg(long)]
        symmetry: Option<String>,
    },
    /// Construct the first integral of one symmetry.
    Integral { symmetry: String },
    /// Decide whether an expression is conserved.
    Verify { expr: String },
    /// Integrate numerically and report the drift of the integrals.
    Simulate {
        /// Comma-separated q1..qn, p1..pn.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        state: Vec<f64>,
        #[arg(long, default_value = "rk4")]
        method: Method,
        #[arg(long, default_value_t = 1e-3)]
        h: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t0: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        t1: f64,
        /// Extra quantity to monitor, as NAME=EXPR.
        #[arg(long = "integral", value_parser = parse_named)]
        integrals: Vec<(String, String)>,
        /// Write the trajectory as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Fail when a relative drift exceeds this.
        #[arg(long)]
        max_drift: Option<f64>,
    },
    /// Test the variational identities on random polynomial systems.
    IdentityCheck {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        degree: u32,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, hide = true)]
        corrupt: bool,
    },
    /// List the built-in systems.
    Examples,
}

fn parse_named(s: &str) -> Result<(String, String), String> {
    let (name, expr) = s.split_once('=').ok_or("expected NAME=EXPR")?;
    Ok((name.trim().to_string(), expr.to_string()))
}

fn emit<T: Serialize + std::fmt::Display>(value: &T, json: bool) {
    if json {
        println!("{}", serde_json::to_string_pretty(value).expect("reports serialize"));
    } else {
        print!("{value}");
    }
}

fn load(args: &Args) -> Result<SystemSpec, CliError> {
    let source = match (&args.example, &args.file) {
        (Some(name), _) => SystemSource::Example(name.clone()),
        (None, Some(path)) => SystemSource::File(path.clone()),
        (None, None) => return Err(CliError::Usage("one of --example or --file is required".into())),
    };
    Settings { seed: args.seed, tolerance: args.tol }.apply(source.load()?)
}

fn run(args: &Args) -> Result<i32, CliError> {
    match &args.command {
        Command::Check { symmetry } => {
            let report = cmd_check(&load(args)?, symmetry.as_deref())?;
            emit(&report, args.json);
            Ok(report.exit_code())
        }
        Command::Integral { symmetry } => {
            let report = cmd_integral(&load(args)?, symmetry, args.force)?;
            emit(&report, args.json);
            Ok(report.exit_code())
        }
        Command::Verify { expr } => {
            let report = cmd_verify(&load(args)?, expr)?;
            emit(&report, args.json);
            Ok(report.exit_code())
        }
        Command::Simulate { state, method, h, t0, t1, integrals, csv, max_drift } => {
            let mut opts = SimulateOptions::new(state.clone(), *method, *h, *t0, *t1);
            opts.integrals = integrals.clone();
            opts.max_drift = *max_drift;
            let (report, traj) = cmd_simulate(&load(args)?, &opts)?;
            if let Some(path) = csv {
                std::fs::write(path, traj.to_csv())
                    .map_err(|e| CliError::Io { path: path.clone(), message: e.to_string() })?;
            }
            emit(&report, args.json);
            Ok(report.exit_code())
        }
        Command::IdentityCheck { n, degree, count, corrupt } => {
            let report = cmd_identity_check(*n, *degree, *count, args.seed.unwrap_or(0), *corrupt)?;
            emit(&report, args.json);
            Ok(report.exit_code())
        }
        Command::Examples => {
            let list = cmd_examples();
            if args.json {
                println!("{}", serde_json::to_string_pretty(&list).expect("list serializes"));
            } else {
                for e in list {
                    println!("{:12} {}", e.name, e.description);
                }
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    let code = run(&args).unwrap_or_else(|e| {
        if args.json {
            let body = serde_json::json!({ "version": env!("CARGO_PKG_VERSION"), "error": e.to_string() });
            println!("{}", serde_json::to_string_pretty(&body).expect("error serializes"));
        }
        eprintln!("error: {e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}
