use clap::{Args, Parser, Subcommand};
use qconstrain::scenario::run::convention_header;
use qconstrain::scenario::{default_stage, identity_suite, parse_scenario, run_scenario, Bound, Stage, SuiteOptions};
use qconstrain::Error;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qconstrain", version, about = "Effective Hamiltonians of strongly constrained quantum systems")]
struct Cli {
    /// Worker threads for parallel sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the geometry and frame (curve.csv or surface.csv).
    Curve(RunArgs),
    /// Transverse modes and their angular momentum matrices (modes.csv).
    Modes(RunArgs),
    /// Gauge matrices and extrapotential on the tangential grid (effective_field.csv).
    Effective(RunArgs),
    /// Lowest levels of the constrained Hamiltonian (spectrum.csv); with
    /// `eps_list` in the scenario, also the convergence study.
    Spectrum(RunArgs),
    /// Constraining-limit convergence study against the full reference solve.
    Converge(RunArgs),
    /// Identity checks: Gauss equation, dS identity, Omega commutators,
    /// extrapotential forms, vielbein kinetic energy, reflection symmetry.
    Check(CheckArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory (default: the scenario's `output`, else `out/<name>`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for randomized start vectors (overrides the scenario).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Accepted for symmetry with the other subcommands; the checks are deterministic.
    #[arg(long)]
    seed: Option<u64>,
    /// Fourier grid size of the vielbein check.
    #[arg(long, default_value_t = 1024)]
    vielbein_n: usize,
    /// Transverse grid size of the symmetry checks.
    #[arg(long, default_value_t = 128)]
    grid_n: usize,
}

fn run(args: &RunArgs, stage: Option<Stage>) -> Result<(), Error> {
    let scenario = parse_scenario(&args.scenario)?;
    let out =
        args.out.clone().or_else(|| scenario.output.clone()).unwrap_or_else(|| Path::new("out").join(&scenario.name));
    let stage = stage.unwrap_or_else(|| default_stage(&scenario));
    let report = run_scenario(&scenario, stage, &out, args.seed)?;
    for f in &report.files {
        println!("wrote {}", f.display());
    }
    if let Some(c) = report.metadata.get("convergence") {
        println!("convergence order: {}", c["order"]);
    }
    Ok(())
}

fn check(args: &CheckArgs) -> Result<bool, Error> {
    let items = identity_suite(&SuiteOptions { vielbein_n: args.vielbein_n, grid_n: args.grid_n })?;
    std::fs::create_dir_all(&args.out)?;
    let path = args.out.join("check.csv");
    let mut w = std::io::BufWriter::new(std::fs::File::create(&path)?);
    write!(w, "{}", convention_header("check", 1.0))?;
    writeln!(w, "name,value,bound,tolerance,passed")?;
    let mut all = true;
    for it in &items {
        let op = match it.bound {
            Bound::Below => "<",
            Bound::Above => ">",
        };
        println!("{} {} = {:e} ({op} {:e})", if it.passed { "PASS" } else { "FAIL" }, it.name, it.value, it.tolerance);
        writeln!(w, "{},{},{},{},{}", it.name, it.value, op, it.tolerance, it.passed)?;
        all &= it.passed;
    }
    w.flush()?;
    println!("wrote {}", path.display());
    Ok(all)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Curve(a) => run(a, Some(Stage::Curve)),
        Command::Modes(a) => run(a, Some(Stage::Modes)),
        Command::Effective(a) => run(a, Some(Stage::Effective)),
        Command::Spectrum(a) => run(a, None),
        Command::Converge(a) => run(a, Some(Stage::Converge)),
        Command::Check(a) => match check(a) {
            Ok(true) => Ok(()),
            Ok(false) => {
                eprintln!("error: some identity checks failed");
                return ExitCode::from(1);
            }
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ (Error::Parse(_) | Error::Validation(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
