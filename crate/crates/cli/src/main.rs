use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{debug, info, LevelFilter};

use qer_cli::config::{dedup_methods, CliError, CodeArg, SweepConfig};
use qer_cli::output::{
    atomic_write, gnuplot_script, read_column, sweep_csv, to_json_bytes, SolutionDocument, SweepDocument,
};
use qer_cli::sweep::{default_recoveries, run_sweep};
use qer_core::recovery::{damping_recovery, fit_quadratic_coefficient, Method};
use qer_core::sdp::SolverOptions;

#[derive(Parser)]
#[command(name = "qer", version, about = "Optimal quantum error recovery for codes under amplitude damping")]
struct Cli {
    /// Increase log verbosity (-v info, -vv debug with solver trace).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one recovery problem.
    Solve(SolveArgs),
    /// Evaluate recoveries over a uniform γ grid.
    Sweep(SweepArgs),
    /// Fit 1 − F ≈ aγ² + bγ³ to one column of a sweep CSV.
    Fit(FitArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// five-qubit, leung4 or file:PATH
    #[arg(long)]
    code: CodeArg,
    #[arg(long)]
    gamma: f64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// optimal, qec, decode-only or none
    #[arg(long, default_value = "optimal")]
    method: Method,
    /// Write the solution as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    code: CodeArg,
    #[arg(long, default_value_t = 0.0)]
    gamma_start: f64,
    #[arg(long, default_value_t = 0.5)]
    gamma_stop: f64,
    #[arg(long, default_value_t = 26)]
    steps: usize,
    /// Comma-separated subset of optimal,qec,none (default: all the code supports).
    #[arg(long, value_delimiter = ',')]
    recoveries: Option<Vec<Method>>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// CSV output; a JSON copy is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a gnuplot script that plots the CSV.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = "f_optimal")]
    column: String,
    #[arg(long, default_value_t = 0.01)]
    max_gamma: f64,
}

fn solve(args: SolveArgs) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&args.gamma) {
        return Err(CliError::Config(format!("gamma {} outside [0, 1]", args.gamma)));
    }
    let code = args.code.load()?;
    let result = damping_recovery(&code, args.gamma, args.method, &SolverOptions::with_tol(args.tol))?;
    if let Some(c) = &result.certificate {
        for line in &c.history {
            debug!("{line}");
        }
    }
    match &result.certificate {
        Some(c) => println!(
            "{} gamma={} method={} fidelity={:.15} gap={:.3e} iterations={}",
            args.code, args.gamma, result.method, result.fidelity, c.gap, c.iterations
        ),
        None => println!(
            "{} gamma={} method={} fidelity={:.15}",
            args.code, args.gamma, result.method, result.fidelity
        ),
    }
    if let Some(path) = &args.out {
        atomic_write(path, &to_json_bytes(&SolutionDocument::new(&result))?)?;
        info!("wrote {}", path.display());
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<(), CliError> {
    let recoveries = match args.recoveries {
        Some(r) => dedup_methods(r),
        None => default_recoveries(&args.code.load()?),
    };
    let cfg = SweepConfig {
        code: args.code,
        gamma_start: args.gamma_start,
        gamma_stop: args.gamma_stop,
        steps: args.steps,
        recoveries,
        tol: args.tol,
        jobs: args.jobs,
    };
    let records = run_sweep(&cfg)?;
    let csv = sweep_csv(&records)?;
    match &args.out {
        Some(path) => {
            atomic_write(path, &csv)?;
            let doc = SweepDocument::new(cfg.code.to_string(), cfg.recoveries.clone(), cfg.tol, &records);
            let json_path = path.with_extension("json");
            atomic_write(&json_path, &to_json_bytes(&doc)?)?;
            info!("wrote {} and {}", path.display(), json_path.display());
            for c in &doc.crossings.qec_vs_none {
                println!("qec falls below no recovery at gamma ~ {c:.6}");
            }
            for c in &doc.crossings.optimal_vs_none {
                println!("optimal falls below no recovery at gamma ~ {c:.6}");
            }
        }
        None => print!("{}", String::from_utf8_lossy(&csv)),
    }
    if let Some(plot) = &args.plot {
        let csv_path = args
            .out
            .as_ref()
            .ok_or_else(|| CliError::Config("--plot needs --out for the CSV it reads".into()))?;
        let script = gnuplot_script(csv_path, plot, &format!("{} under amplitude damping", cfg.code));
        atomic_write(plot, script.as_bytes())?;
    }
    let failed = records.iter().filter(|r| r.failed()).count();
    if failed == records.len() {
        return Err(CliError::AllFailed);
    }
    if failed > 0 {
        log::warn!("{failed} of {} grid points failed", records.len());
    }
    Ok(())
}

fn fit(args: FitArgs) -> Result<(), CliError> {
    let points: Vec<_> = read_column(&args.input, &args.column)?
        .into_iter()
        .filter(|&(g, _)| g > 0.0 && g <= args.max_gamma)
        .collect();
    let fit = fit_quadratic_coefficient(&points)?;
    println!(
        "{}: 1 - F = {:.6} gamma^2 + {:.6} gamma^3 (residual {:.3e}, {} points)",
        args.column,
        fit.quadratic,
        fit.cubic,
        fit.residual_norm,
        points.len()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => LevelFilter::Warn,
        1 => LevelFilter::Info,
        _ => LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Sweep(a) => sweep(a),
        Command::Fit(a) => fit(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
