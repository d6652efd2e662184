//! `hyperkin`: analyze, classify and verify moving-hypersurface scenarios.
//!
//! Exit codes: 0 success, 1 runtime or validation failure (or a failed
//! `verify`), 2 usage error (including unparsable `check-expr` input).

use std::io::IsTerminal;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use hyperkin::app::report::{emit_report, Format};
use hyperkin::app::scenario::{builtin, builtin_scenarios};
use hyperkin::app::verify::invariant_suite;
use hyperkin::expr::validate_vars;
use hyperkin::variation::Tolerances;
use hyperkin::{load_scenario, parse_str, run_grid, Report, RunOptions, Scenario};

#[derive(Parser)]
#[command(name = "hyperkin", version, about = "Kinematics and connection variation of moving hypersurfaces")]
struct Cli {
    /// Affine threshold on sup‖∇𝒟‖ / (1 + sup‖𝒟‖).
    #[arg(long, global = true, value_parser = positive, default_value_t = Tolerances::default().affine)]
    tol_affine: f64,
    /// Isometric threshold on sup‖𝒟‖.
    #[arg(long, global = true, value_parser = positive, default_value_t = Tolerances::default().isometric)]
    tol_iso: f64,
    /// Normalized route-agreement threshold.
    #[arg(long, global = true, value_parser = positive, default_value_t = Tolerances::default().route)]
    tol_route: f64,
    /// Also check δg, δn and δ∇ against finite differences in time.
    #[arg(long, global = true)]
    fd_validate: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the built-in scenario catalog.
    List,
    /// Run a scenario grid and emit the full report.
    Analyze {
        #[command(flatten)]
        run: RunArgs,
        /// Output file; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "json", value_parser = parse_format)]
        format: Format,
    },
    /// Run a scenario grid and print the verdict line.
    Classify {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run the invariant suite; exits 1 if any residual exceeds its tolerance.
    Verify {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Parse an expression and echo its canonical form.
    CheckExpr {
        expr: String,
        /// Comma-separated allowed variables.
        #[arg(long, value_delimiter = ',', default_value = "u,v,t")]
        vars: Vec<String>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Built-in scenario name (see `list`).
    #[arg(long, conflicts_with = "file", required_unless_present = "file")]
    scenario: Option<String>,
    /// Scenario file.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Evaluation time; the scenario's t0 when absent.
    #[arg(long = "t", allow_negative_numbers = true)]
    t: Option<f64>,
    /// Samples per axis, one value for all axes or one per axis.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<usize>>,
}

fn positive(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        _ => Err(format!("expected a positive number, got `{s}`")),
    }
}

fn parse_format(s: &str) -> std::result::Result<Format, String> {
    s.parse()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let tolerances = Tolerances { affine: cli.tol_affine, isometric: cli.tol_iso, route: cli.tol_route, ..Tolerances::default() };
    let color = std::env::var_os("NO_COLOR").is_none() && std::io::stdout().is_terminal();
    match cli.command {
        Command::List => {
            for s in builtin_scenarios() {
                println!("{:<24} m={} {}", s.name, s.motion.m(), s.description);
            }
        }
        Command::Analyze { run, out, format } => {
            let report = execute(&run, tolerances, cli.fd_validate)?;
            match out {
                Some(path) => {
                    emit_report(&report, format, &path)?;
                    println!("wrote {} ({})", path.display(), verdict_line(&report));
                }
                None => print!("{}", report.render(format)?),
            }
        }
        Command::Classify { run } => {
            let report = execute(&run, tolerances, cli.fd_validate)?;
            println!("{}: {}", report.scenario.name, verdict_line(&report));
        }
        Command::Verify { run } => {
            let report = execute(&run, tolerances, cli.fd_validate)?;
            let checks = invariant_suite(&report);
            for c in &checks {
                let tag = match (c.passed, color) {
                    (true, true) => "\x1b[32mPASS\x1b[0m",
                    (false, true) => "\x1b[31mFAIL\x1b[0m",
                    (true, false) => "PASS",
                    (false, false) => "FAIL",
                };
                println!("{tag} {:<26} residual={:<12.3e} tol={:.0e}", c.name, c.residual, c.tolerance);
            }
            println!("{}: {}", report.scenario.name, verdict_line(&report));
            let failed = checks.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                eprintln!("{failed} invariant(s) exceeded tolerance");
                return Ok(ExitCode::from(1));
            }
        }
        Command::CheckExpr { expr, vars } => {
            let parsed = match parse_str(&expr) {
                Ok(e) => e,
                Err(e) => {
                    eprintln!("error: {e}");
                    return Ok(ExitCode::from(2));
                }
            };
            let allowed: Vec<&str> = vars.iter().map(String::as_str).collect();
            if let Err(e) = validate_vars(&parsed, &allowed) {
                eprintln!("error: {e}");
                return Ok(ExitCode::from(2));
            }
            println!("{parsed}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn execute(run: &RunArgs, tolerances: Tolerances, fd_validate: bool) -> Result<Report> {
    let scenario: Scenario = match (&run.scenario, &run.file) {
        (Some(name), _) => builtin(name)?,
        (None, Some(path)) => load_scenario(path)?,
        (None, None) => unreachable!("clap requires a scenario source"),
    };
    let grid = run.grid.as_ref().map(|g| if g.len() == 1 { vec![g[0]; scenario.motion.m()] } else { g.clone() });
    let options = RunOptions { t: run.t, grid, tolerances, fd_validate };
    run_grid(&scenario, &options).with_context(|| format!("running `{}`", scenario.name))
}

fn verdict_line(r: &Report) -> String {
    let v = &r.verdict;
    let mut s = format!(
        "affine={} isometric={} sup_nabla_d={:.3e} sup_d={:.3e} sup_delta_connection={:.3e} tangential={} normal={} parallel_normal={}",
        v.affine,
        v.isometric,
        v.sup_nabla_d,
        v.sup_d,
        v.sup_delta_connection,
        v.flags.tangential,
        v.flags.normal,
        v.flags.parallel_normal
    );
    if let Some(l) = v.sup_lie {
        s.push_str(&format!(" sup_lie={l:.3e}"));
    }
    s
}
