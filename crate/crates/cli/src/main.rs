//! Command-line front end for the tax-rate solver.
//!
//! Subcommands: `solve`, `candidates`, `welfare-curve`, `plot`, `verify`.
//! Exit codes: 0 on success, 2 on input/validation failure, 3 when the
//! brute-force oracle contradicts the enumerated solution.

use sugartax_cli::{config, instance, plot, report};

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sugartax_core::arrangement::{enumerate_candidates, CandidateSet};
use sugartax_core::market::Market;
use sugartax_core::numeric::parse_rational;
use sugartax_core::optimizer::optimize;
use sugartax_core::oracle::{verify_solution, GridSpec, VerifyReport};
use sugartax_core::response::ResponseTable;
use sugartax_core::welfare::WelfareMode;

use config::FileConfig;

#[derive(Parser)]
#[command(
    name = "sugartax",
    about = "Welfare-optimal tax rates for markets of utility-maximizing consumers",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Market instance file.
    #[arg(long)]
    instance: PathBuf,
    /// Optional `key = value` run configuration; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Decimal places for displayed prices and money figures.
    #[arg(long)]
    precision: Option<u32>,
    /// Write the report here (`.json`/`.csv`/`.svg` pick the format);
    /// the human-readable report always goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ModeArgs {
    /// Welfare accounting: `definition` or `paper-example`.
    #[arg(long, value_parser = parse_mode)]
    welfare_mode: Option<WelfareMode>,
}

#[derive(Args)]
struct GridArgs {
    /// Price grid step for the brute-force oracle (rational, e.g. 0.01).
    #[arg(long, value_parser = parse_rational_arg)]
    grid_step: Option<sugartax_core::Rational>,
    /// Tax-rate step for the brute-force oracle (rational, e.g. 0.05).
    #[arg(long, value_parser = parse_rational_arg)]
    alpha_step: Option<sugartax_core::Rational>,
}

fn parse_mode(s: &str) -> Result<WelfareMode, String> {
    s.parse()
}

fn parse_rational_arg(s: &str) -> Result<sugartax_core::Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Solve the full game: optimal tax rate, prices and welfare.
    Solve {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        mode: ModeArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Also run the brute-force oracle against the solution.
        #[arg(long)]
        oracle: bool,
    },
    /// Enumerate all candidate-optimal price points.
    Candidates {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Tabulate welfare across tax rates.
    WelfareCurve {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        mode: ModeArgs,
        /// Number of evenly spaced rates sampled on top of the break-evens.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Draw the price-space diagram (two-product markets only).
    Plot {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Check the enumerated solution against the brute-force grid oracle.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        mode: ModeArgs,
        #[command(flatten)]
        grid: GridArgs,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Instance(#[from] instance::InstanceError),
    #[error(transparent)]
    Config(#[from] config::ConfigError),
    #[error(transparent)]
    Plot(#[from] plot::PlotError),
    #[error(transparent)]
    Response(#[from] sugartax_core::ResponseError),
    #[error(transparent)]
    Oracle(#[from] sugartax_core::OracleError),
    #[error("cannot write `{path}`: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

struct Prepared {
    market: Market,
    candidates: CandidateSet,
    precision: u32,
    file: FileConfig,
    out: Option<PathBuf>,
}

fn prepare(common: &CommonArgs) -> Result<Prepared, CliError> {
    let file = match &common.config {
        Some(path) => config::load_config(path)?,
        None => FileConfig::default(),
    };
    let market = instance::load_instance(&common.instance)?;
    let candidates = enumerate_candidates(&market);
    Ok(Prepared {
        market,
        candidates,
        precision: common.precision.or(file.precision).unwrap_or(2),
        file,
        out: common.out.clone(),
    })
}

fn resolve_mode(flag: &ModeArgs, file: &FileConfig) -> WelfareMode {
    flag.welfare_mode
        .or(file.welfare_mode)
        .unwrap_or(WelfareMode::Definition)
}

fn build_grid(
    candidates: &CandidateSet,
    m: usize,
    grid: &GridArgs,
    file: &FileConfig,
) -> Result<GridSpec, CliError> {
    let mut spec = GridSpec::covering(candidates, m)?;
    if let Some(step) = grid.grid_step.clone().or_else(|| file.grid_step.clone()) {
        spec = GridSpec::new(spec.lower, spec.upper, step, spec.alpha_step)?;
    }
    if let Some(step) = grid.alpha_step.clone().or_else(|| file.alpha_step.clone()) {
        spec = GridSpec::new(spec.lower, spec.upper, spec.price_step, step)?;
    }
    Ok(spec)
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content).map_err(|source| CliError::Write {
        path: path.display().to_string(),
        source,
    })
}

fn extension_is(path: &Path, ext: &str) -> bool {
    path.extension().map(|e| e == ext).unwrap_or(false)
}

fn run() -> Result<ExitCode, CliError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve {
            common,
            mode,
            grid,
            oracle,
        } => {
            let prepared = prepare(&common)?;
            let mode = resolve_mode(&mode, &prepared.file);
            let solution = optimize(&prepared.market, &prepared.candidates, mode)?;
            let want_oracle = oracle || prepared.file.oracle.unwrap_or(false);
            let verdict: Option<VerifyReport> = if want_oracle {
                let spec = build_grid(
                    &prepared.candidates,
                    prepared.market.product_count(),
                    &grid,
                    &prepared.file,
                )?;
                Some(verify_solution(
                    &prepared.market,
                    &prepared.candidates,
                    &solution,
                    &spec,
                )?)
            } else {
                None
            };
            let report = report::build_solve_report(
                &prepared.market,
                &prepared.candidates,
                &solution,
                prepared.precision,
                verdict.as_ref(),
            );
            let text = report::render_solve_text(&report);
            print!("{text}");
            if let Some(out) = &prepared.out {
                if extension_is(out, "json") {
                    write_file(
                        out,
                        &format!("{}\n", serde_json::to_string_pretty(&report)?),
                    )?;
                } else {
                    write_file(out, &text)?;
                }
            }
            if let Some(verdict) = &verdict {
                if !verdict.passed() {
                    return Ok(ExitCode::from(3));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Candidates { common } => {
            let prepared = prepare(&common)?;
            let rows =
                report::candidate_rows(&prepared.market, &prepared.candidates, prepared.precision);
            let text = report::render_candidates_text(&prepared.market, &rows);
            print!("{text}");
            if let Some(out) = &prepared.out {
                if extension_is(out, "csv") {
                    write_file(out, &report::render_candidates_csv(&prepared.market, &rows))?;
                } else {
                    write_file(out, &text)?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::WelfareCurve {
            common,
            mode,
            samples,
        } => {
            let prepared = prepare(&common)?;
            let mode = resolve_mode(&mode, &prepared.file);
            let samples = samples.or(prepared.file.samples).unwrap_or(11).max(2);
            let rows = report::curve_rows(
                &prepared.market,
                &prepared.candidates,
                mode,
                samples,
                prepared.precision,
            )?;
            let text = report::render_curve_text(&rows, prepared.precision);
            print!("{text}");
            if let Some(out) = &prepared.out {
                if extension_is(out, "csv") {
                    write_file(out, &report::render_curve_csv(&rows))?;
                } else {
                    write_file(out, &text)?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Plot { common } => {
            let prepared = prepare(&common)?;
            let table = ResponseTable::new(&prepared.market, &prepared.candidates);
            let svg = plot::render_plot(&prepared.market, &prepared.candidates, &table)?;
            match &prepared.out {
                Some(out) => write_file(out, &svg)?,
                None => print!("{svg}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { common, mode, grid } => {
            let prepared = prepare(&common)?;
            let mode = resolve_mode(&mode, &prepared.file);
            let solution = optimize(&prepared.market, &prepared.candidates, mode)?;
            let spec = build_grid(
                &prepared.candidates,
                prepared.market.product_count(),
                &grid,
                &prepared.file,
            )?;
            let verdict =
                verify_solution(&prepared.market, &prepared.candidates, &solution, &spec)?;
            let text = report::render_verify_text(&verdict);
            print!("{text}");
            if let Some(out) = &prepared.out {
                write_file(out, &text)?;
            }
            Ok(if verdict.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            })
        }
    }
}
