use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use xxzq_cli::{parse_state, read_csv, run_oracle, sample_states, write_csv, CliError, Result};
use xxzq_core::sweep::{detect_cusps_with, point_record, DEFAULT_KAPPA};
use xxzq_core::{
    detect_branch_switch, run_sweep, Boundary, ChainSpec, Field, Normalization, SpectrumCache, SweepGrid,
    SweepParam, SweepRecord,
};

/// Thermal nearest-neighbour entanglement and quantum discord of XXZ rings.
#[derive(Parser)]
#[command(name = "xxzq", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every observable at one (L, J, Δ, T) and print JSON.
    Point {
        #[command(flatten)]
        chain: ChainArgs,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Sweep one parameter over a uniform grid and write CSV or JSON.
    Sweep {
        #[command(flatten)]
        chain: ChainArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Score slope discontinuities of a field and d_branch switches.
    #[command(name = "detect-cp")]
    DetectCp {
        /// Read a sweep CSV instead of running the sweep.
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        chain: ChainArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value = "qd", value_parser = parse_field)]
        field: Field,
        #[arg(long, default_value_t = DEFAULT_KAPPA)]
        kappa: f64,
        /// slope-jump: median |forward - backward slope|; slope: median |slope|.
        #[arg(long, default_value = "slope-jump", value_parser = parse_normalization)]
        normalization: Normalization,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check closed-form discord against a brute-force measurement search.
    Oracle {
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Check a single state `DX,DZ` instead of random samples.
        #[arg(long, allow_hyphen_values = true)]
        state: Option<String>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ChainArgs {
    /// Number of sites.
    #[arg(long = "L", default_value_t = 8)]
    sites: usize,
    /// Exchange coupling.
    #[arg(long = "J", default_value_t = 1.0, allow_hyphen_values = true)]
    coupling: f64,
    /// Anisotropy.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    delta: f64,
    /// Temperature (k_B = 1).
    #[arg(long = "T", default_value_t = 0.5)]
    temperature: f64,
    /// Boundary condition: periodic or open.
    #[arg(long, default_value = "periodic", value_parser = parse_boundary)]
    bc: Boundary,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value = "delta", value_parser = parse_param)]
    param: SweepParam,
    #[arg(long, allow_hyphen_values = true)]
    from: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    to: Option<f64>,
    #[arg(long, default_value_t = 201)]
    steps: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn parse_boundary(s: &str) -> std::result::Result<Boundary, String> {
    s.parse().map_err(|e: xxzq_core::Error| e.to_string())
}

fn parse_param(s: &str) -> std::result::Result<SweepParam, String> {
    s.parse().map_err(|e: xxzq_core::Error| e.to_string())
}

fn parse_field(s: &str) -> std::result::Result<Field, String> {
    s.parse().map_err(|e: xxzq_core::Error| e.to_string())
}

fn parse_normalization(s: &str) -> std::result::Result<Normalization, String> {
    s.parse().map_err(|e: xxzq_core::Error| e.to_string())
}

fn sink(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|source| CliError::Io { path: p.display().to_string(), source })?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(path: &Option<PathBuf>, value: &T) -> Result<()> {
    let mut out = sink(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| CliError::Numerical(format!("writing JSON: {e}")))?;
    writeln!(out).and_then(|_| out.flush()).map_err(|source| CliError::Io { path: "output".into(), source })
}

fn sweep_records(chain: &ChainArgs, grid: &GridArgs) -> Result<Vec<SweepRecord>> {
    let (Some(from), Some(to)) = (grid.from, grid.to) else {
        return Err(CliError::Usage("--from and --to are required for a sweep".into()));
    };
    let g = SweepGrid::new(
        grid.param,
        from,
        to,
        grid.steps,
        chain.sites,
        chain.coupling,
        chain.delta,
        chain.temperature,
        chain.bc,
    )?;
    Ok(run_sweep(&g, &SpectrumCache::new())?)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Point { chain, output } => {
            let spec = ChainSpec::new(chain.sites, chain.coupling, chain.delta, chain.bc)?;
            let rec = point_record(&spec, chain.temperature, &SpectrumCache::new())?;
            write_json(&output, &rec)
        }
        Command::Sweep { chain, grid, format, output } => {
            let recs = sweep_records(&chain, &grid)?;
            match format {
                Format::Csv => write_csv(sink(&output)?, &recs),
                Format::Json => write_json(&output, &recs),
            }
        }
        Command::DetectCp { input, chain, grid, field, kappa, normalization, output } => {
            let recs = match &input {
                Some(p) => {
                    let f = File::open(p).map_err(|source| CliError::Io { path: p.display().to_string(), source })?;
                    read_csv(BufReader::new(f))?
                }
                None => sweep_records(&chain, &grid)?,
            };
            let report = detect_cusps_with(&recs, field, kappa, normalization)?.merged(detect_branch_switch(&recs)?);
            write_json(&output, &report)
        }
        Command::Oracle { samples, seed, state, output } => {
            let states = match &state {
                Some(s) => vec![parse_state(s)?],
                None => sample_states(seed, samples),
            };
            let report = run_oracle(&states, seed);
            write_json(&output, &report)?;
            if report.pass {
                Ok(())
            } else {
                Err(CliError::Numerical(format!(
                    "max deviation {:.3e} exceeds {:.0e}",
                    report.max_deviation, report.tolerance
                )))
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
