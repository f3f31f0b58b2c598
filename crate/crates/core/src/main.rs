use std::fs::File;
use std::io::{self, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use group_updating::experiments::{self, Table};
use group_updating::SystemConfig;

const EXIT_USAGE: u8 = 1;
const EXIT_IO: u8 = 4;

/// Group updating experiments: average age, optimal group sizes and
/// Monte Carlo validation.
#[derive(Debug, Parser)]
#[command(name = "group-updating", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Output {
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Average age at every divisor k of n, against round robin.
    AgeVsK {
        #[arg(long)]
        n: u32,
        #[arg(long, value_parser = experiments::parse_f64_list)]
        p_list: std::vec::Vec<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Minimum average age over k for each n in start:stop:step.
    AgeVsN {
        #[arg(long, value_parser = experiments::parse_u32_range)]
        n: std::vec::Vec<u32>,
        #[arg(long, value_parser = experiments::parse_f64_list)]
        p_list: std::vec::Vec<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Average age and expected updates per cycle over divisors of n.
    CompareMetrics {
        #[arg(long)]
        n: u32,
        #[arg(long, value_parser = experiments::parse_f64_list)]
        p_list: std::vec::Vec<f64>,
        #[command(flatten)]
        output: Output,
    },
    /// Optimal group sizes under both metrics across a p grid.
    KstarVsP {
        #[arg(long)]
        n: u32,
        /// Comma-separated probabilities.
        #[arg(long, value_parser = experiments::parse_f64_list, conflicts_with = "p_range")]
        p_list: Option<std::vec::Vec<f64>>,
        /// start:stop:step grid of probabilities.
        #[arg(long, value_parser = experiments::parse_f64_range)]
        p_range: Option<std::vec::Vec<f64>>,
        #[command(flatten)]
        output: Output,
    },
    /// Monte Carlo estimate of the average age, one row per seed.
    Simulate {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Closed forms against exact oracles and simulation.
    Validate {
        #[command(flatten)]
        system: SystemArgs,
    },
}

#[derive(Debug, Args)]
struct SystemArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    k: u32,
    #[arg(long, default_value_t = 100_000)]
    cycles: usize,
    /// Comma-separated seeds or start:stop:step.
    #[arg(long, value_parser = experiments::parse_seeds, default_value = "1")]
    seeds: std::vec::Vec<u64>,
}

impl SystemArgs {
    fn config(&self) -> group_updating::Result<SystemConfig> {
        SystemConfig::new(self.n, self.p, self.k)
    }
}

fn emit(table: &Table, output: &Output) -> ExitCode {
    let result = match &output.out {
        Some(path) => File::create(path).and_then(|f| table.write_csv(BufWriter::new(f))),
        None => table.write_csv(io::stdout().lock()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_IO)
        }
    }
}

fn usage(e: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_USAGE)
}

fn run(cli: Cli) -> group_updating::Result<ExitCode> {
    Ok(match cli.command {
        Command::AgeVsK { n, p_list, output } => emit(
            &experiments::age_vs_k_table(&experiments::age_vs_k(n, &p_list)?),
            &output,
        ),
        Command::AgeVsN { n, p_list, output } => emit(
            &experiments::age_vs_n_table(&experiments::age_vs_n(&n, &p_list)?),
            &output,
        ),
        Command::CompareMetrics { n, p_list, output } => emit(
            &experiments::compare_metrics_table(&experiments::compare_metrics(n, &p_list)?),
            &output,
        ),
        Command::KstarVsP {
            n,
            p_list,
            p_range,
            output,
        } => {
            let Some(grid) = p_list.or(p_range) else {
                return Ok(usage("one of --p-list or --p-range is required"));
            };
            emit(
                &experiments::kstar_vs_p_table(&experiments::kstar_vs_p(n, &grid)?),
                &output,
            )
        }
        Command::Simulate { system, output } => {
            let config = system.config()?;
            if system.cycles < 2 {
                return Ok(usage("--cycles must be at least 2"));
            }
            let rows = experiments::simulate(&config, system.cycles, &system.seeds)?;
            emit(&experiments::simulation_table(&config, &rows), &output)
        }
        Command::Validate { system } => {
            let config = system.config()?;
            if system.cycles < 2 {
                return Ok(usage("--cycles must be at least 2"));
            }
            let report = experiments::validate(&config, system.cycles, &system.seeds)?;
            print!("{}", report.render());
            ExitCode::from(report.exit_code() as u8)
        }
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => usage(e),
    }
}
