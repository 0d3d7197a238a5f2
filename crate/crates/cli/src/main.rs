use std::fs;
use std::io::{self, Write};
use std::num::NonZeroUsize;
use std::path::PathBuf;
use std::process::ExitCode;
use std::thread;

use clap::{Parser, Subcommand, ValueEnum};
use tictoc::{Format, Timer, TimerConfig, Unit};
use tictoc_demo::workloads::{self, MAX_FIB, MIN_OVERHEAD_PAIRS};

const USAGE_ERROR: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "tictoc-demo", version, about = "Timed demo workloads")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Report format
    #[arg(
        long,
        global = true,
        value_enum,
        env = "TICTOC_FORMAT",
        default_value = "table"
    )]
    format: FormatArg,

    /// Display unit for the table format
    #[arg(long, global = true, value_enum, default_value = "auto")]
    unit: UnitArg,

    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Suppress mismatch warnings
    #[arg(long, global = true)]
    no_warnings: bool,

    /// Print un-aggregated spans as `tag,duration_ns` before the report
    #[arg(long, global = true)]
    raw: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Gibbs sampler loop nest
    Gibbs {
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        thin: u64,
    },
    /// Naive (and optionally memoized) Fibonacci
    Fib {
        #[arg(long, default_value_t = 25, value_parser = clap::value_parser!(u32).range(0..=i64::from(MAX_FIB)))]
        n: u32,
        #[arg(long)]
        memo: bool,
    },
    /// Parallel arctangent over a vector
    Parmap {
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        size: u64,
        /// Worker count [default: available parallelism]
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        threads: Option<u64>,
    },
    /// Empty tic/toc pairs to estimate timer overhead
    Overhead {
        #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(MIN_OVERHEAD_PAIRS..))]
        pairs: u64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Table,
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(arg: FormatArg) -> Self {
        match arg {
            FormatArg::Table => Format::Table,
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum UnitArg {
    Auto,
    Ns,
    Us,
    Ms,
}

impl UnitArg {
    fn unit(self) -> Option<Unit> {
        match self {
            UnitArg::Auto => None,
            UnitArg::Ns => Some(Unit::Nanoseconds),
            UnitArg::Us => Some(Unit::Microseconds),
            UnitArg::Ms => Some(Unit::Milliseconds),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) if !err.use_stderr() => err.exit(),
        Err(err) => {
            let rendered = err.to_string();
            eprintln!("{}", rendered.lines().next().unwrap_or("invalid arguments"));
            return ExitCode::from(USAGE_ERROR);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> io::Result<()> {
    let name = match cli.command {
        Command::Gibbs { .. } => "gibbs_cpp_times",
        Command::Fib { .. } => "fib_times",
        Command::Parmap { .. } => "times",
        Command::Overhead { .. } => "overhead_times",
    };
    let format = Format::from(cli.format);
    let mut timer = Timer::new(
        TimerConfig::named(name)
            .autoreturn(false)
            .verbose(!cli.no_warnings),
    );

    let mut notes = Vec::new();
    match cli.command {
        Command::Gibbs { n, thin } => {
            workloads::gibbs(&timer, n as usize, thin as usize);
        }
        Command::Fib { n, memo } => {
            let values = workloads::fibonacci(&timer, n, memo)
                .expect("index range is enforced by the argument parser");
            notes.push(format!("fib({n}) = {}", values.naive));
            if let Some(v) = values.memo {
                notes.push(format!("fib_memo({n}) = {v}"));
            }
        }
        Command::Parmap { size, threads } => {
            let threads = threads
                .map(|t| t as usize)
                .unwrap_or_else(|| thread::available_parallelism().map_or(1, NonZeroUsize::get));
            let mut values = workloads::parmap_inputs(size as usize);
            workloads::atan_map(&timer, &mut values, threads);
            notes.push(format!("{size} values on {threads} thread(s)"));
        }
        Command::Overhead { pairs } => {
            workloads::overhead(&timer, pairs);
            notes.push(format!(
                "mean of {pairs} empty tic/toc pairs; overhead is machine-dependent"
            ));
        }
    }

    let stdout = io::stdout();
    let mut out = stdout.lock();
    if cli.raw {
        for span in timer.raw_spans() {
            writeln!(out, "{},{}", span.tag, span.duration_ns)?;
        }
    }

    let mut report = timer.finalize();
    if let Some(unit) = cli.unit.unit() {
        report = report.with_unit(unit);
    }
    let mut text = report.render(format);
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match &cli.output {
        Some(path) => fs::write(path, &text)?,
        None => out.write_all(text.as_bytes())?,
    }

    // Keep machine-readable stdout clean.
    let notes_to_stdout = cli.output.is_none() && matches!(format, Format::Table);
    for note in notes {
        if notes_to_stdout {
            writeln!(out, "{note}")?;
        } else {
            eprintln!("{note}");
        }
    }
    Ok(())
}
