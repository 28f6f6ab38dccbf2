use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use conewright::batch::{run_spec_text, write_plot_data, RunOptions, EXIT_INVALID, EXIT_NO_RESULT};
use conewright::cones::ScaleSchedule;
use conewright::corpus::{corpus, render, run_corpus, Status};

#[derive(Parser)]
#[command(name = "conewright", version, about = "Tangent cones, subdifferentials and mean-value certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an analysis spec (or a batch array of specs) and write the JSON report.
    Run {
        spec: PathBuf,
        /// Report path; defaults to the spec's `out` field, else stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the seed of every spec.
        #[arg(long)]
        seed: Option<u64>,
        /// Leave wall times out of the report.
        #[arg(long)]
        no_timestamp: bool,
    },
    /// Run the built-in corpus and print pass/fail per item.
    Selftest {
        /// Print the corpus item names without running them.
        #[arg(long)]
        list: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Truncate the scale schedule to this many levels.
        #[arg(long)]
        levels: Option<usize>,
        /// Leave the wall time out of the summary.
        #[arg(long)]
        no_timestamp: bool,
    },
    /// Write CSV plot data for the cones and subdifferentials in a report.
    Plot {
        report: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Writes to stdout, ignoring a closed pipe (e.g. when piped into `head`).
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn run(spec: PathBuf, out: Option<PathBuf>, seed: Option<u64>, no_timestamp: bool) -> ExitCode {
    let text = match std::fs::read_to_string(&spec) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", spec.display());
            return code(EXIT_INVALID);
        }
    };
    let output = run_spec_text(&text, RunOptions { seed, timestamps: !no_timestamp });
    let reports = output.reports();
    for r in &reports {
        if let Some(e) = &r.error {
            eprintln!("error: {}", e.message);
        }
    }
    // A lone spec may name its own report path; batch items may write their own copy.
    let single_out = (reports.len() == 1).then(|| reports[0].spec["out"].as_str().map(PathBuf::from)).flatten();
    if reports.len() > 1 {
        for r in &reports {
            if let Some(p) = r.spec["out"].as_str() {
                let json = serde_json::to_string_pretty(r).expect("reports serialize") + "\n";
                if let Err(e) = std::fs::write(p, json) {
                    eprintln!("error: cannot write {p}: {e}");
                    return code(EXIT_INVALID);
                }
            }
        }
    }
    let json = output.to_json();
    match out.or(single_out) {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, json) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return code(EXIT_INVALID);
            }
        }
        None => emit(&json),
    }
    code(output.exit_code())
}

fn selftest(list: bool, seed: u64, levels: Option<usize>, no_timestamp: bool) -> ExitCode {
    if list {
        let names: String = corpus().iter().map(|i| format!("{:<34} {}\n", i.name, i.summary)).collect();
        emit(&names);
        return ExitCode::SUCCESS;
    }
    let mut sched = ScaleSchedule::default().with_seed(seed);
    if let Some(k) = levels {
        sched = sched.with_levels(k);
    }
    if let Err(e) = sched.validate() {
        eprintln!("error: {e}");
        return code(EXIT_INVALID);
    }
    let start = Instant::now();
    let outcomes = run_corpus(&sched);
    emit(&render(&outcomes, &sched));
    if !no_timestamp {
        emit(&format!("wall time {:.1} s\n", start.elapsed().as_secs_f64()));
    }
    if outcomes.iter().all(|o| o.status == Status::Pass) {
        ExitCode::SUCCESS
    } else {
        code(EXIT_NO_RESULT)
    }
}

fn plot(report: PathBuf, out: PathBuf) -> ExitCode {
    let result = std::fs::read_to_string(&report).map_err(Into::into).and_then(|t| write_plot_data(&t, &out));
    match result {
        Ok(paths) => {
            emit(&paths.iter().map(|p| format!("{}\n", p.display())).collect::<String>());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            code(EXIT_INVALID)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { code(EXIT_INVALID) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::Run { spec, out, seed, no_timestamp } => run(spec, out, seed, no_timestamp),
        Command::Selftest { list, seed, levels, no_timestamp } => selftest(list, seed, levels, no_timestamp),
        Command::Plot { report, out } => plot(report, out),
    }
}
