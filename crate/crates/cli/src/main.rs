//! `lensgrid` command-line front end.

mod commands;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "lensgrid",
    version,
    about = "Grid homology of links in lens spaces"
)]
struct Cli {
    /// Directory for cached sign assignments, keyed by diagram digest.
    #[arg(long, global = true, env = "LENSGRID_SIGN_CACHE")]
    sign_cache: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Flavor {
    Tilde,
    Minus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RingArg {
    F2,
    Z,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    D2,
    Gradings,
    Signs,
    Move,
    Stab,
}

#[derive(Subcommand)]
enum Command {
    /// Check a diagram file and report its invariants' preconditions.
    Validate { file: PathBuf },
    /// Sizes and link components of a diagram.
    Info { file: PathBuf },
    /// (S, M, A) of one generator, given as `perm|pcoords`, e.g. `1,2,0|4,0,3`.
    Grading {
        file: PathBuf,
        generator: String,
        /// Recompute after moving the fundamental domain by (dx, dy).
        #[arg(long, num_args = 2, value_names = ["DX", "DY"], allow_hyphen_values = true)]
        shift: Option<Vec<i64>>,
    },
    /// Homology table as JSON.
    Homology {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "tilde")]
        flavor: Flavor,
        #[arg(long, value_enum, default_value = "f2")]
        ring: RingArg,
        /// Lowest Alexander grading (required for the minus flavor), e.g. `-3/2`.
        #[arg(long, allow_hyphen_values = true)]
        window_min: Option<String>,
        /// Highest Alexander grading.
        #[arg(long, allow_hyphen_values = true)]
        window_max: Option<String>,
    },
    /// Run one verification suite.
    Verify {
        file: PathBuf,
        #[arg(value_enum)]
        suite: Suite,
        /// Move script for the `move` suite.
        #[arg(long)]
        script: Option<PathBuf>,
        /// Stabilization type for the `stab` suite, e.g. `X:SW`.
        #[arg(long, default_value = "X:SW")]
        kind: String,
        /// Row of the marking to stabilize at.
        #[arg(long, default_value_t = 0)]
        row: usize,
        /// Sign file to check instead of solving (signs suite).
        #[arg(long)]
        signs: Option<PathBuf>,
    },
    /// Solve, export or check sign assignments.
    Signs {
        #[command(subcommand)]
        action: SignsAction,
    },
    /// Apply a move script and print every intermediate diagram.
    Moves { file: PathBuf, script: PathBuf },
    /// Integral tilde homology over a corpus, logging any torsion.
    ScanTorsion {
        #[arg(long, default_value_t = 5)]
        p_max: i64,
        /// Every diagram of grid number 1..=N up to translation.
        #[arg(long, default_value_t = 2)]
        exhaustive_n: usize,
        /// Grid number of the random sample.
        #[arg(long, default_value_t = 3)]
        random_n: usize,
        #[arg(long, default_value_t = 0)]
        random_count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Findings log path (JSON lines); printed to stdout if omitted.
        #[arg(long)]
        log: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SignsAction {
    /// Solve S1-S3 and write the assignment.
    Export {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a sign file against the axioms.
    Import { file: PathBuf, signs: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = commands::Context {
        sign_cache: cli.sign_cache,
    };
    let result = match cli.command {
        Command::Validate { file } => commands::validate(&file),
        Command::Info { file } => commands::info(&file),
        Command::Grading {
            file,
            generator,
            shift,
        } => commands::grading(&file, &generator, shift),
        Command::Homology {
            file,
            flavor,
            ring,
            window_min,
            window_max,
        } => commands::homology(&ctx, &file, flavor, ring, window_min, window_max),
        Command::Verify {
            file,
            suite,
            script,
            kind,
            row,
            signs,
        } => commands::verify(&ctx, &file, suite, script, &kind, row, signs),
        Command::Signs { action } => match action {
            SignsAction::Export { file, out } => commands::signs_export(&ctx, &file, out),
            SignsAction::Import { file, signs } => commands::signs_import(&file, &signs),
        },
        Command::Moves { file, script } => commands::moves(&file, &script),
        Command::ScanTorsion {
            p_max,
            exhaustive_n,
            random_n,
            random_count,
            seed,
            log,
        } => commands::scan_torsion(p_max, exhaustive_n, random_n, random_count, seed, log),
    };
    match result {
        Ok(report) => {
            let text = serde_json::to_string_pretty(&report.json).expect("reports serialize");
            // a closed pipe (e.g. `| head`) is not an error worth reporting
            let _ = writeln!(std::io::stdout().lock(), "{text}");
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}
