use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use folsurf_core::blowup::{StopCriterion, DEFAULT_MAX_DEPTH};
use folsurf_core::localindex::DEFAULT_TRUNC;

mod commands;
mod error;

use error::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
    Dot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Stop {
    Reduced,
    SemiReduced,
}

impl From<Stop> for StopCriterion {
    fn from(s: Stop) -> Self {
        match s {
            Stop::Reduced => StopCriterion::Reduced,
            Stop::SemiReduced => StopCriterion::SemiReduced,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "folsurf",
    version,
    about = "Exact local computations for foliated surfaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Reduce the singularity of a germ by point blowups.
    Reduce {
        /// Germ such as "2*x*dx + 5*y*dy".
        germ: Option<String>,
        /// Newline-delimited germs; blank lines and lines starting with '#' are skipped.
        #[arg(long, conflicts_with = "germ")]
        corpus: Option<String>,
        #[arg(long, value_enum, default_value = "reduced")]
        stop: Stop,
        #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
        max_depth: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Classify the singularity at the origin.
    Classify {
        germ: String,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Camacho-Sad and Z indices along an invariant branch, or the
    /// tangency order of a non-invariant curve.
    Indices {
        germ: String,
        /// x=0, y=0, smooth:<poly> or cusp:a,m,n
        #[arg(long, required_unless_present = "curve")]
        branch: Option<String>,
        /// Defining polynomial of a non-invariant curve.
        #[arg(long, conflicts_with = "branch")]
        curve: Option<String>,
        /// Base point "a,b" for --curve.
        #[arg(long, default_value = "0,0", requires = "curve")]
        at: String,
        #[arg(long, default_value_t = DEFAULT_TRUNC)]
        trunc: usize,
        /// Also run the series oracle and report agreement.
        #[arg(long, requires = "branch")]
        oracle: bool,
    },
    /// Classify the components of a dual graph given as JSON ("-" for stdin).
    Graph {
        input: String,
        /// Chain boundary for eigenvalue propagation: one-singularity,
        /// f-chain-end, or a rational λ₁.
        #[arg(long)]
        boundary: Option<String>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Mumford pullback, pairing, discrepancies and ε-test on a lattice JSON file.
    Pullback {
        input: String,
        /// Comma-separated D̃·E_i, overriding the file's divisor.
        #[arg(long, allow_hyphen_values = true)]
        divisor: Option<String>,
        #[arg(long)]
        epsilon: Option<String>,
        /// Require 0 < ε < 1/4.
        #[arg(long, requires = "epsilon")]
        small_epsilon_regime: bool,
    },
    /// Chart fields and dual-graph fragment of x∂x + λy∂y on 1/n(1,q).
    Quot {
        n: i64,
        q: i64,
        #[arg(long, conflicts_with = "symbolic", allow_hyphen_values = true)]
        lambda: Option<String>,
        #[arg(long)]
        symbolic: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Hilbert function values of an invariant sheet, or invariants from samples.
    Rr {
        #[arg(long, required_unless_present = "extract")]
        sheet: Option<String>,
        /// Comma-separated m values; defaults to the standard sample points.
        #[arg(long, conflicts_with = "extract")]
        eval: Option<String>,
        /// JSON object mapping m to P(m).
        #[arg(long)]
        extract: Option<String>,
        /// Bound on terminal indices.
        #[arg(long)]
        c2_hint: Option<u64>,
    },
    /// Effective constants of the boundedness argument for a sheet.
    Bounds {
        #[arg(long)]
        sheet: String,
        /// Cartier index of K_Y.
        #[arg(long)]
        i_ky: u64,
        /// δ directly, as a rational.
        #[arg(long, conflicts_with = "quotient")]
        delta: Option<String>,
        /// δ from a cyclic quotient point "n,q".
        #[arg(long)]
        quotient: Option<String>,
        #[arg(long)]
        c2_hint: Option<u64>,
    },
}

fn run(cli: Cli) -> Result<String, Failure> {
    match cli.command {
        Command::Reduce {
            germ,
            corpus,
            stop,
            max_depth,
            format,
        } => commands::reduce(germ, corpus, stop.into(), max_depth, format),
        Command::Classify { germ, format } => commands::classify(&germ, format),
        Command::Indices {
            germ,
            branch,
            curve,
            at,
            trunc,
            oracle,
        } => commands::indices(&germ, branch, curve, &at, trunc, oracle),
        Command::Graph {
            input,
            boundary,
            format,
        } => commands::graph(&input, boundary, format),
        Command::Pullback {
            input,
            divisor,
            epsilon,
            small_epsilon_regime,
        } => commands::pullback(&input, divisor, epsilon, small_epsilon_regime),
        Command::Quot {
            n,
            q,
            lambda,
            symbolic,
            format,
        } => commands::quot(n, q, lambda, symbolic, format),
        Command::Rr {
            sheet,
            eval,
            extract,
            c2_hint,
        } => commands::rr(sheet, eval, extract, c2_hint),
        Command::Bounds {
            sheet,
            i_ky,
            delta,
            quotient,
            c2_hint,
        } => commands::bounds(&sheet, i_ky, delta, quotient, c2_hint),
    }
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(out: &str) {
    let mut stdout = std::io::stdout().lock();
    let _ = stdout.write_all(out.as_bytes());
    if !out.ends_with('\n') {
        let _ = stdout.write_all(b"\n");
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            Failure::usage(e.to_string()).report();
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(out) => {
            emit(&out);
            ExitCode::SUCCESS
        }
        Err(f) => {
            let code = f.exit_code();
            if let Some(partial) = &f.partial {
                emit(partial);
            }
            f.report();
            ExitCode::from(code)
        }
    }
}
