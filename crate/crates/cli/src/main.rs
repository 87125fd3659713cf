use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod report;

use commands::CliError;
use report::Format;

#[derive(Parser, Debug)]
#[command(name = "knotlab", version, about = "Quantum knot invariants and volume-conjecture checks")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Working precision in decimal digits (at least 32).
    #[arg(long, global = true, default_value_t = 64)]
    pub digits: u32,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Knot table (JSON); the built-in table is used otherwise.
    #[arg(long, global = true)]
    pub table: Option<PathBuf>,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0x51_7e_c0_de)]
    pub seed: u64,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Jones polynomial as q-exponent/coefficient pairs.
    Jones {
        knot: Option<String>,
        #[arg(long = "knot")]
        knot_flag: Option<String>,
    },
    /// Kashaev invariants <K>_N over a range of N.
    Kashaev {
        #[arg(long, default_value = "4_1")]
        knot: String,
        /// Range a:b or a:b:step.
        #[arg(long = "N", value_name = "RANGE")]
        n: String,
    },
    /// Volume and Chern-Simons invariant of the deformed structure at u.
    Volume {
        #[arg(long, default_value = "4_1")]
        knot: String,
        /// "ipi", "ipi+x" or "re+im i".
        #[arg(long, default_value = "ipi")]
        u: String,
    },
    /// Asymptotic fit of log J_N (or log V_N at u = iπ).
    Fit {
        #[arg(long, default_value = "4_1")]
        knot: String,
        #[arg(long, default_value = "ipi")]
        u: String,
        /// Range a:b or a:b:step; without a step about 29 samples are used.
        #[arg(long = "N", value_name = "RANGE")]
        n: String,
        /// Number of inverse powers of N in the model.
        #[arg(long, default_value_t = 3)]
        order: usize,
        /// Fix the log N coefficient to 3/2.
        #[arg(long)]
        constrain_log: bool,
    },
    /// q-difference recursion for the colored Jones sequence.
    Recursion {
        #[arg(long, default_value = "4_1")]
        knot: String,
        /// Highest power of the shift operator.
        #[arg(long, default_value_t = 3)]
        order: u32,
        /// Highest power of m in each coefficient.
        #[arg(long, default_value_t = 14)]
        degree: u32,
        /// Fix the s-degree instead of searching for it.
        #[arg(long)]
        s_degree: Option<u32>,
        #[arg(long)]
        inhomogeneous: bool,
    },
    /// Deformation-quantization checks.
    Quantize {
        #[arg(value_enum)]
        check: commands::QuantizeCheck,
        /// Graph order, or oscillator level bound.
        #[arg(long)]
        order: Option<u32>,
        /// Energy for bohr-sommerfeld, as a rational.
        #[arg(long, default_value = "3")]
        energy: String,
        #[arg(long, default_value = "1")]
        hbar: String,
    },
}

fn run(cli: Cli) -> Result<String, CliError> {
    let c = &cli.common;
    if c.digits < 32 {
        return Err(CliError::Usage(format!("--digits must be at least 32, got {}", c.digits)));
    }
    let table = commands::load_table(c.table.as_deref())?;
    let report = match cli.cmd {
        Cmd::Jones { knot, knot_flag } => {
            let name = knot.or(knot_flag).ok_or_else(|| CliError::Usage("jones needs a knot name".into()))?;
            return commands::jones(&table, &name, c.format);
        }
        Cmd::Kashaev { knot, n } => commands::kashaev(&table, &knot, &n, c)?,
        Cmd::Volume { knot, u } => commands::volume(&table, &knot, &u, c)?,
        Cmd::Fit { knot, u, n, order, constrain_log } => commands::fit(&table, &knot, &u, &n, order, constrain_log, c)?,
        Cmd::Recursion { knot, order, degree, s_degree, inhomogeneous } => {
            commands::recursion(&table, &knot, order, degree, s_degree, inhomogeneous, c)?
        }
        Cmd::Quantize { check, order, energy, hbar } => commands::quantize(check, order, &energy, &hbar, c)?,
    };
    Ok(report.render(c.format))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.common.out.clone();
    match run(cli) {
        Ok(text) => {
            if let Some(path) = out {
                if let Err(e) = std::fs::write(&path, text) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            } else {
                print!("{text}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
