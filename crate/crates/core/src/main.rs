use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use esym::sampling::{collect_pairs, write_corpus, PairConstraint};
use esym::spd::{
    logdet_I_plus, matrix_compare, parse_csv_blocks, relative_spectrum, riemannian_distance,
    s_divergence, SpdMatrix,
};
use esym::verify::{run, VerifyConfig};
use esym::{compare, esym_all, ComparisonTolerance, DominanceVerdict, Error, PositiveVector};

/// Elementary symmetric dominance: calculators and seeded verification.
#[derive(Debug, Parser)]
#[command(name = "esym", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print e_1..e_n of a positive vector as JSON.
    Esym {
        #[arg(required = true, allow_negative_numbers = true)]
        values: Vec<f64>,
    },
    /// Compare two vectors: `dominance X... -- Y...`.
    Dominance {
        #[arg(required = true, allow_negative_numbers = true)]
        x: Vec<f64>,
        #[arg(last = true, required = true, allow_negative_numbers = true)]
        y: Vec<f64>,
        /// Relative tolerance of the equality and one-sided tests.
        #[arg(long, default_value_t = ComparisonTolerance::DEFAULT_TOL_EQ)]
        tol: f64,
    },
    /// Run a seeded verification batch.
    Verify(VerifyArgs),
    /// Write a corpus of sampled pairs as CSV.
    Pairs {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value = "FullStrict")]
        constraint: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Destination; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare matrices given as CSV blocks (A, B and optionally C).
    Matrix {
        input: PathBuf,
        #[arg(long, default_value_t = ComparisonTolerance::DEFAULT_TOL_EQ)]
        tol: f64,
    },
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    property: String,
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated order grid.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    alpha: Option<Vec<f64>>,
    #[arg(long)]
    constraint: Option<String>,
    /// Report destination. Without it the report goes to standard output
    /// and the summary to standard error.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Integral values print as integers, everything else with 17 significant
/// digits.
fn num(v: f64) -> String {
    if v.is_finite() && v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".to_string()
    }
}

fn num_array(values: &[f64]) -> String {
    let items: Vec<String> = values.iter().map(|&v| num(v)).collect();
    format!("[{}]", items.join(","))
}

fn verdict_json(v: &DominanceVerdict) -> String {
    format!(
        "{{\"kind\":\"{:?}\",\"direction\":\"{:?}\",\"margins\":{}}}",
        v.kind,
        v.direction,
        num_array(&v.margins)
    )
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::Parse(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, Error> {
    let mut config = VerifyConfig::new(args.property.parse()?, args.n, args.trials, args.seed);
    config.alphas = args.alpha;
    config.constraint = args.constraint.as_deref().map(str::parse).transpose()?;
    let report = run(&config)?;
    match &args.out {
        Some(path) => {
            write_output(Some(path), &report.to_json())?;
            println!("{}", report.summary_line());
        }
        None => {
            print!("{}", report.to_json());
            eprintln!("{}", report.summary_line());
        }
    }
    Ok(if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn cmd_matrix(input: &Path, tol: f64) -> Result<String, Error> {
    let text =
        fs::read_to_string(input).map_err(|e| Error::Parse(format!("{}: {e}", input.display())))?;
    let blocks = parse_csv_blocks(&text)?;
    if !(2..=3).contains(&blocks.len()) {
        return Err(Error::Parse(format!(
            "expected 2 or 3 matrix blocks, found {}",
            blocks.len()
        )));
    }
    let mats = blocks
        .into_iter()
        .map(SpdMatrix::new)
        .collect::<Result<Vec<_>, _>>()?;
    let tol = ComparisonTolerance::new(tol)?;
    let (a, b) = (&mats[0], &mats[1]);
    let mut out = format!(
        "{{\"verdict\":{},\"logdet_i_plus\":{}",
        verdict_json(&matrix_compare(a, b, tol)?),
        num_array(&[logdet_I_plus(a), logdet_I_plus(b)])
    );
    if let Some(c) = mats.get(2) {
        let la = PositiveVector::new(relative_spectrum(a, c)?)?;
        let lb = PositiveVector::new(relative_spectrum(b, c)?)?;
        out += &format!(
            ",\"relative_verdict\":{},\"riemannian\":{},\"s_divergence\":{}",
            verdict_json(&compare(&la, &lb, tol)?),
            num_array(&[riemannian_distance(a, c)?, riemannian_distance(b, c)?]),
            num_array(&[s_divergence(a, c)?, s_divergence(b, c)?]),
        );
    }
    out.push_str("}\n");
    Ok(out)
}

fn execute(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Esym { values } => {
            let x = PositiveVector::new(values)?;
            let e = esym_all(&x);
            println!("{{\"n\":{},\"e\":{}}}", e.n(), num_array(e.values()));
        }
        Command::Dominance { x, y, tol } => {
            let verdict = compare(
                &PositiveVector::new(x)?,
                &PositiveVector::new(y)?,
                ComparisonTolerance::new(tol)?,
            )?;
            println!("{}", verdict_json(&verdict));
        }
        Command::Verify(args) => return cmd_verify(args),
        Command::Pairs {
            n,
            count,
            constraint,
            seed,
            out,
        } => {
            let constraint: PairConstraint = constraint.parse()?;
            let pairs = collect_pairs(n, constraint, seed, count)?;
            write_output(out.as_deref(), &write_corpus(n, seed, &pairs))?;
        }
        Command::Matrix { input, tol } => print!("{}", cmd_matrix(&input, tol)?),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
