use std::fs::File;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use changekit::approximation::{curve_table, default_curve_lambdas, uniform_grid};
use changekit::axioms::{verify, SampleConfig, Target, DEFAULT_SEED};
use changekit::calibration::{calibrate_lambda, CalibrationInput};
use changekit::elasticity::{
    classical_elasticity, elasticity_quotient, generalized_elasticity, marginal, EconFunction,
};
use changekit::indicator::{eval_f, relative_comparison, Lambda, PositivePair};
use changekit::report::{self, Format, IndicatorKind, OutputFormat};
use changekit::Error;
use clap::{Parser, Subcommand};

const SEED_ENV: &str = "CHANGEKIT_SEED";

/// Parametric change indicators: rank, compare and calibrate changes
/// between past and present values.
#[derive(Parser)]
#[command(name = "changekit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rank labeled observations from a CSV file (or standard input).
    #[command(allow_negative_numbers = true)]
    Rank {
        /// CSV with header label,past,present; `-` or absent reads stdin.
        file: Option<PathBuf>,
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        /// f or F
        #[arg(long, default_value = "f")]
        indicator: String,
        /// table, csv or json
        #[arg(long, default_value = "table")]
        format: String,
        /// Decimal places, 0 to 15; 15 writes full round-trip precision.
        #[arg(long, default_value_t = 2)]
        precision: u8,
        /// Unit name used in the table footnote.
        #[arg(long, default_value = "u")]
        unit: String,
    },
    /// Quotient f(cmp) / f(ref) of two changes, free of units.
    #[command(allow_negative_numbers = true)]
    Compare {
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        /// Reference pair as past,present.
        #[arg(long = "ref")]
        reference: String,
        /// Compared pair as past,present.
        #[arg(long = "cmp")]
        comparison: String,
    },
    /// Find the λ under which two changes are judged equal.
    #[command(allow_negative_numbers = true)]
    Calibrate {
        #[arg(long = "ref")]
        reference: String,
        #[arg(long = "cmp")]
        comparison: String,
    },
    /// Randomized property checks; prints a JSON array of reports.
    #[command(allow_negative_numbers = true)]
    Verify {
        /// f, F, rel, abs or log
        #[arg(long, default_value = "f")]
        target: String,
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        /// Overrides CHANGEKIT_SEED and the built-in default.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Marginal, classical and generalized elasticity of a function.
    #[command(allow_negative_numbers = true)]
    Elasticity {
        /// power:A=..,k=.. | exp:A=..,b=.. | affine:a=..,b=..
        #[arg(long = "fn")]
        function: String,
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        #[arg(long)]
        x: f64,
        /// Also print the difference quotient at step h.
        #[arg(long)]
        h: Option<f64>,
    },
    /// CSV of F_λ(1, y) curves over a grid of y.
    #[command(allow_negative_numbers = true)]
    PlotData {
        #[arg(long, value_delimiter = ',')]
        lambdas: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0.01)]
        y_min: f64,
        #[arg(long, default_value_t = 5.0)]
        y_max: f64,
        #[arg(long, default_value_t = 500)]
        points: usize,
        /// Explicit y values; replaces the uniform grid.
        #[arg(long, value_delimiter = ',')]
        ys: Option<Vec<f64>>,
    },
}

/// Why a command did not produce its normal output.
enum Failure {
    Error(Error),
    /// The command ran but its findings call for a non-zero exit.
    Unexpected,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let mut out = String::new();
    let result = run(cli.command, &mut out);
    let mut stdout = io::stdout().lock();
    let _ = stdout.write_all(out.as_bytes());
    let _ = stdout.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Unexpected) => ExitCode::from(2),
        Err(Failure::Error(e)) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}

fn run(command: Command, out: &mut String) -> Result<(), Failure> {
    match command {
        Command::Rank {
            file,
            lambda,
            indicator,
            format,
            precision,
            unit,
        } => {
            let lambda = Lambda::new(lambda)?;
            let kind: IndicatorKind = indicator.parse()?;
            let fmt = OutputFormat::new(format.parse::<Format>()?, precision)?;
            let ds = match file {
                Some(path) if path.as_os_str() != "-" => {
                    let f = File::open(&path).map_err(|e| Error::Validation {
                        message: format!("cannot read {}: {e}", path.display()),
                    })?;
                    report::parse_csv(f)?
                }
                _ => {
                    let mut buf = Vec::new();
                    io::stdin()
                        .read_to_end(&mut buf)
                        .map_err(|e| Error::Validation {
                            message: format!("cannot read standard input: {e}"),
                        })?;
                    report::parse_csv(buf.as_slice())?
                }
            };
            let reports = report::rank(&ds, lambda, kind);
            out.push_str(&report::render(&reports, kind, lambda, fmt, &unit));
        }
        Command::Compare {
            lambda,
            reference,
            comparison,
        } => {
            let lambda = Lambda::new(lambda)?;
            let a = parse_pair("--ref", &reference)?;
            let b = parse_pair("--cmp", &comparison)?;
            let q = relative_comparison(lambda, a, b)?;
            out.push_str(&format!(
                "f_ref = {}\nf_cmp = {}\nquotient = {q}\n",
                eval_f(lambda, a),
                eval_f(lambda, b)
            ));
        }
        Command::Calibrate {
            reference,
            comparison,
        } => {
            let a = parse_pair("--ref", &reference)?;
            let b = parse_pair("--cmp", &comparison)?;
            let input = CalibrationInput::new(a, b)?;
            let lambda = calibrate_lambda(&input)?;
            let residual = (eval_f(lambda, a) - eval_f(lambda, b)).abs();
            out.push_str(&format!("lambda = {lambda}\nresidual = {residual:e}\n"));
        }
        Command::Verify {
            target,
            lambda,
            seed,
            samples,
        } => {
            let target: Target = target.parse()?;
            let lambda = Lambda::new(lambda)?;
            let seed = match seed {
                Some(s) => s,
                None => seed_from_env()?,
            };
            let cfg = SampleConfig {
                count: samples,
                ..SampleConfig::with_seed(seed)
            };
            cfg.validate()?;
            let checks = verify(target, lambda, &cfg)?;
            let reports: Vec<_> = checks.iter().map(|c| &c.report).collect();
            out.push_str(&serde_json::to_string_pretty(&reports).expect("reports serialize"));
            out.push('\n');
            let mut all = true;
            for c in &checks {
                let expected = if c.expected_pass { "pass" } else { "fail" };
                let verdict = if c.as_expected() { "ok" } else { "UNEXPECTED" };
                all &= c.as_expected();
                eprintln!(
                    "{:<22} expected {expected}, got {:<4}  {verdict}",
                    c.report.property,
                    if c.report.pass { "pass" } else { "fail" },
                );
            }
            if !all {
                return Err(Failure::Unexpected);
            }
        }
        Command::Elasticity {
            function,
            lambda,
            x,
            h,
        } => {
            let g: EconFunction = function.parse()?;
            let lambda = Lambda::new(lambda)?;
            out.push_str(&format!(
                "marginal = {}\nclassical = {}\ngeneralized = {}\n",
                marginal(&g, x)?,
                classical_elasticity(&g, x)?,
                generalized_elasticity(lambda, &g, x)?
            ));
            if let Some(h) = h {
                out.push_str(&format!(
                    "quotient = {}\n",
                    elasticity_quotient(lambda, &g, x, h)?
                ));
            }
        }
        Command::PlotData {
            lambdas,
            y_min,
            y_max,
            points,
            ys,
        } => {
            let lambdas = match lambdas {
                Some(v) => v
                    .into_iter()
                    .map(Lambda::new)
                    .collect::<Result<Vec<_>, _>>()?,
                None => default_curve_lambdas(),
            };
            let grid = match ys {
                Some(ys) => ys,
                None => {
                    if y_min.is_nan() || y_min <= 0.0 {
                        return Err(
                            Error::InvalidRange(format!("y-min must be > 0, got {y_min}")).into(),
                        );
                    }
                    uniform_grid(y_min, y_max, points)?
                }
            };
            out.push_str(&curve_table(&lambdas, &grid)?.to_csv());
        }
    }
    Ok(())
}

fn parse_pair(flag: &str, text: &str) -> Result<PositivePair, Error> {
    let invalid = || Error::Validation {
        message: format!("{flag} expects past,present, got '{text}'"),
    };
    let (x, y) = text.split_once(',').ok_or_else(invalid)?;
    let x: f64 = x.trim().parse().map_err(|_| invalid())?;
    let y: f64 = y.trim().parse().map_err(|_| invalid())?;
    PositivePair::new(x, y)
}

fn seed_from_env() -> Result<u64, Error> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| Error::Validation {
            message: format!("{SEED_ENV} must be an unsigned integer, got '{v}'"),
        }),
        Err(_) => Ok(DEFAULT_SEED),
    }
}
