//! `padwave`: exact p-adic wavelet analysis from the command line.
//!
//! Subcommands: `classify`, `wavelet`, `coeffs`, `spectrum`, `monna`,
//! `project`, `verify`. Exit codes: 0 success, 1 a verification suite
//! failed, 2 configuration or parse errors (nothing is printed to stdout
//! in that case).

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use padwave::suites;
use padwave::vladimirov::{eigenvalue_check, VladimirovParams};
use padwave::wavelets::{
    basis_wavelet, classify_affine, coefficient_table, reconstruct_partial, AffineParams,
    WaveletIndex,
};
use padwave::{monna_map, Ball, CosetRep, PAdic, SchwartzFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Parser)]
#[command(name = "padwave", version, about = "Exact p-adic wavelet analysis")]
struct Cli {
    /// Prime base of the field
    #[arg(long, global = true, default_value_t = 2)]
    p: u32,
    /// Relative digit window for parsed literals (>= 8)
    #[arg(long, global = true, default_value_t = 32)]
    precision: usize,
    /// Seed for the randomized suites
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output format for tabular results
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write output to a file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the translation/dilation (a, b) of the mother wavelet onto
    /// a basis index and a root-of-unity phase
    Classify {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// Evaluate a basis wavelet (--gamma/--n/--j) or an affine image of the
    /// mother wavelet (--a/--b) at the given points
    Wavelet {
        #[arg(long)]
        gamma: Option<i64>,
        #[arg(long)]
        n: Option<String>,
        #[arg(long)]
        j: Option<u32>,
        #[arg(long)]
        a: Option<String>,
        #[arg(long)]
        b: Option<String>,
        /// Evaluation points (repeatable)
        #[arg(long = "at", required = true)]
        at: Vec<String>,
    },
    /// Windowed coefficient table of a function file (CSV), with a JSON
    /// summary carrying the norm, the windowed energy and the analytic tail
    Coeffs {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        gamma_min: i64,
        #[arg(long, allow_hyphen_values = true)]
        gamma_max: i64,
    },
    /// Eigenvalue table of the fractional differentiation operator on a
    /// window of wavelet indices
    Spectrum {
        #[arg(long)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = -2)]
        gamma_min: i64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 2)]
        gamma_max: i64,
        #[arg(long, default_value_t = 3)]
        cosets: u64,
        #[arg(long, default_value_t = 24)]
        samples: usize,
    },
    /// Digit-reversal map: image of a point (--x) or of a ball
    /// (--ball <center>,<scale>)
    Monna {
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        ball: Option<String>,
    },
    /// Orthogonal projection of a function file onto the space of functions
    /// locally constant at diameter p^gamma
    Project {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        gamma: i64,
    },
    /// Run a verification suite
    Verify {
        /// all | lemma | ortho | vladimirov | mra | monna | admissibility
        #[arg(long)]
        suite: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome {
            stdout,
            sidecar,
            failed,
        }) => {
            emit(&cli.out, &stdout, sidecar.as_deref());
            if failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

struct Outcome {
    stdout: String,
    /// Secondary report (the coeffs summary); written next to --out or to
    /// stderr when stdout carries the table.
    sidecar: Option<String>,
    /// Verification failed: exit 1 after printing the report.
    failed: bool,
}

impl Outcome {
    fn new(stdout: String) -> Self {
        Outcome {
            stdout,
            sidecar: None,
            failed: false,
        }
    }
}

fn emit(out: &Option<PathBuf>, stdout: &str, sidecar: Option<&str>) {
    match out {
        Some(path) => {
            std::fs::write(path, stdout).expect("write output file");
            if let Some(extra) = sidecar {
                let mut side = path.as_os_str().to_owned();
                side.push(".summary.json");
                std::fs::write(PathBuf::from(side), extra).expect("write summary file");
            }
        }
        None => {
            print!("{stdout}");
            if let Some(extra) = sidecar {
                eprint!("{extra}");
            }
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome, String> {
    if !padwave::padic::is_prime(cli.p) {
        return Err(format!("{} is not prime", cli.p));
    }
    if cli.precision < 8 {
        return Err(format!(
            "precision {} is below the minimum of 8",
            cli.precision
        ));
    }
    match &cli.command {
        Command::Classify { a, b } => classify_cmd(cli, a, b),
        Command::Wavelet {
            gamma,
            n,
            j,
            a,
            b,
            at,
        } => wavelet_cmd(cli, *gamma, n, *j, a, b, at),
        Command::Coeffs {
            input,
            gamma_min,
            gamma_max,
        } => coeffs_cmd(cli, input, *gamma_min, *gamma_max),
        Command::Spectrum {
            alpha,
            gamma_min,
            gamma_max,
            cosets,
            samples,
        } => spectrum_cmd(cli, *alpha, *gamma_min, *gamma_max, *cosets, *samples),
        Command::Monna { x, ball } => monna_cmd(cli, x, ball),
        Command::Project { input, gamma } => project_cmd(cli, input, *gamma),
        Command::Verify { suite } => verify_cmd(cli, suite),
    }
}

fn parse_padic(cli: &Cli, text: &str) -> Result<PAdic, String> {
    PAdic::parse(text, cli.p, cli.precision).map_err(|e| e.to_string())
}

/// Scales and index windows the CLI accepts; beyond this the powers of p
/// stop being representable and loops stop being sensible.
fn check_scale(name: &str, value: i64) -> Result<(), String> {
    const BOUND: i64 = 4096;
    if value.unsigned_abs() > BOUND as u64 {
        Err(format!(
            "{name} {value} outside the supported range [-{BOUND}, {BOUND}]"
        ))
    } else {
        Ok(())
    }
}

/// 17 significant digits, the full information content of an f64.
fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn rational_string(r: &num_rational::BigRational) -> String {
    use num_traits::One;
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[derive(Serialize)]
struct ClassificationOut {
    gamma: i64,
    n: String,
    j: u32,
    phase_num: i64,
    phase_den: i64,
}

fn classify_cmd(cli: &Cli, a: &str, b: &str) -> Result<Outcome, String> {
    let a = parse_padic(cli, a)?;
    let b = parse_padic(cli, b)?;
    let params = AffineParams::new(a, b).map_err(|e| e.to_string())?;
    let cls = classify_affine(&params).map_err(|e| e.to_string())?;
    let out = ClassificationOut {
        gamma: cls.index.gamma(),
        n: cls.index.coset().to_literal(),
        j: cls.index.j(),
        phase_num: to_i64(&cls.phase.numerator())?,
        phase_den: to_i64(&cls.phase.denominator())?,
    };
    Ok(Outcome::new(format!(
        "{}\n",
        serde_json::to_string(&out).expect("serializable")
    )))
}

fn to_i64(v: &num_bigint::BigInt) -> Result<i64, String> {
    use num_traits::ToPrimitive;
    v.to_i64()
        .ok_or_else(|| "phase does not fit in i64".to_string())
}

#[derive(Serialize)]
struct WaveletValue {
    x: String,
    value: [f64; 2],
}

#[derive(Serialize)]
struct WaveletOut {
    p: u32,
    values: Vec<WaveletValue>,
}

#[allow(clippy::too_many_arguments)]
fn wavelet_cmd(
    cli: &Cli,
    gamma: Option<i64>,
    n: &Option<String>,
    j: Option<u32>,
    a: &Option<String>,
    b: &Option<String>,
    at: &[String],
) -> Result<Outcome, String> {
    let function = match (gamma, n, j, a, b) {
        (Some(gamma), n, j, None, None) => {
            check_scale("gamma", gamma)?;
            let coset = match n {
                Some(text) => parse_padic(cli, text)?
                    .coset_rep()
                    .map_err(|e| e.to_string())?,
                None => CosetRep::zero(cli.p),
            };
            let index =
                WaveletIndex::new(gamma, coset, j.unwrap_or(1)).map_err(|e| e.to_string())?;
            basis_wavelet(&index)
        }
        (None, _, None, Some(a), Some(b)) => {
            let params = AffineParams::new(parse_padic(cli, a)?, parse_padic(cli, b)?)
                .map_err(|e| e.to_string())?;
            padwave::wavelets::affine_wavelet(&params).map_err(|e| e.to_string())?
        }
        _ => {
            return Err("pass either --gamma [--n --j] or --a --b".to_string());
        }
    };
    let mut values = Vec::with_capacity(at.len());
    for text in at {
        let x = parse_padic(cli, text)?;
        let v = function.evaluate(&x).map_err(|e| e.to_string())?;
        values.push(WaveletValue {
            x: text.clone(),
            value: [v.re, v.im],
        });
    }
    let out = WaveletOut { p: cli.p, values };
    Ok(Outcome::new(format!(
        "{}\n",
        serde_json::to_string_pretty(&out).expect("serializable")
    )))
}

#[derive(Serialize)]
struct CoeffsSummary {
    p: u32,
    gamma_min: i64,
    gamma_max: i64,
    norm_sq: f64,
    windowed_energy: f64,
    residual_norm_sq: f64,
    covered: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    analytic_tail: Option<f64>,
}

// The file carries its own prime; --p is only the context for literals
// passed on the command line.
fn load_function(input: &Path) -> Result<SchwartzFunction, String> {
    let text = std::fs::read_to_string(input)
        .map_err(|e| format!("cannot read {}: {e}", input.display()))?;
    SchwartzFunction::from_json(&text).map_err(|e| e.to_string())
}

fn coeffs_cmd(cli: &Cli, input: &Path, gamma_min: i64, gamma_max: i64) -> Result<Outcome, String> {
    check_scale("gamma-min", gamma_min)?;
    check_scale("gamma-max", gamma_max)?;
    let f = load_function(input)?;
    let table = coefficient_table(&f, gamma_min, gamma_max).map_err(|e| e.to_string())?;
    let rec = reconstruct_partial(&f, gamma_min, gamma_max).map_err(|e| e.to_string())?;
    let summary = CoeffsSummary {
        p: f.prime(),
        gamma_min,
        gamma_max,
        norm_sq: f.norm_sq(),
        windowed_energy: table.energy(),
        residual_norm_sq: rec.residual_norm_sq,
        covered: rec.covered,
        analytic_tail: rec.analytic_tail,
    };
    let summary_json = format!(
        "{}\n",
        serde_json::to_string_pretty(&summary).expect("serializable")
    );
    match cli.format {
        Format::Csv => {
            let mut csv = String::from("gamma,n_literal,j,coeff_re,coeff_im\n");
            for (index, coeff) in &table.entries {
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    index.gamma(),
                    index.coset().to_literal(),
                    index.j(),
                    fmt_f64(coeff.re),
                    fmt_f64(coeff.im)
                ));
            }
            Ok(Outcome {
                stdout: csv,
                sidecar: Some(summary_json),
                failed: false,
            })
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Row {
                gamma: i64,
                n: String,
                j: u32,
                coeff: [f64; 2],
            }
            #[derive(Serialize)]
            struct Out {
                rows: Vec<Row>,
                summary: CoeffsSummary,
            }
            let rows = table
                .entries
                .iter()
                .map(|(index, coeff)| Row {
                    gamma: index.gamma(),
                    n: index.coset().to_literal(),
                    j: index.j(),
                    coeff: [coeff.re, coeff.im],
                })
                .collect();
            let out = Out { rows, summary };
            Ok(Outcome::new(format!(
                "{}\n",
                serde_json::to_string_pretty(&out).expect("serializable")
            )))
        }
    }
}

#[derive(Serialize)]
struct SpectrumCase {
    gamma: i64,
    n: String,
    j: u32,
    eigenvalue: f64,
    max_rel_err: f64,
}

#[derive(Serialize)]
struct SpectrumOut {
    p: u32,
    alpha: f64,
    cases: Vec<SpectrumCase>,
}

fn spectrum_cmd(
    cli: &Cli,
    alpha: f64,
    gamma_min: i64,
    gamma_max: i64,
    cosets: u64,
    samples: usize,
) -> Result<Outcome, String> {
    check_scale("gamma-min", gamma_min)?;
    check_scale("gamma-max", gamma_max)?;
    let params = VladimirovParams::new(cli.p, alpha).map_err(|e| e.to_string())?;
    let mut cases = Vec::new();
    for gamma in gamma_min..=gamma_max {
        for n_idx in 0..cosets {
            for j in 1..cli.p {
                let coset = CosetRep::from_index(cli.p, n_idx);
                let index = WaveletIndex::new(gamma, coset, j).map_err(|e| e.to_string())?;
                let err = eigenvalue_check(&index, &params, samples).map_err(|e| e.to_string())?;
                cases.push(SpectrumCase {
                    gamma,
                    n: index.coset().to_literal(),
                    j,
                    eigenvalue: (cli.p as f64).powf(alpha * (1 - gamma) as f64),
                    max_rel_err: err,
                });
            }
        }
    }
    let out = SpectrumOut {
        p: cli.p,
        alpha,
        cases,
    };
    match cli.format {
        Format::Json => Ok(Outcome::new(format!(
            "{}\n",
            serde_json::to_string_pretty(&out).expect("serializable")
        ))),
        Format::Csv => {
            let mut csv = String::from("gamma,n_literal,j,eigenvalue,max_rel_err\n");
            for case in &out.cases {
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    case.gamma,
                    case.n,
                    case.j,
                    fmt_f64(case.eigenvalue),
                    fmt_f64(case.max_rel_err)
                ));
            }
            Ok(Outcome::new(csv))
        }
    }
}

fn monna_cmd(cli: &Cli, x: &Option<String>, ball: &Option<String>) -> Result<Outcome, String> {
    match (x, ball) {
        (Some(text), None) => {
            let value = monna_map(&parse_padic(cli, text)?).map_err(|e| e.to_string())?;
            match cli.format {
                Format::Json => Ok(Outcome::new(format!(
                    "{}\n",
                    serde_json::json!({ "value": rational_string(&value) })
                ))),
                Format::Csv => Ok(Outcome::new(format!("{}\n", rational_string(&value)))),
            }
        }
        (None, Some(ball_arg)) => {
            let (center_text, scale_text) = ball_arg
                .rsplit_once(',')
                .ok_or_else(|| "expected --ball <center>,<scale>".to_string())?;
            let scale: i64 = scale_text
                .trim()
                .parse()
                .map_err(|_| format!("invalid scale {scale_text:?}"))?;
            check_scale("scale", scale)?;
            let center = parse_padic(cli, center_text)?;
            let ball = Ball::new(&center, scale).map_err(|e| e.to_string())?;
            let interval = padwave::ball_image(&ball);
            match cli.format {
                Format::Json => Ok(Outcome::new(format!(
                    "{}\n",
                    serde_json::json!({
                        "left": rational_string(&interval.left),
                        "right": rational_string(&interval.right()),
                        "length": rational_string(&interval.length),
                    })
                ))),
                Format::Csv => Ok(Outcome::new(format!(
                    "[{}, {})\n",
                    rational_string(&interval.left),
                    rational_string(&interval.right())
                ))),
            }
        }
        _ => Err("pass exactly one of --x or --ball".to_string()),
    }
}

fn project_cmd(_cli: &Cli, input: &Path, gamma: i64) -> Result<Outcome, String> {
    check_scale("gamma", gamma)?;
    let f = load_function(input)?;
    let projected = padwave::mra::project(&f, gamma);
    Ok(Outcome::new(format!("{}\n", projected.to_json())))
}

fn verify_cmd(cli: &Cli, suite: &str) -> Result<Outcome, String> {
    let reports = suites::run_suite(suite, cli.p, cli.seed).map_err(|e| e.to_string())?;
    let failed = reports.iter().any(|r| !r.passed);
    match cli.format {
        Format::Json => Ok(Outcome {
            stdout: format!(
                "{}\n",
                serde_json::to_string_pretty(&reports).expect("serializable")
            ),
            sidecar: None,
            failed,
        }),
        Format::Csv => {
            let mut csv = String::from("suite,check,cases,max_error,tolerance,passed\n");
            for report in &reports {
                for check in &report.checks {
                    csv.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        report.suite,
                        check.name,
                        check.cases,
                        fmt_f64(check.max_error),
                        fmt_f64(check.tolerance),
                        check.passed
                    ));
                }
            }
            Ok(Outcome {
                stdout: csv,
                sidecar: None,
                failed,
            })
        }
    }
}
