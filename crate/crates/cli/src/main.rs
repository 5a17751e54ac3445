//! Command line front end: evaluate the polynomial families, dump
//! coefficients, run the verification suite, and tabulate biorthogonality
//! grids. Structured data goes to stdout, diagnostics to stderr.
//!
//! Exit codes: 0 success, 1 failed verification checks, 2 validation
//! errors (bad parameter file, violated spectral condition, unknown
//! identity, degree out of range), 3 numerical failures.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::json;

use biortho_m::matrix::ComplexMatrix;
use biortho_m::poly::{m_first, m_second, MatrixPoly, ParamSet};
use biortho_m::quad::{QuadPair, DEFAULT_NODES};
use biortho_m::verify::{
    biorth_closed, biorth_numeric, params_digest, reports_to_csv, reports_to_json,
    run_corpus_suite, run_suite, SuiteConfig, VerificationReport, SUITE_IDENTITIES,
};
use biortho_m::Error;

const EXIT_CHECKS_FAILED: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "biortho-m",
    version,
    about = "Finite biorthogonal M matrix polynomial pair: evaluation and identity verification"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a family member at real points, printed as JSON
    Eval(EvalArgs),
    /// Print the monomial-basis coefficient matrices as JSON
    Coeffs(CoeffsArgs),
    /// Run the verification suite and stream its reports
    Verify(VerifyArgs),
    /// Tabulate the biorthogonality grid as CSV
    Table(TableArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Family {
    First,
    Second,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct EvalArgs {
    /// Parameter file (JSON with keys p, H, C, upsilon, max_degree)
    params: PathBuf,
    #[arg(long, value_enum)]
    family: Family,
    /// Member index n
    #[arg(short, long)]
    n: u32,
    /// Comma-separated real evaluation points
    #[arg(long, value_delimiter = ',', required = true)]
    points: Vec<f64>,
}

#[derive(Args)]
struct CoeffsArgs {
    /// Parameter file (JSON with keys p, H, C, upsilon, max_degree)
    params: PathBuf,
    #[arg(long, value_enum)]
    family: Family,
    /// Member index n
    #[arg(short, long)]
    n: u32,
}

#[derive(Args)]
struct VerifyArgs {
    /// Parameter file; the built-in corpus is used when omitted
    params: Option<PathBuf>,
    /// Replace every pinned tolerance with this value
    #[arg(long)]
    tol: Option<f64>,
    /// Gauss-Legendre node count (the error estimate doubles it)
    #[arg(long, default_value_t = DEFAULT_NODES)]
    quad_points: usize,
    /// Largest member index exercised by the grid checks
    #[arg(long, default_value_t = 4)]
    max_n: u32,
    /// Comma-separated identity ids to run; all of them when omitted
    #[arg(long, value_delimiter = ',')]
    identities: Option<Vec<String>>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct TableArgs {
    /// Parameter file (JSON with keys p, H, C, upsilon, max_degree)
    params: PathBuf,
    /// Grid bound; the parameter file's max_degree when omitted
    #[arg(long)]
    max_n: Option<u32>,
    /// Gauss-Legendre node count (the error estimate doubles it)
    #[arg(long, default_value_t = DEFAULT_NODES)]
    quad_points: usize,
}

/// Failure carrying its process exit code; the message is emitted as a
/// JSON error object on stdout and as plain text on stderr.
struct CliError {
    exit: u8,
    message: String,
}

impl CliError {
    fn validation(message: impl Into<String>) -> Self {
        Self {
            exit: EXIT_VALIDATION,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let exit = match &e {
            Error::Shape(_)
            | Error::Domain(_)
            | Error::Commutation { .. }
            | Error::SpectralCondition { .. } => EXIT_VALIDATION,
            Error::NumericalFailure(_) | Error::IllConditioned { .. } | Error::Divergence(_) => {
                EXIT_NUMERICAL
            }
        };
        Self {
            exit,
            message: e.to_string(),
        }
    }
}

/// On-disk parameter set: p, then H and C as p x p arrays of [re, im].
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamFile {
    p: usize,
    #[serde(rename = "H")]
    h: Vec<Vec<[f64; 2]>>,
    #[serde(rename = "C")]
    c: Vec<Vec<[f64; 2]>>,
    upsilon: u32,
    max_degree: u32,
}

fn matrix_from_file(rows: &[Vec<[f64; 2]>], p: usize, label: &str) -> Result<ComplexMatrix, CliError> {
    if rows.len() != p || rows.iter().any(|r| r.len() != p) {
        return Err(CliError::validation(format!(
            "{label} must be a {p} x {p} array of [re, im] pairs"
        )));
    }
    let complex: Vec<Vec<Complex64>> = rows
        .iter()
        .map(|r| r.iter().map(|&[re, im]| Complex64::new(re, im)).collect())
        .collect();
    Ok(ComplexMatrix::from_rows(&complex)?)
}

fn load_params(path: &Path) -> Result<ParamSet, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        CliError::validation(format!("cannot read {}: {e}", path.display()))
    })?;
    let file: ParamFile = serde_json::from_str(&text).map_err(|e| {
        CliError::validation(format!("invalid parameter file {}: {e}", path.display()))
    })?;
    if file.p == 0 {
        return Err(CliError::validation("p must be at least 1"));
    }
    let h = matrix_from_file(&file.h, file.p, "H")?;
    let c = matrix_from_file(&file.c, file.p, "C")?;
    Ok(ParamSet::new(h, c, file.upsilon, file.max_degree)?)
}

fn matrix_json(m: &ComplexMatrix) -> serde_json::Value {
    let p = m.dim();
    let rows: Vec<serde_json::Value> = (0..p)
        .map(|i| {
            let row: Vec<serde_json::Value> = (0..p)
                .map(|j| {
                    let z = m.get(i, j);
                    json!([z.re, z.im])
                })
                .collect();
            serde_json::Value::Array(row)
        })
        .collect();
    serde_json::Value::Array(rows)
}

fn family_poly(params: &ParamSet, family: Family, n: u32) -> Result<MatrixPoly, CliError> {
    Ok(match family {
        Family::First => m_first(params, n)?,
        Family::Second => m_second(params, n)?,
    })
}

fn family_name(family: Family) -> &'static str {
    match family {
        Family::First => "first",
        Family::Second => "second",
    }
}

fn cmd_eval(args: &EvalArgs) -> Result<(), CliError> {
    let params = load_params(&args.params)?;
    let poly = family_poly(&params, args.family, args.n)?;
    let values: Vec<serde_json::Value> = args
        .points
        .iter()
        .map(|&u| json!({"u": u, "value": matrix_json(&poly.eval_re(u))}))
        .collect();
    let out = json!({
        "family": family_name(args.family),
        "n": args.n,
        "p": params.dim(),
        "upsilon": params.upsilon(),
        "degree": poly.degree(),
        "params_digest": params_digest(&params),
        "points": values,
    });
    println!("{}", serde_json::to_string_pretty(&out).expect("json"));
    Ok(())
}

fn cmd_coeffs(args: &CoeffsArgs) -> Result<(), CliError> {
    let params = load_params(&args.params)?;
    let poly = family_poly(&params, args.family, args.n)?;
    let coeffs: Vec<serde_json::Value> = poly.coeffs().iter().map(matrix_json).collect();
    let out = json!({
        "family": family_name(args.family),
        "n": args.n,
        "p": params.dim(),
        "upsilon": params.upsilon(),
        "degree": poly.degree(),
        "params_digest": params_digest(&params),
        "coefficients": coeffs,
    });
    println!("{}", serde_json::to_string_pretty(&out).expect("json"));
    Ok(())
}

fn thread_pool() -> Result<Option<rayon::ThreadPool>, CliError> {
    match std::env::var("BIORTHO_M_THREADS") {
        Err(_) => Ok(None),
        Ok(raw) => {
            let n: usize = raw.parse().map_err(|_| {
                CliError::validation(format!(
                    "BIORTHO_M_THREADS must be a positive integer, got {raw:?}"
                ))
            })?;
            if n == 0 {
                return Err(CliError::validation(
                    "BIORTHO_M_THREADS must be a positive integer, got 0",
                ));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError {
                    exit: EXIT_NUMERICAL,
                    message: format!("cannot build thread pool: {e}"),
                })?;
            Ok(Some(pool))
        }
    }
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), CliError> {
    if let Some(list) = &args.identities {
        for id in list {
            if !SUITE_IDENTITIES.contains(&id.as_str()) {
                return Err(CliError::validation(format!(
                    "unknown identity {id:?}; valid ids: {}",
                    SUITE_IDENTITIES.join(", ")
                )));
            }
        }
    }
    let params = args.params.as_deref().map(load_params).transpose()?;
    let bound = params.as_ref().map_or(4, ParamSet::max_degree);
    if args.max_n > bound {
        return Err(CliError::validation(format!(
            "--max-n {} exceeds the parameter set's max_degree {bound}",
            args.max_n
        )));
    }
    let config = SuiteConfig {
        quad_nodes: args.quad_points,
        max_degree: args.max_n,
        identities: args.identities.clone(),
        tol_override: args.tol,
    };
    let run = || match &params {
        Some(p) => run_suite(p, &config),
        None => run_corpus_suite(&config),
    };
    let reports: Vec<VerificationReport> = match thread_pool()? {
        Some(pool) => pool.install(run),
        None => run(),
    };
    match args.format {
        Format::Json => print!("{}", reports_to_json(&reports)),
        Format::Csv => print!("{}", reports_to_csv(&reports)),
    }
    let failed = reports.iter().filter(|r| !r.passed).count();
    eprintln!(
        "{} checks: {} passed, {} failed",
        reports.len(),
        reports.len() - failed,
        failed
    );
    if failed > 0 {
        return Err(CliError {
            exit: EXIT_CHECKS_FAILED,
            message: format!("{failed} verification checks failed"),
        });
    }
    Ok(())
}

fn cmd_table(args: &TableArgs) -> Result<(), CliError> {
    let params = load_params(&args.params)?;
    let max_n = args.max_n.unwrap_or_else(|| params.max_degree());
    if max_n > params.max_degree() {
        return Err(CliError::validation(format!(
            "--max-n {max_n} exceeds the parameter set's max_degree {}",
            params.max_degree()
        )));
    }
    let quad = QuadPair::new(args.quad_points)?;
    let mut out = String::from("n,s,norm_numeric,norm_closed,relative_residual\n");
    for n in 0..=max_n {
        for s in 0..=max_n {
            let (numeric, _) = biorth_numeric(&params, n, s, &quad)?;
            let scale = biorth_closed(&params, n.max(s))?.norm_frobenius();
            if n == s {
                let closed = biorth_closed(&params, n)?;
                let residual = (&numeric - &closed).norm_frobenius() / scale;
                let _ = writeln!(
                    out,
                    "{n},{s},{:.16e},{:.16e},{residual:.16e}",
                    numeric.norm_frobenius(),
                    closed.norm_frobenius(),
                );
            } else {
                let residual = numeric.norm_frobenius() / scale;
                let _ = writeln!(out, "{n},{s},{:.16e},,{residual:.16e}", numeric.norm_frobenius());
            }
        }
    }
    print!("{out}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Eval(args) => cmd_eval(args),
        Cmd::Coeffs(args) => cmd_coeffs(args),
        Cmd::Verify(args) => cmd_verify(args),
        Cmd::Table(args) => cmd_table(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if e.exit != EXIT_CHECKS_FAILED {
                let obj = json!({"error": {"exit": e.exit, "message": e.message}});
                println!("{}", serde_json::to_string(&obj).expect("json"));
            }
            eprintln!("error: {}", e.message);
            ExitCode::from(e.exit)
        }
    }
}
