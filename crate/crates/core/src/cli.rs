//! `qboundary` command line.
//!
//! Exit codes: 0 success, 1 a verification failed, 2 invalid input,
//! 3 no unique solution where one matrix was requested. Output files are
//! written only once everything has been computed and validated.

use std::ffi::OsString;
use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex;

use crate::error::Error;
use crate::intertwiner::{
    dimension_scan, eps_grid, solve_bulk, solve_vector_boundary, BoundarySystem, GridPoint, ScanFixed, ScanKind,
};
use crate::io::{
    pair, parse_complex, parse_complex_list, serialize, CheckEntry, Convention, Document, IoError, MatrixData,
    MatrixDocument, Meta, ReportDocument, ScanData, ScanDocument,
};
use crate::linalg::{normalize_solution, DEFAULT_REL_TOL};
use crate::report::VerificationReport;
use crate::reps::{check_relations, conjugate_rep, dual_rep, vector_rep, BoundaryParams, DualConvention};
use crate::toda::{closed_form_k, solve_paper_k, ClosedFormParams};
use crate::verify::CheckPoint;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "qboundary",
    version,
    about = "Bulk and boundary intertwiners for A_n^(1) vector representations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the algebra relations on the vector representation and its dual.
    RepCheck(RepCheckArgs),
    /// Braiding S-matrix between two vector representations.
    Smatrix(SmatrixArgs),
    /// Reflection K-matrix.
    Kmatrix(KmatrixArgs),
    /// Consistency checks at one parameter point.
    Verify(VerifyArgs),
    /// Nullspace dimensions over a parameter grid.
    Scan(ScanArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Rank n of A_n^(1).
    #[arg(long)]
    n: usize,
    /// Deformation parameter, as a+bi or r@phi.
    #[arg(long, allow_hyphen_values = true)]
    q: String,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ConventionArg {
    /// Outgoing multiplet at x -> -q/x.
    Crossed,
    /// Outgoing multiplet at x -> 1/x.
    Inverse,
}

impl From<ConventionArg> for DualConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Crossed => DualConvention::Crossed,
            ConventionArg::Inverse => DualConvention::Inverse,
        }
    }
}

#[derive(Args, Debug)]
struct RepCheckArgs {
    #[command(flatten)]
    common: Common,
    /// Spectral parameter x.
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Args, Debug)]
struct SmatrixArgs {
    #[command(flatten)]
    common: Common,
    /// Spectral parameter of the first particle.
    #[arg(long, allow_hyphen_values = true)]
    x1: String,
    /// Spectral parameter of the second particle.
    #[arg(long, allow_hyphen_values = true)]
    x2: String,
    /// Use the conjugate multiplet for the first particle.
    #[arg(long)]
    dual_left: bool,
    /// Use the conjugate multiplet for the second particle.
    #[arg(long)]
    dual_right: bool,
    #[arg(long, value_enum, default_value = "crossed")]
    convention: ConventionArg,
    #[arg(long, default_value_t = DEFAULT_REL_TOL)]
    rel_tol: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    Paper,
    Generic,
    ClosedForm,
}

#[derive(Args, Debug)]
struct KmatrixArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    /// Boundary parameters eps_0..eps_n, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    eps: String,
    #[arg(long, value_enum)]
    method: Method,
    /// Override the aggregate eps of the closed form (default: product).
    #[arg(long, allow_hyphen_values = true)]
    eps_aggregate: Option<String>,
    /// Dual convention for --method generic.
    #[arg(long, value_enum, default_value = "crossed")]
    convention: ConventionArg,
    #[arg(long, default_value_t = DEFAULT_REL_TOL)]
    rel_tol: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
enum CheckName {
    Ybe,
    Re,
    Coideal,
    Sklyanin,
    BComm,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(value_enum)]
    check: CheckName,
    #[command(flatten)]
    common: Common,
    /// Rapidities of the two particles and, for ybe and sklyanin, the
    /// companion, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    rapidities: String,
    /// Boundary parameters (default: all zero).
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<String>,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, value_enum, default_value = "crossed")]
    convention: ConventionArg,
    #[arg(long, default_value_t = DEFAULT_REL_TOL)]
    rel_tol: f64,
    /// Also write a report document.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
enum ScanAxis {
    Eps,
    Theta,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
enum SystemArg {
    Paper,
    Engine,
    Bulk,
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[arg(value_enum)]
    axis: ScanAxis,
    #[command(flatten)]
    common: Common,
    /// eps axis: values taken by every eps_i, e.g. "0,1,-1,2".
    /// theta axis: "start:end:count" or a comma separated list of rapidities.
    #[arg(long, allow_hyphen_values = true)]
    grid: String,
    /// Fixed spectral parameter (eps scans, and the first particle of bulk scans).
    #[arg(long, allow_hyphen_values = true, default_value = "1+0i")]
    x: String,
    /// Fixed boundary parameters for theta scans (default: all zero).
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<String>,
    #[arg(long, value_enum, default_value = "paper")]
    system: SystemArg,
    #[arg(long, value_enum, default_value = "crossed")]
    convention: ConventionArg,
    #[arg(long, default_value_t = DEFAULT_REL_TOL)]
    rel_tol: f64,
    #[arg(long)]
    out: PathBuf,
}

/// Failure of a command, mapped onto an exit code.
#[derive(Debug)]
enum Failure {
    Invalid(String),
    Degenerate(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotUnique(0) => Failure::Degenerate("no solution: nullspace dimension 0".into()),
            Error::NotUnique(d) => Failure::Degenerate(format!("no unique solution: nullspace dimension {d}")),
            Error::SvdFailed => Failure::Degenerate(e.to_string()),
            other => Failure::Invalid(other.to_string()),
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Invalid(e.to_string())
    }
}

type CmdResult = Result<Outcome, Failure>;

/// What a successful command produced.
struct Outcome {
    lines: Vec<String>,
    file: Option<(PathBuf, Vec<u8>)>,
    passed: bool,
}

impl Outcome {
    fn document<D: Document>(path: &Path, doc: &D, lines: Vec<String>) -> CmdResult {
        Ok(Self {
            lines,
            file: Some((path.to_path_buf(), serialize(doc)?)),
            passed: true,
        })
    }
}

fn complex_arg(name: &str, s: &str) -> Result<Complex<f64>, Failure> {
    parse_complex(s).map_err(|e| Failure::Invalid(format!("--{name}: {e}")))
}

fn complex_list_arg(name: &str, s: &str) -> Result<Vec<Complex<f64>>, Failure> {
    parse_complex_list(s).map_err(|e| Failure::Invalid(format!("--{name}: {e}")))
}

fn positive(name: &str, v: f64) -> Result<f64, Failure> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Failure::Invalid(format!("--{name} must be a positive number")))
    }
}

fn eps_arg(s: &str, n: usize) -> Result<BoundaryParams<f64>, Failure> {
    let eps = BoundaryParams::new(complex_list_arg("eps", s)?)?;
    eps.check_rank(n)?;
    Ok(eps)
}

fn common(c: &Common) -> Result<(usize, Complex<f64>), Failure> {
    if c.n == 0 {
        return Err(Failure::Invalid("--n must be at least 1".into()));
    }
    Ok((c.n, complex_arg("q", &c.q)?))
}

fn rep_check(a: &RepCheckArgs) -> CmdResult {
    let (n, q) = common(&a.common)?;
    let x = complex_arg("x", &a.x)?;
    let tol = positive("tol", a.tol)?;
    let rep = vector_rep(n, q, x)?;
    let dual = dual_rep(&rep, false)?;
    let reports = [
        VerificationReport {
            name: "relations-vector".into(),
            ..check_relations(&rep, tol)?
        },
        VerificationReport {
            name: "relations-dual".into(),
            ..check_relations(&dual, tol)?
        },
    ];
    Ok(Outcome {
        passed: reports.iter().all(|r| r.passed),
        lines: reports.iter().map(|r| r.summary()).collect(),
        file: None,
    })
}

fn smatrix(a: &SmatrixArgs) -> CmdResult {
    let (n, q) = common(&a.common)?;
    let (x1, x2) = (complex_arg("x1", &a.x1)?, complex_arg("x2", &a.x2)?);
    let rel_tol = positive("rel-tol", a.rel_tol)?;
    let conv = DualConvention::from(a.convention);
    let side = |x: Complex<f64>, dual: bool| -> Result<_, Error> {
        let rep = vector_rep(n, q, x)?;
        if dual {
            conjugate_rep(&rep, conv)
        } else {
            Ok(rep)
        }
    };
    let left = side(x1, a.dual_left)?;
    let right = side(x2, a.dual_right)?;
    let sol = solve_bulk(&left, &right, rel_tol)?;
    let s = sol.unique()?;
    let mut meta = Meta::new("smatrix", n, q, conv.into(), rel_tol);
    meta.x = Some(vec![pair(left.x()), pair(right.x())]);
    let doc = MatrixDocument {
        meta,
        matrix: MatrixData::from_matrix(s),
    };
    Outcome::document(
        &a.out,
        &doc,
        vec![format!("smatrix: dimension 1, residual {:.3e}", sol.residual)],
    )
}

fn kmatrix(a: &KmatrixArgs) -> CmdResult {
    let (n, q) = common(&a.common)?;
    let x = complex_arg("x", &a.x)?;
    let eps = eps_arg(&a.eps, n)?;
    let rel_tol = positive("rel-tol", a.rel_tol)?;
    let aggregate = a
        .eps_aggregate
        .as_deref()
        .map(|s| complex_arg("eps-aggregate", s))
        .transpose()?;
    if aggregate.is_some() && !matches!(a.method, Method::ClosedForm) {
        return Err(Failure::Invalid(
            "--eps-aggregate only applies to --method closed-form".into(),
        ));
    }
    let (k, convention, residual) = match a.method {
        Method::Paper => {
            let sol = solve_paper_k(n, q, x, &eps, rel_tol)?;
            (sol.unique()?.clone(), Convention::Paper, Some(sol.residual))
        }
        Method::Generic => {
            let conv = DualConvention::from(a.convention);
            let sol = solve_vector_boundary(n, q, x, &eps, conv, rel_tol)?;
            (sol.unique()?.clone(), conv.into(), Some(sol.residual))
        }
        Method::ClosedForm => {
            let mut params = ClosedFormParams::new(eps.clone())?;
            if let Some(agg) = aggregate {
                params = params.with_aggregate(agg);
            }
            (
                normalize_solution(&closed_form_k(n, q, x, &params)?)?,
                Convention::Paper,
                None,
            )
        }
    };
    let mut meta = Meta::new("kmatrix", n, q, convention, rel_tol);
    meta.x = Some(vec![pair(x)]);
    meta.eps = eps.values().iter().map(|&e| pair(e)).collect();
    let doc = MatrixDocument {
        meta,
        matrix: MatrixData::from_matrix(&k),
    };
    let line = match residual {
        Some(r) => format!("kmatrix: dimension 1, residual {r:.3e}"),
        None => "kmatrix: closed form".to_string(),
    };
    Outcome::document(&a.out, &doc, vec![line])
}

fn verify(a: &VerifyArgs) -> CmdResult {
    let (n, q) = common(&a.common)?;
    let thetas = complex_list_arg("rapidities", &a.rapidities)?;
    // Only ybe and sklyanin use the third (companion) rapidity.
    let needs_companion = matches!(a.check, CheckName::Ybe | CheckName::Sklyanin);
    let thetas: [Complex<f64>; 3] = match thetas.len() {
        3 => [thetas[0], thetas[1], thetas[2]],
        2 if !needs_companion => [thetas[0], thetas[1], thetas[0]],
        k => {
            let want = if needs_companion { "3" } else { "2 or 3" };
            return Err(Failure::Invalid(format!("--rapidities needs {want} values, got {k}")));
        }
    };
    let eps = match &a.eps {
        Some(s) => eps_arg(s, n)?,
        None => BoundaryParams::zeros(n),
    };
    let tol = positive("tol", a.tol)?;
    let rel_tol = positive("rel-tol", a.rel_tol)?;
    let conv = DualConvention::from(a.convention);
    let point = CheckPoint::new(n, q, thetas, eps.clone(), conv)?;
    let report = match a.check {
        CheckName::Ybe => point.ybe(rel_tol, tol)?,
        CheckName::Re => point.reflection(rel_tol, tol)?,
        CheckName::Coideal => point.coideal(tol)?,
        CheckName::Sklyanin => point.sklyanin(rel_tol, tol)?,
        CheckName::BComm => point.b_commutation(rel_tol, tol)?,
    };
    let mut meta = Meta::new("verify", n, q, conv.into(), tol);
    meta.rapidities = Some(thetas.iter().map(|&t| pair(t)).collect());
    meta.eps = eps.values().iter().map(|&e| pair(e)).collect();
    let doc = ReportDocument {
        meta,
        checks: vec![CheckEntry::from(&report)],
    };
    let bytes = serialize(&doc)?;
    Ok(Outcome {
        passed: report.passed,
        lines: vec![report.summary()],
        file: a.out.clone().map(|p| (p, bytes)),
    })
}

fn theta_grid(text: &str) -> Result<Vec<Complex<f64>>, Failure> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [start, end, count] => {
            let (a, b) = (complex_arg("grid", start)?, complex_arg("grid", end)?);
            let k: usize = count
                .trim()
                .parse()
                .map_err(|_| Failure::Invalid(format!("--grid: bad point count {count:?}")))?;
            match k {
                0 => Err(Failure::Invalid("--grid: point count must be positive".into())),
                1 => Ok(vec![a]),
                _ => Ok((0..k).map(|i| a + (b - a) * (i as f64 / (k - 1) as f64)).collect()),
            }
        }
        [list] => complex_list_arg("grid", list),
        _ => Err(Failure::Invalid("--grid: expected start:end:count or a list".into())),
    }
}

fn scan(a: &ScanArgs) -> CmdResult {
    let (n, q) = common(&a.common)?;
    let x = complex_arg("x", &a.x)?;
    let rel_tol = positive("rel-tol", a.rel_tol)?;
    let conv = DualConvention::from(a.convention);
    let kind = match a.system {
        SystemArg::Paper => ScanKind::Boundary(BoundarySystem::Paper),
        SystemArg::Engine => ScanKind::Boundary(BoundarySystem::Engine(conv)),
        SystemArg::Bulk => ScanKind::Bulk,
    };
    let eps = a.eps.as_deref().map(|s| eps_arg(s, n)).transpose()?;
    let (grid, points): (Vec<GridPoint<f64>>, Vec<Vec<[f64; 2]>>) = match a.axis {
        ScanAxis::Eps => {
            if kind == ScanKind::Bulk {
                return Err(Failure::Invalid("bulk scans run along theta".into()));
            }
            if eps.is_some() {
                return Err(Failure::Invalid("--eps is fixed only in theta scans".into()));
            }
            let values = complex_list_arg("grid", &a.grid)?;
            let grid = eps_grid(n, &values);
            let points = grid
                .iter()
                .map(|p| match p {
                    GridPoint::Eps(e) => e.values().iter().map(|&z| pair(z)).collect(),
                    GridPoint::Spectral(t) => vec![pair(*t)],
                })
                .collect();
            (grid, points)
        }
        ScanAxis::Theta => {
            let thetas = theta_grid(&a.grid)?;
            let points = thetas.iter().map(|&t| vec![pair(t)]).collect();
            (thetas.iter().map(|t| GridPoint::Spectral(t.exp())).collect(), points)
        }
    };
    let fixed = ScanFixed {
        n,
        q,
        x,
        eps: match (a.axis, &eps) {
            (ScanAxis::Theta, None) => Some(BoundaryParams::zeros(n)),
            _ => eps.clone(),
        },
        rel_tol,
    };
    let result = dimension_scan(kind, fixed, grid)?;
    let convention = match kind {
        ScanKind::Boundary(BoundarySystem::Paper) => Convention::Paper,
        _ => conv.into(),
    };
    let mut meta = Meta::new("scan", n, q, convention, rel_tol);
    meta.x = (a.axis == ScanAxis::Eps || kind == ScanKind::Bulk).then(|| vec![pair(x)]);
    if let Some(e) = &result.fixed.eps {
        if a.axis == ScanAxis::Theta && kind != ScanKind::Bulk {
            meta.eps = e.values().iter().map(|&z| pair(z)).collect();
        }
    }
    let ones = result.dims.iter().filter(|&&d| d == 1).count();
    let doc = ScanDocument {
        meta,
        scan: ScanData {
            axis: match a.axis {
                ScanAxis::Eps => "eps".into(),
                ScanAxis::Theta => "theta".into(),
            },
            system: match a.system {
                SystemArg::Paper => "paper".into(),
                SystemArg::Engine => "engine".into(),
                SystemArg::Bulk => "bulk".into(),
            },
            points,
            dims: result.dims,
        },
    };
    let total = doc.scan.dims.len();
    Outcome::document(
        &a.out,
        &doc,
        vec![format!("scan: {total} points, {ones} with dimension 1")],
    )
}

fn colored(text: &str, passed: bool, color: bool) -> String {
    if !color {
        return text.to_string();
    }
    let code = if passed { "32" } else { "31" };
    match text.split_once(' ') {
        Some((head, rest)) if head == "PASS" || head == "FAIL" => format!("\x1b[{code}m{head}\x1b[0m {rest}"),
        _ => text.to_string(),
    }
}

/// Runs one invocation, writing human-readable output to `out` and
/// diagnostics to `err`. `color` enables ANSI highlighting of PASS/FAIL.
pub fn run<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write, color: bool) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{rendered}")
            } else {
                write!(out, "{rendered}")
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::RepCheck(a) => rep_check(a),
        Command::Smatrix(a) => smatrix(a),
        Command::Kmatrix(a) => kmatrix(a),
        Command::Verify(a) => verify(a),
        Command::Scan(a) => scan(a),
    };
    match result {
        Ok(outcome) => {
            if let Some((path, bytes)) = &outcome.file {
                if let Err(e) = std::fs::write(path, bytes) {
                    let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
                    return EXIT_INVALID;
                }
            }
            for line in &outcome.lines {
                let _ = writeln!(out, "{}", colored(line, outcome.passed, color));
            }
            if outcome.passed {
                EXIT_OK
            } else {
                EXIT_FAILED
            }
        }
        Err(Failure::Invalid(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INVALID
        }
        Err(Failure::Degenerate(msg)) => {
            let _ = writeln!(err, "{msg}");
            EXIT_DEGENERATE
        }
    }
}

/// Entry point used by the binary: standard streams, colour only on a
/// terminal and only when `NO_COLOR` is unset.
pub fn cmd_dispatch<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let color = std::io::stdout().is_terminal() && std::env::var_os("NO_COLOR").is_none();
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(argv, &mut stdout.lock(), &mut stderr.lock(), color)
}
