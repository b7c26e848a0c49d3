//! Command-line front end: `order`, `classify`, `preimage`, `verify`, `demo`.
//!
//! Exit codes:
//!
//! | code | meaning                                   |
//! |------|-------------------------------------------|
//! | 0    | success                                   |
//! | 1    | internal error                            |
//! | 2    | input error (syntax, field, file, flags)  |
//! | 3    | target not in the image                   |
//! | 4    | oracle found a counterexample             |
//! | 5    | budget exceeded                           |
//! | 6    | field too small for the preimage          |
//!
//! With `--format json` every outcome, errors included, is a single JSON
//! document on stdout. In human mode errors go to stderr.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::engine::{classify_image, preimage, EngineError};
use crate::ncpoly::{NcLinearPoly, PolyError};
use crate::oracle::{order_bruteforce, verify, Observed, OracleError, VerificationPlan, DEFAULT_BUDGET};
use crate::parse::parse_polynomial;
use crate::report::{
    classification_report, error_report, order_report, preimage_report, render_human, verification_report,
};
use crate::scalar::{FieldSpec, ScalarError};
use crate::utmatrix::{MatrixError, Stratum, UtMatrix};

/// The suite run by `demo`.
pub const CURATED_SUITE: &str = include_str!("../suites/curated.json");

pub mod exit {
    pub const OK: i32 = 0;
    pub const INTERNAL: i32 = 1;
    pub const INPUT: i32 = 2;
    pub const NOT_IN_IMAGE: i32 = 3;
    pub const COUNTEREXAMPLE: i32 = 4;
    pub const BUDGET: i32 = 5;
    pub const GUARD: i32 = 6;
}

#[derive(Debug, Parser)]
#[command(name = "utimage", version, about = "Images of linear polynomials on upper triangular matrices")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct PolyArgs {
    /// Polynomial, e.g. "x1*x2 - x2*x1" or "(x1*x2 - x2*x1)*(x3*x4 - x4*x3)".
    #[arg(short = 'p', long = "poly")]
    pub poly: String,
    /// Number of variables; defaults to the largest index in the polynomial.
    #[arg(short = 'm', long = "num-vars")]
    pub num_vars: Option<usize>,
    /// `q=<prime>` or `rational`.
    #[arg(long, default_value = "rational")]
    pub field: String,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Human)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Maximum number of tuple evaluations.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    /// Random tuples for the containment check in sampled mode.
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    /// Random targets for the surjectivity check in sampled mode.
    #[arg(long, default_value_t = 100)]
    pub targets: u64,
    /// Sample even when exhaustive enumeration fits the budget.
    #[arg(long)]
    pub sampled: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute ord(p).
    Order {
        #[command(flatten)]
        poly: PolyArgs,
        /// Cross-check against the brute-force order (searching UT_1 .. UT_N).
        #[arg(long, value_name = "N")]
        check: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Classify p(UT_n).
    Classify {
        #[command(flatten)]
        poly: PolyArgs,
        #[arg(short = 'n', long = "dim")]
        dim: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Build u_1..u_m with p(u_1..u_m) equal to a target matrix.
    Preimage {
        #[command(flatten)]
        poly: PolyArgs,
        /// JSON file holding the target as an array of rows ("-" for stdin).
        #[arg(long)]
        target: PathBuf,
        /// Expected dimension; checked against the target.
        #[arg(short = 'n', long = "dim")]
        dim: Option<usize>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Check the classification with the enumeration/sampling oracle.
    Verify {
        #[arg(short = 'p', long = "poly", required_unless_present = "suite")]
        poly: Option<String>,
        #[arg(short = 'm', long = "num-vars")]
        num_vars: Option<usize>,
        #[arg(long, default_value = "rational")]
        field: String,
        #[arg(short = 'n', long = "dim", required_unless_present = "suite")]
        dim: Option<usize>,
        /// Run every case of a suite file instead of a single polynomial.
        #[arg(long, conflicts_with_all = ["poly", "claimed_t"])]
        suite: Option<PathBuf>,
        /// Claim this t instead of the computed one.
        #[arg(long, allow_hyphen_values = true)]
        claimed_t: Option<i64>,
        /// Claim t + SHIFT instead of the computed t.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "claimed_t")]
        claimed_shift: Option<i64>,
        #[command(flatten)]
        oracle: OracleArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run the curated suite and print a scoreboard.
    Demo {
        #[command(flatten)]
        oracle: OracleArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
}

/// A failure with its exit code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        CliError { code: exit::INPUT, kind: "input_error", message: message.into() }
    }
}

impl From<PolyError> for CliError {
    fn from(e: PolyError) -> Self {
        match e {
            PolyError::InternalInconsistency(_) => CliError { code: exit::INTERNAL, kind: "internal", message: e.to_string() },
            _ => CliError::input(e.to_string()),
        }
    }
}

impl From<ScalarError> for CliError {
    fn from(e: ScalarError) -> Self {
        CliError::input(e.to_string())
    }
}

impl From<MatrixError> for CliError {
    fn from(e: MatrixError) -> Self {
        CliError::input(e.to_string())
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        let (code, kind) = match &e {
            EngineError::TargetNotInImage(_) => (exit::NOT_IN_IMAGE, "target_not_in_image"),
            EngineError::GuardViolated { .. } => (exit::GUARD, "guard_violated"),
            EngineError::InternalInconsistency(_) => (exit::INTERNAL, "internal"),
            _ => (exit::INPUT, "input_error"),
        };
        CliError { code, kind, message: e.to_string() }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::BudgetExceeded { .. } => CliError { code: exit::BUDGET, kind: "budget_exceeded", message: e.to_string() },
            OracleError::Engine(inner) => inner.into(),
            OracleError::Matrix(inner) => inner.into(),
            OracleError::Unsupported(_) => CliError::input(e.to_string()),
        }
    }
}

/// Largest `k` with `xk` in the text.
fn infer_num_vars(text: &str) -> usize {
    let bytes = text.as_bytes();
    let mut best = 0;
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'x' || bytes[i] == b'X' {
            let start = i + 1;
            let mut j = start;
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            if let Ok(k) = text[start..j].parse::<usize>() {
                best = best.max(k);
            }
            i = j.max(i + 1);
        } else {
            i += 1;
        }
    }
    best
}

fn load_poly(text: &str, num_vars: Option<usize>, field: &str) -> Result<NcLinearPoly, CliError> {
    let field: FieldSpec = field.parse()?;
    let m = num_vars.unwrap_or_else(|| infer_num_vars(text));
    Ok(parse_polynomial(text, m, field)?)
}

fn read_target(path: &PathBuf, field: FieldSpec) -> Result<UtMatrix, CliError> {
    let text = if path.as_os_str() == "-" {
        std::io::read_to_string(std::io::stdin()).map_err(|e| CliError::input(format!("stdin: {e}")))?
    } else {
        std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?
    };
    let value: Value = serde_json::from_str(&text).map_err(|e| CliError::input(format!("target JSON: {e}")))?;
    Ok(UtMatrix::from_json(field, &value)?)
}

/// Outcome of a command: a report and the exit code it implies.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub report: Value,
}

impl Outcome {
    fn ok(report: Value) -> Self {
        Outcome { code: exit::OK, report }
    }
}

pub fn cmd_order(poly: &PolyArgs, check: Option<usize>, budget: u64) -> Result<Outcome, CliError> {
    let p = load_poly(&poly.poly, poly.num_vars, &poly.field)?;
    let ord = p.order().map_err(EngineError::from)?;
    let brute = match check {
        Some(n_max) => Some(order_bruteforce(&p, n_max, budget)?),
        None => None,
    };
    Ok(Outcome::ok(order_report(&p, &ord, brute)))
}

pub fn cmd_classify(poly: &PolyArgs, n: usize) -> Result<Outcome, CliError> {
    let p = load_poly(&poly.poly, poly.num_vars, &poly.field)?;
    let c = classify_image(&p, n)?;
    Ok(Outcome::ok(classification_report(&p, &c)))
}

pub fn cmd_preimage(poly: &PolyArgs, target: &PathBuf, n: Option<usize>) -> Result<Outcome, CliError> {
    let p = load_poly(&poly.poly, poly.num_vars, &poly.field)?;
    let a = read_target(target, p.field())?;
    if let Some(n) = n {
        if n != a.dim() {
            return Err(CliError::input(format!("target is {0}x{0}, expected {n}x{n}", a.dim())));
        }
    }
    let w = preimage(&p, &a)?;
    Ok(Outcome::ok(preimage_report(&p, &w)))
}

fn plan_from(args: &OracleArgs, claimed_t: Option<i64>) -> VerificationPlan {
    VerificationPlan {
        seed: args.seed,
        budget: args.budget,
        sample_count: args.samples,
        target_count: args.targets,
        unit_targets: true,
        claimed_t,
        force_sampled: args.sampled,
    }
}

/// Applies `--claimed-shift` to the computed stratum. Shifts leaving
/// `-1 ..= n-1` are input errors.
fn shifted_t(p: &NcLinearPoly, n: usize, shift: i64) -> Result<i64, CliError> {
    let t = classify_image(p, n)?.stratum.t() + shift;
    if t < -1 || t > n as i64 - 1 {
        return Err(CliError::input(format!("shifted claim t = {t} is outside -1..={}", n as i64 - 1)));
    }
    Ok(t)
}

fn observed_code(o: Observed) -> i32 {
    match o {
        Observed::Counterexample => exit::COUNTEREXAMPLE,
        Observed::Equal | Observed::ContainmentOnly => exit::OK,
    }
}

pub fn cmd_verify(
    p: &NcLinearPoly,
    n: usize,
    args: &OracleArgs,
    claimed_t: Option<i64>,
    claimed_shift: Option<i64>,
) -> Result<Outcome, CliError> {
    let claimed_t = match claimed_shift {
        Some(s) => Some(shifted_t(p, n, s)?),
        None => claimed_t,
    };
    if let Some(t) = claimed_t {
        Stratum::new(n, t)?;
    }
    let r = verify(p, n, &plan_from(args, claimed_t))?;
    Ok(Outcome { code: observed_code(r.observed), report: verification_report(p, n, &r) })
}

#[derive(Debug, Clone, Deserialize)]
pub struct SuiteCase {
    pub name: String,
    pub poly: String,
    pub num_vars: usize,
    pub dim: usize,
    pub field: String,
    pub expect_case: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Suite {
    pub cases: Vec<SuiteCase>,
}

pub fn parse_suite(text: &str) -> Result<Suite, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::input(format!("suite: {e}")))
}

/// Runs every case; the exit code is the worst (highest) per-case code.
pub fn cmd_verify_suite(suite: &Suite, args: &OracleArgs, claimed_shift: Option<i64>) -> Result<Outcome, CliError> {
    let mut code = exit::OK;
    let mut results = Vec::new();
    for case in &suite.cases {
        let p = load_poly(&case.poly, Some(case.num_vars), &case.field)?;
        let (case_code, report) = match cmd_verify(&p, case.dim, args, None, claimed_shift) {
            Ok(o) => (o.code, o.report),
            Err(e) => (e.code, error_report(e.code, e.kind, &e.message)),
        };
        code = code.max(case_code);
        results.push(json!({ "name": case.name, "exit_code": case_code, "report": report }));
    }
    Ok(Outcome {
        code,
        report: json!({ "schema": "utimage.suite_run", "schema_version": crate::report::SCHEMA_VERSION, "cases": results }),
    })
}

/// Scoreboard over the curated suite: classification plus oracle verdict.
pub fn cmd_demo(args: &OracleArgs) -> Result<Outcome, CliError> {
    let suite = parse_suite(CURATED_SUITE)?;
    let mut rows = Vec::new();
    let mut all_pass = true;
    for case in &suite.cases {
        let p = load_poly(&case.poly, Some(case.num_vars), &case.field)?;
        let class = classify_image(&p, case.dim)?;
        let r = verify(&p, case.dim, &plan_from(args, None))?;
        let expected_observed = if class.is_exact() { Observed::Equal } else { Observed::ContainmentOnly };
        let case_ok = case.expect_case.as_deref().is_none_or(|c| c == class.case.label());
        let pass = case_ok && r.observed == expected_observed && class.range_ok;
        all_pass &= pass;
        rows.push(json!({
            "name": case.name,
            "polynomial": p.to_string(),
            "field": p.field().to_string(),
            "n": case.dim,
            "order": class.order,
            "t": class.stratum.t(),
            "theorem_case": class.case.label(),
            "claim": if class.is_exact() { "equal" } else { "containment_only" },
            "mode": r.mode,
            "observed": r.observed,
            "evaluations": r.evaluations_used as u64,
            "elapsed_ms": r.elapsed_ms as u64,
            "pass": pass,
        }));
    }
    Ok(Outcome {
        code: if all_pass { exit::OK } else { exit::COUNTEREXAMPLE },
        report: json!({
            "schema": "utimage.demo",
            "schema_version": crate::report::SCHEMA_VERSION,
            "seed": args.seed,
            "all_pass": all_pass,
            "cases": rows,
        }),
    })
}

fn render_demo(report: &Value) -> String {
    let mut out = format!(
        "{:<32} {:>4} {:<9} {:>3} {:>3} {:<5} {:<16} {:<10} {:<16} {}\n",
        "case", "thm", "field", "n", "ord", "t", "claim", "mode", "observed", "result"
    );
    for c in report["cases"].as_array().into_iter().flatten() {
        let s = |k: &str| match &c[k] {
            Value::String(s) => s.clone(),
            v => v.to_string(),
        };
        out.push_str(&format!(
            "{:<32} {:>4} {:<9} {:>3} {:>3} {:<5} {:<16} {:<10} {:<16} {}\n",
            s("name"),
            s("theorem_case"),
            s("field"),
            s("n"),
            s("order"),
            s("t"),
            s("claim"),
            s("mode"),
            s("observed"),
            if c["pass"] == true { "PASS" } else { "FAIL" }
        ));
    }
    out.push_str(if report["all_pass"] == true { "all cases pass\n" } else { "some cases FAILED\n" });
    out
}

fn dispatch(command: &Command) -> Result<(Outcome, Format), CliError> {
    Ok(match command {
        Command::Order { poly, check, budget, out } => (cmd_order(poly, *check, *budget)?, out.format),
        Command::Classify { poly, dim, out } => (cmd_classify(poly, *dim)?, out.format),
        Command::Preimage { poly, target, dim, out } => (cmd_preimage(poly, target, *dim)?, out.format),
        Command::Verify { poly, num_vars, field, dim, suite, claimed_t, claimed_shift, oracle, out } => {
            let outcome = match suite {
                Some(path) => {
                    let text = std::fs::read_to_string(path)
                        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
                    cmd_verify_suite(&parse_suite(&text)?, oracle, *claimed_shift)?
                }
                None => {
                    let p = load_poly(poly.as_deref().expect("required by clap"), *num_vars, field)?;
                    cmd_verify(&p, dim.expect("required by clap"), oracle, *claimed_t, *claimed_shift)?
                }
            };
            (outcome, out.format)
        }
        Command::Demo { oracle, out } => (cmd_demo(oracle)?, out.format),
    })
}

fn requested_format(command: &Command) -> Format {
    match command {
        Command::Order { out, .. }
        | Command::Classify { out, .. }
        | Command::Preimage { out, .. }
        | Command::Verify { out, .. }
        | Command::Demo { out, .. } => out.format,
    }
}

/// Parses `args` (including the program name), runs the command and writes
/// its output. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                exit::INPUT
            } else {
                let _ = write!(stdout, "{text}");
                exit::OK
            };
        }
    };
    let format = requested_format(&cli.command);
    match dispatch(&cli.command) {
        Ok((outcome, format)) => {
            let text = match format {
                Format::Json => serde_json::to_string_pretty(&outcome.report).expect("json") + "\n",
                Format::Human if matches!(cli.command, Command::Demo { .. }) => render_demo(&outcome.report),
                Format::Human => render_human(&outcome.report),
            };
            let _ = stdout.write_all(text.as_bytes());
            outcome.code
        }
        Err(e) => {
            match format {
                Format::Json => {
                    let v = error_report(e.code, e.kind, &e.message);
                    let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&v).expect("json"));
                }
                Format::Human => {
                    let _ = writeln!(stderr, "error: {}", e.message);
                }
            }
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("utimage").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn order_examples() {
        let (code, out, _) = run_capture(&["order", "-p", "x1*x2 - x2*x1", "-m", "2", "--field", "q=5", "--format", "json"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["order"], 1);
        let (code, out, _) = run_capture(&["order", "-p", "x1", "-m", "1", "--field", "rational"]);
        assert_eq!(code, 0);
        assert!(out.contains("order: 0"));
        let (code, _, err) = run_capture(&["order", "-p", "x1*x1", "-m", "1"]);
        assert_eq!(code, exit::INPUT);
        assert!(err.contains("not linear"), "{err}");
    }

    #[test]
    fn num_vars_inference() {
        assert_eq!(infer_num_vars("x1*x12 - 3*X2"), 12);
        assert_eq!(infer_num_vars("y"), 0);
    }

    #[test]
    fn bad_flags_are_input_errors() {
        assert_eq!(run_capture(&["classify", "-p", "x1"]).0, exit::INPUT);
        assert_eq!(run_capture(&["classify", "-p", "x1", "-n", "2", "--field", "q=4"]).0, exit::INPUT);
        assert_eq!(run_capture(&["--help"]).0, exit::OK);
    }

    #[test]
    fn verify_budget_exceeded() {
        let (code, out, _) = run_capture(&[
            "verify", "-p", "x1*x2 - x2*x1", "-n", "4", "--field", "q=5", "--budget", "10", "--format", "json",
        ]);
        assert_eq!(code, exit::BUDGET);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["kind"], "budget_exceeded");
    }
}
