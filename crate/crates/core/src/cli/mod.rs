//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 methods disagree,
//! 3 internal failure (an identity that must hold did not).

mod selftest;

pub use selftest::run_selftest;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::cartan::{parse_algebra, CartanData, Family, FusionInput, KrCounts};
use crate::error::{Error, Result};
use crate::evaluation::{decompose_matrix, fusion_decompose_ctz, multiplicity_matrix};
use crate::fermionic::{fusion_decompose_fermionic, m_sum, n_sum, Method, MultiplicityResult};
use crate::qsystem::solve;
use crate::scalars::{Int, Laurent, QPoly};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_MISMATCH: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "qqfusion",
    version,
    about = "Graded multiplicities of fusion products of Kirillov-Reshetikhin modules",
    after_help = "KR modules are given as --kr ALPHA:LEVEL[xCOUNT], e.g. --kr 1:2x2.\n\
                  Multiplicities are polynomials in v = q^-1.\n\
                  QQFUSION_THREADS caps the number of worker threads."
)]
struct Cli {
    #[command(subcommand)]
    command: CommandArgs,
}

#[derive(Subcommand, Debug)]
enum CommandArgs {
    /// Decompose a fusion product into irreducibles.
    Decompose {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value_t = MethodChoice::Msum)]
        method: MethodChoice,
    },
    /// Multiplicity of a single irreducible.
    Multiplicity {
        #[command(flatten)]
        common: CommonArgs,
        /// Highest weight, comma separated.
        #[arg(long, value_name = "L1,L2,...")]
        lambda: String,
        #[arg(long, value_enum, default_value_t = MethodChoice::Msum)]
        method: MethodChoice,
    },
    /// Run every applicable method and compare.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Print the quantum Q-system solutions `Q[alpha,n]` for `-1 <= n <= nmax`.
    Qsolve {
        #[arg(long)]
        algebra: String,
        #[arg(long, default_value_t = 3)]
        nmax: i64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run the built-in invariant checks.
    Selftest {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Algebra label such as A1, A3, D4 or E6.
    #[arg(long)]
    algebra: String,
    /// KR module ALPHA:LEVEL[xCOUNT]; may be repeated.
    #[arg(long = "kr", value_name = "ALPHA:LEVEL[xCOUNT]")]
    kr: Vec<String>,
    /// Truncation level of the fermionic sums (derived when omitted).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodChoice {
    Msum,
    Nsum,
    Matrix,
    Ctz,
    All,
}

impl MethodChoice {
    fn single(self) -> Option<Method> {
        match self {
            MethodChoice::Msum => Some(Method::MSum),
            MethodChoice::Nsum => Some(Method::NSum),
            MethodChoice::Matrix => Some(Method::Matrix),
            MethodChoice::Ctz => Some(Method::CtZ),
            MethodChoice::All => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Decompose,
    Multiplicity,
    Verify,
    Qsolve,
    Selftest,
}

/// A parsed and validated invocation.
#[derive(Clone, Debug)]
pub struct CliRequest {
    pub command: Command,
    pub algebra: Option<Arc<CartanData>>,
    /// `(α, i, count)` as given on the command line.
    pub kr_list: Vec<(usize, usize, u64)>,
    pub lambda_weight: Option<Vec<i64>>,
    pub method: MethodChoice,
    pub k_override: Option<usize>,
    pub format: Format,
    pub n_max: i64,
}

/// Rendered output of a run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub status: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            status: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn error(e: &Error) -> Self {
        Outcome {
            status: if e.is_internal() { EXIT_INTERNAL } else { EXIT_USAGE },
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        }
    }
}

/// Parses `α:i` or `α:ixN`.
pub fn parse_kr(s: &str) -> Result<(usize, usize, u64)> {
    let bad = || Error::InvalidInput(format!("bad KR module '{s}' (expected ALPHA:LEVEL[xCOUNT])"));
    let (a, rest) = s.split_once(':').ok_or_else(bad)?;
    let (i, count) = match rest.split_once(['x', 'X']) {
        Some((i, c)) => (i, c.trim().parse::<u64>().map_err(|_| bad())?),
        None => (rest, 1),
    };
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let i: usize = i.trim().parse().map_err(|_| bad())?;
    if a == 0 || i == 0 || count == 0 {
        return Err(bad());
    }
    Ok((a, i, count))
}

/// Parses a comma-separated weight.
pub fn parse_weight(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<i64>()
                .map_err(|_| Error::InvalidInput(format!("bad weight '{s}'")))
        })
        .collect()
}

fn build_request(cli: Cli) -> Result<CliRequest> {
    let mut req = CliRequest {
        command: Command::Selftest,
        algebra: None,
        kr_list: Vec::new(),
        lambda_weight: None,
        method: MethodChoice::All,
        k_override: None,
        format: Format::Text,
        n_max: 0,
    };
    let common = |req: &mut CliRequest, c: CommonArgs| -> Result<()> {
        req.algebra = Some(Arc::new(parse_algebra(&c.algebra)?));
        req.kr_list = c.kr.iter().map(|s| parse_kr(s)).collect::<Result<_>>()?;
        req.k_override = c.k;
        req.format = c.format;
        Ok(())
    };
    match cli.command {
        CommandArgs::Decompose { common: c, method } => {
            req.command = Command::Decompose;
            req.method = method;
            common(&mut req, c)?;
        }
        CommandArgs::Multiplicity { common: c, lambda, method } => {
            req.command = Command::Multiplicity;
            req.method = method;
            req.lambda_weight = Some(parse_weight(&lambda)?);
            common(&mut req, c)?;
        }
        CommandArgs::Verify { common: c } => {
            req.command = Command::Verify;
            common(&mut req, c)?;
        }
        CommandArgs::Qsolve { algebra, nmax, format } => {
            req.command = Command::Qsolve;
            req.algebra = Some(Arc::new(parse_algebra(&algebra)?));
            req.n_max = nmax;
            req.format = format;
        }
        CommandArgs::Selftest { format } => {
            req.format = format;
        }
    }
    if req.method == MethodChoice::Ctz {
        if let Some(c) = &req.algebra {
            if !is_a1(c) {
                return Err(Error::InvalidInput(format!(
                    "method ctz is only available for A1, not {}",
                    c.name()
                )));
            }
        }
    }
    Ok(req)
}

/// Parses command-line arguments (including the program name).
/// On failure returns the outcome to report (help and version exit 0).
pub fn parse_args<I, T>(args: I) -> std::result::Result<CliRequest, Outcome>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return Err(if e.use_stderr() {
                Outcome {
                    status: EXIT_USAGE,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome::ok(text)
            });
        }
    };
    build_request(cli).map_err(|e| Outcome {
        status: EXIT_USAGE,
        stdout: String::new(),
        stderr: format!("error: {e}\n"),
    })
}

fn is_a1(c: &CartanData) -> bool {
    c.label == Family::A && c.rank == 1
}

fn fusion_input(req: &CliRequest) -> Result<FusionInput> {
    let cartan = req
        .algebra
        .clone()
        .ok_or_else(|| Error::InvalidInput("missing --algebra".into()))?;
    let mut n = KrCounts::new();
    for &(a, i, c) in &req.kr_list {
        *n.entry((a, i)).or_insert(0) += c;
    }
    FusionInput::new(cartan, n, req.lambda_weight.clone(), req.k_override)
}

/// Methods that apply to an algebra, in reporting order.
pub fn applicable_methods(c: &CartanData) -> Vec<Method> {
    let mut m = vec![Method::MSum, Method::NSum, Method::Matrix];
    if is_a1(c) {
        m.push(Method::CtZ);
    }
    m
}

/// Full decomposition by one method.
pub fn decompose(input: &FusionInput, method: Method) -> Result<MultiplicityResult> {
    match method {
        Method::MSum | Method::NSum => fusion_decompose_fermionic(input, method),
        Method::Matrix => decompose_matrix(input),
        Method::CtZ => fusion_decompose_ctz(input, None),
    }
}

fn single_multiplicity(input: &FusionInput, ell: &[i64], method: Method) -> Result<QPoly> {
    match method {
        Method::MSum => m_sum(input, ell),
        Method::NSum => n_sum(input, ell),
        Method::Matrix => multiplicity_matrix(input, ell),
        Method::CtZ => {
            let table = solve(&input.cartan, input.max_level().max(1) as i64)?;
            crate::evaluation::ct_z_multiplicity_a1(input, ell, &table)
        }
    }
}

fn weight_label(ell: &[i64]) -> String {
    let parts: Vec<String> = ell.iter().map(|x| x.to_string()).collect();
    format!("V[{}]", parts.join(","))
}

/// `V[4]: 1 | V[2]: v | V[0]: v^2`, highest weights first.
pub fn render_text(result: &MultiplicityResult) -> String {
    if result.entries.is_empty() {
        return "0".into();
    }
    result
        .entries
        .iter()
        .rev()
        .map(|(ell, p)| format!("{}: {p}", weight_label(ell)))
        .collect::<Vec<_>>()
        .join(" | ")
}

#[derive(Serialize, Deserialize, Debug, PartialEq, Eq)]
struct JsonComponent {
    lambda: Vec<i64>,
    coeffs: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize, Debug, PartialEq, Eq)]
struct JsonResult {
    algebra: String,
    v_means: String,
    k_used: usize,
    method: String,
    components: Vec<JsonComponent>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    methods_agreeing: Vec<String>,
}

fn json_component(ell: &[i64], p: &QPoly) -> JsonComponent {
    JsonComponent {
        lambda: ell.to_vec(),
        coeffs: p.terms().iter().map(|(e, c)| (e.to_string(), c.to_string())).collect(),
    }
}

fn json_value(result: &MultiplicityResult, agreeing: &[Method]) -> JsonResult {
    JsonResult {
        algebra: result.algebra.clone(),
        v_means: "q^-1".into(),
        k_used: result.k_used,
        method: result.method.as_str().into(),
        components: result
            .entries
            .iter()
            .rev()
            .map(|(ell, p)| json_component(ell, p))
            .collect(),
        methods_agreeing: agreeing.iter().map(|m| m.as_str().to_string()).collect(),
    }
}

/// JSON rendering; coefficients are strings so that big integers survive.
pub fn to_json(result: &MultiplicityResult) -> String {
    serde_json::to_string_pretty(&json_value(result, &[])).expect("serializable")
}

/// Inverse of [`to_json`].
pub fn from_json(s: &str) -> Result<MultiplicityResult> {
    let j: JsonResult = serde_json::from_str(s).map_err(|e| Error::InvalidInput(format!("bad JSON: {e}")))?;
    let method = Method::parse(&j.method)
        .ok_or_else(|| Error::InvalidInput(format!("unknown method '{}'", j.method)))?;
    let mut entries = BTreeMap::new();
    for c in j.components {
        let mut terms = Vec::new();
        for (e, v) in c.coeffs {
            let e: i64 = e.parse().map_err(|_| Error::InvalidInput(format!("bad exponent '{e}'")))?;
            let v: Int = v.parse().map_err(|_| Error::InvalidInput(format!("bad coefficient '{v}'")))?;
            terms.push((e, v));
        }
        entries.insert(c.lambda, QPoly::from_laurent(Laurent::from_terms(terms)));
    }
    Ok(MultiplicityResult {
        algebra: j.algebra,
        entries,
        method,
        k_used: j.k_used,
    })
}

/// Lines describing where two results differ.
fn diff_report(a: &MultiplicityResult, b: &MultiplicityResult) -> Vec<String> {
    let mut weights: Vec<&Vec<i64>> = a.entries.keys().chain(b.entries.keys()).collect();
    weights.sort();
    weights.dedup();
    let zero = QPoly::zero();
    weights
        .into_iter()
        .rev()
        .filter_map(|ell| {
            let x = a.entries.get(ell).unwrap_or(&zero);
            let y = b.entries.get(ell).unwrap_or(&zero);
            (x != y).then(|| {
                format!(
                    "  {}: {}={} {}={}",
                    weight_label(ell),
                    a.method,
                    x,
                    b.method,
                    y
                )
            })
        })
        .collect()
}

/// Runs several methods; `Ok` when they all agree, `Err` with a report otherwise.
fn compare_all(input: &FusionInput, methods: &[Method]) -> Result<(Vec<MultiplicityResult>, Vec<String>)> {
    let results: Vec<MultiplicityResult> = methods.iter().map(|m| decompose(input, *m)).collect::<Result<_>>()?;
    let mut report = Vec::new();
    for r in &results[1..] {
        if !r.same_entries(&results[0]) {
            report.push(format!("{} and {} disagree:", results[0].method, r.method));
            report.extend(diff_report(&results[0], r));
        }
    }
    Ok((results, report))
}

fn method_list(methods: &[Method]) -> String {
    methods.iter().map(|m| m.as_str()).collect::<Vec<_>>().join(", ")
}

fn run_decompose(req: &CliRequest) -> Result<Outcome> {
    let input = fusion_input(req)?;
    if let Some(m) = req.method.single() {
        let res = decompose(&input, m)?;
        let out = match req.format {
            Format::Text => format!("{}\n", render_text(&res)),
            Format::Json => format!("{}\n", to_json(&res)),
        };
        return Ok(Outcome::ok(out));
    }
    let methods = applicable_methods(&input.cartan);
    let (results, report) = compare_all(&input, &methods)?;
    if !report.is_empty() {
        return Ok(mismatch(report));
    }
    let out = match req.format {
        Format::Text => format!(
            "{}\nall methods agree ({})\n",
            render_text(&results[0]),
            method_list(&methods)
        ),
        Format::Json => format!(
            "{}\n",
            serde_json::to_string_pretty(&json_value(&results[0], &methods)).expect("serializable")
        ),
    };
    Ok(Outcome::ok(out))
}

fn mismatch(report: Vec<String>) -> Outcome {
    Outcome {
        status: EXIT_MISMATCH,
        stdout: String::new(),
        stderr: format!("{}\n", report.join("\n")),
    }
}

fn run_multiplicity(req: &CliRequest) -> Result<Outcome> {
    let input = fusion_input(req)?;
    let ell = input.lambda_weight.clone().expect("multiplicity requires a weight");
    let methods = match req.method.single() {
        Some(m) => vec![m],
        None => applicable_methods(&input.cartan),
    };
    let values: Vec<QPoly> = methods
        .iter()
        .map(|m| single_multiplicity(&input, &ell, *m))
        .collect::<Result<_>>()?;
    let mut report = Vec::new();
    for (m, v) in methods.iter().zip(&values).skip(1) {
        if v != &values[0] {
            report.push(format!("{}={} but {}={}", methods[0], values[0], m, v));
        }
    }
    if !report.is_empty() {
        return Ok(mismatch(report));
    }
    let out = match req.format {
        Format::Text => format!("{}\n", values[0]),
        Format::Json => {
            let mut entries = BTreeMap::new();
            if !values[0].is_zero() {
                entries.insert(ell.clone(), values[0].clone());
            }
            let res = MultiplicityResult {
                algebra: input.cartan.name(),
                entries,
                method: methods[0],
                k_used: input.k,
            };
            let agreeing = if methods.len() > 1 { methods.clone() } else { Vec::new() };
            let mut j = json_value(&res, &agreeing);
            if j.components.is_empty() {
                j.components.push(json_component(&ell, &QPoly::zero()));
            }
            format!("{}\n", serde_json::to_string_pretty(&j).expect("serializable"))
        }
    };
    Ok(Outcome::ok(out))
}

fn run_verify(req: &CliRequest) -> Result<Outcome> {
    let input = fusion_input(req)?;
    let methods = applicable_methods(&input.cartan);
    let (results, report) = compare_all(&input, &methods)?;
    if !report.is_empty() {
        let mut out = mismatch(report);
        for r in &results {
            let _ = writeln!(out.stdout, "{}: {}", r.method, render_text(r));
        }
        return Ok(out);
    }
    match req.format {
        Format::Text => {
            let mut s = String::new();
            for r in &results {
                let _ = writeln!(s, "{}: {}", r.method, render_text(r));
            }
            let _ = writeln!(s, "all methods agree ({})", method_list(&methods));
            Ok(Outcome::ok(s))
        }
        Format::Json => Ok(Outcome::ok(format!(
            "{}\n",
            serde_json::to_string_pretty(&json_value(&results[0], &methods)).expect("serializable")
        ))),
    }
}

#[derive(Serialize)]
struct JsonQEntry {
    alpha: usize,
    n: i64,
    value: String,
}

fn run_qsolve(req: &CliRequest) -> Result<Outcome> {
    let cartan = req.algebra.clone().expect("qsolve requires an algebra");
    let table = solve(&cartan, req.n_max)?;
    let out = match req.format {
        Format::Text => {
            let mut s = String::new();
            for ((a, n), q) in table.entries() {
                let _ = writeln!(s, "Q[{a},{n}] = {}", q.render());
            }
            s
        }
        Format::Json => {
            let entries: Vec<JsonQEntry> = table
                .entries()
                .iter()
                .map(|((a, n), q)| JsonQEntry {
                    alpha: *a,
                    n: *n,
                    value: q.render(),
                })
                .collect();
            let v = serde_json::json!({
                "algebra": cartan.name(),
                "n_max": req.n_max,
                "entries": entries,
            });
            format!("{}\n", serde_json::to_string_pretty(&v).expect("serializable"))
        }
    };
    Ok(Outcome::ok(out))
}

fn run_selftest_command(req: &CliRequest) -> Outcome {
    let reports = run_selftest();
    let ok = reports.iter().all(|r| r.passed());
    let stdout = match req.format {
        Format::Text => {
            let mut s = String::new();
            for r in &reports {
                let tag = if r.passed() { "PASS" } else { "FAIL" };
                let _ = writeln!(s, "{tag} {} ({} checked)", r.name, r.checked);
                for f in r.failures.iter().take(5) {
                    let _ = writeln!(s, "     {f}");
                }
            }
            s
        }
        Format::Json => {
            let v: Vec<_> = reports
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "name": r.name,
                        "checked": r.checked,
                        "passed": r.passed(),
                        "failures": r.failures,
                    })
                })
                .collect();
            format!("{}\n", serde_json::to_string_pretty(&v).expect("serializable"))
        }
    };
    Outcome {
        status: if ok { EXIT_OK } else { EXIT_INTERNAL },
        stdout,
        stderr: String::new(),
    }
}

/// Executes a request.
pub fn run(req: &CliRequest) -> Outcome {
    let res = match req.command {
        Command::Decompose => run_decompose(req),
        Command::Multiplicity => run_multiplicity(req),
        Command::Verify => run_verify(req),
        Command::Qsolve => run_qsolve(req),
        Command::Selftest => Ok(run_selftest_command(req)),
    };
    res.unwrap_or_else(|e| Outcome::error(&e))
}

/// Caps the worker pool from `QQFUSION_THREADS` when set.
pub fn configure_threads() {
    if let Some(n) = std::env::var("QQFUSION_THREADS").ok().and_then(|s| s.trim().parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Parses, runs and prints; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    configure_threads();
    let outcome = match parse_args(args) {
        Ok(req) => run(&req),
        Err(o) => o,
    };
    print!("{}", outcome.stdout);
    eprint!("{}", outcome.stderr);
    outcome.status
}
