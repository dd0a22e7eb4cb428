//! Command-line front end. [`run`] parses arguments, executes one
//! subcommand and writes a JSON report (or an instance file for
//! `generate`) to `out`; diagnostics go to `err`. The return value is the
//! process exit status, see [`exit_code`].

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use quadlin::bounds::{self, BoundReport, RltForm, SkewStrategy};
use quadlin::io::{self, Instance};
use quadlin::model::{self, BqpInstance};
use quadlin::qspplin::{self, LinearizationOutcome};
use quadlin::{Error, Rational, RationalMatrix, Scalar};

pub const DEFAULT_CAP: usize = 10_000_000;

#[derive(Debug, Parser)]
#[command(name = "quadlin", version, about = "Linearization and linearization-based bounds for binary quadratic programs")]
pub struct Cli {
    /// LP arithmetic: exact rationals or doubles.
    #[arg(long, global = true, value_enum, env = "QUADLIN_MODE", default_value = "exact")]
    pub mode: Mode,
    /// Add wall-clock runtimes to bound entries.
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Float,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Gl,
    Ggl,
    Lbbp,
    Rlt1,
    Lbbstar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    Upper,
    Sym,
    None,
}

impl From<Strategy> for SkewStrategy {
    fn from(s: Strategy) -> Self {
        match s {
            Strategy::Upper => SkewStrategy::UpperTriangular,
            Strategy::Sym => SkewStrategy::Symmetrize,
            Strategy::None => SkewStrategy::None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Form {
    Symmetric,
    Full,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a generated instance file.
    Generate {
        #[command(subcommand)]
        what: Generator,
    },
    /// Decide whether a QSPP cost matrix is linearizable.
    Linearize { file: PathBuf },
    /// Basis of the linearizable matrices of a QSPP graph.
    SpanningSet { file: PathBuf },
    /// Compute one lower bound.
    Bound {
        file: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
        /// Skew-symmetric update between GGL rounds.
        #[arg(long, value_enum, default_value = "upper")]
        strategy: Strategy,
        /// Use the pairs that never appear together in a feasible point.
        #[arg(long)]
        sparsity: bool,
        #[arg(long, default_value_t = bounds::GGL_DEFAULT_MAX_ITER)]
        max_iter: usize,
        #[arg(long, value_enum, default_value = "symmetric")]
        rlt_form: Form,
        /// Enumeration limit for the non-QSPP linearizable family.
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Optimum by enumerating the feasible set.
    Opt {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Run every bound and check their order against each other and the
    /// optimum (when the feasible set can be enumerated).
    VerifyChain {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum Generator {
    /// Complete DAG on n vertices with the same-length cost rule.
    Tournament {
        #[arg(long)]
        n: usize,
        /// Output file (default: standard output).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug)]
pub enum CliError {
    Lib(Error),
    Io(PathBuf, std::io::Error),
    /// A certificate or chain check failed.
    Check(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(p, e) => write!(f, "{}: {e}", p.display()),
            CliError::Check(msg) => write!(f, "check failed: {msg}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

/// Exit status for each failure class. Usage errors exit with 2.
pub fn exit_code(e: &CliError) -> i32 {
    match e {
        CliError::Io(..) => 3,
        CliError::Lib(Error::Parse { .. }) => 4,
        CliError::Lib(
            Error::Validation(_)
            | Error::CycleDetected(_)
            | Error::Unreachable(_)
            | Error::DimensionMismatch(_)
            | Error::InvalidArgument(_),
        ) => 5,
        CliError::Lib(Error::AssumptionViolated(_) | Error::ZeroDiagonal(_) | Error::NotSkewSymmetric) => 6,
        CliError::Lib(Error::PathExplosion(_) | Error::EnumerationTooLarge(_)) => 7,
        CliError::Lib(Error::LpFailure(_) | Error::NumericalBreakdown(_)) => 8,
        CliError::Lib(Error::ChainViolation(_)) | CliError::Check(_) => 9,
    }
}

enum Output {
    Text(String),
    Json(Value),
}

/// Runs one command line; `args` includes the program name.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(err, "{e}");
                2
            } else {
                let _ = write!(out, "{e}");
                0
            };
            return code;
        }
    };
    match execute(&cli) {
        Ok(Output::Text(t)) => {
            let _ = write!(out, "{t}");
            0
        }
        Ok(Output::Json(v)) => {
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("serializable"));
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn read_instance(path: &Path) -> Result<Instance, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    Ok(io::parse_instance(&text)?)
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn instance_summary(inst: &Instance, bqp: &BqpInstance) -> Value {
    json!({
        "kind": inst.kind(),
        "digest": digest(io::serialize_instance(inst).as_bytes()),
        "variables": bqp.m(),
        "constraints": bqp.rows(),
    })
}

fn exact(v: &Rational) -> Value {
    Value::String(v.to_fraction_string())
}

fn scalar<T: Scalar>(v: &T) -> Value {
    if T::VERIFY_TOL == 0.0 {
        Value::String(v.to_report_string())
    } else {
        serde_json::Number::from_f64(v.to_f64()).map_or_else(|| Value::String(v.to_report_string()), Value::Number)
    }
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Exact => "exact",
        Mode::Float => "float",
    }
}

fn execute(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::Generate {
            what: Generator::Tournament { n, output },
        } => {
            let inst = Instance::Qspp(model::generate_tournament(*n)?);
            let text = format!(
                "# tournament n={n}: q_ef = len^2 when arcs e and f have equal length\n{}",
                io::serialize_instance(&inst)
            );
            match output {
                Some(path) => {
                    std::fs::write(path, text).map_err(|e| CliError::Io(path.clone(), e))?;
                    Ok(Output::Text(String::new()))
                }
                None => Ok(Output::Text(text)),
            }
        }
        Command::Linearize { file } => {
            let inst = read_instance(file)?;
            let Instance::Qspp(q) = &inst else {
                return Err(Error::InvalidArgument("linearize needs a qspp instance".into()).into());
            };
            let summary = instance_summary(&inst, &inst.to_bqp()?);
            let body = match qspplin::linearize_qspp(q)? {
                LinearizationOutcome::Linearizable(c) => json!({
                    "linearizable": true,
                    "c": c.entries.iter().map(exact).collect::<Vec<_>>(),
                    "non_basic_arcs": c.non_basic.iter().map(|a| a + 1).collect::<Vec<_>>(),
                }),
                LinearizationOutcome::NotLinearizable(w) => {
                    let (u, v) = q.graph.arc(w.arc);
                    json!({
                        "linearizable": false,
                        "witness": {
                            "arc": w.arc + 1,
                            "tail": u + 1,
                            "head": v + 1,
                            "arcs": w.arcs.iter().map(|a| a + 1).collect::<Vec<_>>(),
                            "left": w.left.iter().map(exact).collect::<Vec<_>>(),
                            "right": w.right.iter().map(exact).collect::<Vec<_>>(),
                        }
                    })
                }
            };
            Ok(Output::Json(json!({ "instance": summary, "linearization": body })))
        }
        Command::SpanningSet { file } => {
            let inst = read_instance(file)?;
            let Instance::Qspp(q) = &inst else {
                return Err(Error::InvalidArgument("spanning-set needs a qspp instance".into()).into());
            };
            let span = qspplin::spanning_set(&q.graph)?;
            let basis: Vec<Value> = span
                .basis
                .iter()
                .map(|(m, c)| json!({ "q": triplets(m), "c": c.iter().map(exact).collect::<Vec<_>>() }))
                .collect();
            Ok(Output::Json(json!({
                "instance": instance_summary(&inst, &inst.to_bqp()?),
                "dimension": span.dimension(),
                "cost_in_span": span.contains(&q.cost),
                "basis": basis,
            })))
        }
        Command::Bound {
            file,
            method,
            strategy,
            sparsity,
            max_iter,
            rlt_form,
            cap,
        } => {
            let inst = read_instance(file)?;
            let bqp = inst.to_bqp()?;
            let spec = BoundSpec {
                method: *method,
                strategy: (*strategy).into(),
                sparsity: *sparsity,
                max_iter: *max_iter,
                form: match rlt_form {
                    Form::Symmetric => RltForm::Symmetric,
                    Form::Full => RltForm::Full,
                },
                cap: *cap,
            };
            let entry = match cli.mode {
                Mode::Exact => bound_entry::<Rational>(&bqp, &spec, cli.timing)?,
                Mode::Float => bound_entry::<f64>(&bqp, &spec, cli.timing)?,
            };
            Ok(Output::Json(json!({
                "instance": instance_summary(&inst, &bqp),
                "mode": mode_name(cli.mode),
                "bounds": [entry],
            })))
        }
        Command::Opt { file, cap } => {
            let inst = read_instance(file)?;
            let bqp = inst.to_bqp()?;
            let (value, support) = model::brute_force_opt(&bqp, *cap)?;
            Ok(Output::Json(json!({
                "instance": instance_summary(&inst, &bqp),
                "opt": exact(&value),
                "argmin": support.iter().map(|j| j + 1).collect::<Vec<_>>(),
            })))
        }
        Command::VerifyChain { file, cap } => {
            let inst = read_instance(file)?;
            let bqp = inst.to_bqp()?;
            let body = match cli.mode {
                Mode::Exact => chain::<Rational>(&bqp, *cap, cli.timing)?,
                Mode::Float => chain::<f64>(&bqp, *cap, cli.timing)?,
            };
            let mut report = json!({
                "instance": instance_summary(&inst, &bqp),
                "mode": mode_name(cli.mode),
            });
            if let (Value::Object(r), Value::Object(b)) = (&mut report, body) {
                r.extend(b);
            }
            Ok(Output::Json(report))
        }
    }
}

fn triplets(m: &RationalMatrix) -> Vec<Value> {
    let mut out = Vec::new();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if !m[(i, j)].is_zero() {
                out.push(json!([i + 1, j + 1, exact(&m[(i, j)])]));
            }
        }
    }
    out
}

struct BoundSpec {
    method: Method,
    strategy: SkewStrategy,
    sparsity: bool,
    max_iter: usize,
    form: RltForm,
    cap: usize,
}

fn compute<T: Scalar>(inst: &BqpInstance, spec: &BoundSpec) -> Result<BoundReport<T>, CliError> {
    let flag_unused = |name: &str| -> Result<(), CliError> {
        Err(Error::InvalidArgument(format!("--sparsity does not apply to {name}")).into())
    };
    Ok(match spec.method {
        Method::Gl => {
            if spec.sparsity {
                flag_unused("gl")?;
            }
            bounds::gl_bound(inst)?
        }
        Method::Ggl => {
            if spec.sparsity {
                flag_unused("ggl")?;
            }
            bounds::ggl_bound(inst, spec.strategy, spec.max_iter)?
        }
        Method::Lbbp => bounds::lbb_prime(inst, spec.sparsity)?,
        Method::Rlt1 => bounds::rlt1(inst, spec.sparsity, spec.form)?,
        Method::Lbbstar => bounds::lbb_star(inst, spec.sparsity, spec.cap)?,
    })
}

fn entry<T: Scalar>(inst: &BqpInstance, r: &BoundReport<T>, runtime: Option<f64>) -> Result<Value, CliError> {
    if !bounds::verify_certificate(inst, r) {
        return Err(CliError::Check(format!("{} certificate does not verify", r.label)));
    }
    let mut v = json!({
        "method": r.method.name(),
        "label": r.label,
        "value": scalar(&r.value),
        "mode": T::MODE,
        "sparsity": r.sparsity,
        "lp_relaxation_only": r.lp_relaxation_only,
        "lp_solves": r.lp_solves,
        "certificate_digest": digest(format!("{:?}", r.certificate).as_bytes()),
        "certificate_verified": true,
    });
    if !r.trace.is_empty() {
        v["trace"] = Value::Array(r.trace.iter().map(scalar).collect());
    }
    if let Some(ms) = runtime {
        v["runtime_ms"] = json!(ms);
    }
    Ok(v)
}

fn bound_entry<T: Scalar>(inst: &BqpInstance, spec: &BoundSpec, timing: bool) -> Result<Value, CliError> {
    let start = Instant::now();
    let r = compute::<T>(inst, spec)?;
    let ms = start.elapsed().as_secs_f64() * 1e3;
    entry(inst, &r, timing.then_some(ms))
}

fn chain<T: Scalar>(inst: &BqpInstance, cap: usize, timing: bool) -> Result<Value, CliError> {
    let base = BoundSpec {
        method: Method::Gl,
        strategy: SkewStrategy::UpperTriangular,
        sparsity: false,
        max_iter: bounds::GGL_DEFAULT_MAX_ITER,
        form: RltForm::Symmetric,
        cap,
    };
    let mut specs = vec![
        BoundSpec { ..base },
        BoundSpec {
            method: Method::Ggl,
            ..base
        },
        BoundSpec {
            method: Method::Ggl,
            strategy: SkewStrategy::Symmetrize,
            ..base
        },
    ];
    for sparsity in [false, true] {
        for method in [Method::Lbbp, Method::Rlt1, Method::Lbbstar] {
            specs.push(BoundSpec { method, sparsity, ..base });
        }
    }
    let mut reports = Vec::new();
    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for spec in &specs {
        let start = Instant::now();
        match compute::<T>(inst, spec) {
            Ok(r) => {
                let ms = start.elapsed().as_secs_f64() * 1e3;
                entries.push(entry(inst, &r, timing.then_some(ms))?);
                reports.push(r);
            }
            Err(CliError::Lib(Error::EnumerationTooLarge(_))) if spec.method == Method::Lbbstar => {
                skipped.push(Value::String(format!("{:?}: feasible set too large", spec.method)));
            }
            Err(e) => return Err(e),
        }
    }
    let opt = match model::brute_force_opt(inst, cap) {
        Ok((v, _)) => Some(v),
        Err(Error::EnumerationTooLarge(_) | Error::PathExplosion(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let opt_t = opt.as_ref().map(T::from_rational);
    let check = bounds::verify_chain(&reports, opt_t.as_ref())?;
    let verdict = if opt.is_some() { "chain OK" } else { "chain OK (no OPT)" };
    Ok(json!({
        "bounds": entries,
        "skipped": skipped,
        "opt": opt.as_ref().map_or(Value::Null, exact),
        "ordered": check
            .values
            .iter()
            .map(|(l, v)| json!([l, scalar(v)]))
            .collect::<Vec<_>>(),
        "comparisons": check.comparisons,
        "lbb_equals_rlt": check.lbb_rlt_equal,
        "verdict": verdict,
    }))
}
