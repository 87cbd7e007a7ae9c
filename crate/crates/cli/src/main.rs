use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use algent::{exit, load_job, run, RunError, VerifySource};
use algent_core::documents::{validate, BaseSpec, Command};
use algent_core::laws::FixtureBundle;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

/// Exact algebraic entropy of endomorphisms of locally finite groups.
#[derive(Parser, Debug)]
#[command(name = "algent", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Entropy of an endomorphism over a family of finite subgroups, from trajectory growth
    Entropy(JobArgs),
    /// Entropy by the limit-free formula
    LimitFree(JobArgs),
    /// Classify a group: abelian, Hamiltonian, quasihamiltonian, FC
    Structure(JobArgs),
    /// Dedekind-Baer decomposition, and primary parts of an element
    Decompose(JobArgs),
    /// Run the law harness over a fixture bundle
    Verify(VerifyArgs),
    /// Check a job, group or endomorphism document without running it
    Validate(ValidateArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Report format
    #[arg(long, value_enum, default_value = "text")]
    format: Format,

    /// Write the report to this file instead of standard output
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct JobArgs {
    /// Job document; the flags below override its fields
    #[arg(long, value_name = "FILE")]
    job: Option<PathBuf>,

    /// Group descriptor document
    #[arg(long, value_name = "FILE")]
    group: Option<PathBuf>,

    /// Endomorphism descriptor document
    #[arg(long, value_name = "FILE")]
    endo: Option<PathBuf>,

    /// Base family: blocks:K, all-cyclic, whole, or a JSON list of generator lists
    #[arg(long, value_name = "SPEC")]
    bases: Option<BaseSpec>,

    /// Longest trajectory computed [default: 32]
    #[arg(long, value_name = "N")]
    n_max: Option<usize>,

    /// Constant steps required for a window-stable estimate [default: 3]
    #[arg(long, value_name = "W")]
    window: Option<usize>,

    /// Largest set materialised [default: 1048576]
    #[arg(long, value_name = "N")]
    size_budget: Option<usize>,

    /// Deepest level of the limit-free chain [default: 32]
    #[arg(long, value_name = "N")]
    level_max: Option<usize>,

    /// Seed for sampled checks [default: 0]
    #[arg(long, value_name = "N")]
    seed: Option<u64>,

    /// Entropy strategy (trajectory, limit-free)
    #[arg(long, value_name = "NAME")]
    strategy: Option<String>,

    /// Element to split into primary parts, as JSON (decompose)
    #[arg(long, value_name = "JSON")]
    element: Option<String>,

    /// Exit with status 3 when any estimate ran out of budget
    #[arg(long)]
    strict: bool,

    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Fixture bundle to run instead of the bundled one
    #[arg(long, value_name = "FILE")]
    bundle: Option<PathBuf>,

    /// Restrict to one law id; repeatable
    #[arg(long = "law", value_name = "ID")]
    laws: Vec<String>,

    #[command(flatten)]
    job: JobArgs,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Document to check
    document: PathBuf,

    #[command(flatten)]
    output: OutputArgs,
}

fn read_json(path: &Path) -> Result<Value, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{} is not valid JSON: {e}", path.display()))
}

fn job_document(command: Command, args: &JobArgs) -> Result<Value, String> {
    let mut doc = match &args.job {
        Some(path) => match read_json(path)? {
            Value::Object(m) => m,
            _ => return Err(format!("{}: a job document must be a JSON object", path.display())),
        },
        None => Map::new(),
    };
    doc.insert("command".into(), json!(command));
    if let Some(p) = &args.group {
        doc.insert("group".into(), read_json(p)?);
    }
    if let Some(p) = &args.endo {
        doc.insert("endomorphism".into(), read_json(p)?);
    }
    if let Some(b) = &args.bases {
        doc.insert("bases".into(), json!(b));
    }
    if let Some(s) = &args.strategy {
        doc.insert("strategy".into(), json!(s));
    }
    if let Some(e) = &args.element {
        let v = serde_json::from_str(e).unwrap_or_else(|_| Value::String(e.clone()));
        doc.insert("element".into(), v);
    }
    let config = doc.entry("config").or_insert_with(|| json!({}));
    if let Value::Object(c) = config {
        let overrides = [
            ("n_max", args.n_max.map(|x| x as u64)),
            ("window", args.window.map(|x| x as u64)),
            ("size_budget", args.size_budget.map(|x| x as u64)),
            ("level_max", args.level_max.map(|x| x as u64)),
            ("seed", args.seed),
        ];
        for (k, v) in overrides {
            if let Some(v) = v {
                c.insert(k.into(), json!(v));
            }
        }
    }
    Ok(Value::Object(doc))
}

fn emit(output: &OutputArgs, body: &str) -> Result<(), String> {
    match &output.out {
        Some(path) => fs::write(path, body).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => std::io::stdout().write_all(body.as_bytes()).map_err(|e| e.to_string()),
    }
}

fn execute(command: Command, args: &JobArgs, verify: &VerifySource) -> Result<u8, String> {
    let started = Instant::now();
    let doc = job_document(command, args)?;
    let job = load_job(&doc).map_err(|e| e.to_string())?;
    let report = match run(&job, verify) {
        Ok(r) => r,
        Err(e @ RunError::Invalid(_)) => return Err(e.to_string()),
        Err(RunError::Failed(e)) => return Err(e.to_string()),
    };
    let body = match args.output.format {
        Format::Json => report.render_json(Some(started.elapsed())),
        Format::Text => report.render_text(),
    };
    emit(&args.output, &body)?;
    Ok(report.exit_code(args.strict))
}

fn verify_source(args: &VerifyArgs) -> Result<VerifySource, String> {
    let mut source = VerifySource::default();
    if let Some(path) = &args.bundle {
        let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        source.bundle = FixtureBundle::from_json(&text).map_err(|e| e.to_string())?;
        source.name = path.display().to_string();
    }
    source.laws = args.laws.clone();
    Ok(source)
}

fn validate_document(args: &ValidateArgs) -> Result<u8, String> {
    let doc = read_json(&args.document)?;
    let violations = validate(&doc);
    let body = match args.output.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&json!({ "violations": violations })).map_err(|e| e.to_string())?;
            s.push('\n');
            s
        }
        Format::Text if violations.is_empty() => "valid\n".to_string(),
        Format::Text => violations.iter().map(|v| format!("{v}\n")).collect(),
    };
    emit(&args.output, &body)?;
    Ok(if violations.is_empty() { exit::OK } else { exit::INPUT })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Cmd::Entropy(a) => execute(Command::Entropy, a, &VerifySource::default()),
        Cmd::LimitFree(a) => execute(Command::LimitFree, a, &VerifySource::default()),
        Cmd::Structure(a) => execute(Command::Structure, a, &VerifySource::default()),
        Cmd::Decompose(a) => execute(Command::Decompose, a, &VerifySource::default()),
        Cmd::Verify(a) => verify_source(a).and_then(|s| execute(Command::Verify, &a.job, &s)),
        Cmd::Validate(a) => validate_document(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(exit::INPUT)
        }
    }
}
