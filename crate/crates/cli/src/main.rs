//! `lgpac`: validate, simulate and take limits of `.lgpac` networks.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lgpac::constructions::{catalog, oracle};
use lgpac::dsl::{parse, print, DocumentError, DslDocument};
use lgpac::limits::{document_limits, LimitError, TapLimit};
use lgpac::simulator::{simulate, SimError, SolverConfig, Value};

#[derive(Parser)]
#[command(name = "lgpac", version, about = "Analog networks with limit modules")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, validate and compile a network file.
    Validate { file: PathBuf },
    /// Simulate every channel and write long-format CSV.
    Simulate {
        file: PathBuf,
        /// Horizon; defaults to the file's `simulate` directive.
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        /// Defaults to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate every limit module at precision tau.
    Limit {
        file: PathBuf,
        /// Defaults to the file's `precision` directive.
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Exit with status 3 unless every limit is certified.
        #[arg(long)]
        strict: bool,
    },
    /// Maximum absolute error against a reference.
    Oracle {
        file: PathBuf,
        #[arg(long, value_enum)]
        against: Reference,
        /// Precision for gamma and zeta; defaults to the file's directive.
        #[arg(long)]
        tau: Option<f64>,
    },
    /// Write every catalog construction as a `.lgpac` file.
    ExportExamples { dir: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Reference {
    Gamma,
    Zeta,
    ClosedForm,
}

/// Exit status and message.
struct Failure {
    code: u8,
    message: String,
}

const DIAGNOSTICS: u8 = 1;
const RUNTIME: u8 = 2;
const NOT_CERTIFIED: u8 = 3;

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidTimeGrid(_) | SimError::InvalidConfig(_) => fail(DIAGNOSTICS, e.to_string()),
            _ => fail(RUNTIME, e.to_string()),
        }
    }
}

impl From<DocumentError> for Failure {
    fn from(e: DocumentError) -> Self {
        fail(DIAGNOSTICS, e.to_string())
    }
}

impl From<LimitError> for Failure {
    fn from(e: LimitError) -> Self {
        match e {
            LimitError::Simulation(s) => s.into(),
            LimitError::NonFinite(_) => fail(RUNTIME, e.to_string()),
            _ => fail(DIAGNOSTICS, e.to_string()),
        }
    }
}

fn load(path: &Path) -> Result<DslDocument, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| fail(DIAGNOSTICS, format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|diags| {
        let rendered: Vec<String> = diags.iter().map(|d| format!("{}:{}", path.display(), d.render(&text))).collect();
        fail(DIAGNOSTICS, rendered.join("\n"))
    })
}

fn solver() -> Result<SolverConfig, Failure> {
    Ok(SolverConfig::from_env()?)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| fail(RUNTIME, format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn precision(tau: Option<f64>, doc: &DslDocument) -> Result<f64, Failure> {
    tau.or(doc.precision)
        .ok_or_else(|| fail(DIAGNOSTICS, "no --tau given and the file has no precision directive"))
}

fn validate(file: &Path) -> Result<(), Failure> {
    let doc = load(file)?;
    let bound = doc.bound()?;
    let sys = bound.system();
    println!(
        "{}: ok ({} modules, {} state variables, {} limit modules)",
        file.display(),
        doc.network.modules.len(),
        sys.state_count(),
        sys.limit_taps().len()
    );
    Ok(())
}

fn simulate_cmd(file: &Path, t_end: Option<f64>, samples: Option<usize>, out: Option<&Path>) -> Result<(), Failure> {
    let doc = load(file)?;
    let bound = doc.bound()?;
    let tg = doc.time_grid(t_end, samples)?;
    let traces = simulate(&bound, &tg, &solver()?)?;
    emit(out, &traces.to_csv())
}

fn limit_rows(limits: &[TapLimit]) -> String {
    let mut csv = String::from("limit,x,value\n");
    for l in limits {
        match &l.limit.value {
            Value::Real(v) => writeln!(csv, "{},,{v}", l.name).unwrap(),
            Value::Grid(g) => {
                for (x, v) in g.grid().points().iter().zip(g.values()) {
                    writeln!(csv, "{},{x},{v}", l.name).unwrap();
                }
            }
        }
    }
    csv
}

fn limit_cmd(file: &Path, tau: Option<f64>, out: Option<&Path>, strict: bool) -> Result<(), Failure> {
    let doc = load(file)?;
    let tau = precision(tau, &doc)?;
    let limits = document_limits(&doc, tau, &solver()?)?;
    if limits.is_empty() {
        return Err(fail(DIAGNOSTICS, format!("{}: no limit modules", file.display())));
    }
    for l in &limits {
        let c = &l.limit;
        println!(
            "limit {} of {} at tau {tau}: {} (gap {:e} vs bound {:e}, probes t = {} and {})",
            l.name,
            l.source,
            if c.certified { "certified" } else { "NOT certified" },
            c.empirical_gap,
            c.bound,
            c.probes.0,
            c.probes.1
        );
        match &c.value {
            Value::Real(v) => println!("  value {v}"),
            Value::Grid(g) => {
                println!("  {:>8}  {:>22}", "x", "value");
                for (x, v) in g.grid().points().iter().zip(g.values()) {
                    println!("  {x:>8}  {v:>22.15}");
                }
            }
        }
    }
    if let Some(p) = out {
        emit(Some(p), &limit_rows(&limits))?;
    }
    if strict && limits.iter().any(|l| !l.limit.certified) {
        return Err(fail(NOT_CERTIFIED, "at least one limit is not certified"));
    }
    Ok(())
}

fn oracle_cmd(file: &Path, against: Reference, tau: Option<f64>) -> Result<(), Failure> {
    let doc = load(file)?;
    let reference: fn(f64) -> f64 = match against {
        Reference::ClosedForm => {
            if doc.expects.is_empty() {
                return Err(fail(DIAGNOSTICS, format!("{}: no expect lines to compare with", file.display())));
            }
            let traces = simulate(&doc.bound()?, &doc.time_grid(None, None)?, &solver()?)?;
            let errors = doc.expect_errors(&traces).map_err(|e| fail(DIAGNOSTICS, e.to_string()))?;
            let mut worst = 0.0f64;
            for (channel, err) in &errors {
                println!("{channel}: max abs error {err:e}");
                worst = worst.max(*err);
            }
            println!("max abs error {worst:e}");
            return Ok(());
        }
        Reference::Gamma => oracle::gamma,
        Reference::Zeta => oracle::zeta,
    };
    let tau = precision(tau, &doc)?;
    let limits = document_limits(&doc, tau, &solver()?)?;
    let Some(g) = limits.iter().find_map(|l| l.limit.value.as_grid()) else {
        return Err(fail(DIAGNOSTICS, format!("{}: no function-valued limit module", file.display())));
    };
    let worst = g
        .grid()
        .points()
        .iter()
        .zip(g.values())
        .map(|(x, v)| (v - reference(*x)).abs())
        .fold(0.0, f64::max);
    println!("max abs error {worst:e}");
    Ok(())
}

fn export_examples(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| fail(RUNTIME, format!("{}: {e}", dir.display())))?;
    for c in catalog() {
        let path = dir.join(format!("{}.lgpac", c.name));
        std::fs::write(&path, print(&c.document)).map_err(|e| fail(RUNTIME, format!("{}: {e}", path.display())))?;
        println!("{}", path.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { file } => validate(&file),
        Command::Simulate { file, t_end, samples, out } => simulate_cmd(&file, t_end, samples, out.as_deref()),
        Command::Limit { file, tau, out, strict } => limit_cmd(&file, tau, out.as_deref(), strict),
        Command::Oracle { file, against, tau } => oracle_cmd(&file, against, tau),
        Command::ExportExamples { dir } => export_examples(&dir),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}
