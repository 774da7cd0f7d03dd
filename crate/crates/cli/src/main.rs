use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use armgap::experiments::{oracle_exact, read_store, report, run_experiment, ExperimentConfig, ResultsStore, NAMES};
use armgap::lattice::{Coord, Lattice};
use armgap::perco::ArmSpec;
use armgap::verify::{run_verify, Mutant, Suite, VerifyConfig};
use armgap::Error;
use clap::{Args, Parser, Subcommand};
use num_traits::ToPrimitive;
use serde_json::{Map, Value};

#[derive(Parser, Debug)]
#[command(name = "armgap", version, about = "Exact cube identities and arm-event Monte Carlo for hexagonal percolation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the exact identity suites.
    Verify(VerifyArgs),
    /// Run a named Monte Carlo experiment.
    Experiment(ExperimentArgs),
    /// Regroup and refit the records of a results store.
    Report(ReportArgs),
    /// Exact probability of a small arm event by enumeration.
    Oracle(OracleArgs),
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// cube, reimer, noise, or all.
    suite: Option<String>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Multiplier on every instance count.
    #[arg(long)]
    scale: Option<f64>,
    /// JSON file with any of suite, n_max, seed, scale.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, hide = true)]
    inject_mutant: Option<String>,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    name: String,
    /// JSON experiment configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    lattice_n: Option<i64>,
    /// Hexagon pitch as a rational, e.g. 1 or 1/2.
    #[arg(long)]
    pitch: Option<String>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    budget_seconds: Option<f64>,
    /// Output directory for the JSONL store, CSV tables, and summary.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    store: PathBuf,
    /// Directory for the report CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    /// Arm event as JSON, e.g. '{"kind":"one_arm","colour":"black","n":1}'.
    spec: String,
    #[arg(long, default_value_t = 2)]
    lattice_n: i64,
    #[arg(long, default_value = "1")]
    pitch: String,
}

/// Exit status with a message for stderr.
struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BudgetExceeded { .. } | Error::Precondition(_) | Error::SingularIntegrand(_) => 1,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

fn read_json_object(path: &Path) -> Result<Map<String, Value>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(usage(format!("{} must hold a JSON object", path.display()))),
        Err(e) => Err(usage(format!("{}: {e}", path.display()))),
    }
}

fn set<T: Into<Value>>(m: &mut Map<String, Value>, key: &str, v: Option<T>) {
    if let Some(v) = v {
        m.insert(key.to_string(), v.into());
    }
}

fn cmd_verify(a: VerifyArgs) -> Result<u8, Failure> {
    let mut m = match &a.config {
        Some(p) => read_json_object(p)?,
        None => Map::new(),
    };
    set(&mut m, "suite", a.suite);
    set(&mut m, "n_max", a.n_max);
    set(&mut m, "seed", a.seed);
    set(&mut m, "scale", a.scale);
    let mut cfg = VerifyConfig::default();
    let mut suite = Suite::All;
    for (k, v) in &m {
        let bad = || usage(format!("bad value for {k}: {v}"));
        match k.as_str() {
            "suite" => suite = v.as_str().ok_or_else(bad)?.parse()?,
            "n_max" => cfg.n_max = Some(v.as_u64().ok_or_else(bad)? as usize),
            "seed" => cfg.seed = v.as_u64().ok_or_else(bad)?,
            "scale" => cfg.scale = v.as_f64().ok_or_else(bad)?,
            _ => return Err(usage(format!("unknown verify setting {k}"))),
        }
    }
    if let Some(m) = &a.inject_mutant {
        cfg.mutant = Some(m.parse::<Mutant>()?);
    }
    let outcomes = run_verify(suite, &cfg)?;
    for o in &outcomes {
        println!("{}", o.line());
    }
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed()).map(|o| o.name.as_str()).collect();
    if failed.is_empty() {
        println!("all {} checks pass", outcomes.len());
        Ok(0)
    } else {
        println!("failed: {}", failed.join(", "));
        Ok(1)
    }
}

fn cmd_experiment(a: ExperimentArgs) -> Result<u8, Failure> {
    if !NAMES.contains(&a.name.as_str()) {
        return Err(usage(format!("unknown experiment {}; valid names: {}", a.name, NAMES.join(", "))));
    }
    let mut m = match &a.config {
        Some(p) => read_json_object(p)?,
        None => Map::new(),
    };
    let file_out = match m.remove("out") {
        Some(Value::String(s)) => Some(PathBuf::from(s)),
        Some(v) => return Err(usage(format!("bad value for out: {v}"))),
        None => None,
    };
    set(&mut m, "seed", a.seed);
    set(&mut m, "replicas", a.replicas);
    set(&mut m, "lattice_n", a.lattice_n);
    set(&mut m, "pitch", a.pitch);
    set(&mut m, "samples", a.samples);
    set(&mut m, "budget_seconds", a.budget_seconds);
    let cfg = ExperimentConfig::from_json(&Value::Object(m).to_string())?;
    let out = a.out.or(file_out).unwrap_or_else(|| PathBuf::from("armgap-out"));
    fs::create_dir_all(&out).map_err(|e| usage(format!("cannot create {}: {e}", out.display())))?;
    let store = ResultsStore::new(out.join("results.jsonl"));
    let result = run_experiment(&a.name, &cfg, Some(&store))?;
    result.write_csv(&out)?;
    let summary = result.summary();
    fs::write(out.join(format!("{}_summary.txt", a.name)), &summary).map_err(Error::from)?;
    print!("{summary}");
    println!("records appended to {}", store.path().display());
    Ok(0)
}

fn cmd_report(a: ReportArgs) -> Result<u8, Failure> {
    let lines = read_store(&a.store).map_err(|e| usage(format!("cannot read store {}: {e}", a.store.display())))?;
    let r = report(&lines)?;
    print!("{}", r.render());
    if let Some(dir) = &a.out {
        fs::create_dir_all(dir).map_err(Error::from)?;
        r.table().write_csv(&dir.join("report.csv"))?;
    }
    Ok(0)
}

fn cmd_oracle(a: OracleArgs) -> Result<u8, Failure> {
    let spec: ArmSpec = serde_json::from_str(&a.spec).map_err(|e| usage(format!("bad spec: {e}")))?;
    let pitch: Coord = a.pitch.trim().parse().map_err(|_| usage(format!("bad pitch {}", a.pitch)))?;
    let lat = Lattice::new(a.lattice_n, pitch)?;
    let p = oracle_exact(&spec, &lat)?;
    println!("{p} ≈ {}", p.to_f64().unwrap_or(f64::NAN));
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(a) => cmd_verify(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Report(a) => cmd_report(a),
        Command::Oracle(a) => cmd_oracle(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
