//! `unimod`: exact symmetry and unimodularity reports as JSON.
//!
//! Exit codes: 0 success, 2 malformed input, 3 size guard, 4 failed
//! precondition, 5 selfcheck violation.

use std::collections::BTreeSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use unimod::cocycles::{cocycle_table, is_unimodular_sym, modular_function_of, quotient_cocycle_of};
use unimod::limits::{i3xn_boundary_count, i3xn_convergence};
use unimod::measures::{
    ergodic_decomposition, invariant_measure, mass_transport_check, parse_kernel, parse_measure, unimodular_measure,
    MeasureAnalysis, RootedMeasure,
};
use unimod::quotient::{fiber_measure_of, sigma_is_bijective, sigma_of, GraphAnalysis};
use unimod::selfcheck::SelfcheckConfig;
use unimod::symbolic::{family_report, FamilyKind, SymbolicFamily};
use unimod::{graph::parse_graph, Error, Rational, DEFAULT_MAX_VERTICES};

#[derive(Parser, Debug)]
#[command(name = "unimod", version, about = "Exact modular cocycles and unimodular measures of rooted graphs")]
struct Cli {
    /// Largest graph accepted by symmetry searches.
    #[arg(long, global = true, env = "UNIMOD_MAX_VERTICES", default_value_t = DEFAULT_MAX_VERTICES)]
    max_vertices: usize,

    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = unimod::random::DEFAULT_SEED)]
    seed: u64,

    /// Render a plain-text listing instead of JSON.
    #[arg(long, global = true)]
    human: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Automorphisms, cocycles, quotients and canonical measures of a graph.
    Analyze { graph: PathBuf },
    /// Verdicts on a measure file.
    Measure {
        measure: PathBuf,
        #[arg(long, value_enum, value_delimiter = ',', default_value = "all")]
        checks: Vec<Check>,
        /// Where `decompose` writes one measure file per component.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Mass transport check for one kernel.
    Mtp {
        measure: PathBuf,
        /// Kernel JSON, or `@path` to read it from a file.
        #[arg(long)]
        kernel: String,
    },
    /// Closed-form report for a symbolic family.
    Family {
        #[arg(long)]
        kind: FamilyKind,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 5)]
        depth: usize,
    },
    /// Total variation distances of ball laws to the limit.
    Limit {
        #[arg(long, default_value = "i3xn")]
        family: String,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        radii: Vec<usize>,
    },
    /// Run the invariant battery.
    Selfcheck {
        #[arg(long, default_value_t = 7)]
        max_n: usize,
        #[arg(long, default_value_t = 200)]
        measures: usize,
        #[arg(long, default_value_t = 50)]
        mixtures: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
enum Check {
    Invariant,
    Unimodular,
    Quasi,
    Rn,
    ThmMain,
    ThmM,
    Decompose,
    All,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn parse(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::SizeGuard { .. } => 3,
            Error::Disconnected
            | Error::NotQuasiInvariant { .. }
            | Error::RadiusMismatch(..)
            | Error::UnknownClass(_) => 4,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

#[derive(Serialize)]
struct Input {
    name: String,
    sha256: String,
}

#[derive(Serialize)]
struct Report {
    command: Value,
    inputs: Vec<Input>,
    results: Value,
    version: &'static str,
}

fn read_input(path: &Path, inputs: &mut Vec<Input>) -> Outcome<String> {
    let bytes = fs::read(path).map_err(|e| Failure::parse(format!("cannot read {}: {e}", path.display())))?;
    inputs.push(Input { name: path.display().to_string(), sha256: hex::encode(Sha256::digest(&bytes)) });
    String::from_utf8(bytes).map_err(|_| Failure::parse(format!("{} is not UTF-8", path.display())))
}

fn to_value(v: impl Serialize) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

/// Per-class weights of a measure on one graph, in quotient order.
fn class_weights(analysis: &GraphAnalysis, mu: &RootedMeasure) -> Value {
    analysis
        .quotient
        .classes
        .iter()
        .enumerate()
        .map(|(i, c)| json!({"class": i, "representative": c.representative, "weight": mu.weight_of(&c.code)}))
        .collect()
}

fn analyze(path: &Path, inputs: &mut Vec<Input>) -> Outcome<Value> {
    let g = parse_graph(&read_input(path, inputs)?)?;
    unimod::check_guard(g.vertex_count())?;
    let a = GraphAnalysis::new(&g)?;
    let sym = &a.symmetry;
    let pairs: Vec<Value> = modular_function_of(&a)
        .into_iter()
        .zip(&a.pairs.classes)
        .map(|(value, c)| {
            json!({
                "code": c.code,
                "representative": c.representative,
                "size": c.size,
                "primary": c.primary,
                "secondary": c.secondary,
                "fiber_weight": c.fiber_weight,
                "involution": c.involution,
                "modular_function": value.value,
            })
        })
        .collect();
    let fibers = (0..a.quotient.len()).map(|xi| fiber_measure_of(&a, xi)).collect::<Result<Vec<_>, _>>()?;
    let sigma_images: BTreeSet<_> = sigma_of(&a.pairs).into_iter().collect();
    Ok(json!({
        "vertex_count": g.vertex_count(),
        "edge_count": g.edge_count(),
        "automorphism_group": sym.group(),
        "rigid": sym.group().is_trivial(),
        "vertex_transitive": sym.group().orbits.len() == 1,
        "cocycle_table": cocycle_table(sym),
        "unimodular_graph": is_unimodular_sym(sym),
        "orbital_quotient": a.quotient,
        "pair_quotient": pairs,
        "fiber_measures": fibers,
        "quotient_cocycle": quotient_cocycle_of(&a).values,
        "sigma_injective": sigma_images.len() == a.pairs.len(),
        "sigma_bijective": sigma_is_bijective(&a),
        "invariant_measure": class_weights(&a, &invariant_measure(&g)?),
        "unimodular_measure": class_weights(&a, &unimodular_measure(&g)?),
    }))
}

fn measure(path: &Path, checks: &[Check], out_dir: Option<&Path>, inputs: &mut Vec<Input>) -> Outcome<Value> {
    let mu = parse_measure(&read_input(path, inputs)?)?;
    let wanted: BTreeSet<Check> = if checks.contains(&Check::All) {
        [Check::Invariant, Check::Unimodular, Check::Quasi, Check::Rn, Check::ThmMain, Check::ThmM, Check::Decompose]
            .into()
    } else {
        checks.iter().copied().collect()
    };
    let a = MeasureAnalysis::new(&mu)?;
    let mut results = serde_json::Map::new();
    results.insert("atoms".into(), json!(mu.len()));
    results.insert("total_mass".into(), to_value(mu.total_mass()));
    for check in wanted {
        let (key, value) = match check {
            Check::Invariant => ("invariant", json!(a.is_invariant())),
            Check::Unimodular => ("unimodular", json!(a.is_unimodular())),
            Check::Quasi => (
                "quasi",
                json!({
                    "quasi_invariant": a.is_quasi_invariant(),
                    "quasi_unimodular": a.is_quasi_unimodular(),
                    "missing_classes": a.missing_classes(),
                }),
            ),
            Check::Rn => ("rn_cocycle", to_value(a.rn_cocycle()?)),
            Check::ThmMain => {
                let rows = a.thm_main_rows()?;
                ("thm_main", json!({"holds": rows.iter().all(|r| r.lhs == r.rhs), "rows": rows}))
            }
            Check::ThmM => ("thm_m", to_value(a.verify_thm_m())),
            Check::Decompose => {
                let parts = ergodic_decomposition(&mu)?;
                if let Some(dir) = out_dir {
                    write_components(dir, &parts.iter().map(|p| &p.measure).collect::<Vec<_>>())?;
                }
                ("decomposition", to_value(parts))
            }
            Check::All => unreachable!("expanded above"),
        };
        results.insert(key.into(), value);
    }
    Ok(Value::Object(results))
}

fn write_components(dir: &Path, parts: &[&RootedMeasure]) -> Outcome<()> {
    let io = |e: std::io::Error| Failure::parse(format!("cannot write to {}: {e}", dir.display()));
    fs::create_dir_all(dir).map_err(io)?;
    for (i, part) in parts.iter().enumerate() {
        let text = serde_json::to_string_pretty(&part.to_file()).expect("measure files serialize");
        fs::write(dir.join(format!("component-{i}.json")), text + "\n").map_err(io)?;
    }
    Ok(())
}

fn mtp(path: &Path, kernel: &str, inputs: &mut Vec<Input>) -> Outcome<Value> {
    let mu = parse_measure(&read_input(path, inputs)?)?;
    let text = match kernel.strip_prefix('@') {
        Some(file) => read_input(Path::new(file), inputs)?,
        None => kernel.to_string(),
    };
    let kernel = parse_kernel(&text).map_err(|e| Failure::parse(format!("malformed kernel: {e}")))?;
    let t = mass_transport_check(&mu, &kernel)?;
    Ok(json!({"kernel": kernel, "lhs": t.lhs, "rhs": t.rhs, "equal": t.equal}))
}

fn limit(family: &str, ns: &[usize], radii: &[usize]) -> Outcome<Value> {
    if family != "i3xn" {
        return Err(Failure::parse(format!("unknown family {family:?}; only i3xn is available")));
    }
    let report = i3xn_convergence(ns, radii)?;
    let rows = report
        .rows
        .iter()
        .map(|row| {
            let bound = Rational::new(i3xn_boundary_count(row.index, row.radius)? as i64, row.vertex_count as i64);
            Ok(json!({"n": row.index, "radius": row.radius, "vertex_count": row.vertex_count, "tv": row.tv, "boundary_bound": bound}))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(json!({"family": family, "rows": rows}))
}

fn run(cli: &Cli) -> Outcome<(Report, bool)> {
    unimod::set_max_vertices(cli.max_vertices);
    let mut inputs = Vec::new();
    let mut clean = true;
    let (command, results) = match &cli.command {
        Command::Analyze { graph } => (json!({"name": "analyze"}), analyze(graph, &mut inputs)?),
        Command::Measure { measure: path, checks, out_dir } => {
            let mut names: Vec<String> = checks.iter().map(|c| format!("{c:?}").to_lowercase()).collect();
            names.sort();
            names.dedup();
            (json!({"name": "measure", "checks": names}), measure(path, checks, out_dir.as_deref(), &mut inputs)?)
        }
        Command::Mtp { measure: path, kernel } => (json!({"name": "mtp"}), mtp(path, kernel, &mut inputs)?),
        Command::Family { kind, d, depth } => {
            let family = SymbolicFamily::new(*kind, *d)?;
            (json!({"name": "family", "kind": kind, "d": d, "depth": depth}), to_value(family_report(&family, *depth)?))
        }
        Command::Limit { family, n, radii } => {
            (json!({"name": "limit", "family": family, "n": n, "radii": radii}), limit(family, n, radii)?)
        }
        Command::Selfcheck { max_n, measures, mixtures } => {
            let config = SelfcheckConfig {
                max_vertices: *max_n,
                seed: cli.seed,
                random_measures: *measures,
                mixtures: *mixtures,
                ..SelfcheckConfig::default()
            };
            if !(1..=8).contains(max_n) {
                return Err(Failure::parse("--max-n must be between 1 and 8"));
            }
            let report = unimod::selfcheck::run(&config)?;
            clean = report.ok();
            (json!({"name": "selfcheck", "config": config}), to_value(report))
        }
    };
    Ok((Report { command, inputs, results, version: env!("CARGO_PKG_VERSION") }, clean))
}

fn render_human(prefix: &str, value: &Value, out: &mut String) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                render_human(&key, v, out);
            }
        }
        Value::Array(items) if items.iter().all(|v| !v.is_object() && !v.is_array()) => {
            let cells: Vec<String> = items.iter().map(scalar).collect();
            out.push_str(&format!("{prefix}: [{}]\n", cells.join(", ")));
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                render_human(&format!("{prefix}[{i}]"), v, out);
            }
        }
        other => out.push_str(&format!("{prefix}: {}\n", scalar(other))),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((report, clean)) => {
            let out = if cli.human {
                let mut out = String::new();
                render_human("", &to_value(&report), &mut out);
                out
            } else {
                serde_json::to_string_pretty(&report).expect("reports serialize") + "\n"
            };
            let _ = std::io::stdout().lock().write_all(out.as_bytes());
            if clean {
                ExitCode::SUCCESS
            } else {
                eprintln!("selfcheck found invariant violations");
                ExitCode::from(5)
            }
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
