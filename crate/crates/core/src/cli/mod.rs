//! Command-line front end.

mod table1;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

pub use table1::{render_table, table1_row, Table1Row};

use crate::audit::{check_anonymous, check_gsp, check_truthful, AuditConfig, AuditVerdict};
use crate::error::{Error, Result};
use crate::mechanisms::{eig_detailed, MechanismId, MechanismSpec};
use crate::model::{social_cost, Instance, Objective, ProblemClass};
use crate::number::Rational;
use crate::ratios::{self, Distribution, FamilyParam, RatioValue};
use crate::solvers::{brute_force_optimal, optimal, DEFAULT_BRUTE_FORCE_CAP};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_ORACLE: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "capflp", version, about = "Truthful mechanisms for capacitated facility location on a line")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AuditMode {
    Truthful,
    Gsp,
    Anonymous,
}

#[derive(Debug, Args)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
struct ClassArgs {
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    c1: Option<usize>,
    #[arg(long)]
    c2: Option<usize>,
    /// Number of agents, for the two-facility class.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimal placement for an instance file.
    Solve {
        instance: PathBuf,
        #[arg(long, default_value = "sc")]
        objective: Objective,
        /// Cross-check against exhaustive search (n <= 8).
        #[arg(long)]
        oracle: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Run one mechanism on an instance file.
    Mech {
        mechanism: MechanismId,
        instance: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Audit a mechanism for manipulations.
    Audit {
        #[arg(value_enum)]
        mode: AuditMode,
        #[arg(long = "mech")]
        mechanism: MechanismId,
        /// Instance file. Without it, random instances are drawn.
        instance: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        coalition: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Shuffles per instance for the anonymity audit.
        #[arg(long, default_value_t = 10)]
        permutations: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "uniform")]
        dist: Distribution,
        #[arg(long)]
        budget: Option<u64>,
        #[command(flatten)]
        class: ClassArgs,
        #[command(flatten)]
        out: Output,
    },
    /// Worst empirical ratio over random instances.
    RatioSweep {
        #[arg(long = "mech")]
        mechanism: MechanismId,
        #[arg(long, default_value = "sc")]
        objective: Objective,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "uniform")]
        dist: Distribution,
        /// Directory for the worst instance of each sweep.
        #[arg(long)]
        witness_dir: Option<PathBuf>,
        #[command(flatten)]
        class: ClassArgs,
        #[command(flatten)]
        out: Output,
    },
    /// Worst-case instance for a bound and the ratio it attains.
    Tight {
        #[arg(long = "mech")]
        mechanism: MechanismId,
        #[arg(long, default_value = "sc")]
        objective: Objective,
        #[arg(long)]
        epsilon: Option<Rational>,
        /// Second family of the two-facility social cost bound.
        #[arg(long)]
        second: bool,
        #[command(flatten)]
        class: ClassArgs,
        #[command(flatten)]
        out: Output,
    },
    /// Lower and upper bounds for a class.
    Table1 {
        #[command(flatten)]
        class: ClassArgs,
        #[command(flatten)]
        out: Output,
    },
}

/// A finished command: exit code and report text.
struct Outcome {
    code: i32,
    report: String,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn read_instance(path: &Path) -> Result<(Instance, String)> {
    let bytes = std::fs::read(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone()).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    Ok((Instance::from_json(&text)?, sha256_hex(&bytes)))
}

/// Default class for a mechanism when none is given on the command line.
fn default_class(id: &MechanismId) -> (ProblemClass, usize) {
    match id {
        MechanismId::Pmm | MechanismId::Pipm => (ProblemClass::EquiCapNoSpare { m: 3, k: 2 }, 6),
        MechanismId::Ic => (ProblemClass::TwoAbundant { c1: 3, c2: 2 }, 5),
        MechanismId::Im => (ProblemClass::TwoAbundant { c1: 3, c2: 3 }, 6),
        _ => (ProblemClass::TwoAbundant { c1: 3, c2: 3 }, 5),
    }
}

impl ClassArgs {
    fn resolve(&self, fallback: Option<&MechanismId>) -> Result<(ProblemClass, usize)> {
        match (self.m, self.k, self.c1, self.c2) {
            (Some(m), Some(k), None, None) => {
                let class = ProblemClass::equicap(m, k)?;
                Ok((class, self.n.unwrap_or(m * k)))
            }
            (None, None, Some(c1), Some(c2)) => {
                let class = ProblemClass::two(c1, c2)?;
                let n = self.n.ok_or_else(|| Error::InvalidClass("--n is required with --c1/--c2".into()))?;
                Ok((class, n))
            }
            (None, None, None, None) => match fallback {
                Some(id) => {
                    let (class, n) = default_class(id);
                    Ok((class, self.n.unwrap_or(n)))
                }
                None => Err(Error::InvalidClass("give either --m and --k, or --c1, --c2 and --n".into())),
            },
            _ => Err(Error::InvalidClass("give either --m and --k, or --c1, --c2 and --n".into())),
        }
    }
}

fn render(format: Format, json: &serde_json::Value) -> String {
    match format {
        Format::Json => to_json(json),
        Format::Table | Format::Csv => {
            let mut out = String::new();
            if let Some(obj) = json.as_object() {
                for (key, value) in obj {
                    let shown = match value {
                        serde_json::Value::String(s) => s.clone(),
                        other => other.to_string(),
                    };
                    let _ = writeln!(out, "{key}: {shown}");
                }
            }
            out
        }
    }
}

fn cmd_solve(path: &Path, objective: Objective, oracle: bool, format: Format) -> Result<Outcome> {
    let (instance, hash) = read_instance(path)?;
    let profile = instance.normalized()?.profile;
    let result = optimal(&profile, &instance.class, objective)?;
    let costs = social_cost(&profile, &result.placement)?;
    let mut report = json!({
        "command": "solve",
        "input_hash": hash,
        "class": instance.class,
        "objective": objective,
        "positions": profile.positions(),
        "placement": result.placement,
        "per_agent": costs.per_agent,
        "cost": result.cost,
    });
    let mut code = EXIT_OK;
    if oracle {
        if profile.n() > DEFAULT_BRUTE_FORCE_CAP {
            return Err(Error::InstanceTooLarge { n: profile.n(), cap: DEFAULT_BRUTE_FORCE_CAP });
        }
        let brute = brute_force_optimal(&profile, &instance.class.capacities(), objective)?;
        let agrees = brute.cost == result.cost;
        if !agrees {
            code = EXIT_ORACLE;
        }
        report["oracle"] = json!({ "cost": brute.cost, "agrees": agrees });
    }
    Ok(Outcome { code, report: render(format, &report) })
}

fn ratio_json(mech: Rational, opt: Rational) -> serde_json::Value {
    json!(RatioValue::of(mech, opt).to_string())
}

fn cmd_mech(id: MechanismId, path: &Path, format: Format) -> Result<Outcome> {
    let (instance, hash) = read_instance(path)?;
    let profile = instance.normalized()?.profile;
    let spec = MechanismSpec::new(id, instance.class)?;
    let placement = spec.run(&profile)?;
    let costs = social_cost(&profile, &placement)?;
    let mut report = json!({
        "command": "mech",
        "mechanism": spec.id,
        "input_hash": hash,
        "class": instance.class,
        "positions": profile.positions(),
        "placement": placement,
        "per_agent": costs.per_agent,
        "sc": costs.sc,
        "mc": costs.mc,
    });
    if !matches!(spec.id, MechanismId::Percentile(_)) {
        let opt_sc = optimal(&profile, &instance.class, Objective::Sc)?.cost;
        let opt_mc = optimal(&profile, &instance.class, Objective::Mc)?.cost;
        report["optimal_sc"] = json!(opt_sc);
        report["optimal_mc"] = json!(opt_mc);
        report["ratio_sc"] = ratio_json(costs.sc, opt_sc);
        report["ratio_mc"] = ratio_json(costs.mc, opt_mc);
    }
    if let (MechanismId::Eig, ProblemClass::TwoAbundant { c1, c2 }) = (&spec.id, instance.class) {
        report["capacity_overflow"] = json!(eig_detailed(&profile, c1, c2)?.overflow);
    }
    Ok(Outcome { code: EXIT_OK, report: render(format, &report) })
}

#[allow(clippy::too_many_arguments)]
fn cmd_audit(
    mode: AuditMode,
    id: MechanismId,
    instance: Option<&Path>,
    cfg: AuditConfig,
    trials: usize,
    permutations: usize,
    seed: u64,
    dist: Distribution,
    class: &ClassArgs,
    format: Format,
) -> Result<Outcome> {
    let (profiles, class, hash) = match instance {
        Some(path) => {
            let (instance, hash) = read_instance(path)?;
            (vec![instance.positions.clone()], instance.class, hash)
        }
        None => {
            let (class, n) = class.resolve(Some(&id))?;
            let sampled = ratios::sample_instances(dist, n, trials.max(1), seed)?;
            let inputs = json!({ "mechanism": id, "class": class, "n": n, "dist": dist.to_string(), "trials": trials, "seed": seed });
            let hash = sha256_hex(inputs.to_string().as_bytes());
            (sampled.into_iter().map(|p| p.positions().to_vec()).collect(), class, hash)
        }
    };
    let spec = MechanismSpec::new(id, class)?;
    let mut audited = 0usize;
    let mut evaluations = 0u64;
    let mut last: Option<AuditVerdict> = None;
    for (i, profile) in profiles.iter().enumerate() {
        spec.check_n(profile.len())?;
        let verdict = match mode {
            AuditMode::Truthful => check_truthful(&spec, profile, &cfg)?,
            AuditMode::Gsp => check_gsp(&spec, profile, &cfg)?,
            AuditMode::Anonymous => check_anonymous(&spec, profile, permutations, seed.wrapping_add(i as u64))?,
        };
        audited += 1;
        evaluations += verdict.evaluations;
        let failed = !verdict.passed;
        last = Some(verdict);
        if failed {
            break;
        }
    }
    let verdict = last.expect("at least one profile");
    let report = json!({
        "command": "audit",
        "input_hash": hash,
        "class": class,
        "instances_audited": audited,
        "evaluations_total": evaluations,
        "passed": verdict.passed,
        "witness": verdict.witness,
        "verdict": verdict,
    });
    let code = if verdict.passed { EXIT_OK } else { EXIT_VIOLATION };
    Ok(Outcome { code, report: render(format, &report) })
}

#[allow(clippy::too_many_arguments)]
fn cmd_ratio_sweep(
    id: MechanismId,
    objective: Objective,
    count: usize,
    seed: u64,
    dist: Distribution,
    witness_dir: Option<&Path>,
    class: &ClassArgs,
    format: Format,
) -> Result<Outcome> {
    let (class, n) = class.resolve(Some(&id))?;
    let spec = MechanismSpec::new(id, class)?;
    let (mut row, summary, bound) = ratios::sweep(&spec, objective, dist, n, count, seed)?;
    if let Some(dir) = witness_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::Parse(format!("{}: {e}", dir.display())))?;
        let name = format!("{}-{}-n{}-seed{}.json", spec.id, objective, n, seed).replace([':', ','], "_");
        let file = dir.join(name);
        let instance = Instance { positions: summary.max.instance.positions().to_vec(), class };
        std::fs::write(&file, to_json(&instance)).map_err(|e| Error::Parse(format!("{}: {e}", file.display())))?;
        row.witness_file = file.display().to_string();
    }
    let exceeded = row.exceeds_bound(&bound);
    let report = match format {
        Format::Csv => {
            let mut writer = csv::Writer::from_writer(Vec::new());
            writer.write_record([
                "mechanism", "objective", "n", "params", "seed", "instances", "max_ratio", "max_ratio_decimal", "bound",
                "at_bound", "witness_file",
            ])
            .and_then(|_| {
                let decimal = row.max_ratio.finite().map_or("inf".to_string(), |v| format!("{:.6}", v.to_f64()));
                writer.write_record([
                    row.mechanism.clone(),
                    row.objective.to_string(),
                    row.n.to_string(),
                    row.params.clone(),
                    row.seed.to_string(),
                    row.instances.to_string(),
                    row.max_ratio.to_string(),
                    decimal,
                    row.bound.clone(),
                    row.at_bound.to_string(),
                    row.witness_file.clone(),
                ])
            })
            .map_err(|e| Error::Parse(e.to_string()))?;
            String::from_utf8(writer.into_inner().map_err(|e| Error::Parse(e.to_string()))?).expect("csv is utf-8")
        }
        _ => {
            let inputs = json!({ "mechanism": spec.id, "class": class, "n": n, "dist": dist.to_string(), "count": count, "seed": seed, "objective": objective });
            let mut value = serde_json::to_value(&row).expect("row serializes");
            value["input_hash"] = json!(sha256_hex(inputs.to_string().as_bytes()));
            value["max_ratio"] = json!(row.max_ratio.to_string());
            value["worst_instance"] = json!(summary.max.instance.positions());
            value["bound_note"] = json!(bound.note);
            render(format, &value)
        }
    };
    Ok(Outcome { code: if exceeded { EXIT_VIOLATION } else { EXIT_OK }, report })
}

fn cmd_tight(
    id: MechanismId,
    objective: Objective,
    epsilon: Option<Rational>,
    second: bool,
    class: &ClassArgs,
    format: Format,
) -> Result<Outcome> {
    let (class, n) = class.resolve(Some(&id))?;
    let spec = MechanismSpec::new(id, class)?;
    let param = match (epsilon, second) {
        (Some(eps), _) => FamilyParam::Epsilon(eps),
        (None, true) => FamilyParam::Second,
        (None, false) => FamilyParam::Exact,
    };
    let instance = ratios::tight_instance(&spec.id, &class, n, objective, param)?;
    let record = ratios::RatioRecord::evaluate(&spec, objective, instance)?;
    let bound = ratios::bound(&spec.id, &class, n, objective)?;
    let relation = if ratios::is_limit_family(param) {
        "approaches bound"
    } else if record.ratio == RatioValue::Finite(bound.value) {
        "equals bound"
    } else {
        "below bound"
    };
    let report = json!({
        "command": "tight",
        "mechanism": spec.id,
        "class": class,
        "objective": objective,
        "family": param,
        "instance": record.instance.positions(),
        "mech_cost": record.mech_cost,
        "opt_cost": record.opt_cost,
        "ratio": record.ratio.to_string(),
        "bound": bound.value,
        "bound_note": bound.note,
        "relation": relation,
    });
    Ok(Outcome { code: EXIT_OK, report: render(format, &report) })
}

fn cmd_table1(class: &ClassArgs, format: Format) -> Result<Outcome> {
    let (class, n) = class.resolve(None)?;
    let row = table1_row(&class, n)?;
    let report = match format {
        Format::Table => render_table(std::slice::from_ref(&row)),
        Format::Json | Format::Csv => to_json(&row),
    };
    Ok(Outcome { code: EXIT_OK, report })
}

fn audit_config(coalition: usize, budget: Option<u64>) -> AuditConfig {
    let mut cfg = AuditConfig::with_coalition(coalition);
    if let Some(b) = budget {
        cfg.budget = b;
    }
    cfg
}

fn dispatch(command: Command) -> Result<(Outcome, Option<PathBuf>)> {
    Ok(match command {
        Command::Solve { instance, objective, oracle, out } => {
            (cmd_solve(&instance, objective, oracle, out.format)?, out.output)
        }
        Command::Mech { mechanism, instance, out } => (cmd_mech(mechanism, &instance, out.format)?, out.output),
        Command::Audit { mode, mechanism, instance, coalition, trials, permutations, seed, dist, budget, class, out } => {
            let cfg = audit_config(coalition, budget);
            let outcome =
                cmd_audit(mode, mechanism, instance.as_deref(), cfg, trials, permutations, seed, dist, &class, out.format)?;
            (outcome, out.output)
        }
        Command::RatioSweep { mechanism, objective, count, seed, dist, witness_dir, class, out } => {
            let outcome =
                cmd_ratio_sweep(mechanism, objective, count, seed, dist, witness_dir.as_deref(), &class, out.format)?;
            (outcome, out.output)
        }
        Command::Tight { mechanism, objective, epsilon, second, class, out } => {
            (cmd_tight(mechanism, objective, epsilon, second, &class, out.format)?, out.output)
        }
        Command::Table1 { class, out } => (cmd_table1(&class, out.format)?, out.output),
    })
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::SearchBudgetExceeded { .. } => EXIT_BUDGET,
        _ => EXIT_INPUT,
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok((outcome, path)) => {
            match path {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, &outcome.report) {
                        eprintln!("error: {}: {e}", path.display());
                        return EXIT_INPUT;
                    }
                }
                None => print!("{}", outcome.report),
            }
            outcome.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
