//! The `tap` command line. Exit codes: 0 when everything verified, 1 on a
//! verification failure, 2 on bad usage or unreadable input.

pub mod experiment;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use tap_core::color::{self, ColorConfig, Decomposition};
use tap_core::exact::{self, ExactConfig};
use tap_core::gen::{self, CostRange};
use tap_core::lp::{self, scan, Model};
use tap_core::rational::{self, Rational};
use tap_core::reduce;
use tap_core::threetap::{self, SetCoverInstance, ThreeTapInstance};
use tap_core::instance::validate_instance;
use tap_core::{RawInstance, SolutionFile, TapInstance};

use experiment::{Algorithm, Certificate, Refusal};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VERIFY: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug)]
pub enum CliError {
    Input(anyhow::Error),
    Verify(String),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Input(e)
    }
}

type CliResult = Result<(), CliError>;

#[derive(Parser, Debug)]
#[command(name = "tap", version, about = "Weighted tree augmentation workbench")]
pub struct Cli {
    /// Seed for every random choice (default 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Cap on the explicit link copies a coloring decomposition may use.
    #[arg(long, global = true)]
    pub copy_budget: Option<usize>,
    /// Link limit for the exact oracles.
    #[arg(long, global = true)]
    pub max_links: Option<usize>,
    /// Write the main output to this file instead of stdout.
    #[arg(short = 'o', long = "out", global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Validate an instance, optionally with a solution, decomposition or certificate.
    Check(CheckArgs),
    /// Binarize an instance, or expand it into the node gadget.
    Reduce(ReduceArgs),
    /// Emit or solve one of the LP relaxations.
    Lp(LpArgs),
    /// Decompose a scaled fractional solution into integral covers.
    Decompose(DecomposeArgs),
    /// Exact optimum by search.
    Exact(ExactArgs),
    /// Approximate a 3TAP instance.
    #[command(name = "3tap")]
    ThreeTap(ThreeTapArgs),
    /// Scan LP extreme points for the one-third/two-thirds property.
    Conjecture(ConjectureArgs),
    /// Generate an instance.
    Gen(GenArgs),
    /// Run an experiment config.
    Experiment(ExperimentArgs),
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(required_unless_present = "certificate")]
    pub instance: Option<PathBuf>,
    #[arg(long)]
    pub solution: Option<PathBuf>,
    /// Decomposition file to verify against `--solution`.
    #[arg(long, requires = "solution")]
    pub decomposition: Option<PathBuf>,
    /// Self-contained certificate written by `experiment`.
    #[arg(long, conflicts_with = "instance")]
    pub certificate: Option<PathBuf>,
    /// Judge the solution by the triangle rule.
    #[arg(long = "3tap")]
    pub three_tap: bool,
}

#[derive(Args, Debug)]
pub struct ReduceArgs {
    pub instance: PathBuf,
    #[arg(long)]
    pub node_gadget: bool,
    /// Where to write the reduction map.
    #[arg(long)]
    pub map: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct LpArgs {
    pub instance: PathBuf,
    #[arg(long, default_value = "edge")]
    pub model: Model,
    /// Print a basic optimal solution instead of the program.
    #[arg(long)]
    pub solve: bool,
    /// Solve and classify the optimum.
    #[arg(long)]
    pub check_conjecture: bool,
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    pub instance: PathBuf,
    #[arg(long)]
    pub solution: PathBuf,
    #[arg(long, value_enum)]
    pub algorithm: Algorithm,
    /// Write the phase trace here instead of stderr.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Skip the per-step invariant assertions.
    #[arg(long)]
    pub no_checks: bool,
}

#[derive(Args, Debug)]
pub struct ExactArgs {
    pub instance: PathBuf,
    #[arg(long = "3tap")]
    pub three_tap: bool,
}

#[derive(Args, Debug)]
pub struct ThreeTapArgs {
    pub instance: PathBuf,
    /// Use the unit-cost algorithm (implied by an unweighted instance).
    #[arg(long)]
    pub unweighted: bool,
}

#[derive(Args, Debug)]
pub struct ConjectureArgs {
    #[arg(long, default_value_t = 12)]
    pub max_nodes: usize,
    /// Random objectives per shape.
    #[arg(long, default_value_t = 200)]
    pub samples: usize,
    #[arg(long, value_delimiter = ',', default_value = "edge,odd")]
    pub models: Vec<Model>,
    /// Sampled basic solutions per shape.
    #[arg(long)]
    pub basis_samples: Option<usize>,
    #[arg(long, default_value_t = 5)]
    pub max_hits: usize,
    /// Keep every leaf pair as a link in all samples.
    #[arg(long)]
    pub full_link_sets: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    RandomBinary,
    Caterpillar,
    Star,
    SetcoverGadget,
    Fig2,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: GenKind,
    /// Node count (leaf count for a star).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    pub link_prob: f64,
    #[arg(long, default_value_t = 1)]
    pub cost_lo: i64,
    #[arg(long, default_value_t = 10)]
    pub cost_hi: i64,
    /// Set cover instance for the gadget; random when absent.
    #[arg(long)]
    pub sets: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    pub max_sets: usize,
    #[arg(long, default_value_t = 6)]
    pub max_elements: usize,
    /// Comma-separated link costs for fig2.
    #[arg(long, value_delimiter = ',')]
    pub costs: Vec<String>,
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    pub config: PathBuf,
    /// Write the text table here instead of stderr.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(()) => EXIT_OK,
        Err(CliError::Input(e)) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
        Err(CliError::Verify(m)) => {
            eprintln!("verification failed: {m}");
            EXIT_VERIFY
        }
    }
}

pub fn dispatch(cli: &Cli) -> CliResult {
    match &cli.command {
        Command::Check(a) => check(cli, a),
        Command::Reduce(a) => reduce_cmd(cli, a),
        Command::Lp(a) => lp_cmd(cli, a),
        Command::Decompose(a) => decompose_cmd(cli, a),
        Command::Exact(a) => exact_cmd(cli, a),
        Command::ThreeTap(a) => three_tap_cmd(cli, a),
        Command::Conjecture(a) => conjecture_cmd(cli, a),
        Command::Gen(a) => gen_cmd(cli, a),
        Command::Experiment(a) => experiment_cmd(cli, a),
    }
}

// ---------------------------------------------------------------- io

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_instance(path: &Path) -> anyhow::Result<TapInstance> {
    let raw: RawInstance = read_json(path)?;
    TapInstance::from_raw(&raw).with_context(|| format!("loading {}", path.display()))
}

fn pretty(value: &impl Serialize) -> anyhow::Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn write_file(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Main output: `--out` if given, else stdout.
fn emit(cli: &Cli, value: &impl Serialize) -> anyhow::Result<()> {
    let text = pretty(value)?;
    match &cli.out {
        Some(p) => write_file(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn seed(cli: &Cli) -> u64 {
    cli.seed.unwrap_or(0)
}

fn exact_config(cli: &Cli) -> ExactConfig {
    let mut cfg = ExactConfig::default();
    if let Some(m) = cli.max_links {
        cfg.max_links = m;
        cfg.exhaustive_links = cfg.exhaustive_links.min(m);
    }
    cfg
}

// ---------------------------------------------------------------- commands

fn check(cli: &Cli, a: &CheckArgs) -> CliResult {
    if let Some(path) = &a.certificate {
        let cert: Certificate = read_json(path)?;
        let rep = cert.verify()?;
        emit(cli, &json!({ "certificate": rep }))?;
        return if rep.ok { Ok(()) } else { Err(CliError::Verify(rep.problems.join("; "))) };
    }
    let path = a.instance.as_ref().expect("clap requires an instance");
    let raw: RawInstance = read_json(path)?;
    let violations: Vec<String> = validate_instance(&raw).iter().map(|v| v.to_string()).collect();
    if !violations.is_empty() {
        emit(cli, &json!({ "instance": { "valid": false, "violations": violations } }))?;
        return Err(CliError::Verify(format!("{} instance violations", violations.len())));
    }
    let inst = TapInstance::from_raw(&raw).map_err(anyhow::Error::from)?;
    let uncoverable: Vec<String> = inst.uncoverable_edges().into_iter().map(|e| inst.edge_name(e)).collect();
    let mut report = json!({
        "instance": {
            "valid": true,
            "nodes": inst.num_nodes(),
            "edges": inst.num_edges(),
            "links": inst.num_links(),
            "binary_leaf_link": inst.is_binary_leaf_link(),
            "uncoverable_edges": uncoverable,
        }
    });
    let mut failures = Vec::new();
    if let Some(sp) = &a.solution {
        let sf: SolutionFile = read_json(sp)?;
        let x = sf.to_fractional(&inst).map_err(anyhow::Error::from)?;
        let integral = x.values.iter().all(|v| rational::is_integer(v) && *v <= rational::int(1));
        let cost = inst.fractional_cost(&x);
        let (feasible, uncovered) = if a.three_tap {
            let t = ThreeTapInstance::new(inst.clone(), raw.unweighted).map_err(anyhow::Error::from)?;
            if !integral {
                return Err(anyhow!("3TAP solutions must be integral").into());
            }
            let sol = tap_core::IntegralSolution::new(x.support());
            let un = t.uncovered(&sol);
            (un.is_empty(), un)
        } else {
            let un: Vec<usize> = (0..inst.num_edges()).filter(|&e| inst.coverage(&x, e) < rational::int(1)).collect();
            (un.is_empty(), un)
        };
        if !feasible {
            failures.push(format!("solution leaves {} edges uncovered", uncovered.len()));
        }
        report["solution"] = json!({
            "integral": integral,
            "feasible": feasible,
            "cost": cost.to_string(),
            "uncovered": uncovered.iter().map(|&e| inst.edge_name(e)).collect::<Vec<_>>(),
        });
        if let Some(dp) = &a.decomposition {
            let d: Decomposition = read_json(dp)?;
            let rep = color::verify_decomposition(&inst, &x, &d);
            if !rep.ok {
                failures.push(rep.problems.join("; "));
            }
            report["decomposition"] = serde_json::to_value(&rep).map_err(anyhow::Error::from)?;
        }
    }
    emit(cli, &report)?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verify(failures.join("; ")))
    }
}

fn reduce_cmd(cli: &Cli, a: &ReduceArgs) -> CliResult {
    let inst = load_instance(&a.instance)?;
    let (out, map) = if a.node_gadget {
        reduce::node_gadget_expand(&inst)
    } else {
        reduce::binarize(&inst)
    }
    .map_err(anyhow::Error::from)?;
    emit(cli, &out.to_raw())?;
    if let Some(p) = &a.map {
        write_file(p, &pretty(&map)?)?;
    }
    Ok(())
}

fn lp_cmd(cli: &Cli, a: &LpArgs) -> CliResult {
    let inst = load_instance(&a.instance)?;
    let prog = lp::build_lp(&inst, a.model, lp::ODD_SET_NODE_LIMIT).map_err(anyhow::Error::from)?;
    if !a.solve && !a.check_conjecture {
        emit(cli, &prog)?;
        return Ok(());
    }
    // A seed swaps the instance costs for a random objective.
    let objective = cli.seed.map(|s| scan::random_costs(inst.num_links(), s));
    let sol = lp::solve_lp(&prog, objective.as_deref()).map_err(anyhow::Error::from)?;
    lp::check_feasible(&prog, &sol.x).map_err(|e| CliError::Verify(e.to_string()))?;
    eprintln!("optimum {} ({} pivots, {} rows)", sol.value, sol.pivots, sol.rows_used);
    if a.check_conjecture {
        let v = lp::check_conjecture(&sol.x, &prog);
        let show = |r: &Option<Rational>| r.as_ref().map_or("-".into(), |v| v.to_string());
        eprintln!(
            "extreme {}, min non-zero {}, max {}, status {}",
            v.is_extreme,
            show(&v.min_nonzero),
            show(&v.max_value),
            v.conjecture_status
        );
    }
    emit(cli, &SolutionFile::from_fractional(&inst, &sol.x))?;
    Ok(())
}

fn decompose_cmd(cli: &Cli, a: &DecomposeArgs) -> CliResult {
    let inst = load_instance(&a.instance)?;
    let sf: SolutionFile = read_json(&a.solution)?;
    let x = sf.to_fractional(&inst).map_err(anyhow::Error::from)?;
    let mut cfg = ColorConfig { checks: !a.no_checks, ..ColorConfig::default() };
    if let Some(b) = cli.copy_budget {
        cfg.copy_budget = b;
    }
    let out = match experiment::decompose(&inst, &x, a.algorithm, &cfg) {
        Ok(o) => o,
        Err(Refusal::NotApplicable(why)) => return Err(anyhow!(why).into()),
        Err(Refusal::Failed(why)) => return Err(CliError::Verify(why)),
    };
    let mut trace = out.trace.join("\n");
    if let Some(n) = &out.note {
        trace = if trace.is_empty() { n.clone() } else { format!("{n}\n{trace}") };
    }
    match &a.trace {
        Some(p) => write_file(p, &(trace + "\n"))?,
        None if !trace.is_empty() => eprintln!("{trace}"),
        None => {}
    }
    let rep = color::verify_decomposition(&inst, &x, &out.decomposition);
    emit(cli, &out.decomposition)?;
    let best = rep.best_cost.as_ref().map_or("-".into(), |b| b.to_string());
    eprintln!("{} classes, scale {}, best class {best}, bound {}", out.decomposition.k, out.decomposition.scale, rep.bound);
    if rep.ok {
        Ok(())
    } else {
        Err(CliError::Verify(rep.problems.join("; ")))
    }
}

fn exact_cmd(cli: &Cli, a: &ExactArgs) -> CliResult {
    let cfg = exact_config(cli);
    let (res, inst) = if a.three_tap {
        let raw: RawInstance = read_json(&a.instance)?;
        let t = ThreeTapInstance::from_raw(&raw).map_err(anyhow::Error::from)?;
        (exact::exact_3tap(&t, &cfg).map_err(anyhow::Error::from)?, t.tree().clone())
    } else {
        let inst = load_instance(&a.instance)?;
        (exact::exact_tap(&inst, &cfg).map_err(anyhow::Error::from)?, inst)
    };
    let solution = res.witness_solution().map(|w| SolutionFile::from_integral(&inst, &w));
    emit(cli, &json!({ "result": res, "solution": solution }))?;
    Ok(())
}

fn three_tap_cmd(cli: &Cli, a: &ThreeTapArgs) -> CliResult {
    let raw: RawInstance = read_json(&a.instance)?;
    let t = ThreeTapInstance::from_raw(&raw).map_err(anyhow::Error::from)?;
    let (sol, rounds, name) = if a.unweighted || t.unweighted() {
        (threetap::unweighted_3tap(&t).map_err(anyhow::Error::from)?, None, "unweighted")
    } else {
        let (s, tr) = threetap::greedy_3tap(&t).map_err(anyhow::Error::from)?;
        (s, Some(tr), "greedy")
    };
    let feasible = t.is_feasible(&sol);
    emit(
        cli,
        &json!({
            "algorithm": name,
            "cost": t.cost(&sol).to_string(),
            "feasible": feasible,
            "solution": SolutionFile::from_integral(t.tree(), &sol),
            "trace": rounds,
        }),
    )?;
    if feasible {
        Ok(())
    } else {
        Err(CliError::Verify("returned 3TAP solution misses a triangle".into()))
    }
}

fn conjecture_cmd(cli: &Cli, a: &ConjectureArgs) -> CliResult {
    let mut cfg = scan::ScanConfig {
        max_nodes: a.max_nodes,
        samples_per_instance: a.samples,
        seed: seed(cli),
        models: a.models.clone(),
        max_hits: a.max_hits,
        link_subsets: !a.full_link_sets,
        ..scan::ScanConfig::default()
    };
    if let Some(b) = a.basis_samples {
        cfg.basis_samples = b;
    }
    let rep = scan::conjecture_scan(&cfg).map_err(anyhow::Error::from)?;
    for m in &rep.models {
        eprintln!(
            "{}: {} shapes, {} solves, {} violations, {} basis vertices, {} basis violations",
            m.model, m.instances, m.solves, m.violations, m.basis_vertices, m.basis_violations
        );
        if m.model == Model::Odd && m.total_violations() > 0 {
            eprintln!("odd: violating extreme point found; see hits in the report");
        }
    }
    emit(cli, &rep)?;
    Ok(())
}

fn gen_cmd(cli: &Cli, a: &GenArgs) -> CliResult {
    let s = seed(cli);
    if a.cost_lo < 0 || a.cost_lo > a.cost_hi {
        return Err(anyhow!("cost range must satisfy 0 <= lo <= hi").into());
    }
    let costs = CostRange { lo: a.cost_lo, hi: a.cost_hi };
    let raw = match a.kind {
        GenKind::RandomBinary => gen::random_binary(a.n.unwrap_or(14), a.link_prob, costs, s),
        GenKind::Caterpillar => gen::caterpillar(a.n.unwrap_or(9), costs, s),
        GenKind::Star => gen::star(a.n.unwrap_or(4), costs, s),
        GenKind::Fig2 => {
            let parsed: Vec<Rational> = a
                .costs
                .iter()
                .map(|c| rational::parse_rational(c))
                .collect::<Result<_, _>>()
                .map_err(|e| anyhow!("bad fig2 cost: {}", e.0))?;
            gen::fig2(if parsed.is_empty() { None } else { Some(&parsed) })
        }
        GenKind::SetcoverGadget => {
            let sc: SetCoverInstance = match &a.sets {
                Some(p) => read_json(p)?,
                None => gen::random_set_cover(a.max_sets, a.max_elements, costs, s),
            };
            let t = threetap::setcover_gadget(&sc).map_err(anyhow::Error::from)?;
            emit(cli, &t.to_raw())?;
            return Ok(());
        }
    }
    .map_err(anyhow::Error::from)?;
    emit(cli, &raw)?;
    Ok(())
}

fn experiment_cmd(cli: &Cli, a: &ExperimentArgs) -> CliResult {
    let mut cfg = experiment::ExperimentConfig::from_path(&a.config)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(m) = cli.max_links {
        cfg.exact_max_links = m;
    }
    let base = a.config.parent().map(Path::to_path_buf).unwrap_or_default();
    let rep = experiment::run_experiment(&cfg, &base, cli.copy_budget)?;
    emit(cli, &rep)?;
    let table = rep.table();
    match &a.table {
        Some(p) => write_file(p, &table)?,
        None => eprint!("{table}"),
    }
    if rep.all_verified() {
        Ok(())
    } else {
        Err(CliError::Verify(format!("{} rows failed", rep.failures.len())))
    }
}
