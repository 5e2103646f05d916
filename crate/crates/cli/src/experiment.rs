//! Batch experiments: generate or load instances, solve relaxations, run the
//! decompositions, re-verify every certificate from its serialized form and
//! compare against the exact oracle.

use anyhow::{bail, Context};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;
use tap_core::color::{self, ColorConfig, ColorError, Decomposition};
use tap_core::deficient::{self, DeficientError};
use tap_core::exact::{self, ExactConfig};
use tap_core::gen::{self, CostRange};
use tap_core::lp::{self, Model};
use tap_core::rational::{self, Rational};
use tap_core::{FractionalSolution, RawInstance, SolutionFile, TapInstance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    LargeLink,
    Greedy,
    Abundant,
    Deficient,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::LargeLink => "large-link",
            Algorithm::Greedy => "greedy",
            Algorithm::Abundant => "abundant",
            Algorithm::Deficient => "deficient",
        }
    }
}

/// A decomposition together with whatever the pipeline logged on the way.
#[derive(Debug, Clone)]
pub struct Decomposed {
    pub decomposition: Decomposition,
    pub trace: Vec<String>,
    pub note: Option<String>,
}

/// Why an algorithm produced no certificate.
#[derive(Debug, Clone)]
pub enum Refusal {
    /// The input is outside the algorithm's preconditions.
    NotApplicable(String),
    /// An internal assertion fired.
    Failed(String),
}

fn color_refusal(e: ColorError) -> Refusal {
    match e {
        ColorError::Conflict { .. } | ColorError::Internal(_) => Refusal::Failed(e.to_string()),
        _ => Refusal::NotApplicable(e.to_string()),
    }
}

fn deficient_refusal(e: DeficientError) -> Refusal {
    match e {
        DeficientError::Color(c) => color_refusal(c),
        DeficientError::NotBinaryLeafLink
        | DeficientError::LengthMismatch { .. }
        | DeficientError::NotNodeFeasible(_)
        | DeficientError::Unsupported { .. }
        | DeficientError::Precondition(_) => Refusal::NotApplicable(e.to_string()),
        _ => Refusal::Failed(e.to_string()),
    }
}

/// Runs one algorithm. Deficient profiles with more than two paths fall back
/// to the greedy decomposition, which is recorded in `note`.
pub fn decompose(
    inst: &TapInstance,
    x: &FractionalSolution,
    alg: Algorithm,
    cfg: &ColorConfig,
) -> Result<Decomposed, Refusal> {
    let plain = |d: Decomposition| Decomposed { decomposition: d, trace: Vec::new(), note: None };
    match alg {
        Algorithm::LargeLink => color::large_link_decompose(inst, x, cfg).map(plain).map_err(color_refusal),
        Algorithm::Greedy => color::greedy_decompose(inst, x, cfg).map(plain).map_err(color_refusal),
        Algorithm::Abundant => color::abundant_scaled_decompose(inst, x, cfg).map(plain).map_err(color_refusal),
        Algorithm::Deficient => match deficient::deficient_decompose(inst, x, cfg) {
            Ok(run) => Ok(Decomposed { decomposition: run.decomposition, trace: run.trace, note: None }),
            Err(DeficientError::Unsupported { paths }) => {
                let d = color::greedy_decompose(inst, x, cfg).map_err(color_refusal)?;
                Ok(Decomposed {
                    decomposition: d,
                    trace: Vec::new(),
                    note: Some(format!("{paths} deficient paths; fell back to greedy")),
                })
            }
            Err(e) => Err(deficient_refusal(e)),
        },
    }
}

/// Self-contained certificate: enough to re-verify without anything else.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub instance: RawInstance,
    pub solution: SolutionFile,
    pub decomposition: Decomposition,
}

impl Certificate {
    pub fn new(inst: &TapInstance, x: &FractionalSolution, d: &Decomposition) -> Self {
        Certificate {
            instance: inst.to_raw(),
            solution: SolutionFile::from_fractional(inst, x),
            decomposition: d.clone(),
        }
    }

    /// Rebuilds the instance and point and runs the verifier.
    pub fn verify(&self) -> anyhow::Result<color::VerifyReport> {
        let inst = TapInstance::from_raw(&self.instance)?;
        let x = self.solution.to_fractional(&inst)?;
        Ok(color::verify_decomposition(&inst, &x, &self.decomposition))
    }
}

// ---------------------------------------------------------------- config

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sources: Vec<Source>,
    #[serde(default = "default_models")]
    pub models: Vec<Model>,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    /// Instances with more links skip the exact oracle.
    #[serde(default = "default_exact_links")]
    pub exact_max_links: usize,
    #[serde(default)]
    pub copy_budget: Option<usize>,
    /// Record wall-clock runtimes (makes the report nondeterministic).
    #[serde(default)]
    pub timing: bool,
    /// Write failing instances here for reproduction.
    #[serde(default)]
    pub dump_dir: Option<PathBuf>,
    /// Write every verified certificate here.
    #[serde(default)]
    pub certificate_dir: Option<PathBuf>,
    #[serde(default)]
    pub workers: Option<usize>,
}

fn default_models() -> Vec<Model> {
    vec![Model::Edge]
}

fn default_algorithms() -> Vec<Algorithm> {
    vec![Algorithm::LargeLink, Algorithm::Greedy]
}

fn default_exact_links() -> usize {
    24
}

fn default_count() -> usize {
    1
}

fn default_link_prob() -> f64 {
    0.5
}

fn default_costs() -> [i64; 2] {
    [1, 10]
}

/// Where the fractional point of an instance comes from.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PointSpec {
    /// Optimum of each configured LP model.
    #[default]
    Lp,
    /// Random EDGE-LP feasible point with entries over the given denominators.
    Random { denominators: Vec<i64> },
    /// Random NODE-LP feasible point (binary leaf-link instances only).
    NodeRandom { denominators: Vec<i64> },
    /// Convex combination of random minimal integral covers.
    ConvexCover { parts: usize },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Source {
    File {
        path: PathBuf,
        /// Fixed point to decompose instead of LP optima.
        #[serde(default)]
        solution: Option<PathBuf>,
    },
    RandomBinary {
        #[serde(default = "default_count")]
        count: usize,
        n: usize,
        #[serde(default = "default_link_prob")]
        link_prob: f64,
        #[serde(default = "default_costs")]
        costs: [i64; 2],
        #[serde(default)]
        point: PointSpec,
    },
    RandomTree {
        #[serde(default = "default_count")]
        count: usize,
        n: usize,
        links: usize,
        #[serde(default = "default_costs")]
        costs: [i64; 2],
        #[serde(default)]
        point: PointSpec,
    },
    Caterpillar {
        #[serde(default = "default_count")]
        count: usize,
        n: usize,
        #[serde(default = "default_costs")]
        costs: [i64; 2],
        #[serde(default)]
        point: PointSpec,
    },
    Star {
        #[serde(default = "default_count")]
        count: usize,
        leaves: usize,
        #[serde(default = "default_costs")]
        costs: [i64; 2],
        #[serde(default)]
        point: PointSpec,
    },
    Fig2 {
        #[serde(default)]
        costs: Option<Vec<String>>,
    },
    /// Convex-cover points whose deficient edges form exactly `paths` paths.
    Deficient {
        #[serde(default = "default_count")]
        count: usize,
        paths: usize,
        n: usize,
        #[serde(default = "default_costs")]
        costs: [i64; 2],
        #[serde(default = "default_attempts")]
        attempts: usize,
    },
}

fn default_attempts() -> usize {
    2000
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

// ---------------------------------------------------------------- report

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Verified,
    Skipped,
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub instance: String,
    /// LP model for LP optima, `"given"` for supplied points.
    pub model: String,
    #[serde(with = "lp::opt_rational")]
    pub lp_optimum: Option<Rational>,
    #[serde(with = "rational::serde_str")]
    pub point_cost: Rational,
    pub algorithm: Algorithm,
    #[serde(with = "lp::opt_rational")]
    pub factor: Option<Rational>,
    #[serde(with = "lp::opt_rational")]
    pub best_class_cost: Option<Rational>,
    #[serde(with = "lp::opt_rational")]
    pub exact_optimum: Option<Rational>,
    /// Best class cost over the cost of the point.
    #[serde(with = "lp::opt_rational")]
    pub ratio: Option<Rational>,
    pub runtime_ms: Option<u64>,
    pub status: RowStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub instance_id: String,
    pub algorithm: Option<Algorithm>,
    pub problem: String,
    pub instance: RawInstance,
    pub solution: Option<SolutionFile>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Aggregate {
    pub instances: usize,
    pub rows: usize,
    pub verified: usize,
    pub skipped: usize,
    pub failed: usize,
    /// Draws a generator could not satisfy.
    pub unavailable: usize,
    #[serde(with = "opt_rational_map")]
    pub max_ratio: BTreeMap<Algorithm, Rational>,
    /// LP optima that are extreme points with every non-zero entry below
    /// 1/3 and none at least 2/3, by model.
    pub conjecture_violations: BTreeMap<Model, usize>,
}

mod opt_rational_map {
    use super::Algorithm;
    use serde::ser::SerializeMap;
    use serde::Serializer;
    use std::collections::BTreeMap;
    use tap_core::Rational;

    pub fn serialize<S: Serializer>(m: &BTreeMap<Algorithm, Rational>, s: S) -> Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(m.len()))?;
        for (k, v) in m {
            map.serialize_entry(k.name(), &v.to_string())?;
        }
        map.end()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub seed: u64,
    pub rows: Vec<Row>,
    pub aggregate: Aggregate,
    pub failures: Vec<Failure>,
}

impl ExperimentReport {
    pub fn all_verified(&self) -> bool {
        self.failures.is_empty()
    }

    /// Aligned plain-text table of the rows followed by the aggregate.
    pub fn table(&self) -> String {
        let opt = |r: &Option<Rational>| r.as_ref().map_or("-".to_string(), |v| v.to_string());
        let header = ["instance", "model", "lp_opt", "algorithm", "factor", "best", "exact", "ratio", "ms", "status"];
        let mut cells: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
        for r in &self.rows {
            cells.push(vec![
                r.instance.clone(),
                r.model.clone(),
                opt(&r.lp_optimum),
                r.algorithm.name().to_string(),
                opt(&r.factor),
                opt(&r.best_class_cost),
                opt(&r.exact_optimum),
                opt(&r.ratio),
                r.runtime_ms.map_or("-".to_string(), |m| m.to_string()),
                format!("{:?}", r.status).to_lowercase(),
            ]);
        }
        let widths: Vec<usize> = (0..header.len()).map(|j| cells.iter().map(|c| c[j].len()).max().unwrap()).collect();
        let mut out = String::new();
        for row in &cells {
            let line: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
        }
        let a = &self.aggregate;
        let _ = writeln!(
            out,
            "\n{} instances, {} rows: {} verified, {} skipped, {} failed, {} unavailable",
            a.instances, a.rows, a.verified, a.skipped, a.failed, a.unavailable
        );
        for (alg, r) in &a.max_ratio {
            let _ = writeln!(out, "max ratio {:<11} {r}", alg.name());
        }
        for (m, n) in &a.conjecture_violations {
            let _ = writeln!(out, "conjecture violations ({m}): {n}");
        }
        out
    }
}

// ---------------------------------------------------------------- driver

/// One instance to process, with an optional fixed point.
struct Job {
    id: String,
    inst: TapInstance,
    point: Option<FractionalSolution>,
    spec: PointSpec,
    seed: u64,
}

fn cost_range(c: [i64; 2]) -> anyhow::Result<CostRange> {
    if c[0] < 0 || c[0] > c[1] {
        bail!("cost range {c:?} must satisfy 0 <= lo <= hi");
    }
    Ok(CostRange { lo: c[0], hi: c[1] })
}

fn expand(cfg: &ExperimentConfig, base: &Path) -> anyhow::Result<(Vec<Job>, usize)> {
    let mut jobs = Vec::new();
    let mut unavailable = 0;
    for (si, src) in cfg.sources.iter().enumerate() {
        let src_seed = gen::sub_seed(cfg.seed, si as u64);
        let mut push = |name: &str, i: usize, inst: TapInstance, point: Option<FractionalSolution>, spec: PointSpec| {
            jobs.push(Job {
                id: format!("{si:02}-{name}-{i:04}"),
                inst,
                point,
                spec,
                seed: gen::sub_seed(src_seed, i as u64 + 1),
            });
        };
        let raw_inst = |raw: RawInstance| TapInstance::from_raw(&raw).context("generated instance");
        match src {
            Source::File { path, solution } => {
                let p = if path.is_absolute() { path.clone() } else { base.join(path) };
                let text = std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
                let raw: RawInstance = serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
                let inst = TapInstance::from_raw(&raw).with_context(|| format!("loading {}", p.display()))?;
                let point = match solution {
                    Some(s) => {
                        let sp = if s.is_absolute() { s.clone() } else { base.join(s) };
                        let text = std::fs::read_to_string(&sp).with_context(|| format!("reading {}", sp.display()))?;
                        let sf: SolutionFile = serde_json::from_str(&text)?;
                        Some(sf.to_fractional(&inst)?)
                    }
                    None => None,
                };
                let name = p.file_stem().and_then(|s| s.to_str()).unwrap_or("file").to_string();
                push(&name, 0, inst, point, PointSpec::Lp);
            }
            Source::RandomBinary { count, n, link_prob, costs, point } => {
                for i in 0..*count {
                    let raw = gen::random_binary(*n, *link_prob, cost_range(*costs)?, gen::sub_seed(src_seed, i as u64))?;
                    push("random-binary", i, raw_inst(raw)?, None, point.clone());
                }
            }
            Source::RandomTree { count, n, links, costs, point } => {
                for i in 0..*count {
                    let raw = gen::random_tree(*n, *links, cost_range(*costs)?, gen::sub_seed(src_seed, i as u64))?;
                    push("random-tree", i, raw_inst(raw)?, None, point.clone());
                }
            }
            Source::Caterpillar { count, n, costs, point } => {
                for i in 0..*count {
                    let raw = gen::caterpillar(*n, cost_range(*costs)?, gen::sub_seed(src_seed, i as u64))?;
                    push("caterpillar", i, raw_inst(raw)?, None, point.clone());
                }
            }
            Source::Star { count, leaves, costs, point } => {
                for i in 0..*count {
                    let raw = gen::star(*leaves, cost_range(*costs)?, gen::sub_seed(src_seed, i as u64))?;
                    push("star", i, raw_inst(raw)?, None, point.clone());
                }
            }
            Source::Fig2 { costs } => {
                let parsed = costs
                    .as_ref()
                    .map(|c| c.iter().map(|s| rational::parse_rational(s)).collect::<Result<Vec<_>, _>>())
                    .transpose()?;
                push("fig2", 0, raw_inst(gen::fig2(parsed.as_deref())?)?, None, PointSpec::Lp);
            }
            Source::Deficient { count, paths, n, costs, attempts } => {
                for i in 0..*count {
                    let seed = gen::sub_seed(src_seed, i as u64);
                    match gen::deficient_instance(*paths, *n, cost_range(*costs)?, seed, *attempts) {
                        Some((inst, x)) => push("deficient", i, inst, Some(x), PointSpec::Lp),
                        None => unavailable += 1,
                    }
                }
            }
        }
    }
    Ok((jobs, unavailable))
}

/// A fractional point to decompose and where it came from.
struct Point {
    model: String,
    lp_optimum: Option<Rational>,
    x: FractionalSolution,
}

struct JobResult {
    rows: Vec<Row>,
    failures: Vec<Failure>,
    violations: BTreeMap<Model, usize>,
    certificates: Vec<(String, Certificate)>,
}

/// Points in model order; a model that cannot be solved gives its name and
/// the reason instead.
fn points(job: &Job, models: &[Model]) -> (Vec<Result<Point, (String, String)>>, BTreeMap<Model, usize>) {
    let mut out = Vec::new();
    let mut violations = BTreeMap::new();
    if let Some(x) = &job.point {
        out.push(Ok(Point { model: "given".into(), lp_optimum: None, x: x.clone() }));
        return (out, violations);
    }
    let given = |x: FractionalSolution| Ok(Point { model: "given".into(), lp_optimum: None, x });
    match &job.spec {
        PointSpec::Lp => {
            for &m in models {
                let solved = lp::build_lp(&job.inst, m, lp::ODD_SET_NODE_LIMIT)
                    .and_then(|prog| lp::solve_lp(&prog, None).map(|s| (prog, s)));
                match solved {
                    Ok((prog, sol)) => {
                        let v = lp::check_conjecture(&sol.x, &prog);
                        if v.is_extreme && v.conjecture_status == lp::ConjectureStatus::Violates {
                            *violations.entry(m).or_insert(0) += 1;
                        }
                        out.push(Ok(Point { model: m.to_string(), lp_optimum: Some(sol.value), x: sol.x }));
                    }
                    Err(e) => out.push(Err((m.to_string(), e.to_string()))),
                }
            }
        }
        PointSpec::Random { denominators } => out.push(given(gen::random_feasible_x(&job.inst, denominators, job.seed))),
        PointSpec::NodeRandom { denominators } => {
            if job.inst.is_binary_leaf_link() {
                out.push(given(gen::random_node_feasible_x(&job.inst, denominators, job.seed)));
            } else {
                out.push(Err(("given".into(), "instance is not binary with leaf-to-leaf links".into())));
            }
        }
        PointSpec::ConvexCover { parts } => out.push(given(gen::convex_cover_point(&job.inst, *parts, job.seed))),
    }
    (out, violations)
}

fn run_job(job: &Job, cfg: &ExperimentConfig, color_cfg: &ColorConfig) -> JobResult {
    let mut res = JobResult { rows: Vec::new(), failures: Vec::new(), violations: BTreeMap::new(), certificates: Vec::new() };
    let exact_optimum = if job.inst.num_links() <= cfg.exact_max_links {
        let ecfg = ExactConfig { max_links: cfg.exact_max_links, ..ExactConfig::default() };
        exact::exact_tap(&job.inst, &ecfg).ok().and_then(|r| r.optimum_cost)
    } else {
        None
    };
    let (pts, violations) = points(job, &cfg.models);
    res.violations = violations;
    for p in pts {
        let p = match p {
            Ok(p) => p,
            Err((model, why)) => {
                for &alg in &cfg.algorithms {
                    res.rows.push(Row {
                        instance: job.id.clone(),
                        model: model.clone(),
                        lp_optimum: None,
                        point_cost: rational::int(0),
                        algorithm: alg,
                        factor: None,
                        best_class_cost: None,
                        exact_optimum: exact_optimum.clone(),
                        ratio: None,
                        runtime_ms: None,
                        status: RowStatus::Skipped,
                        note: Some(why.clone()),
                    });
                }
                continue;
            }
        };
        let point_cost = job.inst.fractional_cost(&p.x);
        let mut problems = Vec::new();
        if let (Some(lpv), Some(ex)) = (&p.lp_optimum, &exact_optimum) {
            if lpv > ex {
                problems.push(format!("{} optimum {lpv} exceeds the exact optimum {ex}", p.model));
            }
        }
        for &alg in &cfg.algorithms {
            let start = Instant::now();
            let outcome = decompose(&job.inst, &p.x, alg, color_cfg);
            let mut row = Row {
                instance: job.id.clone(),
                model: p.model.clone(),
                lp_optimum: p.lp_optimum.clone(),
                point_cost: point_cost.clone(),
                algorithm: alg,
                factor: None,
                best_class_cost: None,
                exact_optimum: exact_optimum.clone(),
                ratio: None,
                runtime_ms: None,
                status: RowStatus::Verified,
                note: None,
            };
            let mut row_problems = problems.clone();
            match outcome {
                Err(Refusal::NotApplicable(why)) => {
                    row.status = RowStatus::Skipped;
                    row.note = Some(why);
                }
                Err(Refusal::Failed(why)) => row_problems.push(why),
                Ok(out) => {
                    row.note = out.note.clone();
                    let cert = Certificate::new(&job.inst, &p.x, &out.decomposition);
                    // Verify the reloaded certificate, not the in-memory one.
                    let reloaded: anyhow::Result<color::VerifyReport> = serde_json::to_string(&cert)
                        .map_err(anyhow::Error::from)
                        .and_then(|s| serde_json::from_str::<Certificate>(&s).map_err(anyhow::Error::from))
                        .and_then(|c| c.verify());
                    match reloaded {
                        Err(e) => row_problems.push(format!("certificate round trip: {e:#}")),
                        Ok(rep) => {
                            row_problems.extend(rep.problems.iter().cloned());
                            row.factor = Some(out.decomposition.scale.clone());
                            row.best_class_cost = rep.best_cost.clone();
                            if let Some(best) = &rep.best_cost {
                                if point_cost != rational::int(0) {
                                    let ratio = best / &point_cost;
                                    if ratio > out.decomposition.scale {
                                        row_problems.push(format!("ratio {ratio} exceeds the certified factor"));
                                    }
                                    row.ratio = Some(ratio);
                                }
                                if let Some(ex) = &exact_optimum {
                                    if best < ex {
                                        row_problems.push(format!("class cost {best} beats the exact optimum {ex}"));
                                    }
                                }
                            }
                            if row_problems.is_empty() {
                                res.certificates.push((format!("{}-{}-{}", job.id, p.model, alg.name()), cert));
                            }
                        }
                    }
                }
            }
            if cfg.timing {
                row.runtime_ms = Some(start.elapsed().as_millis() as u64);
            }
            if !row_problems.is_empty() {
                row.status = RowStatus::Failed;
                row.note = Some(row_problems.join("; "));
                res.failures.push(Failure {
                    instance_id: job.id.clone(),
                    algorithm: Some(alg),
                    problem: row_problems.join("; "),
                    instance: job.inst.to_raw(),
                    solution: Some(SolutionFile::from_fractional(&job.inst, &p.x)),
                });
            }
            res.rows.push(row);
        }
    }
    res
}

/// Runs every job of `cfg`. Relative paths in the config resolve against
/// `base`. Rows come back sorted by instance id whatever the worker order.
pub fn run_experiment(cfg: &ExperimentConfig, base: &Path, copy_budget: Option<usize>) -> anyhow::Result<ExperimentReport> {
    let (jobs, unavailable) = expand(cfg, base)?;
    let mut color_cfg = ColorConfig { checks: true, ..ColorConfig::default() };
    if let Some(b) = copy_budget.or(cfg.copy_budget) {
        color_cfg.copy_budget = b;
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers.unwrap_or(0)).build()?;
    let mut results: Vec<(String, JobResult)> =
        pool.install(|| jobs.par_iter().map(|j| (j.id.clone(), run_job(j, cfg, &color_cfg))).collect());
    results.sort_by(|a, b| a.0.cmp(&b.0));

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut violations: BTreeMap<Model, usize> = BTreeMap::new();
    let mut certificates = Vec::new();
    for (_, r) in results {
        rows.extend(r.rows);
        failures.extend(r.failures);
        for (m, n) in r.violations {
            *violations.entry(m).or_insert(0) += n;
        }
        certificates.extend(r.certificates);
    }
    let mut max_ratio: BTreeMap<Algorithm, Rational> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.status == RowStatus::Verified) {
        if let Some(q) = &r.ratio {
            let e = max_ratio.entry(r.algorithm).or_insert_with(|| q.clone());
            if q > e {
                *e = q.clone();
            }
        }
    }
    let count = |s: RowStatus| rows.iter().filter(|r| r.status == s).count();
    let aggregate = Aggregate {
        instances: jobs.len(),
        rows: rows.len(),
        verified: count(RowStatus::Verified),
        skipped: count(RowStatus::Skipped),
        failed: count(RowStatus::Failed),
        unavailable,
        max_ratio,
        conjecture_violations: violations,
    };
    if let Some(dir) = &cfg.dump_dir {
        let dir = if dir.is_absolute() { dir.clone() } else { base.join(dir) };
        if !failures.is_empty() {
            std::fs::create_dir_all(&dir)?;
        }
        for (i, f) in failures.iter().enumerate() {
            let path = dir.join(format!("{}-{i}.json", f.instance_id));
            std::fs::write(&path, serde_json::to_string_pretty(f)? + "\n")?;
        }
    }
    if let Some(dir) = &cfg.certificate_dir {
        let dir = if dir.is_absolute() { dir.clone() } else { base.join(dir) };
        std::fs::create_dir_all(&dir)?;
        for (name, c) in &certificates {
            std::fs::write(dir.join(format!("{name}.json")), serde_json::to_string_pretty(c)? + "\n")?;
        }
    }
    Ok(ExperimentReport { seed: cfg.seed, rows, aggregate, failures })
}
