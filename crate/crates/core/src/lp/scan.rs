//! Empirical sweep of the one-third/two-thirds property over optimal extreme
//! points of small binary leaf-link instances.
//!
//! The covering polyhedra here are up-closed, so every extreme point is the
//! unique optimum of some strictly positive cost vector; sampling random
//! positive costs therefore reaches every extreme point with positive
//! probability.

use super::{build_lp, check_conjecture, solve_lp, ConjectureStatus, ExtremePointVerdict, LpError, Model};
use crate::instance::{Link, RawInstance, TapInstance};
use crate::rational::{self, int, Rational};
use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

/// All unlabeled trees on `i` vertices with maximum degree 3, as edge lists
/// in a canonical vertex order.
fn degree3_trees(i: usize) -> Vec<Vec<(usize, usize)>> {
    if i == 0 {
        return vec![];
    }
    let mut level: BTreeMap<String, Vec<(usize, usize)>> = BTreeMap::new();
    level.insert(canonical(1, &[]), vec![]);
    for size in 2..=i {
        let mut next = BTreeMap::new();
        for edges in level.values() {
            let n = size - 1;
            let mut deg = vec![0; n];
            for &(a, b) in edges {
                deg[a] += 1;
                deg[b] += 1;
            }
            for v in 0..n {
                if deg[v] < 3 {
                    let mut e = edges.clone();
                    e.push((v, n));
                    next.entry(canonical(size, &e)).or_insert(e);
                }
            }
        }
        level = next;
    }
    level.into_values().collect()
}

fn canonical(n: usize, edges: &[(usize, usize)]) -> String {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    // centers by repeated leaf stripping
    let mut deg: Vec<usize> = adj.iter().map(|a| a.len()).collect();
    let mut layer: Vec<usize> = (0..n).filter(|&v| deg[v] <= 1).collect();
    let mut left = n;
    while left > 2 {
        left -= layer.len();
        let mut next = Vec::new();
        for &v in &layer {
            for &w in &adj[v] {
                deg[w] -= 1;
                if deg[w] == 1 {
                    next.push(w);
                }
            }
        }
        layer = next;
    }
    fn enc(adj: &[Vec<usize>], v: usize, p: usize) -> String {
        let mut kids: Vec<String> = adj[v].iter().filter(|&&w| w != p).map(|&w| enc(adj, w, v)).collect();
        kids.sort();
        format!("({})", kids.concat())
    }
    layer.iter().map(|&c| enc(&adj, c, usize::MAX)).min().unwrap_or_default()
}

/// Every binary tree shape (all degrees 1 or 3) with at most `max_nodes`
/// nodes, each with the complete set of leaf-to-leaf links at unit cost.
/// Ordered by node count, then canonical form.
pub fn binary_shapes(max_nodes: usize) -> Vec<TapInstance> {
    let mut out = Vec::new();
    if max_nodes >= 2 {
        out.push(shape_instance(&[], 0));
    }
    let mut i = 1;
    while 2 * i + 2 <= max_nodes {
        for edges in degree3_trees(i) {
            out.push(shape_instance(&edges, i));
        }
        i += 1;
    }
    out
}

fn shape_instance(internal_edges: &[(usize, usize)], i: usize) -> TapInstance {
    let mut names: Vec<String> = (0..i).map(|v| format!("i{v}")).collect();
    let mut edges: Vec<(usize, usize)> = internal_edges.to_vec();
    let mut leaves = Vec::new();
    if i == 0 {
        names = vec!["l0".into(), "l1".into()];
        edges = vec![(0, 1)];
        leaves = vec![0, 1];
    } else {
        let mut deg = vec![0; i];
        for &(a, b) in internal_edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        for v in 0..i {
            for _ in deg[v]..3 {
                let id = names.len();
                names.push(format!("l{}", leaves.len()));
                edges.push((v, id));
                leaves.push(id);
            }
        }
    }
    let mut links = Vec::new();
    for a in 0..leaves.len() {
        for b in a + 1..leaves.len() {
            links.push(Link { u: leaves[a], v: leaves[b], cost: int(1) });
        }
    }
    TapInstance::from_parts(names, edges, links, None).expect("generated shape is valid")
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanConfig {
    pub max_nodes: usize,
    pub samples_per_instance: usize,
    pub seed: u64,
    pub models: Vec<Model>,
    pub odd_limit: usize,
    /// Cap on stored reproduction records per model.
    pub max_hits: usize,
    /// Besides the complete link set (sample 0), draw a random covering
    /// subset of the leaf-to-leaf links for every other sample.
    pub link_subsets: bool,
    /// Basic solutions of the all-edges-tight system sampled per shape.
    pub basis_samples: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            max_nodes: 12,
            samples_per_instance: 200,
            seed: 0,
            models: vec![Model::Edge, Model::Odd],
            odd_limit: super::ODD_SET_NODE_LIMIT,
            max_hits: 5,
            link_subsets: true,
            basis_samples: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HitSource {
    /// Optimum of a random cost vector.
    RandomCost,
    /// Sampled basic solution; `objective` is a cost it uniquely optimises.
    BasisSample,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanHit {
    pub source: HitSource,
    pub shape: usize,
    pub sample: usize,
    pub instance: RawInstance,
    #[serde(with = "rational::serde_str_vec")]
    pub objective: Vec<Rational>,
    #[serde(with = "rational::serde_str_vec")]
    pub solution: Vec<Rational>,
    pub verdict: ExtremePointVerdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelScan {
    pub model: Model,
    pub instances: usize,
    pub solves: usize,
    pub status_counts: BTreeMap<ConjectureStatus, usize>,
    /// Solves whose optimum is not certified extreme (should stay zero).
    pub non_extreme: usize,
    pub violations: usize,
    pub distinct_violating_points: usize,
    /// Sampled basic solutions that are extreme points of this model.
    pub basis_vertices: usize,
    pub basis_status_counts: BTreeMap<ConjectureStatus, usize>,
    pub basis_violations: usize,
    pub hits: Vec<ScanHit>,
}

impl ModelScan {
    pub fn total_violations(&self) -> usize {
        self.violations + self.basis_violations
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub config: ScanConfig,
    pub shapes: usize,
    pub models: Vec<ModelScan>,
}

impl ScanReport {
    pub fn model(&self, m: Model) -> Option<&ModelScan> {
        self.models.iter().find(|s| s.model == m)
    }
}

/// Per-(shape, sample) seed derived from the master seed.
pub fn sub_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn random_costs(num: usize, seed: u64) -> Vec<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..num).map(|_| int(rng.gen_range(1..=100))).collect()
}

/// A random subset of `shape`'s links (each kept with probability 1/2) that
/// still covers every edge; the full set if 100 draws all fail.
pub fn random_link_subset(shape: &TapInstance, seed: u64) -> TapInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..100 {
        let keep: Vec<bool> = (0..shape.num_links()).map(|_| rng.gen_bool(0.5)).collect();
        let covered = (0..shape.num_edges()).all(|e| shape.cover_set(e).iter().any(|&l| keep[l]));
        if covered {
            let links = (0..shape.num_links()).filter(|&l| keep[l]).map(|l| shape.link(l).clone()).collect();
            return TapInstance::from_parts(shape.node_names().to_vec(), shape.edges().to_vec(), links, None)
                .expect("subset of a valid instance");
        }
    }
    shape.clone()
}

struct Sample {
    shape: usize,
    sample: usize,
    inst: TapInstance,
    cost: Vec<Rational>,
    x: Vec<Rational>,
    verdict: ExtremePointVerdict,
}

type RawKey = Vec<(usize, usize)>;

pub fn conjecture_scan(cfg: &ScanConfig) -> Result<ScanReport, LpError> {
    let shapes = binary_shapes(cfg.max_nodes);
    let mut models = Vec::new();
    for &model in &cfg.models {
        let jobs: Vec<(usize, usize)> = (0..shapes.len())
            .flat_map(|s| (0..cfg.samples_per_instance).map(move |k| (s, k)))
            .collect();
        let results: Vec<Sample> = jobs
            .par_iter()
            .map(|&(s, k)| {
                let seed = sub_seed(cfg.seed, s as u64, k as u64);
                let inst = if cfg.link_subsets && k > 0 {
                    random_link_subset(&shapes[s], seed ^ 1)
                } else {
                    shapes[s].clone()
                };
                let lp = build_lp(&inst, model, cfg.odd_limit)?;
                let cost = random_costs(inst.num_links(), seed);
                let sol = solve_lp(&lp, Some(&cost))?;
                let verdict = check_conjecture(&sol.x, &lp);
                Ok(Sample { shape: s, sample: k, inst, cost, x: sol.x.values, verdict })
            })
            .collect::<Result<_, LpError>>()?;
        let mut scan = ModelScan {
            model,
            instances: shapes.len(),
            solves: results.len(),
            status_counts: BTreeMap::new(),
            non_extreme: 0,
            violations: 0,
            distinct_violating_points: 0,
            basis_vertices: 0,
            basis_status_counts: BTreeMap::new(),
            basis_violations: 0,
            hits: Vec::new(),
        };
        let mut distinct: BTreeSet<(RawKey, Vec<Rational>)> = BTreeSet::new();
        for Sample { shape: s, sample: k, inst, cost, x, verdict } in results {
            *scan.status_counts.entry(verdict.conjecture_status).or_default() += 1;
            if !verdict.is_extreme {
                scan.non_extreme += 1;
            }
            if verdict.conjecture_status == ConjectureStatus::Violates {
                scan.violations += 1;
                let key = inst.links().iter().map(|l| (l.u, l.v)).collect();
                let fresh = distinct.insert((key, x.clone()));
                if fresh && scan.hits.len() < cfg.max_hits {
                    scan.hits.push(ScanHit {
                        source: HitSource::RandomCost,
                        shape: s,
                        sample: k,
                        instance: inst.to_raw(),
                        objective: cost,
                        solution: x,
                        verdict,
                    });
                }
            }
        }
        scan.distinct_violating_points = distinct.len();
        basis_phase(cfg, model, &shapes, &mut scan)?;
        models.push(scan);
    }
    Ok(ScanReport { config: cfg.clone(), shapes: shapes.len(), models })
}


/// Solves `A_J x = 1` for the 0/1 edge-by-link incidence restricted to the
/// links `cols` (square). Forward elimination is fraction-free in i128, the
/// back substitution exact-rational. `None` when singular or on overflow.
fn solve_all_tight(inst: &TapInstance, cols: &[usize]) -> Option<Vec<Rational>> {
    let m = cols.len();
    let mut a: Vec<Vec<i128>> = (0..m)
        .map(|e| {
            let mut r: Vec<i128> = cols.iter().map(|&l| inst.covers(l, e) as i128).collect();
            r.push(1);
            r
        })
        .collect();
    let mut prev: i128 = 1;
    for k in 0..m {
        let p = (k..m).find(|&i| a[i][k] != 0)?;
        a.swap(k, p);
        for i in k + 1..m {
            for j in k + 1..=m {
                let v = a[i][j].checked_mul(a[k][k])?.checked_sub(a[i][k].checked_mul(a[k][j])?)?;
                a[i][j] = v / prev;
            }
            a[i][k] = 0;
        }
        prev = a[k][k];
    }
    let mut x = vec![Rational::zero(); m];
    for k in (0..m).rev() {
        let mut acc = Rational::from_integer(a[k][m].into());
        for j in k + 1..m {
            acc -= Rational::from_integer(a[k][j].into()) * &x[j];
        }
        x[k] = acc / Rational::from_integer(a[k][k].into());
    }
    Some(x)
}

/// A cost vector for which the all-edges-tight vertex `x` is the unique
/// optimum: the sum of the tight edge rows plus one on every zero entry.
/// Any feasible y pays at least the value of x on these terms, with equality
/// only where all those constraints are tight, which pins y = x.
pub fn certificate_cost(inst: &TapInstance, x: &[Rational]) -> Vec<Rational> {
    (0..inst.num_links())
        .map(|l| {
            let tight = inst.link_path(l).len();
            int(tight as i64 + x[l].is_zero() as i64)
        })
        .collect()
}

fn basis_phase(cfg: &ScanConfig, model: Model, shapes: &[TapInstance], scan: &mut ModelScan) -> Result<(), LpError> {
    if cfg.basis_samples == 0 {
        return Ok(());
    }
    for (s, shape) in shapes.iter().enumerate() {
        let m = shape.num_edges();
        if shape.num_links() < m {
            continue;
        }
        let lp = build_lp(shape, model, cfg.odd_limit)?;
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(cfg.seed, s as u64, u64::MAX));
        let ids: Vec<usize> = (0..shape.num_links()).collect();
        let mut seen: BTreeSet<Vec<Rational>> = BTreeSet::new();
        for k in 0..cfg.basis_samples {
            let mut cols: Vec<usize> = ids.choose_multiple(&mut rng, m).copied().collect();
            cols.sort();
            let Some(xj) = solve_all_tight(shape, &cols) else { continue };
            if xj.iter().any(|v| v.is_negative()) {
                continue;
            }
            let mut x = crate::instance::FractionalSolution::zeros(shape.num_links());
            for (c, v) in cols.iter().zip(xj) {
                x.values[*c] = v;
            }
            if !seen.insert(x.values.clone()) {
                continue;
            }
            // an EDGE-LP vertex lying in a tighter polytope is a vertex there too
            if super::check_feasible(&lp, &x).is_err() {
                continue;
            }
            let verdict = check_conjecture(&x, &lp);
            debug_assert!(verdict.is_extreme);
            scan.basis_vertices += 1;
            *scan.basis_status_counts.entry(verdict.conjecture_status).or_default() += 1;
            if verdict.conjecture_status != ConjectureStatus::Violates {
                continue;
            }
            scan.basis_violations += 1;
            if scan.hits.len() < cfg.max_hits {
                let cost = certificate_cost(shape, &x.values);
                let sol = solve_lp(&lp, Some(&cost))?;
                assert_eq!(sol.x, x, "certificate cost must single out the sampled vertex");
                scan.hits.push(ScanHit {
                    source: HitSource::BasisSample,
                    shape: s,
                    sample: k,
                    instance: shape.to_raw(),
                    objective: cost,
                    solution: x.values,
                    verdict,
                });
            }
        }
    }
    Ok(())
}
