//! Deterministic instance and solution generators. Every generator takes an
//! explicit seed and draws from ChaCha8, so equal seeds give equal output.

use crate::deficient;
use crate::instance::{FractionalSolution, IntegralSolution, Link, NodeId, RawInstance, RawLink, TapInstance};
use crate::lp::{self, Model};
use crate::rational::{int, ratio, Rational};
use crate::threetap::{SetCoverInstance, SetSpec};
use num_traits::One;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent seed for item `i` of a run seeded with `seed`.
pub fn sub_seed(seed: u64, i: u64) -> u64 {
    let mut z = seed ^ i.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostRange {
    pub lo: i64,
    pub hi: i64,
}

impl CostRange {
    pub const UNIT: CostRange = CostRange { lo: 1, hi: 1 };
    pub fn draw(&self, rng: &mut impl Rng) -> Rational {
        int(rng.gen_range(self.lo..=self.hi))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GenError {
    #[error("invalid parameter: {0}")]
    Param(String),
}

/// Exact duplicates (same endpoints and cost) are dropped; they would add
/// nothing and the instance format rejects them.
fn raw_from(names: Vec<String>, edges: &[(NodeId, NodeId)], links: &[(NodeId, NodeId, Rational)]) -> RawInstance {
    let mut seen = BTreeSet::new();
    RawInstance {
        tree_edges: edges.iter().map(|&(a, b)| [names[a].clone(), names[b].clone()]).collect(),
        links: links
            .iter()
            .filter(|(u, v, c)| seen.insert(((*u).min(*v), (*u).max(*v), c.clone())))
            .map(|(u, v, c)| RawLink { u: names[*u].clone(), v: names[*v].clone(), cost: c.clone() })
            .collect(),
        nodes: names,
        root: None,
        unweighted: false,
    }
}

/// Nodes on each side of tree edge `e` (side of `edges[e].0` first).
fn sides(n: usize, edges: &[(NodeId, NodeId)], e: usize) -> (Vec<NodeId>, Vec<NodeId>) {
    let mut adj = vec![Vec::new(); n];
    for (i, &(a, b)) in edges.iter().enumerate() {
        if i != e {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    let mut seen = vec![false; n];
    let mut stack = vec![edges[e].0];
    seen[edges[e].0] = true;
    while let Some(v) = stack.pop() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                stack.push(w);
            }
        }
    }
    ((0..n).filter(|&v| seen[v]).collect(), (0..n).filter(|&v| !seen[v]).collect())
}

fn path_edges(n: usize, edges: &[(NodeId, NodeId)], u: NodeId, v: NodeId) -> BTreeSet<usize> {
    let mut adj = vec![Vec::new(); n];
    for (i, &(a, b)) in edges.iter().enumerate() {
        adj[a].push((b, i));
        adj[b].push((a, i));
    }
    let mut prev: Vec<Option<(NodeId, usize)>> = vec![None; n];
    let mut stack = vec![u];
    let mut seen = vec![false; n];
    seen[u] = true;
    while let Some(x) = stack.pop() {
        for &(y, e) in &adj[x] {
            if !seen[y] {
                seen[y] = true;
                prev[y] = Some((x, e));
                stack.push(y);
            }
        }
    }
    let mut out = BTreeSet::new();
    let mut x = v;
    while let Some((p, e)) = prev[x] {
        out.insert(e);
        x = p;
    }
    out
}

/// Adds a link across every uncovered edge, with endpoints drawn from
/// `allowed` on each side.
fn repair_coverage(
    n: usize,
    edges: &[(NodeId, NodeId)],
    links: &mut Vec<(NodeId, NodeId, Rational)>,
    allowed: &dyn Fn(NodeId) -> bool,
    costs: CostRange,
    rng: &mut impl Rng,
) {
    let mut covered: BTreeSet<usize> = BTreeSet::new();
    for &(u, v, _) in links.iter() {
        covered.extend(path_edges(n, edges, u, v));
    }
    for e in 0..edges.len() {
        if covered.contains(&e) {
            continue;
        }
        let (a, b) = sides(n, edges, e);
        let a: Vec<NodeId> = a.into_iter().filter(|&v| allowed(v)).collect();
        let b: Vec<NodeId> = b.into_iter().filter(|&v| allowed(v)).collect();
        let (&u, &v) = (a.choose(rng).unwrap(), b.choose(rng).unwrap());
        covered.extend(path_edges(n, edges, u, v));
        links.push((u.min(v), u.max(v), costs.draw(rng)));
    }
}

/// Random binary tree on `n` nodes (even, ≥ 2): grown from one edge by
/// repeatedly subdividing a random edge and hanging a new leaf off the new
/// node. Internal nodes are `i*`, leaves `l*`.
pub fn random_binary_shape(n: usize, rng: &mut impl Rng) -> Result<(Vec<String>, Vec<(NodeId, NodeId)>), GenError> {
    if n < 2 || n % 2 == 1 {
        return Err(GenError::Param(format!("binary trees have an even number of nodes ≥ 2, got {n}")));
    }
    let mut names = vec!["l0".to_string(), "l1".to_string()];
    let mut edges = vec![(0, 1)];
    let (mut internal, mut leaves) = (0, 2);
    while names.len() < n {
        let e = rng.gen_range(0..edges.len());
        let (a, b) = edges[e];
        let i = names.len();
        names.push(format!("i{internal}"));
        internal += 1;
        let l = names.len();
        names.push(format!("l{leaves}"));
        leaves += 1;
        edges[e] = (a, i);
        edges.push((i, b));
        edges.push((i, l));
    }
    Ok((names, edges))
}

/// Binary tree with random leaf-to-leaf links: each leaf pair is a link with
/// probability `link_prob`, then uncovered edges get one extra link each.
pub fn random_binary(n: usize, link_prob: f64, costs: CostRange, seed: u64) -> Result<RawInstance, GenError> {
    let mut rng = rng(seed);
    let (names, edges) = random_binary_shape(n, &mut rng)?;
    let mut deg = vec![0; names.len()];
    for &(a, b) in &edges {
        deg[a] += 1;
        deg[b] += 1;
    }
    let leaves: Vec<NodeId> = (0..names.len()).filter(|&v| deg[v] == 1).collect();
    let mut links = Vec::new();
    for (i, &a) in leaves.iter().enumerate() {
        for &b in &leaves[i + 1..] {
            if rng.gen_bool(link_prob) {
                links.push((a, b, costs.draw(&mut rng)));
            }
        }
    }
    let is_leaf = |v: NodeId| deg[v] == 1;
    repair_coverage(names.len(), &edges, &mut links, &is_leaf, costs, &mut rng);
    Ok(raw_from(names, &edges, &links))
}

/// Random recursive tree on `n` nodes with `num_links` random links between
/// distinct nodes, plus repair links for uncovered edges.
pub fn random_tree(n: usize, num_links: usize, costs: CostRange, seed: u64) -> Result<RawInstance, GenError> {
    if n < 2 {
        return Err(GenError::Param("need at least 2 nodes".into()));
    }
    let mut rng = rng(seed);
    let names: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
    let edges: Vec<(NodeId, NodeId)> = (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
    let mut links = Vec::new();
    for _ in 0..num_links {
        let u = rng.gen_range(0..n);
        let mut v = rng.gen_range(0..n - 1);
        if v >= u {
            v += 1;
        }
        links.push((u.min(v), u.max(v), costs.draw(&mut rng)));
    }
    repair_coverage(n, &edges, &mut links, &|_| true, costs, &mut rng);
    Ok(raw_from(names, &edges, &links))
}

/// Spine `v0 … v(s−1)` with one leaf `u_i` under every interior spine node:
/// `2s − 2` nodes, all of degree 1 or 3. An odd `n` is rounded down.
pub fn caterpillar_shape(n: usize) -> Result<(Vec<String>, Vec<(NodeId, NodeId)>), GenError> {
    if n < 2 {
        return Err(GenError::Param("need at least 2 nodes".into()));
    }
    let s = n / 2 + 1;
    let mut names: Vec<String> = (0..s).map(|i| format!("v{i}")).collect();
    let mut edges: Vec<(NodeId, NodeId)> = (1..s).map(|i| (i - 1, i)).collect();
    for i in 1..s - 1 {
        names.push(format!("u{i}"));
        edges.push((i, names.len() - 1));
    }
    Ok((names, edges))
}

/// Caterpillar with every leaf-to-leaf pair as a link.
pub fn caterpillar(n: usize, costs: CostRange, seed: u64) -> Result<RawInstance, GenError> {
    let mut rng = rng(seed);
    let (names, edges) = caterpillar_shape(n)?;
    let links = all_leaf_pairs(&names, &edges, costs, &mut rng);
    Ok(raw_from(names, &edges, &links))
}

fn all_leaf_pairs(
    names: &[String],
    edges: &[(NodeId, NodeId)],
    costs: CostRange,
    rng: &mut impl Rng,
) -> Vec<(NodeId, NodeId, Rational)> {
    let mut deg = vec![0; names.len()];
    for &(a, b) in edges {
        deg[a] += 1;
        deg[b] += 1;
    }
    let leaves: Vec<NodeId> = (0..names.len()).filter(|&v| deg[v] == 1).collect();
    let mut links = Vec::new();
    for (i, &a) in leaves.iter().enumerate() {
        for &b in &leaves[i + 1..] {
            links.push((a, b, costs.draw(rng)));
        }
    }
    links
}

/// Star with center `c` and leaves `x1 … xk`, all leaf pairs linked.
pub fn star(k: usize, costs: CostRange, seed: u64) -> Result<RawInstance, GenError> {
    if k < 2 {
        return Err(GenError::Param("a star needs at least 2 leaves".into()));
    }
    let mut rng = rng(seed);
    let mut names = vec!["c".to_string()];
    names.extend((1..=k).map(|i| format!("x{i}")));
    let edges: Vec<(NodeId, NodeId)> = (1..=k).map(|i| (0, i)).collect();
    let links = all_leaf_pairs(&names, &edges, costs, &mut rng);
    Ok(raw_from(names, &edges, &links))
}

pub const FIG2_LINKS: [(&str, &str); 7] =
    [("v0", "u1"), ("u1", "u2"), ("u2", "u3"), ("u3", "v4"), ("v0", "v1"), ("u1", "v2"), ("u2", "v3")];

/// Values printed next to the links of [`FIG2_LINKS`].
pub fn fig2_printed_values() -> Vec<Rational> {
    [(1, 2), (1, 4), (3, 8), (5, 8), (1, 2), (1, 4), (3, 8)].iter().map(|&(p, q)| ratio(p, q)).collect()
}

/// The 8-node caterpillar with its seven drawn links; `costs` gives one
/// cost per link (default all 1).
pub fn fig2(costs: Option<&[Rational]>) -> Result<RawInstance, GenError> {
    let (names, edges) = caterpillar_shape(8)?;
    let costs: Vec<Rational> = match costs {
        Some(c) if c.len() == FIG2_LINKS.len() => c.to_vec(),
        Some(c) => return Err(GenError::Param(format!("fig2 takes 7 costs, got {}", c.len()))),
        None => vec![int(1); FIG2_LINKS.len()],
    };
    let id = |s: &str| names.iter().position(|n| n == s).unwrap();
    let links: Vec<(NodeId, NodeId, Rational)> =
        FIG2_LINKS.iter().zip(costs).map(|(&(a, b), c)| (id(a), id(b), c)).collect();
    Ok(raw_from(names.clone(), &edges, &links))
}

/// Random tree with each non-tree pair available with probability
/// `link_prob`; every edge is then given at least one triangle.
pub fn random_3tap(n: usize, link_prob: f64, unweighted: bool, costs: CostRange, seed: u64) -> Result<RawInstance, GenError> {
    if n < 3 {
        return Err(GenError::Param("3TAP needs at least 3 nodes".into()));
    }
    let mut rng = rng(seed);
    let names: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
    let edges: Vec<(NodeId, NodeId)> = (1..n).map(|v| (rng.gen_range(0..v), v)).collect();
    let tree: BTreeSet<(NodeId, NodeId)> = edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    let costs = if unweighted { CostRange::UNIT } else { costs };
    let mut pairs: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
    let mut links = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if !tree.contains(&(a, b)) && rng.gen_bool(link_prob) {
                pairs.insert((a, b));
                links.push((a, b, costs.draw(&mut rng)));
            }
        }
    }
    let present = |p: &BTreeSet<(NodeId, NodeId)>, a: NodeId, b: NodeId| {
        let k = (a.min(b), a.max(b));
        tree.contains(&k) || p.contains(&k)
    };
    for &(a, b) in &edges {
        if (0..n).any(|v| v != a && v != b && present(&pairs, a, v) && present(&pairs, b, v)) {
            continue;
        }
        let apexes: Vec<NodeId> = (0..n).filter(|&v| v != a && v != b).collect();
        let v = *apexes.choose(&mut rng).unwrap();
        for x in [a, b] {
            if !present(&pairs, x, v) {
                pairs.insert((x.min(v), x.max(v)));
                links.push((x.min(v), x.max(v), costs.draw(&mut rng)));
            }
        }
    }
    let mut raw = raw_from(names, &edges, &links);
    raw.unweighted = unweighted;
    Ok(raw)
}

/// Random set cover with `1..=max_sets` sets over `0..=max_elements`
/// elements, each element in at least one set.
pub fn random_set_cover(max_sets: usize, max_elements: usize, costs: CostRange, seed: u64) -> SetCoverInstance {
    let mut rng = rng(seed);
    let k = rng.gen_range(1..=max_sets.max(1));
    let n = rng.gen_range(0..=max_elements);
    let elements: Vec<String> = (1..=n).map(|j| format!("e{j}")).collect();
    let mut members: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); k];
    for j in 0..n {
        for m in members.iter_mut() {
            if rng.gen_bool(0.4) {
                m.insert(j);
            }
        }
        if !members.iter().any(|m| m.contains(&j)) {
            members[rng.gen_range(0..k)].insert(j);
        }
    }
    let sets = members
        .into_iter()
        .enumerate()
        .map(|(i, m)| SetSpec {
            name: format!("S{}", i + 1),
            elements: m.into_iter().map(|j| elements[j].clone()).collect(),
            cost: costs.draw(&mut rng),
        })
        .collect();
    SetCoverInstance { elements, sets }
}

/// Random EDGE-LP feasible point: each link draws a value in `{0, 1/q, …,
/// 1}` for a random `q ∈ denominators`, then uncovered edges are topped up
/// on a random covering link.
pub fn random_feasible_x(inst: &TapInstance, denominators: &[i64], seed: u64) -> FractionalSolution {
    let mut rng = rng(seed);
    let mut x = FractionalSolution::zeros(inst.num_links());
    for l in 0..inst.num_links() {
        if rng.gen_bool(0.5) {
            let q = *denominators.choose(&mut rng).unwrap();
            x.values[l] = ratio(rng.gen_range(0..=q), q);
        }
    }
    for e in 0..inst.num_edges() {
        let cov = inst.coverage(&x, e);
        if cov < Rational::one() {
            let l = *inst.cover_set(e).choose(&mut rng).expect("coverable");
            x.values[l] += Rational::one() - cov;
        }
    }
    x
}

/// Random NODE-LP feasible point on a binary leaf-link instance: an EDGE-LP
/// point, then every degree-3 node short of 2 is topped up on one link.
pub fn random_node_feasible_x(inst: &TapInstance, denominators: &[i64], seed: u64) -> FractionalSolution {
    let mut x = random_feasible_x(inst, denominators, seed);
    let mut rng = rng(sub_seed(seed, 1));
    let lp = lp::build_lp(inst, Model::Node, 0).expect("binary leaf-link instance");
    for c in &lp.constraints {
        let lhs = c.lhs(&x);
        if lhs < c.rhs {
            let t = c.coeffs.choose(&mut rng).expect("node rows are never empty");
            x.values[t.var] += &c.rhs - lhs;
        }
    }
    debug_assert!(lp::check_feasible(&lp, &x).is_ok());
    x
}

/// Random inclusion-minimal integral cover: links in random order until
/// every edge is covered, then redundant links dropped in random order.
pub fn random_minimal_cover(inst: &TapInstance, rng: &mut impl Rng) -> IntegralSolution {
    let mut order: Vec<usize> = (0..inst.num_links()).collect();
    order.shuffle(rng);
    let mut count = vec![0usize; inst.num_edges()];
    let mut chosen = Vec::new();
    for &l in &order {
        if inst.link_path(l).iter().any(|&e| count[e] == 0) {
            for &e in inst.link_path(l) {
                count[e] += 1;
            }
            chosen.push(l);
        }
    }
    chosen.shuffle(rng);
    let mut keep = Vec::new();
    for l in chosen {
        if inst.link_path(l).iter().all(|&e| count[e] >= 2) {
            for &e in inst.link_path(l) {
                count[e] -= 1;
            }
        } else {
            keep.push(l);
        }
    }
    IntegralSolution::new(keep)
}

/// Convex combination of `parts` random minimal covers with weights
/// `a_i / Σ a`, `a_i ∈ 1..=3`. Integral covers satisfy every node and
/// odd-set row, so the combination does too.
pub fn convex_cover_point(inst: &TapInstance, parts: usize, seed: u64) -> FractionalSolution {
    let mut rng = rng(seed);
    let weights: Vec<i64> = (0..parts).map(|_| rng.gen_range(1..=3)).collect();
    let total: i64 = weights.iter().sum();
    let mut x = FractionalSolution::zeros(inst.num_links());
    for &w in &weights {
        let cover = random_minimal_cover(inst, &mut rng);
        for &l in &cover.chosen {
            x.values[l] += ratio(w, total);
        }
    }
    x
}

/// A binary leaf-link instance on `n` nodes (every leaf pair linked) and a
/// convex-cover point whose deficient edges form exactly `paths` paths, or
/// `None` after `attempts` draws.
pub fn deficient_instance(
    paths: usize,
    n: usize,
    costs: CostRange,
    seed: u64,
    attempts: usize,
) -> Option<(TapInstance, FractionalSolution)> {
    for a in 0..attempts as u64 {
        let s = sub_seed(seed, a);
        let raw = random_binary(n, 1.0, costs, s).ok()?;
        let inst = TapInstance::from_raw(&raw).ok()?;
        let parts = 2 + (s % 6) as usize;
        let x = convex_cover_point(&inst, parts, sub_seed(s, 7));
        if let Ok(p) = deficient::deficiency_profile(&inst, &x) {
            if p.paths.len() == paths {
                return Some((inst, x));
            }
        }
    }
    None
}

/// Builds an instance from node names; panics on malformed input.
pub fn instance(nodes: &[&str], edges: &[(&str, &str)], links: &[(&str, &str, Rational)]) -> TapInstance {
    let names: Vec<String> = nodes.iter().map(|s| s.to_string()).collect();
    let id = |s: &str| names.iter().position(|n| n == s).unwrap_or_else(|| panic!("unknown node {s}"));
    let e = edges.iter().map(|&(a, b)| (id(a), id(b))).collect();
    let l = links.iter().map(|(u, v, c)| Link { u: id(u), v: id(v), cost: c.clone() }).collect();
    TapInstance::from_parts(names.clone(), e, l, None).expect("well-formed instance")
}
