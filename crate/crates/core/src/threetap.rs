//! Triangle augmentation (3TAP): every tree edge of T ∪ A must lie on a
//! 3-cycle. Weighted greedy via maximum-density stars, the set-cover gadget,
//! and the unweighted 4-approximation.

use crate::instance::{EdgeId, InstanceError, IntegralSolution, Link, LinkId, NodeId, RawInstance, TapInstance};
use crate::rational::{self, int, Rational};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap, VecDeque};

#[derive(Debug, thiserror::Error)]
pub enum ThreeTapError {
    #[error(transparent)]
    Instance(#[from] InstanceError),
    #[error("unweighted instance has link {link} with cost {cost}, expected 1")]
    NonUnitCost { link: LinkId, cost: String },
    #[error("tree edge {edge} lies on no candidate triangle")]
    Infeasible { edge: String },
    #[error("node {spoke} has no available link to center {center}")]
    UnavailableSpoke { center: String, spoke: String },
    #[error("no star covers any of the remaining edges, e.g. {edge}")]
    Stuck { edge: String },
}

/// One way to put a tree edge `ab` on a triangle: the apex `v` and the
/// (cheapest) links needed for the sides `av`, `bv` that are not tree edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriangleOption {
    pub apex: NodeId,
    pub links: Vec<LinkId>,
    pub cost: Rational,
}

#[derive(Debug, Clone)]
pub struct ThreeTapInstance {
    tree: TapInstance,
    unweighted: bool,
    /// Cheapest link per unordered pair, lowest id on ties.
    pair_link: HashMap<(NodeId, NodeId), LinkId>,
    options: Vec<Vec<TriangleOption>>,
}

fn key(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    (a.min(b), a.max(b))
}

impl ThreeTapInstance {
    pub fn from_raw(raw: &RawInstance) -> Result<Self, ThreeTapError> {
        let tree = TapInstance::from_raw(raw)?;
        Self::new(tree, raw.unweighted)
    }

    pub fn new(tree: TapInstance, unweighted: bool) -> Result<Self, ThreeTapError> {
        if unweighted {
            if let Some((l, link)) = tree.links().iter().enumerate().find(|(_, l)| !l.cost.is_one()) {
                return Err(ThreeTapError::NonUnitCost { link: l, cost: link.cost.to_string() });
            }
        }
        let mut pair_link: HashMap<(NodeId, NodeId), LinkId> = HashMap::new();
        for (l, link) in tree.links().iter().enumerate() {
            let k = key(link.u, link.v);
            match pair_link.get(&k) {
                Some(&old) if tree.link(old).cost <= link.cost => {}
                _ => {
                    pair_link.insert(k, l);
                }
            }
        }
        let mut inst = ThreeTapInstance { tree, unweighted, pair_link, options: Vec::new() };
        inst.options = (0..inst.tree.num_edges()).map(|e| inst.compute_options(e)).collect();
        Ok(inst)
    }

    /// Side `uv` of a triangle: `Some(None)` for a tree edge, `Some(Some(l))`
    /// for an available link, `None` when unavailable.
    fn side(&self, u: NodeId, v: NodeId) -> Option<Option<LinkId>> {
        if self.tree.edge_between(u, v).is_some() {
            return Some(None);
        }
        self.pair_link.get(&key(u, v)).map(|&l| Some(l))
    }

    fn compute_options(&self, e: EdgeId) -> Vec<TriangleOption> {
        let (a, b) = self.tree.edge(e);
        let mut out: Vec<TriangleOption> = (0..self.tree.num_nodes())
            .filter(|&v| v != a && v != b)
            .filter_map(|v| {
                let sa = self.side(a, v)?;
                let sb = self.side(b, v)?;
                let links: Vec<LinkId> = [sa, sb].into_iter().flatten().collect();
                let cost = links.iter().map(|&l| self.tree.link(l).cost.clone()).sum();
                Some(TriangleOption { apex: v, links, cost })
            })
            .collect();
        out.sort_by(|x, y| x.cost.cmp(&y.cost).then(x.apex.cmp(&y.apex)));
        out
    }

    pub fn tree(&self) -> &TapInstance {
        &self.tree
    }
    pub fn unweighted(&self) -> bool {
        self.unweighted
    }
    pub fn num_nodes(&self) -> usize {
        self.tree.num_nodes()
    }
    pub fn num_edges(&self) -> usize {
        self.tree.num_edges()
    }
    pub fn num_links(&self) -> usize {
        self.tree.num_links()
    }

    /// Candidate triangles for tree edge `e`, cheapest first.
    pub fn options(&self, e: EdgeId) -> &[TriangleOption] {
        &self.options[e]
    }

    pub fn pair_link(&self, u: NodeId, v: NodeId) -> Option<LinkId> {
        self.pair_link.get(&key(u, v)).copied()
    }

    pub fn to_raw(&self) -> RawInstance {
        RawInstance { unweighted: self.unweighted, ..self.tree.to_raw() }
    }

    pub fn cost(&self, a: &IntegralSolution) -> Rational {
        self.tree.integral_cost(a)
    }

    /// Adjacency of T ∪ A as a pair set.
    fn present(&self, a: &IntegralSolution) -> BTreeSet<(NodeId, NodeId)> {
        let mut s: BTreeSet<_> = self.tree.edges().iter().map(|&(x, y)| key(x, y)).collect();
        for &l in &a.chosen {
            let link = self.tree.link(l);
            s.insert(key(link.u, link.v));
        }
        s
    }

    /// Tree edges not on any triangle of T ∪ A.
    pub fn uncovered(&self, a: &IntegralSolution) -> Vec<EdgeId> {
        let present = self.present(a);
        let n = self.num_nodes();
        (0..self.num_edges())
            .filter(|&e| {
                let (x, y) = self.tree.edge(e);
                !(0..n).any(|v| v != x && v != y && present.contains(&key(x, v)) && present.contains(&key(y, v)))
            })
            .collect()
    }

    pub fn is_feasible(&self, a: &IntegralSolution) -> bool {
        self.uncovered(a).is_empty()
    }

    /// First tree edge without any triangle candidate.
    pub fn first_impossible_edge(&self) -> Option<EdgeId> {
        (0..self.num_edges()).find(|&e| self.options[e].is_empty())
    }
}

// ---------------------------------------------------------------- stars

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Star {
    pub center: NodeId,
    /// Sorted spoke nodes.
    pub spokes: Vec<NodeId>,
    #[serde(with = "rational::serde_str")]
    pub cost: Rational,
    /// Tree edges with both endpoints among the spokes.
    pub covered: Vec<EdgeId>,
}

impl Star {
    /// Covered edges per unit cost; `None` encodes +∞ (zero cost, positive
    /// coverage).
    pub fn density(&self, uncovered: &BTreeSet<EdgeId>) -> Option<Rational> {
        let m = self.covered.iter().filter(|e| uncovered.contains(e)).count();
        if self.cost.is_zero() {
            return if m > 0 { None } else { Some(Rational::zero()) };
        }
        Some(int(m as i64) / &self.cost)
    }
}

/// Spoke weight `c(uv)`: zero for a tree neighbour, else the cheapest link.
fn spoke_cost(inst: &ThreeTapInstance, v: NodeId, u: NodeId, owned: &BTreeSet<LinkId>) -> Option<Rational> {
    match inst.side(v, u)? {
        None => Some(Rational::zero()),
        Some(l) if owned.contains(&l) => Some(Rational::zero()),
        Some(l) => Some(inst.tree.link(l).cost.clone()),
    }
}

pub fn star_coverage(inst: &ThreeTapInstance, v: NodeId, spokes: &[NodeId]) -> Result<Star, ThreeTapError> {
    star_with_owned(inst, v, spokes, &BTreeSet::new())
}

fn star_with_owned(
    inst: &ThreeTapInstance,
    v: NodeId,
    spokes: &[NodeId],
    owned: &BTreeSet<LinkId>,
) -> Result<Star, ThreeTapError> {
    let mut cost = Rational::zero();
    for &u in spokes {
        match spoke_cost(inst, v, u, owned) {
            Some(c) if u != v => cost += c,
            _ => {
                return Err(ThreeTapError::UnavailableSpoke {
                    center: inst.tree.node_name(v).into(),
                    spoke: inst.tree.node_name(u).into(),
                })
            }
        }
    }
    let set: BTreeSet<NodeId> = spokes.iter().copied().collect();
    let covered = (0..inst.num_edges())
        .filter(|&e| {
            let (a, b) = inst.tree.edge(e);
            set.contains(&a) && set.contains(&b)
        })
        .collect();
    Ok(Star { center: v, spokes: set.into_iter().collect(), cost, covered })
}

/// Dense max-flow over exact rationals (Edmonds–Karp).
struct FlowNet {
    cap: Vec<Vec<Rational>>,
}

impl FlowNet {
    fn new(n: usize) -> Self {
        FlowNet { cap: vec![vec![Rational::zero(); n]; n] }
    }

    fn add(&mut self, a: usize, b: usize, c: Rational) {
        self.cap[a][b] += c;
    }

    /// Runs max-flow in place and returns the nodes reachable from `s` in the
    /// final residual graph (the minimal source side of a minimum cut).
    fn min_cut(&mut self, s: usize, t: usize) -> Vec<bool> {
        let n = self.cap.len();
        loop {
            let mut prev = vec![usize::MAX; n];
            prev[s] = s;
            let mut q = VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                for w in 0..n {
                    if prev[w] == usize::MAX && self.cap[u][w].is_positive() {
                        prev[w] = u;
                        q.push_back(w);
                    }
                }
            }
            if prev[t] == usize::MAX {
                return prev.iter().map(|&p| p != usize::MAX).collect();
            }
            let mut bottleneck: Option<Rational> = None;
            let mut w = t;
            while w != s {
                let u = prev[w];
                let c = &self.cap[u][w];
                if bottleneck.as_ref().is_none_or(|b| c < b) {
                    bottleneck = Some(c.clone());
                }
                w = u;
            }
            let f = bottleneck.unwrap();
            let mut w = t;
            while w != s {
                let u = prev[w];
                self.cap[u][w] -= &f;
                self.cap[w][u] += &f;
                w = u;
            }
        }
    }
}

/// Maximises `|E(U)| − λ·w(U)` over spoke sets `U` by a min cut: source →
/// edge node (1), edge node → both endpoints (∞), spoke → sink (λ·w).
fn best_closure(weights: &[Rational], edges: &[(usize, usize)], lambda: &Rational) -> Vec<usize> {
    let (nv, ne) = (weights.len(), edges.len());
    let s = nv + ne;
    let t = s + 1;
    let inf = int(ne as i64 + 1);
    let mut net = FlowNet::new(nv + ne + 2);
    for (i, &(a, b)) in edges.iter().enumerate() {
        net.add(s, nv + i, int(1));
        net.add(nv + i, a, inf.clone());
        net.add(nv + i, b, inf.clone());
    }
    for (u, w) in weights.iter().enumerate() {
        let c = lambda * w;
        if c.is_positive() {
            net.add(u, t, c);
        }
    }
    let side = net.min_cut(s, t);
    (0..nv).filter(|&u| side[u]).collect()
}

/// Densest star at a fixed center, by Dinkelbach iteration on the ratio:
/// each round solves the parametric closure at the current best density and
/// stops once nothing beats it. Every round strictly increases the density
/// over a finite set of ratios, so the result is exact.
fn densest_at(
    inst: &ThreeTapInstance,
    v: NodeId,
    uncovered: &BTreeSet<EdgeId>,
    owned: &BTreeSet<LinkId>,
) -> Option<Star> {
    let n = inst.num_nodes();
    let cand: Vec<NodeId> = (0..n).filter(|&u| u != v && spoke_cost(inst, v, u, owned).is_some()).collect();
    let pos: HashMap<NodeId, usize> = cand.iter().enumerate().map(|(i, &u)| (u, i)).collect();
    let edges: Vec<(usize, usize)> = uncovered
        .iter()
        .filter_map(|&e| {
            let (a, b) = inst.tree.edge(e);
            Some((*pos.get(&a)?, *pos.get(&b)?))
        })
        .collect();
    if edges.is_empty() {
        return None;
    }
    let weights: Vec<Rational> = cand.iter().map(|&u| spoke_cost(inst, v, u, owned).unwrap()).collect();
    let measure = |set: &[usize]| -> (usize, Rational) {
        let inside: BTreeSet<usize> = set.iter().copied().collect();
        let m = edges.iter().filter(|(a, b)| inside.contains(a) && inside.contains(b)).count();
        (m, set.iter().map(|&i| weights[i].clone()).sum())
    };
    // start from the best single edge
    let mut best: Vec<usize> = Vec::new();
    let mut best_d: Option<Rational> = None;
    debug_assert!(!edges.is_empty());
    for &(a, b) in &edges {
        let set = vec![a.min(b), a.max(b)];
        let w = &weights[a] + &weights[b];
        if w.is_zero() {
            // free star with coverage: infinitely dense
            best = set;
            best_d = None;
            break;
        }
        let d = int(1) / w;
        if best_d.as_ref().is_none_or(|bd| d > *bd) {
            best = set;
            best_d = Some(d);
        }
    }
    if let Some(mut lambda) = best_d.clone() {
        loop {
            let u = best_closure(&weights, &edges, &lambda);
            let (m, w) = measure(&u);
            if m == 0 {
                break;
            }
            if w.is_zero() {
                best = u;
                break;
            }
            let d = int(m as i64) / w;
            if d <= lambda {
                break;
            }
            lambda = d;
            best = u;
        }
    }
    // drop spokes that touch no covered edge
    let inside: BTreeSet<usize> = best.iter().copied().collect();
    let useful: BTreeSet<usize> = edges
        .iter()
        .filter(|(a, b)| inside.contains(a) && inside.contains(b))
        .flat_map(|&(a, b)| [a, b])
        .collect();
    let spokes: Vec<NodeId> = useful.into_iter().map(|i| cand[i]).collect();
    star_with_owned(inst, v, &spokes, owned).ok()
}

fn better(d: &Option<Rational>, than: &Option<Rational>) -> bool {
    match (d, than) {
        (None, None) => false,
        (None, Some(_)) => true,
        (Some(_), None) => false,
        (Some(a), Some(b)) => a > b,
    }
}

/// Maximum-density star over all centers; ties keep the first center in
/// name order. Links in `owned` are already paid for and weigh nothing.
pub fn max_density_star_with(
    inst: &ThreeTapInstance,
    uncovered: &BTreeSet<EdgeId>,
    owned: &BTreeSet<LinkId>,
) -> Result<Star, ThreeTapError> {
    let mut centers: Vec<NodeId> = (0..inst.num_nodes()).collect();
    centers.sort_by(|&a, &b| inst.tree.node_name(a).cmp(inst.tree.node_name(b)));
    let mut best: Option<(Star, Option<Rational>)> = None;
    for v in centers {
        let Some(star) = densest_at(inst, v, uncovered, owned) else { continue };
        let d = star.density(uncovered);
        if d.as_ref().is_some_and(|d| d.is_zero()) {
            continue;
        }
        if best.as_ref().is_none_or(|(_, bd)| better(&d, bd)) {
            best = Some((star, d));
        }
    }
    best.map(|(s, _)| s).ok_or_else(|| ThreeTapError::Stuck {
        edge: uncovered.iter().next().map(|&e| inst.tree.edge_name(e)).unwrap_or_default(),
    })
}

pub fn max_density_star(inst: &ThreeTapInstance, uncovered: &BTreeSet<EdgeId>) -> Result<Star, ThreeTapError> {
    max_density_star_with(inst, uncovered, &BTreeSet::new())
}

/// Exhaustive densest star, for cross-checking on small instances.
pub fn brute_force_density(inst: &ThreeTapInstance, uncovered: &BTreeSet<EdgeId>) -> Option<Option<Rational>> {
    let n = inst.num_nodes();
    let mut best: Option<Option<Rational>> = None;
    for v in 0..n {
        let cand: Vec<NodeId> = (0..n).filter(|&u| u != v && inst.side(v, u).is_some()).collect();
        assert!(cand.len() < 24);
        for mask in 1u32..(1 << cand.len()) {
            let spokes: Vec<NodeId> = (0..cand.len()).filter(|i| mask >> i & 1 == 1).map(|i| cand[i]).collect();
            let star = star_coverage(inst, v, &spokes).unwrap();
            let d = star.density(uncovered);
            if d.as_ref().is_some_and(|d| d.is_zero()) {
                continue;
            }
            if best.as_ref().is_none_or(|bd| better(&d, bd)) {
                best = Some(d);
            }
        }
    }
    best
}

// ---------------------------------------------------------------- algorithms

#[derive(Debug, Clone, Serialize)]
pub struct GreedyTrace {
    pub rounds: Vec<GreedyRound>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GreedyRound {
    pub center: String,
    pub spokes: Vec<String>,
    #[serde(with = "rational::serde_str")]
    pub cost: Rational,
    pub newly_covered: usize,
}

/// Greedy set cover over stars. Zero-cost links are bought up front; after
/// that each round buys the densest star against the edges still off every
/// triangle, counting links already bought as free.
pub fn greedy_3tap(inst: &ThreeTapInstance) -> Result<(IntegralSolution, GreedyTrace), ThreeTapError> {
    if let Some(e) = inst.first_impossible_edge() {
        return Err(ThreeTapError::Infeasible { edge: inst.tree.edge_name(e) });
    }
    let mut chosen: BTreeSet<LinkId> =
        (0..inst.num_links()).filter(|&l| inst.tree.link(l).cost.is_zero()).collect();
    let mut rounds = Vec::new();
    loop {
        let sol = IntegralSolution { chosen: chosen.clone() };
        let uncovered: BTreeSet<EdgeId> = inst.uncovered(&sol).into_iter().collect();
        if uncovered.is_empty() {
            return Ok((sol, GreedyTrace { rounds }));
        }
        let star = max_density_star_with(inst, &uncovered, &chosen)?;
        for &u in &star.spokes {
            if let Some(Some(l)) = inst.side(star.center, u) {
                chosen.insert(l);
            }
        }
        let after = inst.uncovered(&IntegralSolution { chosen: chosen.clone() }).len();
        debug_assert!(after < uncovered.len());
        rounds.push(GreedyRound {
            center: inst.tree.node_name(star.center).into(),
            spokes: star.spokes.iter().map(|&u| inst.tree.node_name(u).into()).collect(),
            cost: star.cost,
            newly_covered: uncovered.len() - after,
        });
    }
}

/// For each tree edge not yet on a triangle, add the sides of the apex that
/// needs the fewest new links; then drop links (highest id first) whose
/// removal keeps the solution feasible.
pub fn unweighted_3tap(inst: &ThreeTapInstance) -> Result<IntegralSolution, ThreeTapError> {
    if let Some(e) = inst.first_impossible_edge() {
        return Err(ThreeTapError::Infeasible { edge: inst.tree.edge_name(e) });
    }
    let mut chosen: BTreeSet<LinkId> = BTreeSet::new();
    for e in 0..inst.num_edges() {
        let sol = IntegralSolution { chosen: chosen.clone() };
        if !inst.uncovered(&sol).contains(&e) {
            continue;
        }
        let opt = inst
            .options(e)
            .iter()
            .min_by_key(|o| (o.links.iter().filter(|l| !chosen.contains(l)).count(), o.apex))
            .unwrap();
        chosen.extend(opt.links.iter().copied());
    }
    let ids: Vec<LinkId> = chosen.iter().rev().copied().collect();
    for l in ids {
        chosen.remove(&l);
        if !inst.is_feasible(&IntegralSolution { chosen: chosen.clone() }) {
            chosen.insert(l);
        }
    }
    Ok(IntegralSolution { chosen })
}

/// Splits a feasible solution, with every link doubled, into one star per
/// vertex (all tree edges and links at that vertex). Returns the stars when
/// together they cover every tree edge and cost exactly twice the solution.
pub fn star_decomposition(inst: &ThreeTapInstance, a: &IntegralSolution) -> Option<Vec<Star>> {
    let n = inst.num_nodes();
    let mut nbrs: Vec<BTreeSet<NodeId>> = vec![BTreeSet::new(); n];
    for &(x, y) in inst.tree.edges() {
        nbrs[x].insert(y);
        nbrs[y].insert(x);
    }
    let mut cost = vec![Rational::zero(); n];
    for &l in &a.chosen {
        let Link { u, v, cost: c } = inst.tree.link(l);
        nbrs[*u].insert(*v);
        nbrs[*v].insert(*u);
        cost[*u] += c;
        cost[*v] += c;
    }
    let stars: Vec<Star> = (0..n)
        .map(|v| {
            let spokes: Vec<NodeId> = nbrs[v].iter().copied().collect();
            let covered = (0..inst.num_edges())
                .filter(|&e| {
                    let (x, y) = inst.tree.edge(e);
                    nbrs[v].contains(&x) && nbrs[v].contains(&y)
                })
                .collect();
            Star { center: v, spokes, cost: cost[v].clone(), covered }
        })
        .collect();
    let all: BTreeSet<EdgeId> = stars.iter().flat_map(|s| s.covered.iter().copied()).collect();
    let total: Rational = stars.iter().map(|s| s.cost.clone()).sum();
    (all.len() == inst.num_edges() && total == int(2) * inst.cost(a)).then_some(stars)
}

/// `⌈(n−1)/2⌉`, the unweighted lower bound.
pub fn unweighted_lower_bound(n: usize) -> usize {
    n.saturating_sub(1).div_ceil(2)
}

// ---------------------------------------------------------------- set cover

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetSpec {
    pub name: String,
    pub elements: Vec<String>,
    #[serde(with = "rational::serde_str")]
    pub cost: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetCoverInstance {
    pub elements: Vec<String>,
    pub sets: Vec<SetSpec>,
}

impl SetCoverInstance {
    /// Element indices per set, ignoring names not in `elements`.
    pub fn members(&self) -> Vec<BTreeSet<usize>> {
        let idx: HashMap<&str, usize> = self.elements.iter().enumerate().map(|(i, e)| (e.as_str(), i)).collect();
        self.sets
            .iter()
            .map(|s| s.elements.iter().filter_map(|e| idx.get(e.as_str()).copied()).collect())
            .collect()
    }
}

pub fn set_node(name: &str) -> String {
    format!("S[{name}]")
}

pub fn element_node(name: &str) -> String {
    format!("e[{name}]")
}

/// The set-cover tree: `s – r`, the path `r – S_1 – … – S_k`, `r – t` and
/// `t – e_j`. Links `s–t` and `s–S_i` cost 0, `t–S_i` costs `c(S_i)`,
/// `e_j–S_i` costs 0 when `e_j ∈ S_i`, and every other pair costs
/// `1 + Σ c(S_i)`.
pub fn setcover_gadget(sc: &SetCoverInstance) -> Result<ThreeTapInstance, ThreeTapError> {
    let mut names = vec!["r".to_string(), "s".to_string(), "t".to_string()];
    names.extend(sc.sets.iter().map(|s| set_node(&s.name)));
    names.extend(sc.elements.iter().map(|e| element_node(e)));
    let (r, s, t) = (0, 1, 2);
    let k = sc.sets.len();
    let set_id = |i: usize| 3 + i;
    let elem_id = |j: usize| 3 + k + j;
    let mut edges = vec![(s, r), (r, t)];
    let mut prev = r;
    for i in 0..k {
        edges.push((prev, set_id(i)));
        prev = set_id(i);
    }
    for j in 0..sc.elements.len() {
        edges.push((t, elem_id(j)));
    }
    let tree_pairs: BTreeSet<(NodeId, NodeId)> = edges.iter().map(|&(a, b)| key(a, b)).collect();
    let big = int(1) + sc.sets.iter().map(|s| s.cost.clone()).sum::<Rational>();
    let members = sc.members();
    let n = names.len();
    let mut links = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if tree_pairs.contains(&(a, b)) {
                continue;
            }
            let set_of = |x: NodeId| (x >= 3 && x < 3 + k).then(|| x - 3);
            let elem_of = |x: NodeId| (x >= 3 + k).then(|| x - 3 - k);
            let cost = if a == s || b == s {
                let other = if a == s { b } else { a };
                if other == t || other == r || set_of(other).is_some() {
                    Rational::zero()
                } else {
                    big.clone()
                }
            } else if let (Some(i), true) = (set_of(b), a == t) {
                sc.sets[i].cost.clone()
            } else if let (Some(i), Some(j)) = (set_of(a), elem_of(b)) {
                if members[i].contains(&j) {
                    Rational::zero()
                } else {
                    big.clone()
                }
            } else {
                big.clone()
            };
            links.push(Link { u: a, v: b, cost });
        }
    }
    let tree = TapInstance::from_parts(names, edges, links, None)?;
    ThreeTapInstance::new(tree, false)
}
