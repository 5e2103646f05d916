//! Ground-truth oracles for small instances: exact TAP (depth-first search,
//! or LP-bounded branch and bound for larger link sets), exact 3TAP and
//! exact set cover.

use crate::instance::{EdgeId, IntegralSolution, LinkId, TapInstance};
use crate::lp::{self, Constraint, LpError, Model, Provenance, Sense, Term};
use crate::rational::{self, int, ratio, Rational};
use crate::threetap::{SetCoverInstance, ThreeTapInstance};
use num_traits::{Signed, Zero};
use serde::Serialize;
use std::collections::HashSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExactConfig {
    /// Up to this many links plain depth-first search is used.
    pub exhaustive_links: usize,
    /// Hard limit; above it the oracle refuses.
    pub max_links: usize,
}

impl Default for ExactConfig {
    fn default() -> Self {
        ExactConfig { exhaustive_links: 24, max_links: 128 }
    }
}

pub const MAX_SETS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exhaustive,
    BranchAndBound,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleResult {
    /// `None` when infeasible.
    #[serde(with = "crate::lp::opt_rational")]
    pub optimum_cost: Option<Rational>,
    pub witness: Option<Vec<usize>>,
    pub nodes_explored: u64,
    pub method: Method,
}

impl OracleResult {
    pub fn witness_solution(&self) -> Option<IntegralSolution> {
        self.witness.as_ref().map(|w| IntegralSolution::new(w.iter().copied()))
    }
    fn infeasible(method: Method) -> Self {
        OracleResult { optimum_cost: None, witness: None, nodes_explored: 0, method }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ExactError {
    #[error("{found} links exceed the oracle bound of {limit}")]
    TooManyLinks { found: usize, limit: usize },
    #[error("{found} sets exceed the oracle bound of {limit}")]
    TooManySets { found: usize, limit: usize },
    #[error(transparent)]
    Lp(#[from] LpError),
}

// ---------------------------------------------------------------- TAP

struct TapSearch<'a> {
    inst: &'a TapInstance,
    covered: Vec<u32>,
    excluded: Vec<bool>,
    chosen: Vec<bool>,
    cost: Rational,
    best: Option<(Rational, Vec<LinkId>)>,
    nodes: u64,
}

impl TapSearch<'_> {
    fn take(&mut self, l: LinkId) {
        self.chosen[l] = true;
        self.cost += &self.inst.link(l).cost;
        for &e in self.inst.link_path(l) {
            self.covered[e] += 1;
        }
    }

    fn drop(&mut self, l: LinkId) {
        self.chosen[l] = false;
        self.cost -= &self.inst.link(l).cost;
        for &e in self.inst.link_path(l) {
            self.covered[e] -= 1;
        }
    }

    fn run(&mut self) {
        self.nodes += 1;
        // most constrained uncovered edge, and a bound from every uncovered edge
        let mut pick: Option<(usize, EdgeId)> = None;
        let mut bound = Rational::zero();
        for e in 0..self.inst.num_edges() {
            if self.covered[e] > 0 {
                continue;
            }
            let mut n = 0;
            let mut cheapest: Option<&Rational> = None;
            for &l in self.inst.cover_set(e) {
                if !self.excluded[l] {
                    n += 1;
                    let c = &self.inst.link(l).cost;
                    if cheapest.is_none_or(|m| c < m) {
                        cheapest = Some(c);
                    }
                }
            }
            let Some(cheapest) = cheapest else { return };
            if *cheapest > bound {
                bound = cheapest.clone();
            }
            if pick.is_none_or(|(m, _)| n < m) {
                pick = Some((n, e));
            }
        }
        let lower = &self.cost + &bound;
        if self.best.as_ref().is_some_and(|(b, _)| lower >= *b) {
            return;
        }
        let Some((_, e)) = pick else {
            let chosen = (0..self.chosen.len()).filter(|&l| self.chosen[l]).collect();
            self.best = Some((self.cost.clone(), chosen));
            return;
        };
        let mut cands: Vec<LinkId> = self.inst.cover_set(e).iter().copied().filter(|&l| !self.excluded[l]).collect();
        cands.sort_by(|&a, &b| self.inst.link(a).cost.cmp(&self.inst.link(b).cost).then(a.cmp(&b)));
        // branch i takes cands[i] and forbids cands[..i]
        for &l in &cands {
            self.take(l);
            self.run();
            self.drop(l);
            self.excluded[l] = true;
        }
        for &l in &cands {
            self.excluded[l] = false;
        }
    }
}

fn tap_dfs(inst: &TapInstance) -> OracleResult {
    let m = inst.num_links();
    let mut s = TapSearch {
        inst,
        covered: vec![0; inst.num_edges()],
        excluded: vec![false; m],
        chosen: vec![false; m],
        cost: Rational::zero(),
        best: None,
        nodes: 0,
    };
    // zero-cost links never hurt
    for l in 0..m {
        if inst.link(l).cost.is_zero() {
            s.take(l);
            s.excluded[l] = true;
        }
    }
    s.run();
    let nodes = s.nodes;
    match s.best {
        Some((c, w)) => OracleResult { optimum_cost: Some(c), witness: Some(w), nodes_explored: nodes, method: Method::Exhaustive },
        None => OracleResult { nodes_explored: nodes, ..OracleResult::infeasible(Method::Exhaustive) },
    }
}

fn fixed_row(l: LinkId, value: i64) -> Constraint {
    Constraint {
        coeffs: vec![Term { var: l, coef: int(1) }],
        sense: Sense::Eq,
        rhs: int(value),
        provenance: Provenance::Fixed { link: l },
    }
}

/// Branch and bound on the EDGE-LP: branch on the fractional link closest
/// to 1/2 and explore the child with the smaller bound first.
fn tap_branch_and_bound(inst: &TapInstance) -> Result<OracleResult, ExactError> {
    let base = lp::build_lp(inst, Model::Edge, 0)?;
    let mut best: Option<(Rational, Vec<LinkId>)> = None;
    let mut nodes = 0u64;
    let solve = |fixes: &[(LinkId, i64)]| -> Result<Option<lp::LpSolution>, ExactError> {
        let mut p = base.clone();
        p.constraints.extend(fixes.iter().map(|&(l, v)| fixed_row(l, v)));
        match lp::solve_lp(&p, None) {
            Ok(s) => Ok(Some(s)),
            Err(LpError::Infeasible) => Ok(None),
            Err(e) => Err(e.into()),
        }
    };
    let Some(root) = solve(&[])? else {
        return Ok(OracleResult::infeasible(Method::BranchAndBound));
    };
    let mut stack: Vec<(Vec<(LinkId, i64)>, lp::LpSolution)> = vec![(Vec::new(), root)];
    let half = ratio(1, 2);
    while let Some((fixes, sol)) = stack.pop() {
        nodes += 1;
        if best.as_ref().is_some_and(|(b, _)| sol.value >= *b) {
            continue;
        }
        let frac = (0..inst.num_links())
            .filter(|&l| !rational::is_integer(&sol.x.values[l]))
            .min_by(|&a, &b| {
                let da = (&sol.x.values[a] - &half).abs();
                let db = (&sol.x.values[b] - &half).abs();
                da.cmp(&db).then(a.cmp(&b))
            });
        let Some(l) = frac else {
            // integral entries above 1 can occur on zero-cost links; the
            // support is a cover costing no more than the LP value
            let chosen: Vec<LinkId> = sol.x.support();
            let cost = inst.integral_cost(&IntegralSolution::new(chosen.iter().copied()));
            if best.as_ref().is_none_or(|(b, _)| cost < *b) {
                best = Some((cost, chosen));
            }
            continue;
        };
        let mut children = Vec::new();
        for v in [1, 0] {
            let mut f = fixes.clone();
            f.push((l, v));
            if let Some(s) = solve(&f)? {
                children.push((f, s));
            }
        }
        // smaller bound popped first; stable sort keeps x_l = 1 ahead on ties
        children.sort_by(|a, b| a.1.value.cmp(&b.1.value));
        stack.extend(children.into_iter().rev());
    }
    Ok(match best {
        Some((c, w)) => OracleResult { optimum_cost: Some(c), witness: Some(w), nodes_explored: nodes, method: Method::BranchAndBound },
        None => OracleResult { nodes_explored: nodes, ..OracleResult::infeasible(Method::BranchAndBound) },
    })
}

pub fn exact_tap(inst: &TapInstance, cfg: &ExactConfig) -> Result<OracleResult, ExactError> {
    let m = inst.num_links();
    if m > cfg.max_links {
        return Err(ExactError::TooManyLinks { found: m, limit: cfg.max_links });
    }
    if !inst.uncoverable_edges().is_empty() {
        return Ok(OracleResult::infeasible(Method::Exhaustive));
    }
    let r = if m <= cfg.exhaustive_links { tap_dfs(inst) } else { tap_branch_and_bound(inst)? };
    if let Some(w) = r.witness_solution() {
        assert!(inst.is_feasible_cover(&w), "oracle witness must be feasible");
        assert_eq!(Some(inst.integral_cost(&w)), r.optimum_cost);
    }
    Ok(r)
}

/// Forces one method regardless of size (used to cross-check the two).
pub fn exact_tap_with(inst: &TapInstance, method: Method) -> Result<OracleResult, ExactError> {
    if !inst.uncoverable_edges().is_empty() {
        return Ok(OracleResult::infeasible(method));
    }
    match method {
        Method::Exhaustive => Ok(tap_dfs(inst)),
        Method::BranchAndBound => tap_branch_and_bound(inst),
    }
}

// ---------------------------------------------------------------- 3TAP

struct TriSearch<'a> {
    inst: &'a ThreeTapInstance,
    /// Multiplicity of each node pair in T ∪ chosen, `n × n`.
    present: Vec<Vec<u32>>,
    chosen: Vec<bool>,
    cost: Rational,
    best: Option<(Rational, Vec<LinkId>)>,
    seen: HashSet<Vec<u64>>,
    nodes: u64,
}

impl TriSearch<'_> {
    fn toggle(&mut self, l: LinkId, on: bool) {
        let link = self.inst.tree().link(l);
        let (u, v) = (link.u, link.v);
        self.chosen[l] = on;
        if on {
            self.cost += &link.cost;
            self.present[u][v] += 1;
            self.present[v][u] += 1;
        } else {
            self.cost -= &link.cost;
            self.present[u][v] -= 1;
            self.present[v][u] -= 1;
        }
    }

    fn satisfied(&self, e: EdgeId) -> bool {
        let (a, b) = self.inst.tree().edge(e);
        (0..self.inst.num_nodes()).any(|v| v != a && v != b && self.present[a][v] > 0 && self.present[b][v] > 0)
    }

    fn key(&self) -> Vec<u64> {
        let mut k = vec![0u64; self.chosen.len().div_ceil(64)];
        for (l, &c) in self.chosen.iter().enumerate() {
            if c {
                k[l / 64] |= 1 << (l % 64);
            }
        }
        k
    }

    fn marginal(&self, links: &[LinkId]) -> Rational {
        links.iter().filter(|&&l| !self.chosen[l]).map(|&l| self.inst.tree().link(l).cost.clone()).sum()
    }

    fn run(&mut self) {
        self.nodes += 1;
        if !self.seen.insert(self.key()) {
            return;
        }
        let mut pick: Option<(usize, EdgeId)> = None;
        let mut bound = Rational::zero();
        for e in 0..self.inst.num_edges() {
            if self.satisfied(e) {
                continue;
            }
            let opts = self.inst.options(e);
            let cheapest = opts.iter().map(|o| self.marginal(&o.links)).min().expect("checked upfront");
            if cheapest > bound {
                bound = cheapest;
            }
            if pick.is_none_or(|(m, _)| opts.len() < m) {
                pick = Some((opts.len(), e));
            }
        }
        let lower = &self.cost + &bound;
        if self.best.as_ref().is_some_and(|(b, _)| lower >= *b) {
            return;
        }
        let Some((_, e)) = pick else {
            let w = (0..self.chosen.len()).filter(|&l| self.chosen[l]).collect();
            self.best = Some((self.cost.clone(), w));
            return;
        };
        let mut opts: Vec<(Rational, usize, Vec<LinkId>)> = self
            .inst
            .options(e)
            .iter()
            .map(|o| (self.marginal(&o.links), o.apex, o.links.iter().copied().filter(|&l| !self.chosen[l]).collect()))
            .collect();
        opts.sort();
        for (_, _, links) in opts {
            for &l in &links {
                self.toggle(l, true);
            }
            self.run();
            for &l in &links {
                self.toggle(l, false);
            }
        }
    }
}

/// Exact 3TAP by depth-first search over triangle choices, one uncovered
/// tree edge at a time, with memoisation on the chosen link set.
pub fn exact_3tap(inst: &ThreeTapInstance, cfg: &ExactConfig) -> Result<OracleResult, ExactError> {
    let m = inst.num_links();
    if m > cfg.max_links {
        return Err(ExactError::TooManyLinks { found: m, limit: cfg.max_links });
    }
    if inst.first_impossible_edge().is_some() {
        return Ok(OracleResult::infeasible(Method::Exhaustive));
    }
    let n = inst.num_nodes();
    let mut present = vec![vec![0u32; n]; n];
    for &(a, b) in inst.tree().edges() {
        present[a][b] += 1;
        present[b][a] += 1;
    }
    let mut s = TriSearch {
        inst,
        present,
        chosen: vec![false; m],
        cost: Rational::zero(),
        best: None,
        seen: HashSet::new(),
        nodes: 0,
    };
    for l in 0..m {
        if inst.tree().link(l).cost.is_zero() {
            s.toggle(l, true);
        }
    }
    s.run();
    let (c, w) = s.best.expect("every edge has a candidate triangle");
    let sol = IntegralSolution::new(w.iter().copied());
    assert!(inst.is_feasible(&sol), "oracle witness must be feasible");
    Ok(OracleResult { optimum_cost: Some(c), witness: Some(w), nodes_explored: s.nodes, method: Method::Exhaustive })
}

// ---------------------------------------------------------------- set cover

pub fn exact_set_cover(sc: &SetCoverInstance) -> Result<OracleResult, ExactError> {
    let k = sc.sets.len();
    if k > MAX_SETS {
        return Err(ExactError::TooManySets { found: k, limit: MAX_SETS });
    }
    let members = sc.members();
    let n = sc.elements.len();
    let of_elem: Vec<Vec<usize>> = (0..n).map(|j| (0..k).filter(|&i| members[i].contains(&j)).collect()).collect();
    if of_elem.iter().any(|s| s.is_empty()) {
        return Ok(OracleResult::infeasible(Method::Exhaustive));
    }
    let mut best: Option<(Rational, u32)> = None;
    let mut nodes = 0u64;
    fn go(
        sc: &SetCoverInstance,
        of_elem: &[Vec<usize>],
        chosen: u32,
        banned: u32,
        cost: Rational,
        best: &mut Option<(Rational, u32)>,
        nodes: &mut u64,
    ) {
        *nodes += 1;
        if best.as_ref().is_some_and(|(b, _)| cost >= *b) {
            return;
        }
        let covered = |j: usize| of_elem[j].iter().any(|&i| chosen >> i & 1 == 1);
        let Some(j) = (0..of_elem.len()).filter(|&j| !covered(j)).min_by_key(|&j| (of_elem[j].len(), j)) else {
            *best = Some((cost, chosen));
            return;
        };
        let mut ban = banned;
        for &i in &of_elem[j] {
            if ban >> i & 1 == 1 {
                continue;
            }
            go(sc, of_elem, chosen | 1 << i, ban, &cost + &sc.sets[i].cost, best, nodes);
            ban |= 1 << i;
        }
    }
    go(sc, &of_elem, 0, 0, Rational::zero(), &mut best, &mut nodes);
    Ok(match best {
        Some((c, mask)) => OracleResult {
            optimum_cost: Some(c),
            witness: Some((0..k).filter(|&i| mask >> i & 1 == 1).collect()),
            nodes_explored: nodes,
            method: Method::Exhaustive,
        },
        None => OracleResult { nodes_explored: nodes, ..OracleResult::infeasible(Method::Exhaustive) },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{RawInstance, RawLink};
    use crate::threetap::SetSpec;

    fn tap(nodes: &[&str], edges: &[(&str, &str)], links: &[(&str, &str, i64)]) -> TapInstance {
        TapInstance::from_raw(&RawInstance {
            nodes: nodes.iter().map(|s| s.to_string()).collect(),
            tree_edges: edges.iter().map(|(a, b)| [a.to_string(), b.to_string()]).collect(),
            links: links
                .iter()
                .map(|(u, v, c)| RawLink { u: u.to_string(), v: v.to_string(), cost: int(*c) })
                .collect(),
            root: None,
            unweighted: false,
        })
        .unwrap()
    }

    fn star() -> TapInstance {
        tap(&["c", "x", "y", "z"], &[("c", "x"), ("c", "y"), ("c", "z")], &[("x", "y", 1), ("x", "z", 1), ("y", "z", 1)])
    }

    #[test]
    fn star_optimum_two() {
        let r = exact_tap(&star(), &ExactConfig::default()).unwrap();
        assert_eq!(r.optimum_cost, Some(int(2)));
        let b = exact_tap_with(&star(), Method::BranchAndBound).unwrap();
        assert_eq!(b.optimum_cost, Some(int(2)));
    }

    #[test]
    fn unique_cover() {
        let i = tap(&["a", "b", "c"], &[("a", "b"), ("b", "c")], &[("a", "c", 5)]);
        assert_eq!(exact_tap(&i, &ExactConfig::default()).unwrap().optimum_cost, Some(int(5)));
    }

    #[test]
    fn uncoverable_is_infeasible() {
        let i = tap(&["a", "b", "c"], &[("a", "b"), ("b", "c")], &[("b", "c", 5)]);
        assert_eq!(exact_tap(&i, &ExactConfig::default()).unwrap().optimum_cost, None);
    }

    #[test]
    fn link_bound_enforced() {
        let cfg = ExactConfig { exhaustive_links: 1, max_links: 2 };
        assert!(matches!(exact_tap(&star(), &cfg), Err(ExactError::TooManyLinks { .. })));
    }

    #[test]
    fn star_3tap_optimum_two() {
        let i = ThreeTapInstance::new(star(), true).unwrap();
        let r = exact_3tap(&i, &ExactConfig::default()).unwrap();
        assert_eq!(r.optimum_cost, Some(int(2)));
    }

    #[test]
    fn three_tap_infeasible_without_apex() {
        let t = tap(&["a", "b", "c", "d"], &[("a", "b"), ("b", "c"), ("c", "d")], &[("a", "c", 1)]);
        let i = ThreeTapInstance::new(t, false).unwrap();
        assert_eq!(exact_3tap(&i, &ExactConfig::default()).unwrap().optimum_cost, None);
    }

    fn sc(sets: &[(&str, &[&str], i64)], elements: &[&str]) -> SetCoverInstance {
        SetCoverInstance {
            elements: elements.iter().map(|s| s.to_string()).collect(),
            sets: sets
                .iter()
                .map(|(n, e, c)| SetSpec { name: n.to_string(), elements: e.iter().map(|s| s.to_string()).collect(), cost: int(*c) })
                .collect(),
        }
    }

    #[test]
    fn set_cover_small() {
        let s = sc(&[("S1", &["e1", "e2"], 1), ("S2", &["e2"], 1)], &["e1", "e2"]);
        let r = exact_set_cover(&s).unwrap();
        assert_eq!(r.optimum_cost, Some(int(1)));
        assert_eq!(r.witness, Some(vec![0]));
    }

    #[test]
    fn set_cover_single_and_missing() {
        let s = sc(&[("A", &["x", "y"], 7)], &["x", "y"]);
        assert_eq!(exact_set_cover(&s).unwrap().optimum_cost, Some(int(7)));
        let s = sc(&[("A", &["x"], 7)], &["x", "y"]);
        assert_eq!(exact_set_cover(&s).unwrap().optimum_cost, None);
    }

    #[test]
    fn gadget_matches_set_cover() {
        let s = sc(&[("S1", &["e1", "e2"], 1), ("S2", &["e2"], 1)], &["e1", "e2"]);
        let g = crate::threetap::setcover_gadget(&s).unwrap();
        let r = exact_3tap(&g, &ExactConfig::default()).unwrap();
        assert_eq!(r.optimum_cost, Some(int(1)));
    }
}
