//! Decompositions of NODE-LP points whose deficient edges (coverage below
//! 4/3) form at most two paths: `3k·x` copies split into `2k` covers, giving
//! a 3/2 certificate.

use crate::color::{self, ColorConfig, ColorError, Decomposition, PartialColoring, Span};
use crate::instance::{EdgeId, FractionalSolution, LinkId, NodeId, TapInstance};
use crate::lp::{self, Model};
use crate::rational::{ratio, Rational};
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use std::collections::BTreeSet;

#[derive(Debug, thiserror::Error)]
pub enum DeficientError {
    #[error("instance is not a binary tree with leaf-to-leaf links")]
    NotBinaryLeafLink,
    #[error("solution has {got} entries but the instance has {expected} links")]
    LengthMismatch { expected: usize, got: usize },
    #[error("solution is not NODE-LP feasible: {0}")]
    NotNodeFeasible(String),
    #[error("node {node} touches three deficient edges")]
    ThreeDeficientEdges { node: String },
    #[error("unsupported profile: {paths} deficient paths")]
    Unsupported { paths: usize },
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("weight through {node} avoiding {edge} is {value}, below 2/3")]
    SlackBelow { edge: String, node: String, value: String },
    #[error("pairing invariant fails at edge {edge}")]
    PairingInvariant { edge: String },
    #[error(transparent)]
    Color(#[from] ColorError),
    #[error("internal failure: {0}")]
    Internal(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeficientPath {
    pub nodes: Vec<NodeId>,
    pub edges: Vec<EdgeId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeficiencyProfile {
    pub deficient_edges: Vec<EdgeId>,
    pub paths: Vec<DeficientPath>,
    /// Edges of the path joining the two deficient paths, from the first.
    pub connecting_path: Option<Vec<EdgeId>>,
    pub connecting_nodes: Option<Vec<NodeId>>,
}

pub fn deficiency_profile(inst: &TapInstance, x: &FractionalSolution) -> Result<DeficiencyProfile, DeficientError> {
    if !inst.is_binary_leaf_link() {
        return Err(DeficientError::NotBinaryLeafLink);
    }
    if x.len() != inst.num_links() {
        return Err(DeficientError::LengthMismatch { expected: inst.num_links(), got: x.len() });
    }
    let lp = lp::build_lp(inst, Model::Node, 0).map_err(|e| DeficientError::NotNodeFeasible(e.to_string()))?;
    lp::check_feasible(&lp, x).map_err(|e| DeficientError::NotNodeFeasible(e.to_string()))?;
    profile_of(inst, color::deficient_edges(inst, x))
}

fn profile_of(inst: &TapInstance, deficient: Vec<EdgeId>) -> Result<DeficiencyProfile, DeficientError> {
    let n = inst.num_nodes();
    let mut adj: Vec<Vec<(NodeId, EdgeId)>> = vec![Vec::new(); n];
    for &e in &deficient {
        let (a, b) = inst.edge(e);
        adj[a].push((b, e));
        adj[b].push((a, e));
    }
    if let Some(v) = (0..n).find(|&v| adj[v].len() >= 3) {
        return Err(DeficientError::ThreeDeficientEdges { node: inst.node_name(v).to_string() });
    }
    let mut seen = vec![false; inst.num_edges()];
    let mut paths = Vec::new();
    for start in 0..n {
        if adj[start].len() != 1 || seen[adj[start][0].1] {
            continue;
        }
        let mut path = DeficientPath { nodes: vec![start], edges: Vec::new() };
        let mut cur = start;
        while let Some(&(nb, e)) = adj[cur].iter().find(|&&(_, e)| !seen[e]) {
            seen[e] = true;
            path.edges.push(e);
            path.nodes.push(nb);
            cur = nb;
        }
        paths.push(path);
    }
    let (mut connecting_path, mut connecting_nodes) = (None, None);
    if paths.len() == 2 {
        let on_first: BTreeSet<NodeId> = paths[0].nodes.iter().copied().collect();
        let on_second: BTreeSet<NodeId> = paths[1].nodes.iter().copied().collect();
        let tp = inst.tree_path(paths[0].nodes[0], paths[1].nodes[0]);
        let mut seq = vec![paths[0].nodes[0]];
        for &e in &tp {
            let (a, b) = inst.edge(e);
            let last = *seq.last().unwrap();
            seq.push(if a == last { b } else { a });
        }
        let i1 = (0..seq.len()).rev().find(|&t| on_first.contains(&seq[t])).unwrap();
        let i2 = (0..seq.len()).find(|&t| on_second.contains(&seq[t])).unwrap();
        connecting_path = Some(tp[i1..i2].to_vec());
        connecting_nodes = Some(seq[i1..=i2].to_vec());
    }
    Ok(DeficiencyProfile { deficient_edges: deficient, paths, connecting_path, connecting_nodes })
}

/// Total weight of links through the internal node `u` that avoid the
/// deficient edge `e`; at least 2/3 for NODE-LP points.
pub fn check_two_thirds_slack(
    inst: &TapInstance,
    x: &FractionalSolution,
    e: EdgeId,
    u: NodeId,
) -> Result<Rational, DeficientError> {
    let (a, b) = inst.edge(e);
    if u != a && u != b {
        return Err(DeficientError::Precondition(format!("{} is not an endpoint of {}", inst.node_name(u), inst.edge_name(e))));
    }
    if inst.degree(u) != 3 {
        return Err(DeficientError::Precondition(format!("{} is not an internal node", inst.node_name(u))));
    }
    if inst.coverage(x, e) >= ratio(4, 3) {
        return Err(DeficientError::Precondition(format!("edge {} is not deficient", inst.edge_name(e))));
    }
    let at_u: Vec<EdgeId> = inst.neighbors(u).iter().map(|&(_, f)| f).collect();
    let value = (0..inst.num_links())
        .filter(|&l| !inst.covers(l, e) && at_u.iter().any(|&f| inst.covers(l, f)))
        .fold(Rational::zero(), |acc, l| acc + x.get(l));
    if value < ratio(2, 3) {
        return Err(DeficientError::SlackBelow {
            edge: inst.edge_name(e),
            node: inst.node_name(u).to_string(),
            value: value.to_string(),
        });
    }
    Ok(value)
}

/// One copy of a link under the `3k·x` scaling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CopyRef {
    pub link: LinkId,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Pairing {
    pub pairs: Vec<(CopyRef, CopyRef)>,
    pub swaps: usize,
}

fn q_reach(inst: &TapInstance, q: &[EdgeId], l: LinkId) -> usize {
    q.iter().filter(|&&e| inst.covers(l, e)).count()
}

/// Copies through `e`, deepest reach along `q` first.
fn ranked_copies(inst: &TapInstance, copies: &[usize], e: EdgeId, q: &[EdgeId]) -> Vec<CopyRef> {
    let mut out: Vec<(usize, CopyRef)> = inst
        .cover_set(e)
        .iter()
        .flat_map(|&l| (0..copies[l]).map(move |index| CopyRef { link: l, index }))
        .map(|c| (q_reach(inst, q, c.link), c))
        .collect();
    out.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    out.into_iter().map(|(_, c)| c).collect()
}

/// Pairs `n` copies through `e1` with `n` copies through `e2`: the i-th
/// deepest along `q` on one side with the i-th shallowest on the other, then
/// swaps partners while some off-`q` edge is covered by both members of a
/// pair and a pair avoiding that edge entirely exists.
pub fn pair_links(
    inst: &TapInstance,
    copies: &[usize],
    e1: EdgeId,
    e2: EdgeId,
    q: &[EdgeId],
    n: usize,
) -> Result<Pairing, DeficientError> {
    let f: Vec<CopyRef> = ranked_copies(inst, copies, e1, q).into_iter().take(n).collect();
    let taken: BTreeSet<CopyRef> = f.iter().copied().collect();
    let g: Vec<CopyRef> =
        ranked_copies(inst, copies, e2, q).into_iter().filter(|c| !taken.contains(c)).take(n).collect();
    if f.len() < n || g.len() < n {
        return Err(DeficientError::Internal(format!(
            "fewer than {n} copies through {} or {}",
            inst.edge_name(e1),
            inst.edge_name(e2)
        )));
    }
    let mut pairs: Vec<(CopyRef, CopyRef)> = (0..n).map(|i| (f[i], g[n - 1 - i])).collect();
    let off_q: Vec<EdgeId> = (0..inst.num_edges()).filter(|e| !q.contains(e)).collect();
    let swaps = swap_until_stable(inst, &mut pairs, &off_q, false, |_, _| true)?;
    let p = Pairing { pairs, swaps };
    if let Some(e) = pairing_violation(inst, &p, q) {
        return Err(DeficientError::PairingInvariant { edge: inst.edge_name(e) });
    }
    Ok(p)
}

fn swap_until_stable(
    inst: &TapInstance,
    pairs: &mut [(CopyRef, CopyRef)],
    edges: &[EdgeId],
    cross: bool,
    allowed: impl Fn(&(CopyRef, CopyRef), &(CopyRef, CopyRef)) -> bool,
) -> Result<usize, DeficientError> {
    let both = |p: &(CopyRef, CopyRef), e: EdgeId| inst.covers(p.0.link, e) && inst.covers(p.1.link, e);
    let neither = |p: &(CopyRef, CopyRef), e: EdgeId| !inst.covers(p.0.link, e) && !inst.covers(p.1.link, e);
    let mut swaps = 0;
    let limit = 4 * pairs.len() * pairs.len() * edges.len().max(1) + 16;
    loop {
        let mut changed = false;
        for &e in edges {
            while let Some(i) = (0..pairs.len()).find(|&i| both(&pairs[i], e)) {
                // Exchange second members, or with `cross` also pair the
                // firsts together and the seconds together.
                let options = |j: usize| {
                    let (a, b) = (pairs[i], pairs[j]);
                    let mut v = vec![((a.0, b.1), (b.0, a.1))];
                    if cross {
                        v.push(((a.0, b.0), (a.1, b.1)));
                    }
                    v.into_iter().find(|(p, q)| allowed(p, q))
                };
                let Some((j, (p, q))) =
                    (0..pairs.len()).filter(|&j| neither(&pairs[j], e)).find_map(|j| options(j).map(|o| (j, o)))
                else {
                    break;
                };
                pairs[i] = p;
                pairs[j] = q;
                swaps += 1;
                changed = true;
                if swaps > limit {
                    return Err(DeficientError::Internal("pair swapping does not settle".into()));
                }
            }
        }
        if !changed {
            return Ok(swaps);
        }
    }
}

/// An off-`q` edge covered by both members of some pair but not touched by
/// every pair.
pub fn pairing_violation(inst: &TapInstance, p: &Pairing, q: &[EdgeId]) -> Option<EdgeId> {
    (0..inst.num_edges()).filter(|e| !q.contains(e)).find(|&e| {
        let both = p.pairs.iter().filter(|(f, g)| inst.covers(f.link, e) && inst.covers(g.link, e)).count();
        let touched = p.pairs.iter().filter(|(f, g)| inst.covers(f.link, e) || inst.covers(g.link, e)).count();
        both > 0 && touched < p.pairs.len()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LongLinkCase {
    /// At most `2k` long copies.
    AtMost2k,
    /// More than `2k` long copies, none of the four edges saturated.
    DoubleLong,
    /// One edge next to `Q` carries at least `2k` long copies.
    SaturatedEdge,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeficientRun {
    pub decomposition: Decomposition,
    pub paths: usize,
    pub case: Option<LongLinkCase>,
    pub single_edge_end: bool,
    pub swaps: usize,
    /// Colors placed by the generic safe-fill rule instead of a scripted step.
    pub fills: usize,
    pub trace: Vec<String>,
}

/// Dispatches on the number of deficient paths.
pub fn deficient_decompose(
    inst: &TapInstance,
    x: &FractionalSolution,
    cfg: &ColorConfig,
) -> Result<DeficientRun, DeficientError> {
    let prof = deficiency_profile(inst, x)?;
    match prof.paths.len() {
        0 | 1 => one_path_decompose(inst, x, cfg),
        2 => two_path_decompose(inst, x, cfg),
        n => Err(DeficientError::Unsupported { paths: n }),
    }
}

#[derive(Clone)]
struct Work<'a> {
    inst: &'a TapInstance,
    x: &'a FractionalSolution,
    pc: PartialColoring,
    copy_color: Vec<Vec<Option<usize>>>,
    deficient: Vec<bool>,
    trace: Vec<String>,
    fills: usize,
}

impl<'a> Work<'a> {
    fn new(
        inst: &'a TapInstance,
        x: &'a FractionalSolution,
        root: NodeId,
        cfg: &ColorConfig,
        prof: &DeficiencyProfile,
    ) -> Result<Self, DeficientError> {
        // As in the abundant coloring, 3k·x_l must split into two equal
        // halves so the abundant completion has its full share on each side.
        let k = color::least_multiplier(x.values.iter().map(|v| v * ratio(3, 2)));
        let factor = Rational::from_integer(&k * 3);
        let copies = color::scaled_copies(x, &k, &factor, cfg.copy_budget)?;
        let palette = 2 * k.to_usize().expect("bounded by the copy budget");
        let mut deficient = vec![false; inst.num_edges()];
        for &e in &prof.deficient_edges {
            deficient[e] = true;
        }
        let trace = vec![format!(
            "k = {k}, {} copies, {palette} colors, rooted at {}",
            copies.iter().sum::<usize>(),
            inst.node_name(root)
        )];
        Ok(Work {
            inst,
            x,
            copy_color: copies.iter().map(|&c| vec![None; c]).collect(),
            pc: PartialColoring::new(inst, root, copies, palette),
            deficient,
            trace,
            fills: 0,
        })
    }

    fn palette(&self) -> usize {
        self.pc.palette()
    }

    fn copies(&self) -> Vec<usize> {
        self.copy_color.iter().map(|v| v.len()).collect()
    }

    fn is_colored(&self, c: CopyRef) -> bool {
        self.copy_color[c.link][c.index].is_some()
    }

    fn color_copy(&mut self, c: CopyRef, color: usize) -> Result<(), DeficientError> {
        if let Some(old) = self.copy_color[c.link][c.index] {
            return Err(DeficientError::Internal(format!(
                "copy {} of {} already has color {old}",
                c.index,
                self.inst.link_name(c.link)
            )));
        }
        self.copy_color[c.link][c.index] = Some(color);
        self.pc.color(c.link, color, Span::Whole);
        Ok(())
    }

    fn uncolor_copy(&mut self, c: CopyRef) {
        let color = self.copy_color[c.link][c.index].take().expect("colored copy");
        let idx = self.pc.colored(c.link).iter().position(|&(d, s)| d == color && s == Span::Whole).unwrap();
        self.pc.uncolor(c.link, idx);
    }

    fn free_copy(&self, l: LinkId) -> Option<CopyRef> {
        self.copy_color[l].iter().position(|c| c.is_none()).map(|index| CopyRef { link: l, index })
    }

    /// Adding color `c` on link `l` would put a third copy of `c` on an
    /// edge still missing colors.
    fn would_conflict(&self, l: LinkId, c: usize) -> bool {
        self.pc.span(l, Span::Whole).iter().any(|&e| !self.pc.is_complete(e) && self.pc.count(e, c) >= 2)
    }

    /// Like `would_conflict` for several links colored `c` together.
    fn would_conflict_all(&self, links: &[LinkId], c: usize) -> bool {
        let mut seen = BTreeSet::new();
        links.iter().flat_map(|&l| self.pc.span(l, Span::Whole).iter().copied()).any(|e| {
            if !seen.insert(e) || self.pc.is_complete(e) {
                return false;
            }
            let added = links.iter().filter(|&&l| self.inst.covers(l, e)).count();
            self.pc.count(e, c) as usize + added >= 3
        })
    }

    /// Incomplete edges on `l` that already carry `c`.
    fn crowding(&self, l: LinkId, c: usize) -> usize {
        self.pc.span(l, Span::Whole).iter().filter(|&&e| !self.pc.is_complete(e) && self.pc.has(e, c)).count()
    }

    /// Completes, with conflict-free copies only, the abundant edges where
    /// adding `c` on `l` would conflict. Each edge is rolled back if it
    /// cannot be finished that way. True if `l` can then take `c`.
    fn unblock(&mut self, l: LinkId, c: usize, what: &str) -> bool {
        let blocking: Vec<EdgeId> = self
            .pc
            .span(l, Span::Whole)
            .iter()
            .copied()
            .filter(|&f| !self.pc.is_complete(f) && self.pc.count(f, c) >= 2)
            .collect();
        if blocking.iter().any(|&f| self.deficient[f]) {
            return false;
        }
        for f in blocking {
            let saved = self.clone();
            let mut ok = true;
            while let Some(d) = self.pc.first_missing(f) {
                let pick = self
                    .pc
                    .through(f)
                    .iter()
                    .copied()
                    .filter_map(|m| self.free_copy(m))
                    .filter(|cr| !self.would_conflict(cr.link, d))
                    .min_by_key(|cr| (self.crowding(cr.link, d), cr.link));
                match pick {
                    Some(cr) if self.color_copy(cr, d).is_ok() => {}
                    _ => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                *self = saved;
                return false;
            }
            self.fills += 1;
            self.trace.push(format!("{what}: completed {} early to free color {c}", self.inst.edge_name(f)));
        }
        !self.would_conflict(l, c)
    }

    /// Uncolors copies holding `c` on the edges where coloring `group` with
    /// `c` would conflict, as long as every complete or deficient edge keeps
    /// `c` once `group` has it. Copies for which `protected` holds stay put.
    fn make_room(&mut self, group: &[LinkId], c: usize, protected: &dyn Fn(CopyRef) -> bool, what: &str) -> bool {
        let added = |w: &Self, e: EdgeId| group.iter().filter(|&&l| w.inst.covers(l, e)).count();
        while self.would_conflict_all(group, c) {
            let f = group
                .iter()
                .flat_map(|&l| self.pc.span(l, Span::Whole).iter().copied())
                .find(|&e| !self.pc.is_complete(e) && self.pc.count(e, c) as usize + added(self, e) >= 3)
                .expect("a conflicting edge");
            let colors = &self.copy_color;
            let removable = self
                .pc
                .through(f)
                .iter()
                .flat_map(|&l| {
                    (0..colors[l].len()).filter(move |&j| colors[l][j] == Some(c)).map(move |index| CopyRef { link: l, index })
                })
                .filter(|&h| !protected(h))
                .find(|h| {
                    self.pc.span(h.link, Span::Whole).iter().all(|&e| {
                        !(self.pc.is_complete(e) || self.deficient[e]) || self.pc.count(e, c) as usize + added(self, e) >= 2
                    })
                });
            let Some(h) = removable else { return false };
            self.uncolor_copy(h);
            self.fills += 1;
            self.trace.push(format!(
                "{what}: uncolored a redundant copy of {} to free color {c} on {}",
                self.inst.link_name(h.link),
                self.inst.edge_name(f)
            ));
        }
        true
    }

    /// Gives `e` every color it lacks. Candidates are free copies through
    /// `e`; a conflict-free copy wins over one passing `keep`, and a copy
    /// outside `keep` is counted as a fill. Ties go to the lower link id.
    fn complete_edge(&mut self, e: EdgeId, keep: impl Fn(LinkId) -> bool, what: &str) -> Result<(), DeficientError> {
        while let Some(c) = self.pc.first_missing(e) {
            let mut cr = self
                .pc
                .through(e)
                .iter()
                .copied()
                .filter_map(|l| self.free_copy(l))
                .min_by_key(|cr| (self.would_conflict(cr.link, c), self.crowding(cr.link, c), !keep(cr.link), cr.link))
                .ok_or_else(|| {
                    DeficientError::Internal(format!("no free copy through {} for color {c}", self.inst.edge_name(e)))
                })?;
            if self.would_conflict(cr.link, c) {
                let mut cands: Vec<LinkId> =
                    self.pc.through(e).iter().copied().filter(|&l| self.free_copy(l).is_some()).collect();
                cands.sort_by_key(|&l| (!keep(l), l));
                if let Some(l) = cands.into_iter().find(|&l| self.unblock(l, c, what)) {
                    cr = self.free_copy(l).expect("free copy");
                }
            }
            if !keep(cr.link) {
                self.fills += 1;
                self.trace.push(format!(
                    "{what}: fill {} with color {c} on {}",
                    self.inst.edge_name(e),
                    self.inst.link_name(cr.link)
                ));
            }
            self.color_copy(cr, c)?;
        }
        Ok(())
    }

    fn check_conflicts(&self, phase: &str, abundant_only: bool) -> Result<(), DeficientError> {
        let edges = (0..self.inst.num_edges()).filter(|&e| !abundant_only || !self.deficient[e]);
        if let Some(w) = self.pc.find_conflict(edges) {
            let mut err = color::conflict_error(self.inst, w);
            if let ColorError::Conflict { edge, .. } = &mut err {
                *edge = format!("{edge} (after {phase})");
            }
            return Err(err.into());
        }
        Ok(())
    }

    fn finish(mut self, cfg: &ColorConfig, paths: usize, case: Option<LongLinkCase>, single_edge_end: bool, swaps: usize) -> Result<DeficientRun, DeficientError> {
        self.check_conflicts("path phases", false)?;
        let order: Vec<EdgeId> =
            color::top_down_edges(self.pc.rooting()).into_iter().filter(|&e| !self.pc.is_complete(e)).collect();
        let bar = ratio(4, 3);
        if let Some(&e) = order.iter().find(|&&e| self.inst.coverage(self.x, e) < bar) {
            return Err(DeficientError::Internal(format!("deficient edge {} left incomplete", self.inst.edge_name(e))));
        }
        let over = color::complete_top_down(&mut self.pc, &order, self.inst, cfg.checks)?;
        self.trace.push(format!("abundant completion: {} edges, {over} copies beyond their half quota", order.len()));
        if let Some(e) = (0..self.inst.num_edges()).find(|&e| !self.pc.is_complete(e)) {
            return Err(DeficientError::Internal(format!("edge {} incomplete at the end", self.inst.edge_name(e))));
        }
        let decomposition = Decomposition::from_coloring(&self.pc, ratio(3, 2), "deficient");
        Ok(DeficientRun { decomposition, paths, case, single_edge_end, swaps, fills: self.fills, trace: self.trace })
    }
}

/// Position range `[lo, hi]` of the path edges covered by link `l`.
fn path_interval(inst: &TapInstance, path: &[EdgeId], l: LinkId) -> Option<(usize, usize)> {
    let idx: Vec<usize> = (0..path.len()).filter(|&i| inst.covers(l, path[i])).collect();
    Some((*idx.first()?, *idx.last()?))
}

/// One deficient path (or none): color the path top-down from one end,
/// remove redundant same-colored triples, then complete the abundant rest.
pub fn one_path_decompose(
    inst: &TapInstance,
    x: &FractionalSolution,
    cfg: &ColorConfig,
) -> Result<DeficientRun, DeficientError> {
    let prof = deficiency_profile(inst, x)?;
    if prof.paths.is_empty() {
        let decomposition = color::abundant_scaled_decompose(inst, x, cfg)?;
        return Ok(DeficientRun {
            decomposition,
            paths: 0,
            case: None,
            single_edge_end: false,
            swaps: 0,
            fills: 0,
            trace: vec!["no deficient edges: abundant decomposition".into()],
        });
    }
    if prof.paths.len() > 1 {
        return Err(DeficientError::Unsupported { paths: prof.paths.len() });
    }
    let path = &prof.paths[0];
    let mut w = Work::new(inst, x, path.nodes[0], cfg, &prof)?;
    let p = &path.edges;

    for (i, &e) in p.iter().enumerate() {
        while let Some(c) = w.pc.first_missing(e) {
            // Prefer the copy that carries c furthest along the rest of the path.
            let gain = |l: LinkId| p[i..].iter().filter(|&&f| inst.covers(l, f) && !w.pc.has(f, c)).count();
            let cr = w
                .pc
                .through(e)
                .iter()
                .copied()
                .filter_map(|l| w.free_copy(l))
                .min_by_key(|cr| (w.would_conflict(cr.link, c), std::cmp::Reverse(gain(cr.link)), cr.link))
                .ok_or_else(|| DeficientError::Internal(format!("no free copy through {}", inst.edge_name(e))))?;
            w.color_copy(cr, c)?;
            if cfg.checks {
                if let Some(&f) = p.iter().find(|&&f| !w.pc.is_complete(f) && (0..w.palette()).any(|c| w.pc.count(f, c) > 1)) {
                    return Err(DeficientError::Internal(format!(
                        "path edge {} repeats a color before holding all of them",
                        inst.edge_name(f)
                    )));
                }
            }
        }
    }
    w.trace.push(format!("path phase: {} edges hold all colors", p.len()));

    let mut removed = 0;
    loop {
        let triple = p.iter().find_map(|&e| (0..w.palette()).find(|&c| w.pc.count(e, c) >= 3).map(|c| (e, c)));
        let Some((e, c)) = triple else { break };
        let mut holders: Vec<(CopyRef, (usize, usize))> = w
            .pc
            .through(e)
            .iter()
            .flat_map(|&l| {
                let w = &w;
                (0..w.copy_color[l].len())
                    .filter(move |&j| w.copy_color[l][j] == Some(c))
                    .map(move |index| CopyRef { link: l, index })
            })
            .map(|cr| (cr, path_interval(inst, p, cr.link).expect("covers e")))
            .collect();
        holders.sort_by_key(|h| h.0);
        let right = holders.iter().enumerate().max_by_key(|(i, h)| (h.1 .1, std::cmp::Reverse(*i))).unwrap().0;
        let left = holders
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != right)
            .min_by_key(|(i, h)| (h.1 .0, *i))
            .unwrap()
            .0;
        let drop = (0..holders.len()).find(|&i| i != left && i != right).unwrap();
        w.uncolor_copy(holders[drop].0);
        removed += 1;
    }
    w.trace.push(format!("clean-up: {removed} redundant copies uncolored"));
    if let Some(&e) = p.iter().find(|&&e| !w.pc.is_complete(e)) {
        return Err(DeficientError::Internal(format!("clean-up removed a color from {}", inst.edge_name(e))));
    }
    w.check_conflicts("clean-up", true)?;
    w.finish(cfg, 1, None, false, 0)
}

/// Two deficient paths joined by the abundant path `Q`.
pub fn two_path_decompose(
    inst: &TapInstance,
    x: &FractionalSolution,
    cfg: &ColorConfig,
) -> Result<DeficientRun, DeficientError> {
    let prof = deficiency_profile(inst, x)?;
    if prof.paths.len() != 2 {
        return Err(DeficientError::Unsupported { paths: prof.paths.len() });
    }
    let q = prof.connecting_path.clone().unwrap();
    let qn = prof.connecting_nodes.clone().unwrap();
    let (q1, qj) = (qn[0], *qn.last().unwrap());
    let mut w = Work::new(inst, x, q1, cfg, &prof)?;
    let n = w.palette();
    let copies = w.copies();
    let at = |node: NodeId, path: &DeficientPath| -> Vec<EdgeId> {
        path.edges.iter().copied().filter(|&e| {
            let (a, b) = inst.edge(e);
            a == node || b == node
        }).collect()
    };
    let mut side_a = at(q1, &prof.paths[0]);
    let mut side_b = at(qj, &prof.paths[1]);
    let single_edge_end = side_a.len() == 1 || side_b.len() == 1;
    let is_long = |l: LinkId| q.iter().all(|&e| inst.covers(l, e));
    let long_total: usize = (0..inst.num_links()).filter(|&l| is_long(l)).map(|l| copies[l]).sum();
    let long_through =
        |e: EdgeId| -> usize { inst.cover_set(e).iter().filter(|&&l| is_long(l)).map(|&l| copies[l]).sum() };
    let saturated = side_a.iter().chain(&side_b).copied().find(|&e| long_through(e) >= n);
    let case = if long_total <= n {
        LongLinkCase::AtMost2k
    } else if saturated.is_some() {
        LongLinkCase::SaturatedEdge
    } else {
        LongLinkCase::DoubleLong
    };
    w.trace.push(format!(
        "Q has {} edges from {} to {}; {long_total} long copies; case {case:?}",
        q.len(),
        inst.node_name(q1),
        inst.node_name(qj)
    ));
    let four: Vec<EdgeId> = side_a.iter().chain(&side_b).copied().collect();
    let mut swaps = 0;

    match case {
        LongLinkCase::AtMost2k => {
            let pa = side_pairs(inst, &copies, &side_a, &q, n)?;
            let pb = side_pairs(inst, &copies, &side_b, &q, n)?;
            swaps += pa.swaps + pb.swaps;
            let partner = |m: CopyRef| -> Option<CopyRef> {
                pb.pairs.iter().find_map(|&(f, g)| {
                    if f == m {
                        Some(g)
                    } else if g == m {
                        Some(f)
                    } else {
                        None
                    }
                })
            };
            let paired: BTreeSet<CopyRef> =
                pa.pairs.iter().chain(&pb.pairs).flat_map(|&(f, g)| [f, g]).collect();
            let in_pairs = |cr: CopyRef| paired.contains(&cr);
            for (i, &(f, g)) in pa.pairs.iter().enumerate() {
                let members: Vec<CopyRef> = if f == g { vec![f] } else { vec![f, g] };
                for &m in &members {
                    if !w.is_colored(m) {
                        w.color_copy(m, i)?;
                    }
                }
                for m in members.into_iter().filter(|m| is_long(m.link)) {
                    if let Some(h) = partner(m).filter(|&h| h != m) {
                        if is_long(h.link) {
                            return Err(DeficientError::Internal("two long copies share a far pair".into()));
                        }
                        w.color_copy(h, i)?;
                    }
                }
            }
            let group = |cr: CopyRef| {
                let mut g = vec![cr.link];
                g.extend(partner(cr).filter(|&h| h != cr).map(|h| h.link));
                g
            };
            for t in 0..q.len() {
                let e = q[t];
                // The missing color with the fewest conflict-free candidates
                // goes first, so scarce copies are not spent elsewhere.
                let next = |w: &Work| {
                    let free: Vec<CopyRef> = w.pc.through(e).iter().copied().filter_map(|l| w.free_copy(l)).collect();
                    (0..w.palette())
                        .filter(|&c| !w.pc.has(e, c))
                        .min_by_key(|&c| (free.iter().filter(|&&cr| !w.would_conflict_all(&group(cr), c)).count(), c))
                };
                while let Some(c) = next(&w) {
                    let reach = |l: LinkId| q[t..].iter().filter(|&&f| inst.covers(l, f)).count();
                    let mut cands: Vec<CopyRef> = w.pc.through(e).iter().copied().filter_map(|l| w.free_copy(l)).collect();
                    cands.sort_by_key(|cr| {
                        let onward = side_b.iter().any(|&f| inst.covers(cr.link, f) && !w.pc.has(f, c));
                        (std::cmp::Reverse(reach(cr.link)), !onward, cr.link)
                    });
                    let mut cr = *cands
                        .iter()
                        .min_by_key(|&&cr| w.would_conflict_all(&group(cr), c))
                        .ok_or_else(|| DeficientError::Internal(format!("no free copy through {}", inst.edge_name(e))))?;
                    if w.would_conflict_all(&group(cr), c) {
                        for &cand in &cands {
                            let saved = w.clone();
                            if w.make_room(&group(cand), c, &in_pairs, "Q propagation") {
                                cr = cand;
                                break;
                            }
                            w = saved;
                        }
                    }
                    w.color_copy(cr, c)?;
                    if let Some(h) = partner(cr).filter(|&h| h != cr) {
                        if w.is_colored(h) {
                            return Err(DeficientError::Internal(format!(
                                "far partner of {} already colored",
                                inst.link_name(cr.link)
                            )));
                        }
                        w.color_copy(h, c)?;
                    }
                }
            }
            w.trace.push(format!("pairs colored and extended along Q ({swaps} swaps)"));
        }
        LongLinkCase::DoubleLong => {
            let longs: Vec<CopyRef> = (0..inst.num_links())
                .filter(|&l| is_long(l))
                .flat_map(|l| (0..copies[l]).map(move |index| CopyRef { link: l, index }))
                .collect();
            let covers_all = |a: CopyRef, b: CopyRef| four.iter().all(|&e| inst.covers(a.link, e) || inst.covers(b.link, e));
            let want = long_total - n;
            let mut used = vec![false; longs.len()];
            let mut doubles = Vec::new();
            for i in 0..longs.len() {
                if doubles.len() == want || used[i] {
                    continue;
                }
                if let Some(j) = (i + 1..longs.len()).find(|&j| !used[j] && covers_all(longs[i], longs[j])) {
                    used[i] = true;
                    used[j] = true;
                    doubles.push((longs[i], longs[j]));
                }
            }
            if doubles.len() < want {
                w.trace.push(format!("only {} of {want} double-long pairs found", doubles.len()));
            }
            for (c, &(a, b)) in doubles.iter().enumerate() {
                w.color_copy(a, c)?;
                w.color_copy(b, c)?;
            }
            let singles: Vec<CopyRef> = (0..longs.len()).filter(|&i| !used[i]).map(|i| longs[i]).collect();
            for (c, &s) in (doubles.len()..n).zip(&singles) {
                w.color_copy(s, c)?;
            }
            for &e in &four {
                let others: Vec<EdgeId> = four.iter().copied().filter(|&f| f != e).collect();
                w.complete_edge(e, |l| others.iter().all(|&f| !inst.covers(l, f)), "four edges")?;
            }
            w.trace.push(format!("{} double-long colors, {} single-long colors", doubles.len(), n - doubles.len()));
        }
        LongLinkCase::SaturatedEdge => {
            let star = saturated.unwrap();
            if side_b.contains(&star) {
                std::mem::swap(&mut side_a, &mut side_b);
            }
            let through_star: Vec<CopyRef> = inst
                .cover_set(star)
                .iter()
                .copied()
                .filter(|&l| is_long(l))
                .flat_map(|l| (0..copies[l]).map(move |index| CopyRef { link: l, index }))
                .take(n)
                .collect();
            if side_b.len() == 2 {
                let p = saturated_pairs(inst, &copies, &through_star, star, &side_b, &q)?;
                swaps += p.swaps;
                for (c, &(f, g)) in p.pairs.iter().enumerate() {
                    w.color_copy(f, c)?;
                    w.color_copy(g, c)?;
                }
            } else {
                for (c, &m) in through_star.iter().enumerate() {
                    w.color_copy(m, c)?;
                }
            }
            for &e in side_a.iter().chain(&side_b) {
                let others: Vec<EdgeId> = four.iter().copied().filter(|&f| f != e).collect();
                w.complete_edge(e, |l| others.iter().all(|&f| !inst.covers(l, f)), "far side")?;
            }
            w.trace.push(format!("{n} colors seeded by long copies through {}", inst.edge_name(star)));
        }
    }

    for &e in four.iter().chain(&q) {
        if !w.pc.is_complete(e) {
            w.complete_edge(e, |_| true, "case phase")?;
        }
    }
    w.check_conflicts("case phase", true)?;

    // Finish each deficient path outward from Q with copies avoiding the
    // edge just behind.
    for (path, anchor) in [(&prof.paths[0], q1), (&prof.paths[1], qj)] {
        let a = path.nodes.iter().position(|&v| v == anchor).unwrap();
        let m = path.edges.len();
        let runs: [Vec<(EdgeId, EdgeId, NodeId)>; 2] = [
            (a + 1..m).map(|i| (path.edges[i], path.edges[i - 1], path.nodes[i])).collect(),
            (0..a.saturating_sub(1)).rev().map(|i| (path.edges[i], path.edges[i + 1], path.nodes[i + 1])).collect(),
        ];
        for run in runs {
            for (e, behind, u) in run {
                if cfg.checks {
                    check_two_thirds_slack(inst, x, behind, u)?;
                }
                w.complete_edge(e, |l| !inst.covers(l, behind), "finishing")?;
            }
        }
    }
    w.check_conflicts("finishing", true)?;
    w.trace.push("deficient paths finished".into());
    w.finish(cfg, 2, Some(case), single_edge_end, swaps)
}

/// Pairs for one side of `Q`: a swapped pairing when two deficient edges meet
/// there, otherwise the `n` copies reaching furthest along `Q`
/// paired with themselves.
fn side_pairs(
    inst: &TapInstance,
    copies: &[usize],
    side: &[EdgeId],
    q: &[EdgeId],
    n: usize,
) -> Result<Pairing, DeficientError> {
    if side.len() == 2 {
        return pair_links(inst, copies, side[0], side[1], q, n);
    }
    let top: Vec<CopyRef> = ranked_copies(inst, copies, side[0], q).into_iter().take(n).collect();
    if top.len() < n {
        return Err(DeficientError::Internal(format!("fewer than {n} copies through {}", inst.edge_name(side[0]))));
    }
    Ok(Pairing { pairs: top.into_iter().map(|c| (c, c)).collect(), swaps: 0 })
}

/// Far-side pairs when one near edge carries `n` long copies: each long copy
/// is matched with a copy through the other far edge, preferring one that
/// shares no edge off `Q` with it, then the shallowest along `Q`. Swaps may
/// also regroup two pairs into the two firsts and the two seconds, as long
/// as both new pairs reach both far edges and hold a long copy through the
/// saturated edge.
fn saturated_pairs(
    inst: &TapInstance,
    copies: &[usize],
    longs: &[CopyRef],
    star: EdgeId,
    far: &[EdgeId],
    q: &[EdgeId],
) -> Result<Pairing, DeficientError> {
    let long_set: BTreeSet<CopyRef> = longs.iter().copied().collect();
    let mut pool: [Vec<CopyRef>; 2] = [0, 1].map(|s| {
        let mut v: Vec<CopyRef> =
            ranked_copies(inst, copies, far[s], q).into_iter().filter(|c| !long_set.contains(c)).collect();
        v.reverse();
        v
    });
    // Edges every long copy covers are touched by every pair anyway.
    let shared_by_all: BTreeSet<EdgeId> =
        (0..inst.num_edges()).filter(|&e| longs.iter().all(|c| inst.covers(c.link, e))).collect();
    let mut pairs = Vec::new();
    for &m in longs {
        let s = if inst.covers(m.link, far[0]) { 0 } else { 1 };
        let other = 1 - s;
        if pool[other].is_empty() {
            return Err(DeficientError::Internal(format!("no partner through {}", inst.edge_name(far[other]))));
        }
        let shares = |c: &CopyRef| {
            (0..inst.num_edges()).any(|e| {
                !q.contains(&e) && !shared_by_all.contains(&e) && inst.covers(c.link, e) && inst.covers(m.link, e)
            })
        };
        let pick = pool[other].iter().position(|c| !shares(c)).unwrap_or(0);
        let partner = pool[other].remove(pick);
        pool[s].retain(|&c| c != partner);
        pairs.push((m, partner));
    }
    let off_q: Vec<EdgeId> = (0..inst.num_edges()).filter(|e| !q.contains(e)).collect();
    let spans_far = |a: CopyRef, b: CopyRef| {
        (inst.covers(a.link, far[0]) || inst.covers(b.link, far[0]))
            && (inst.covers(a.link, far[1]) || inst.covers(b.link, far[1]))
    };
    // Every pair must reach both far edges and keep a copy through the
    // saturated edge.
    let through_star = |c: CopyRef| inst.covers(c.link, star) && q.iter().all(|&e| inst.covers(c.link, e));
    let seeded = |p: &(CopyRef, CopyRef)| through_star(p.0) || through_star(p.1);
    let swaps = swap_until_stable(inst, &mut pairs, &off_q, true, |p, q| {
        spans_far(p.0, p.1) && spans_far(q.0, q.1) && seeded(p) && seeded(q)
    })?;
    let p = Pairing { pairs, swaps };
    // Weaker form of the pairing invariant: at most one doubly covered pair
    // unless every pair touches the edge.
    for e in off_q {
        let both = p.pairs.iter().filter(|(f, g)| inst.covers(f.link, e) && inst.covers(g.link, e)).count();
        let touched = p.pairs.iter().filter(|(f, g)| inst.covers(f.link, e) || inst.covers(g.link, e)).count();
        if both > 1 && touched < p.pairs.len() {
            return Err(DeficientError::PairingInvariant { edge: inst.edge_name(e) });
        }
    }
    Ok(p)
}
