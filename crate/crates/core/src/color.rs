//! Convex decompositions by link coloring.
//!
//! A fractional cover `x` is scaled to integral link multiplicities, every
//! copy gets one of `N` colors, and each color class becomes an integral
//! cover. With weights `1/N` the classes satisfy `Σ λ_i class_i ≤ scale · x`
//! componentwise, so the cheapest class costs at most `scale · cost(x)`.

use crate::instance::{EdgeId, FractionalSolution, IntegralSolution, LinkId, NodeId, Rooting, TapInstance};
use crate::rational::{self, int, ratio, Rational};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

pub const DEFAULT_COPY_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone)]
pub struct ColorConfig {
    /// Upper bound on the total number of link copies a decomposition may use.
    pub copy_budget: usize,
    /// Run the per-step invariant assertions (monotonicity, new-color rate).
    pub checks: bool,
}

impl Default for ColorConfig {
    fn default() -> Self {
        ColorConfig { copy_budget: DEFAULT_COPY_BUDGET, checks: cfg!(debug_assertions) }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ColorError {
    #[error("solution has {got} entries but the instance has {expected} links")]
    LengthMismatch { expected: usize, got: usize },
    #[error("solution is identically zero")]
    ZeroSolution,
    #[error("solution is not a fractional cover: edge {edge} has coverage {coverage}")]
    NotCover { edge: String, coverage: String },
    #[error("decomposition too large: k = {k} needs {copies} link copies (budget {budget})")]
    TooLarge { k: String, copies: String, budget: usize },
    #[error("deficient edges present: {}", .edges.join(", "))]
    Deficient { edges: Vec<String> },
    #[error("subtree edge {edge} is not abundant")]
    NotAbundant { edge: String },
    #[error("conflict at edge {edge}: color {color} on links {links:?}")]
    Conflict { edge: String, color: usize, links: Vec<LinkId> },
    #[error("internal coloring failure: {0}")]
    Internal(String),
}

/// A convex combination of integral covers certifying `scale` against `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    /// Number of color classes.
    pub k: usize,
    #[serde(with = "rational::serde_str")]
    pub scale: Rational,
    pub classes: Vec<IntegralSolution>,
    #[serde(with = "rational::serde_str_vec")]
    pub lambdas: Vec<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<String>,
}

impl Decomposition {
    pub fn from_coloring(pc: &PartialColoring, scale: Rational, algorithm: &str) -> Self {
        let k = pc.palette();
        Decomposition {
            k,
            scale,
            classes: pc.classes(),
            lambdas: vec![ratio(1, k as i64); k],
            algorithm: Some(algorithm.to_string()),
        }
    }

    pub fn class_costs(&self, inst: &TapInstance) -> Vec<Rational> {
        self.classes.iter().map(|c| inst.integral_cost(c)).collect()
    }
}

/// Which part of a link a colored copy is credited to: the whole tree path,
/// or the vertical half from the left (right) endpoint up to the LCA.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Span {
    Whole,
    Left,
    Right,
}

impl Span {
    fn index(self) -> usize {
        match self {
            Span::Whole => 0,
            Span::Left => 1,
            Span::Right => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictWitness {
    pub edge: EdgeId,
    pub color: usize,
    pub links: Vec<LinkId>,
}

/// Link copies with optional colors, and the per-edge color tallies they
/// induce. An edge holds color `c` iff some copy colored `c` is credited to a
/// span containing that edge.
#[derive(Debug, Clone)]
pub struct PartialColoring {
    palette: usize,
    rooting: Rooting,
    colored: Vec<Vec<(usize, Span)>>,
    uncolored: Vec<usize>,
    spans: Vec<[Vec<EdgeId>; 3]>,
    lca: Vec<NodeId>,
    through: Vec<Vec<LinkId>>,
    tally: Vec<Vec<u32>>,
    distinct: Vec<usize>,
}

impl PartialColoring {
    /// All copies uncolored; `copies[l]` copies of link `l`, colors `0..palette`.
    /// The left endpoint of a link is the one with the smaller node name.
    pub fn new(inst: &TapInstance, root: NodeId, copies: Vec<usize>, palette: usize) -> Self {
        assert_eq!(copies.len(), inst.num_links());
        let rooting = inst.rooted_at(root);
        let mut spans = Vec::with_capacity(inst.num_links());
        let mut lca = Vec::with_capacity(inst.num_links());
        let mut through = vec![Vec::new(); inst.num_edges()];
        for (l, link) in inst.links().iter().enumerate() {
            let (a, b) = if inst.node_name(link.u) <= inst.node_name(link.v) {
                (link.u, link.v)
            } else {
                (link.v, link.u)
            };
            let top = rooting.lca(a, b);
            let left = rooting.vertical_path(a, top);
            let right = rooting.vertical_path(b, top);
            let whole: Vec<EdgeId> = left.iter().chain(&right).copied().collect();
            for &e in &whole {
                through[e].push(l);
            }
            spans.push([whole, left, right]);
            lca.push(top);
        }
        PartialColoring {
            palette,
            rooting,
            colored: vec![Vec::new(); inst.num_links()],
            uncolored: copies,
            spans,
            lca,
            through,
            tally: vec![vec![0; palette]; inst.num_edges()],
            distinct: vec![0; inst.num_edges()],
        }
    }

    pub fn palette(&self) -> usize {
        self.palette
    }
    pub fn rooting(&self) -> &Rooting {
        &self.rooting
    }
    pub fn num_links(&self) -> usize {
        self.uncolored.len()
    }
    pub fn copies(&self, l: LinkId) -> usize {
        self.uncolored[l] + self.colored[l].len()
    }
    pub fn uncolored(&self, l: LinkId) -> usize {
        self.uncolored[l]
    }
    pub fn colored(&self, l: LinkId) -> &[(usize, Span)] {
        &self.colored[l]
    }
    pub fn span(&self, l: LinkId, s: Span) -> &[EdgeId] {
        &self.spans[l][s.index()]
    }
    pub fn lca(&self, l: LinkId) -> NodeId {
        self.lca[l]
    }
    /// Links whose tree path contains `e`, ascending.
    pub fn through(&self, e: EdgeId) -> &[LinkId] {
        &self.through[e]
    }
    /// The half of link `l` containing edge `e`, if any.
    pub fn side_of(&self, l: LinkId, e: EdgeId) -> Option<Span> {
        if self.spans[l][1].contains(&e) {
            Some(Span::Left)
        } else if self.spans[l][2].contains(&e) {
            Some(Span::Right)
        } else {
            None
        }
    }
    pub fn count(&self, e: EdgeId, c: usize) -> u32 {
        self.tally[e][c]
    }
    pub fn has(&self, e: EdgeId, c: usize) -> bool {
        self.tally[e][c] > 0
    }
    pub fn distinct(&self, e: EdgeId) -> usize {
        self.distinct[e]
    }
    pub fn is_complete(&self, e: EdgeId) -> bool {
        self.distinct[e] == self.palette
    }
    pub fn first_missing(&self, e: EdgeId) -> Option<usize> {
        self.tally[e].iter().position(|&t| t == 0)
    }
    pub fn colors_on(&self, e: EdgeId) -> Vec<usize> {
        (0..self.palette).filter(|&c| self.tally[e][c] > 0).collect()
    }
    pub fn link_has_color(&self, l: LinkId, c: usize) -> bool {
        self.colored[l].iter().any(|&(d, _)| d == c)
    }

    /// Colors one uncolored copy of `l`. Panics if none is left.
    pub fn color(&mut self, l: LinkId, c: usize, span: Span) {
        assert!(self.uncolored[l] > 0, "link {l} has no uncolored copy");
        assert!(c < self.palette);
        self.uncolored[l] -= 1;
        self.colored[l].push((c, span));
        for &e in &self.spans[l][span.index()] {
            if self.tally[e][c] == 0 {
                self.distinct[e] += 1;
            }
            self.tally[e][c] += 1;
        }
    }

    /// Removes the color of the `idx`-th colored copy of `l`.
    pub fn uncolor(&mut self, l: LinkId, idx: usize) -> (usize, Span) {
        let (c, span) = self.colored[l].remove(idx);
        self.uncolored[l] += 1;
        for &e in &self.spans[l][span.index()] {
            self.tally[e][c] -= 1;
            if self.tally[e][c] == 0 {
                self.distinct[e] -= 1;
            }
        }
        (c, span)
    }

    /// Links (with repetition per copy) whose copies of color `c` are credited on `e`.
    pub fn holders(&self, e: EdgeId, c: usize) -> Vec<LinkId> {
        let mut out = Vec::new();
        for &l in &self.through[e] {
            for &(d, s) in &self.colored[l] {
                if d == c && self.spans[l][s.index()].contains(&e) {
                    out.push(l);
                }
            }
        }
        out
    }

    /// First conflict among `edges`: an incomplete edge carrying three or
    /// more copies of one color.
    pub fn find_conflict(&self, edges: impl IntoIterator<Item = EdgeId>) -> Option<ConflictWitness> {
        for e in edges {
            if self.is_complete(e) {
                continue;
            }
            if let Some(c) = (0..self.palette).find(|&c| self.tally[e][c] >= 3) {
                return Some(ConflictWitness { edge: e, color: c, links: self.holders(e, c) });
            }
        }
        None
    }

    pub fn all_complete(&self) -> bool {
        (0..self.tally.len()).all(|e| self.is_complete(e))
    }

    /// Color classes over whole links.
    pub fn classes(&self) -> Vec<IntegralSolution> {
        let mut out = vec![IntegralSolution::default(); self.palette];
        for (l, cs) in self.colored.iter().enumerate() {
            for &(c, _) in cs {
                out[c].chosen.insert(l);
            }
        }
        out
    }

    /// Recomputes the tallies from the colored copies and compares.
    pub fn tallies_consistent(&self) -> bool {
        let mut tally = vec![vec![0u32; self.palette]; self.tally.len()];
        for (l, cs) in self.colored.iter().enumerate() {
            for &(c, s) in cs {
                for &e in &self.spans[l][s.index()] {
                    tally[e][c] += 1;
                }
            }
        }
        let distinct: Vec<usize> = tally.iter().map(|t| t.iter().filter(|&&v| v > 0).count()).collect();
        tally == self.tally && distinct == self.distinct
    }
}

pub fn conflict_error(inst: &TapInstance, w: ConflictWitness) -> ColorError {
    ColorError::Conflict { edge: inst.edge_name(w.edge), color: w.color, links: w.links }
}

pub fn min_nonzero_alpha(x: &FractionalSolution) -> Result<Rational, ColorError> {
    x.values.iter().filter(|v| v.is_positive()).min().cloned().ok_or(ColorError::ZeroSolution)
}

/// `2 / (1 + α)`.
pub fn beta_of(alpha: &Rational) -> Rational {
    int(2) / (Rational::one() + alpha)
}

pub(crate) fn check_cover(inst: &TapInstance, x: &FractionalSolution) -> Result<(), ColorError> {
    if x.len() != inst.num_links() {
        return Err(ColorError::LengthMismatch { expected: inst.num_links(), got: x.len() });
    }
    for e in 0..inst.num_edges() {
        let cov = inst.coverage(x, e);
        if cov < Rational::one() {
            return Err(ColorError::NotCover { edge: inst.edge_name(e), coverage: cov.to_string() });
        }
    }
    Ok(())
}

/// Smallest positive integer `k` with `k · v` integral for every value.
pub(crate) fn least_multiplier(values: impl IntoIterator<Item = Rational>) -> BigInt {
    let vs: Vec<Rational> = values.into_iter().collect();
    rational::lcm_of_denominators(vs.iter())
}

/// `factor · x_l` copies per link; every product must be integral.
pub(crate) fn scaled_copies(
    x: &FractionalSolution,
    k: &BigInt,
    factor: &Rational,
    budget: usize,
) -> Result<Vec<usize>, ColorError> {
    let total: Rational = x.values.iter().fold(Rational::zero(), |acc, v| acc + v) * factor;
    let too_large = || ColorError::TooLarge { k: k.to_string(), copies: total.ceil().to_string(), budget };
    if total > Rational::from_integer(BigInt::from(budget)) || *k > BigInt::from(budget) {
        return Err(too_large());
    }
    x.values
        .iter()
        .map(|v| {
            let c = v * factor;
            assert!(rational::is_integer(&c), "copy count {c} is not integral");
            rational::to_usize(&c).ok_or_else(too_large)
        })
        .collect()
}

/// Edges in top-down order (breadth-first from the root).
pub(crate) fn top_down_edges(r: &Rooting) -> Vec<EdgeId> {
    r.bfs.iter().filter_map(|&v| r.parent_edge[v]).collect()
}

/// The greedy top-down completion: each incomplete edge, in the given order,
/// takes the first color it lacks on an uncolored copy credited to the half
/// containing it. Copies are drawn within a per-side quota of half the
/// uncolored copies first; returns how many copies had to exceed the quota.
pub(crate) fn complete_top_down(
    pc: &mut PartialColoring,
    order: &[EdgeId],
    inst: &TapInstance,
    checks: bool,
) -> Result<usize, ColorError> {
    let quota: Vec<usize> = (0..pc.num_links()).map(|l| pc.uncolored(l).div_ceil(2)).collect();
    let mut used = vec![[0usize; 2]; pc.num_links()];
    let mut fallbacks = 0;
    for &e in order {
        while let Some(c) = pc.first_missing(e) {
            let side = |pc: &PartialColoring, l: LinkId| pc.side_of(l, e).expect("link through edge");
            let slot = |s: Span| if s == Span::Left { 0 } else { 1 };
            let preferred = pc
                .through(e)
                .iter()
                .copied()
                .find(|&l| pc.uncolored(l) > 0 && used[l][slot(side(pc, l))] < quota[l]);
            let l = match preferred {
                Some(l) => l,
                None => {
                    let any = pc.through(e).iter().copied().find(|&l| pc.uncolored(l) > 0);
                    match any {
                        Some(l) => {
                            fallbacks += 1;
                            l
                        }
                        None => {
                            return Err(ColorError::Internal(format!(
                                "edge {} runs out of copies with {} of {} colors",
                                inst.edge_name(e),
                                pc.distinct(e),
                                pc.palette()
                            )))
                        }
                    }
                }
            };
            let s = side(pc, l);
            used[l][slot(s)] += 1;
            pc.color(l, c, s);
        }
        if checks {
            if let Some(w) = pc.find_conflict(order.iter().copied()) {
                return Err(ColorError::Internal(format!(
                    "top-down completion created a conflict at {} (color {})",
                    inst.edge_name(w.edge),
                    w.color
                )));
            }
        }
    }
    Ok(fallbacks)
}

/// The large-link coloring: `k·β·x` copies, `k` colors, every class a cover.
pub fn large_link_decompose(
    inst: &TapInstance,
    x: &FractionalSolution,
    cfg: &ColorConfig,
) -> Result<Decomposition, ColorError> {
    check_cover(inst, x)?;
    let alpha = min_nonzero_alpha(x)?;
    let beta = beta_of(&alpha);
    let half = &beta / int(2);
    let k_big = least_multiplier(x.values.iter().map(|v| v * &half));
    let factor = Rational::from_integer(k_big.clone()) * &beta;
    let copies = scaled_copies(x, &k_big, &factor, cfg.copy_budget)?;
    let k = k_big.to_usize().expect("bounded by the copy budget");
    let mut pc = PartialColoring::new(inst, inst.root(), copies.clone(), k);

    let depth = pc.rooting().depth.clone();
    let mut order: Vec<LinkId> = (0..inst.num_links()).filter(|&l| copies[l] > 0).collect();
    order.sort_by_key(|&l| (depth[pc.lca(l)], l));
    let first_touch = (&alpha * &beta * int(k as i64)).ceil().to_usize().unwrap_or(usize::MAX).min(k);

    for &l in &order {
        debug_assert_eq!(copies[l] % 2, 0);
        let fresh: Vec<EdgeId> = pc.span(l, Span::Whole).iter().copied().filter(|&e| pc.distinct(e) == 0).collect();
        for _ in 0..copies[l] / 2 {
            let before: Vec<(EdgeId, usize)> = pc
                .span(l, Span::Whole)
                .iter()
                .filter(|&&e| !pc.is_complete(e))
                .map(|&e| (e, pc.distinct(e)))
                .collect();
            for side in [Span::Left, Span::Right] {
                let c = pick_large_link_color(&pc, l, side);
                pc.color(l, c, Span::Whole);
                if cfg.checks {
                    check_monotone(&pc, inst, l)?;
                }
            }
            if cfg.checks {
                if let Some(&(e, _)) = before.iter().find(|&&(e, d)| pc.distinct(e) <= d) {
                    return Err(ColorError::Internal(format!(
                        "copy pair of link {} gave no new color to edge {}",
                        inst.link_name(l),
                        inst.edge_name(e)
                    )));
                }
            }
        }
        if cfg.checks {
            if let Some(&e) = fresh.iter().find(|&&e| pc.distinct(e) < first_touch) {
                return Err(ColorError::Internal(format!(
                    "first link through {} gave {} colors, expected at least {first_touch}",
                    inst.edge_name(e),
                    pc.distinct(e)
                )));
            }
        }
    }
    if let Some(e) = (0..inst.num_edges()).find(|&e| !pc.is_complete(e)) {
        return Err(ColorError::Internal(format!(
            "edge {} ends with {} of {k} colors",
            inst.edge_name(e),
            pc.distinct(e)
        )));
    }
    Ok(Decomposition::from_coloring(&pc, beta, "large-link"))
}

/// First color missing at the highest incomplete edge of the side; once the
/// side is saturated, the first color least used among the link's copies.
fn pick_large_link_color(pc: &PartialColoring, l: LinkId, side: Span) -> usize {
    if let Some(&f) = pc.span(l, side).iter().find(|&&e| !pc.is_complete(e)) {
        return pc.first_missing(f).expect("incomplete edge");
    }
    let mut uses = vec![0usize; pc.palette()];
    for &(c, _) in pc.colored(l) {
        uses[c] += 1;
    }
    (0..pc.palette()).min_by_key(|&c| (uses[c], c)).expect("non-empty palette")
}

/// Colors below the current LCA level are nested: an edge whose upper node
/// lies strictly below the LCA of the link being colored holds a subset of
/// its parent edge's colors.
fn check_monotone(pc: &PartialColoring, inst: &TapInstance, l: LinkId) -> Result<(), ColorError> {
    let r = pc.rooting();
    let level = r.depth[pc.lca(l)];
    for &e in pc.span(l, Span::Whole) {
        if r.edge_depth(e) - 1 <= level {
            continue;
        }
        let p = r.parent_of_edge(e).expect("edge below the LCA has a parent edge");
        if let Some(c) = (0..pc.palette()).find(|&c| pc.has(e, c) && !pc.has(p, c)) {
            return Err(ColorError::Internal(format!(
                "monotonicity broken: {} holds color {c} missing on parent {}",
                inst.edge_name(e),
                inst.edge_name(p)
            )));
        }
    }
    Ok(())
}

/// The greedy top-down coloring: `4k·x` half-link copies, `2k` colors.
pub fn greedy_decompose(
    inst: &TapInstance,
    x: &FractionalSolution,
    cfg: &ColorConfig,
) -> Result<Decomposition, ColorError> {
    check_cover(inst, x)?;
    min_nonzero_alpha(x)?;
    let k = least_multiplier(x.values.iter().cloned());
    halves_decompose(inst, x, &k, 4, cfg, ratio(2, 1), "greedy")
}

/// The abundant variant: `3k·x` half-link copies, `2k` colors, requires every
/// edge to have coverage at least 4/3.
pub fn abundant_scaled_decompose(
    inst: &TapInstance,
    x: &FractionalSolution,
    cfg: &ColorConfig,
) -> Result<Decomposition, ColorError> {
    if x.len() != inst.num_links() {
        return Err(ColorError::LengthMismatch { expected: inst.num_links(), got: x.len() });
    }
    let deficient = deficient_edges(inst, x);
    if !deficient.is_empty() {
        return Err(ColorError::Deficient { edges: deficient.iter().map(|&e| inst.edge_name(e)).collect() });
    }
    min_nonzero_alpha(x)?;
    // 3k·x_l must split evenly into two halves.
    let k = least_multiplier(x.values.iter().map(|v| v * ratio(3, 2)));
    halves_decompose(inst, x, &k, 3, cfg, ratio(3, 2), "abundant")
}

pub fn deficient_edges(inst: &TapInstance, x: &FractionalSolution) -> Vec<EdgeId> {
    let bar = ratio(4, 3);
    (0..inst.num_edges()).filter(|&e| inst.coverage(x, e) < bar).collect()
}

fn halves_decompose(
    inst: &TapInstance,
    x: &FractionalSolution,
    k: &BigInt,
    multiplier: i64,
    cfg: &ColorConfig,
    scale: Rational,
    name: &str,
) -> Result<Decomposition, ColorError> {
    let factor = Rational::from_integer(k * multiplier);
    let copies = scaled_copies(x, k, &factor, cfg.copy_budget)?;
    let palette = 2 * k.to_usize().expect("bounded by the copy budget");
    let mut pc = PartialColoring::new(inst, inst.root(), copies, palette);
    let order = top_down_edges(pc.rooting());
    let fallbacks = complete_top_down(&mut pc, &order, inst, cfg.checks)?;
    if fallbacks > 0 {
        return Err(ColorError::Internal(format!("{fallbacks} copies exceeded their half quota")));
    }
    Ok(Decomposition::from_coloring(&pc, scale, name))
}

/// Completes a conflict-free partial coloring on the abundant subtree below
/// `subtree_root` (with respect to the coloring's rooting).
pub fn extend_conflict_free(
    inst: &TapInstance,
    x: &FractionalSolution,
    partial: &PartialColoring,
    subtree_root: NodeId,
    cfg: &ColorConfig,
) -> Result<PartialColoring, ColorError> {
    let r = partial.rooting();
    let order: Vec<EdgeId> = top_down_edges(r)
        .into_iter()
        .filter(|&e| r.is_ancestor(subtree_root, r.edge_child[e]) && r.edge_child[e] != subtree_root)
        .collect();
    let bar = ratio(4, 3);
    if let Some(&e) = order.iter().find(|&&e| inst.coverage(x, e) < bar) {
        return Err(ColorError::NotAbundant { edge: inst.edge_name(e) });
    }
    if let Some(w) = partial.find_conflict(order.iter().copied()) {
        return Err(conflict_error(inst, w));
    }
    let mut pc = partial.clone();
    complete_top_down(&mut pc, &order, inst, cfg.checks)?;
    Ok(pc)
}

/// Outcome of [`verify_decomposition`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub ok: bool,
    pub problems: Vec<String>,
    #[serde(with = "crate::lp::opt_rational")]
    pub best_cost: Option<Rational>,
    #[serde(with = "rational::serde_str")]
    pub bound: Rational,
}

pub fn verify_decomposition(inst: &TapInstance, x: &FractionalSolution, d: &Decomposition) -> VerifyReport {
    let mut problems = Vec::new();
    let bound = &d.scale * inst.fractional_cost(x);
    if x.len() != inst.num_links() {
        problems.push(format!("solution has {} entries for {} links", x.len(), inst.num_links()));
        return VerifyReport { ok: false, problems, best_cost: None, bound };
    }
    if d.k == 0 || d.classes.len() != d.k || d.lambdas.len() != d.k {
        problems.push(format!(
            "k = {} but {} classes and {} weights",
            d.k,
            d.classes.len(),
            d.lambdas.len()
        ));
    }
    if d.lambdas.iter().any(|l| l.is_negative()) {
        problems.push("negative weight".into());
    }
    let total: Rational = d.lambdas.iter().fold(Rational::zero(), |a, l| a + l);
    if !total.is_one() {
        problems.push(format!("weights sum to {total}, not 1"));
    }
    let mut best: Option<Rational> = None;
    for (i, class) in d.classes.iter().enumerate() {
        if let Some(&l) = class.chosen.iter().find(|&&l| l >= inst.num_links()) {
            problems.push(format!("class {i} names unknown link {l}"));
            continue;
        }
        if let Some(e) = inst.first_uncovered(class) {
            problems.push(format!("class {i} leaves edge {} uncovered", inst.edge_name(e)));
        }
        let c = inst.integral_cost(class);
        if best.as_ref().is_none_or(|b| c < *b) {
            best = Some(c);
        }
    }
    let mut mass = vec![Rational::zero(); inst.num_links()];
    for (class, lam) in d.classes.iter().zip(&d.lambdas) {
        for &l in class.chosen.iter().filter(|&&l| l < inst.num_links()) {
            mass[l] += lam;
        }
    }
    for (l, m) in mass.iter().enumerate() {
        let cap = &d.scale * x.get(l);
        if *m > cap {
            problems.push(format!("link {} carries weight {m} above {cap}", inst.link_name(l)));
        }
    }
    if let Some(b) = &best {
        if *b > bound {
            problems.push(format!("cheapest class costs {b}, above {bound}"));
        }
    }
    VerifyReport { ok: problems.is_empty(), problems, best_cost: best, bound }
}

/// The cheapest class (first index on ties).
pub fn best_color(inst: &TapInstance, d: &Decomposition) -> Option<(usize, IntegralSolution)> {
    let costs = d.class_costs(inst);
    let mut best: Option<usize> = None;
    for (i, c) in costs.iter().enumerate() {
        if best.is_none_or(|b| *c < costs[b]) {
            best = Some(i);
        }
    }
    best.map(|i| (i, d.classes[i].clone()))
}
