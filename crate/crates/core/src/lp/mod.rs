//! EDGE-LP, NODE-LP and ODD-LP relaxations: construction, exact solving,
//! extreme-point tests, the one-third/two-thirds classification and the
//! iterative-rounding step.

pub mod oddsets;
pub mod scan;
pub mod simplex;

use crate::instance::{EdgeId, FractionalSolution, IntegralSolution, LinkId, NodeId, TapInstance};
use crate::rational::{self, int, ratio, Rational};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use simplex::{DualSimplex, SimplexOutcome};
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

/// Default cap on the node count for odd-set enumeration.
pub const ODD_SET_NODE_LIMIT: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Edge,
    Node,
    Odd,
}

impl Model {
    pub const ALL: [Model; 3] = [Model::Edge, Model::Node, Model::Odd];
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Edge => "edge",
            Model::Node => "node",
            Model::Odd => "odd",
        })
    }
}

impl FromStr for Model {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "edge" => Ok(Model::Edge),
            "node" => Ok(Model::Node),
            "odd" => Ok(Model::Odd),
            _ => Err(format!("unknown model {s:?} (expected edge, node or odd)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Edge { edge: EdgeId },
    Node { node: NodeId },
    OddSet { nodes: Vec<NodeId> },
    Fixed { link: LinkId },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub var: usize,
    #[serde(with = "rational::serde_str")]
    pub coef: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    /// Sparse row, ascending by variable, no zero coefficients.
    pub coeffs: Vec<Term>,
    pub sense: Sense,
    #[serde(with = "rational::serde_str")]
    pub rhs: Rational,
    pub provenance: Provenance,
}

impl Constraint {
    pub fn lhs(&self, x: &FractionalSolution) -> Rational {
        self.coeffs.iter().map(|t| &t.coef * x.get(t.var)).sum()
    }

    pub fn is_satisfied(&self, x: &FractionalSolution) -> bool {
        let lhs = self.lhs(x);
        match self.sense {
            Sense::Ge => lhs >= self.rhs,
            Sense::Eq => lhs == self.rhs,
        }
    }

    pub fn is_tight(&self, x: &FractionalSolution) -> bool {
        self.lhs(x) == self.rhs
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub model: Model,
    pub num_vars: usize,
    #[serde(with = "rational::serde_str_vec")]
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
    /// Tree edge names by edge id, for diagnostics.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edge_names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("{model} model needs a binary tree with leaf-to-leaf links")]
    NotBinaryLeafLink { model: Model },
    #[error("odd-set enumeration over {nodes} nodes exceeds the limit of {limit}")]
    TooManyNodes { nodes: usize, limit: usize },
    #[error("uncoverable edge {edge}: no link covers it, every relaxation is infeasible")]
    UncoverableEdge { edge: String },
    #[error("objective entry {var} is negative")]
    NegativeObjective { var: usize },
    #[error("objective has {got} entries, expected {expected}")]
    ObjectiveLength { got: usize, expected: usize },
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("point violates constraint {index} ({provenance:?})")]
    InfeasiblePoint { index: usize, provenance: Provenance },
    #[error("point has negative entry on variable {var}")]
    NegativeEntry { var: usize },
    #[error("no link has value at least {threshold}")]
    NoLinkAtThreshold { threshold: String },
}

fn edge_row(inst: &TapInstance, e: EdgeId) -> Constraint {
    Constraint {
        coeffs: inst.cover_set(e).iter().map(|&l| Term { var: l, coef: int(1) }).collect(),
        sense: Sense::Ge,
        rhs: int(1),
        provenance: Provenance::Edge { edge: e },
    }
}

/// Builds the relaxation for `model`. The odd model enumerates every odd
/// node set up to `odd_limit` nodes.
pub fn build_lp(inst: &TapInstance, model: Model, odd_limit: usize) -> Result<LinearProgram, LpError> {
    if model != Model::Edge && !inst.is_binary_leaf_link() {
        return Err(LpError::NotBinaryLeafLink { model });
    }
    if model == Model::Odd && inst.num_nodes() > odd_limit.min(64) {
        return Err(LpError::TooManyNodes { nodes: inst.num_nodes(), limit: odd_limit.min(64) });
    }
    let mut constraints: Vec<Constraint> = (0..inst.num_edges()).map(|e| edge_row(inst, e)).collect();
    if model == Model::Node {
        for v in 0..inst.num_nodes() {
            if inst.degree(v) != 3 {
                continue;
            }
            let union: BTreeSet<LinkId> = inst
                .neighbors(v)
                .iter()
                .flat_map(|&(_, e)| inst.cover_set(e).iter().copied())
                .collect();
            constraints.push(Constraint {
                coeffs: union.into_iter().map(|l| Term { var: l, coef: int(1) }).collect(),
                sense: Sense::Ge,
                rhs: int(2),
                provenance: Provenance::Node { node: v },
            });
        }
    }
    if model == Model::Odd {
        let fam = oddsets::OddSets::new(inst);
        for mask in fam.masks() {
            constraints.push(fam.constraint(mask));
        }
    }
    Ok(LinearProgram {
        model,
        num_vars: inst.num_links(),
        objective: inst.links().iter().map(|l| l.cost.clone()).collect(),
        constraints,
        edge_names: (0..inst.num_edges()).map(|e| inst.edge_name(e)).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpSolution {
    pub x: FractionalSolution,
    pub value: Rational,
    pub pivots: usize,
    /// Constraints that were materialised in the simplex.
    pub rows_used: usize,
}

/// Integer view of a constraint row for fast violation checks.
struct IntRow {
    coeffs: Vec<(usize, i64)>,
    rhs: i64,
}

fn int_row(c: &Constraint) -> Option<IntRow> {
    let coeffs = c
        .coeffs
        .iter()
        .map(|t| if rational::is_integer(&t.coef) { t.coef.numer().to_i64().map(|v| (t.var, v)) } else { None })
        .collect::<Option<Vec<_>>>()?;
    let rhs = if rational::is_integer(&c.rhs) { c.rhs.numer().to_i64()? } else { return None };
    Some(IntRow { coeffs, rhs })
}

/// `x` as numerators over a common denominator, when everything fits i128.
fn scaled(x: &[Rational]) -> Option<(Vec<i128>, i128)> {
    let d: BigInt = rational::lcm_of_denominators(x);
    let dd = d.to_i128()?;
    if dd > 1 << 60 {
        return None;
    }
    let nums = x
        .iter()
        .map(|v| (v.numer() * (&d / v.denom())).to_i128().filter(|n| n.abs() < 1 << 60))
        .collect::<Option<Vec<_>>>()?;
    Some((nums, dd))
}

/// Signed slack `lhs − rhs` of a row, scaled by the common denominator.
fn slack_scaled(row: &IntRow, nums: &[i128], d: i128) -> Option<i128> {
    let mut acc: i128 = 0;
    for &(j, a) in &row.coeffs {
        acc = acc.checked_add((a as i128).checked_mul(nums[j])?)?;
    }
    acc.checked_sub((row.rhs as i128).checked_mul(d)?)
}

/// Solves `lp` to an optimal basic solution. Odd-set rows are added lazily:
/// a basic optimum of the partial system that satisfies every row is a
/// vertex of the full system.
pub fn solve_lp(lp: &LinearProgram, objective: Option<&[Rational]>) -> Result<LpSolution, LpError> {
    let cost: &[Rational] = objective.unwrap_or(&lp.objective);
    if cost.len() != lp.num_vars {
        return Err(LpError::ObjectiveLength { got: cost.len(), expected: lp.num_vars });
    }
    if let Some(var) = cost.iter().position(|c| c.is_negative()) {
        return Err(LpError::NegativeObjective { var });
    }
    for c in &lp.constraints {
        if let Provenance::Edge { edge } = c.provenance {
            if c.coeffs.is_empty() && c.rhs.is_positive() {
                let name = lp.edge_names.get(edge).cloned().unwrap_or_else(|| format!("#{edge}"));
                return Err(LpError::UncoverableEdge { edge: name });
            }
        }
    }
    let mut s = DualSimplex::new(cost);
    let mut active = vec![false; lp.constraints.len()];
    let add = |s: &mut DualSimplex, i: usize, active: &mut Vec<bool>| {
        let c = &lp.constraints[i];
        let row: Vec<(usize, Rational)> = c.coeffs.iter().map(|t| (t.var, t.coef.clone())).collect();
        s.add_row(&row, &c.rhs);
        if c.sense == Sense::Eq {
            let neg: Vec<(usize, Rational)> = row.into_iter().map(|(j, v)| (j, -v)).collect();
            s.add_row(&neg, &-c.rhs.clone());
        }
        active[i] = true;
    };
    for (i, c) in lp.constraints.iter().enumerate() {
        if !matches!(c.provenance, Provenance::OddSet { .. }) {
            add(&mut s, i, &mut active);
        }
    }
    let int_rows: Vec<Option<IntRow>> = lp.constraints.iter().map(int_row).collect();
    const BATCH: usize = 8;
    loop {
        if s.solve() == SimplexOutcome::PrimalInfeasible {
            return Err(LpError::Infeasible);
        }
        let xv = s.primal();
        let fast = scaled(&xv);
        let xs = FractionalSolution { values: xv };
        // (violation, index), violation in a comparable scale
        let mut violated: Vec<(Rational, usize)> = Vec::new();
        for (i, c) in lp.constraints.iter().enumerate() {
            if active[i] {
                continue;
            }
            let slack = match (&int_rows[i], &fast) {
                (Some(r), Some((nums, d))) => match slack_scaled(r, nums, *d) {
                    Some(v) => Rational::new(v.into(), (*d).into()),
                    None => c.lhs(&xs) - &c.rhs,
                },
                _ => c.lhs(&xs) - &c.rhs,
            };
            let bad = match c.sense {
                Sense::Ge => slack.is_negative(),
                Sense::Eq => !slack.is_zero(),
            };
            if bad {
                violated.push((slack.abs(), i));
            }
        }
        if violated.is_empty() {
            let value = cost.iter().zip(&xs.values).map(|(c, v)| c * v).sum();
            let rows_used = active.iter().filter(|a| **a).count();
            return Ok(LpSolution { x: xs, value, pivots: s.pivots(), rows_used });
        }
        violated.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        for &(_, i) in violated.iter().take(BATCH) {
            add(&mut s, i, &mut active);
        }
    }
}

/// Index of the first violated constraint, or a negative entry.
pub fn check_feasible(lp: &LinearProgram, x: &FractionalSolution) -> Result<(), LpError> {
    if let Some(var) = x.values.iter().position(|v| v.is_negative()) {
        return Err(LpError::NegativeEntry { var });
    }
    let xs = &x.values;
    let fast = scaled(xs);
    for (i, c) in lp.constraints.iter().enumerate() {
        let ok = match (int_row(c), &fast) {
            (Some(r), Some((nums, d))) if c.sense == Sense::Ge => match slack_scaled(&r, nums, *d) {
                Some(v) => v >= 0,
                None => c.is_satisfied(x),
            },
            _ => c.is_satisfied(x),
        };
        if !ok {
            return Err(LpError::InfeasiblePoint { index: i, provenance: c.provenance.clone() });
        }
    }
    Ok(())
}

/// Rank of a set of rational rows by exact Gaussian elimination.
pub fn rank(rows: &[Vec<Rational>]) -> usize {
    let mut m: Vec<Vec<Rational>> = rows.to_vec();
    let cols = m.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let piv = m[r][c].clone();
        for i in r + 1..m.len() {
            if m[i][c].is_zero() {
                continue;
            }
            let f = &m[i][c] / &piv;
            for j in c..cols {
                let t = &f * &m[r][j];
                m[i][j] -= t;
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

/// True iff the constraints tight at `x` (with tight bounds `x_j ≥ 0`) have
/// full column rank.
pub fn is_extreme_point(lp: &LinearProgram, x: &FractionalSolution) -> Result<bool, LpError> {
    check_feasible(lp, x)?;
    let n = lp.num_vars;
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    for j in 0..n {
        if x.get(j).is_zero() {
            let mut r = vec![Rational::zero(); n];
            r[j] = int(1);
            rows.push(r);
        }
    }
    let fast = scaled(&x.values);
    for c in &lp.constraints {
        let tight = match (int_row(c), &fast) {
            (Some(r), Some((nums, d))) => match slack_scaled(&r, nums, *d) {
                Some(v) => v == 0,
                None => c.is_tight(x),
            },
            _ => c.is_tight(x),
        };
        if tight {
            let mut r = vec![Rational::zero(); n];
            for t in &c.coeffs {
                r[t.var] = t.coef.clone();
            }
            rows.push(r);
        }
    }
    Ok(rank(&rows) == n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConjectureStatus {
    AllLarge,
    HasTwothirds,
    Violates,
    Vacuous,
}

impl fmt::Display for ConjectureStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConjectureStatus::AllLarge => "all_large",
            ConjectureStatus::HasTwothirds => "has_twothirds",
            ConjectureStatus::Violates => "violates",
            ConjectureStatus::Vacuous => "vacuous",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtremePointVerdict {
    pub is_extreme: bool,
    #[serde(with = "opt_rational")]
    pub min_nonzero: Option<Rational>,
    #[serde(with = "opt_rational")]
    pub max_value: Option<Rational>,
    pub conjecture_status: ConjectureStatus,
}

pub mod opt_rational {
    use crate::rational::{parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        match r {
            Some(r) => s.serialize_str(&r.to_string()),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        let v: Option<String> = Option::deserialize(d)?;
        v.map(|s| parse_rational(&s).map_err(serde::de::Error::custom)).transpose()
    }
}

/// Classifies `x` by the two properties: all non-zero entries at least 1/3,
/// or some entry at least 2/3. The first property takes precedence.
pub fn classify(x: &FractionalSolution) -> (Option<Rational>, Option<Rational>, ConjectureStatus) {
    let nonzero: Vec<&Rational> = x.values.iter().filter(|v| !v.is_zero()).collect();
    let min = nonzero.iter().min().map(|v| (*v).clone());
    let max = nonzero.iter().max().map(|v| (*v).clone());
    let status = match (&min, &max) {
        (None, _) | (_, None) => ConjectureStatus::Vacuous,
        (Some(lo), Some(hi)) => {
            if *lo >= ratio(1, 3) {
                ConjectureStatus::AllLarge
            } else if *hi >= ratio(2, 3) {
                ConjectureStatus::HasTwothirds
            } else {
                ConjectureStatus::Violates
            }
        }
    };
    (min, max, status)
}

/// Full verdict; a point that is not feasible for `lp` is reported as not
/// extreme.
pub fn check_conjecture(x: &FractionalSolution, lp: &LinearProgram) -> ExtremePointVerdict {
    let (min_nonzero, max_value, conjecture_status) = classify(x);
    ExtremePointVerdict {
        is_extreme: is_extreme_point(lp, x).unwrap_or(false),
        min_nonzero,
        max_value,
        conjecture_status,
    }
}

#[derive(Debug, Clone)]
pub struct RoundStep {
    pub fixed: BTreeSet<LinkId>,
    /// `lp` with the fixed links pinned to one and removed from the objective.
    pub residual: LinearProgram,
    /// Cost of the fixed links at value one.
    pub fixed_cost: Rational,
}

/// Fixes every link with `x_ℓ ≥ threshold` to one. The residual objective
/// charges only unfixed links, so its optimum is at most `OPT − Σ c_ℓ x_ℓ`
/// over the fixed links (raising fixed entries of `x` to one stays feasible).
pub fn iterative_round_step(
    lp: &LinearProgram,
    x: &FractionalSolution,
    threshold: &Rational,
) -> Result<RoundStep, LpError> {
    let fixed: BTreeSet<LinkId> = (0..lp.num_vars).filter(|&l| x.get(l) >= *threshold).collect();
    if fixed.is_empty() {
        return Err(LpError::NoLinkAtThreshold { threshold: threshold.to_string() });
    }
    let mut residual = lp.clone();
    let mut fixed_cost = Rational::zero();
    for &l in &fixed {
        residual.constraints.push(Constraint {
            coeffs: vec![Term { var: l, coef: int(1) }],
            sense: Sense::Eq,
            rhs: Rational::one(),
            provenance: Provenance::Fixed { link: l },
        });
        fixed_cost += &lp.objective[l];
        residual.objective[l] = Rational::zero();
    }
    Ok(RoundStep { fixed, residual, fixed_cost })
}

/// Checks every odd-set row at the 0/1 vector of `a`.
pub fn verify_odd_validity(inst: &TapInstance, a: &IntegralSolution, odd_limit: usize) -> Result<bool, LpError> {
    if inst.num_nodes() > odd_limit.min(64) {
        return Err(LpError::TooManyNodes { nodes: inst.num_nodes(), limit: odd_limit.min(64) });
    }
    let fam = oddsets::OddSets::new(inst);
    Ok(fam.first_violated_integral(a).is_none())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{RawInstance, RawLink};

    fn star() -> TapInstance {
        let raw = RawInstance {
            nodes: ["c", "x", "y", "z"].iter().map(|s| s.to_string()).collect(),
            tree_edges: vec![
                ["c".into(), "x".into()],
                ["c".into(), "y".into()],
                ["c".into(), "z".into()],
            ],
            links: [("x", "y"), ("x", "z"), ("y", "z")]
                .iter()
                .map(|(u, v)| RawLink { u: u.to_string(), v: v.to_string(), cost: int(1) })
                .collect(),
            root: None,
            unweighted: false,
        };
        TapInstance::from_raw(&raw).unwrap()
    }

    #[test]
    fn star_edge_model_rows() {
        let lp = build_lp(&star(), Model::Edge, ODD_SET_NODE_LIMIT).unwrap();
        assert_eq!(lp.constraints.len(), 3);
        assert!(lp.constraints.iter().all(|c| c.coeffs.len() == 2 && c.coeffs.iter().all(|t| t.coef == int(1))));
    }

    #[test]
    fn star_node_model_adds_union_row() {
        let lp = build_lp(&star(), Model::Node, ODD_SET_NODE_LIMIT).unwrap();
        assert_eq!(lp.constraints.len(), 4);
        let last = &lp.constraints[3];
        assert_eq!(last.rhs, int(2));
        assert_eq!(last.coeffs.iter().map(|t| t.var).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert!(last.coeffs.iter().all(|t| t.coef == int(1)));
    }

    #[test]
    fn star_optima() {
        let s = star();
        let e = solve_lp(&build_lp(&s, Model::Edge, 16).unwrap(), None).unwrap();
        assert_eq!(e.value, ratio(3, 2));
        let n = solve_lp(&build_lp(&s, Model::Node, 16).unwrap(), None).unwrap();
        assert_eq!(n.value, int(2));
        let o = solve_lp(&build_lp(&s, Model::Odd, 16).unwrap(), None).unwrap();
        assert_eq!(o.value, int(2));
    }

    #[test]
    fn uncoverable_edge_is_named() {
        let raw = RawInstance {
            nodes: vec!["a".into(), "b".into(), "c".into()],
            tree_edges: vec![["a".into(), "b".into()], ["b".into(), "c".into()]],
            links: vec![RawLink { u: "b".into(), v: "c".into(), cost: int(1) }],
            root: None,
            unweighted: false,
        };
        let inst = TapInstance::from_raw(&raw).unwrap();
        let lp = build_lp(&inst, Model::Edge, 16).unwrap();
        assert!(matches!(solve_lp(&lp, None), Err(LpError::UncoverableEdge { .. })));
    }

    #[test]
    fn extreme_point_checks() {
        let s = star();
        let lp = build_lp(&s, Model::Edge, 16).unwrap();
        let half = FractionalSolution::uniform(3, ratio(1, 2));
        assert!(is_extreme_point(&lp, &half).unwrap());
        let a = IntegralSolution::new([0, 1]).to_fractional(3);
        let b = IntegralSolution::new([1, 2]).to_fractional(3);
        assert!(is_extreme_point(&lp, &a).unwrap());
        let mid = a.add(&b).scale(&ratio(1, 2));
        assert!(!is_extreme_point(&lp, &mid).unwrap());
        assert!(is_extreme_point(&lp, &FractionalSolution::zeros(3)).is_err());
    }

    #[test]
    fn classification_boundaries() {
        let f = |v: Vec<Rational>| classify(&FractionalSolution { values: v }).2;
        assert_eq!(f(vec![ratio(1, 2); 3]), ConjectureStatus::AllLarge);
        assert_eq!(f(vec![ratio(1, 4), ratio(5, 8), ratio(3, 8)]), ConjectureStatus::Violates);
        assert_eq!(f(vec![ratio(1, 4), ratio(2, 3)]), ConjectureStatus::HasTwothirds);
        assert_eq!(f(vec![int(0), int(0)]), ConjectureStatus::Vacuous);
    }

    #[test]
    fn round_step() {
        let s = star();
        let lp = build_lp(&s, Model::Edge, 16).unwrap();
        let x = FractionalSolution { values: vec![ratio(3, 4), ratio(1, 4), ratio(3, 4)] };
        let step = iterative_round_step(&lp, &x, &ratio(2, 3)).unwrap();
        assert_eq!(step.fixed.iter().copied().collect::<Vec<_>>(), vec![0, 2]);
        let r = solve_lp(&step.residual, None).unwrap();
        assert_eq!(r.value, int(0));
        let half = FractionalSolution::uniform(3, ratio(1, 2));
        assert!(iterative_round_step(&lp, &half, &ratio(2, 3)).is_err());
    }
}
