//! Instance transformations with cost-preserving solution maps: binarization
//! (binary tree, leaf-to-leaf links) and the node gadget that makes every
//! EDGE-LP point NODE-LP feasible.

use crate::instance::{FractionalSolution, IntegralSolution, Link, LinkId, NodeId, TapInstance};
use crate::rational::{int, Rational};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionKind {
    Binarize,
    NodeGadget,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionMap {
    pub kind: ReductionKind,
    pub original_links: usize,
    pub transformed_links: usize,
    /// Zero-cost links of the transformed instance with no preimage.
    pub dummy_links: Vec<LinkId>,
    /// Indexed by original link id.
    pub link_correspondence: Vec<LinkId>,
    pub node_correspondence: BTreeMap<String, String>,
}

#[derive(Debug, thiserror::Error)]
pub enum ReduceError {
    #[error("solution is not a feasible cover; tree edge {edge} is uncovered")]
    Infeasible { edge: String },
    #[error("solution drops dummy link {link}, the only link covering part of its gadget")]
    MissingDummy { link: LinkId },
    #[error("instance must be binary with leaf-to-leaf links")]
    NotBinaryLeafLink,
    #[error("map expects {expected} links, solution has {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("link {0} out of range")]
    UnknownLink(LinkId),
    #[error(transparent)]
    Instance(#[from] crate::instance::InstanceError),
}

/// Node table for a transformed instance; fresh names never collide with
/// existing ones.
struct Builder {
    names: Vec<String>,
    taken: HashSet<String>,
    edges: Vec<(NodeId, NodeId)>,
}

impl Builder {
    fn new(inst: &TapInstance) -> Self {
        let names = inst.node_names().to_vec();
        let taken = names.iter().cloned().collect();
        Builder { names, taken, edges: Vec::new() }
    }

    fn fresh(&mut self, base: &str, tag: &str) -> NodeId {
        let mut name = format!("{base}'{tag}");
        while self.taken.contains(&name) {
            name.push('\'');
        }
        self.taken.insert(name.clone());
        self.names.push(name);
        self.names.len() - 1
    }
}

fn identity_names(inst: &TapInstance) -> BTreeMap<String, String> {
    inst.node_names().iter().map(|n| (n.clone(), n.clone())).collect()
}

/// Replaces every non-leaf `v0` with children `v1..vk` by the chain
/// `v0' v1' … vk' v(k+1)'`, hanging `v0` off `v0'` and each `vi` off `vi'`,
/// plus a zero-cost link `v0 – v(k+1)'`. At the root there is no parent edge,
/// so `v0'` would have degree 2; it is omitted and `v0` hangs off `v1'`.
/// Original nodes all end up as leaves and links keep their endpoints.
pub fn binarize(inst: &TapInstance) -> Result<(TapInstance, ReductionMap), ReduceError> {
    let r = inst.rooting();
    let mut b = Builder::new(inst);
    // new endpoints of each original parent edge: `slot` above, `top_of` below
    let mut top_of: Vec<NodeId> = (0..inst.num_nodes()).collect();
    let mut slot: Vec<NodeId> = (0..inst.num_nodes()).map(|v| r.parent[v].unwrap_or(v)).collect();
    let mut dummy_ends: Vec<(NodeId, NodeId)> = Vec::new();
    for &v in &r.bfs {
        if inst.is_leaf(v) {
            continue;
        }
        let name = inst.node_name(v).to_string();
        let mut prev = if r.parent[v].is_some() {
            let v0 = b.fresh(&name, "0");
            b.edges.push((v0, v));
            top_of[v] = v0;
            v0
        } else {
            v
        };
        for (i, &c) in r.children[v].iter().enumerate() {
            let vi = b.fresh(&name, &(i + 1).to_string());
            b.edges.push((prev, vi));
            slot[c] = vi;
            prev = vi;
        }
        let end = b.fresh(&name, &(r.children[v].len() + 1).to_string());
        b.edges.push((prev, end));
        dummy_ends.push((v, end));
    }
    for &v in &r.bfs {
        if r.parent[v].is_some() {
            b.edges.push((slot[v], top_of[v]));
        }
    }
    let mut links: Vec<Link> = inst.links().to_vec();
    let dummy_links = (links.len()..links.len() + dummy_ends.len()).collect();
    links.extend(dummy_ends.into_iter().map(|(u, v)| Link { u, v, cost: Rational::zero() }));
    let root = inst.to_raw().root.map(|_| inst.root());
    let transformed_links = links.len();
    let out = TapInstance::from_parts(b.names, b.edges, links, root)?;
    let map = ReductionMap {
        kind: ReductionKind::Binarize,
        original_links: inst.num_links(),
        transformed_links,
        dummy_links,
        link_correspondence: (0..inst.num_links()).collect(),
        node_correspondence: identity_names(inst),
    };
    Ok((out, map))
}

/// Places the gadget around every internal node `v` of a binary leaf-link
/// instance: each tree edge `v n_i` is subdivided by `a_i`, a pendant leaf
/// `b_i` hangs off `a_i`, and zero-cost links `b_1 b_2`, `b_2 b_3` are added.
/// Neighbours are taken in ascending node order.
pub fn node_gadget_expand(inst: &TapInstance) -> Result<(TapInstance, ReductionMap), ReduceError> {
    if !inst.is_binary_leaf_link() {
        return Err(ReduceError::NotBinaryLeafLink);
    }
    let mut b = Builder::new(inst);
    // subdivision node for (internal node, incident edge)
    let mut sub: BTreeMap<(NodeId, usize), NodeId> = BTreeMap::new();
    let mut gadget_links = Vec::new();
    for v in 0..inst.num_nodes() {
        if inst.is_leaf(v) {
            continue;
        }
        let name = inst.node_name(v).to_string();
        let mut bs = Vec::new();
        for (i, &(_, e)) in inst.neighbors(v).iter().enumerate() {
            let a = b.fresh(&name, &format!("a{}", i + 1));
            let bb = b.fresh(&name, &format!("b{}", i + 1));
            b.edges.push((v, a));
            b.edges.push((a, bb));
            sub.insert((v, e), a);
            bs.push(bb);
        }
        gadget_links.push((bs[0], bs[1]));
        gadget_links.push((bs[1], bs[2]));
    }
    for (e, &(x, y)) in inst.edges().iter().enumerate() {
        let ex = sub.get(&(x, e)).copied().unwrap_or(x);
        let ey = sub.get(&(y, e)).copied().unwrap_or(y);
        b.edges.push((ex, ey));
    }
    let mut links: Vec<Link> = inst.links().to_vec();
    let dummy_links = (links.len()..links.len() + gadget_links.len()).collect();
    links.extend(gadget_links.into_iter().map(|(u, v)| Link { u, v, cost: Rational::zero() }));
    let root = inst.to_raw().root.map(|_| inst.root());
    let transformed_links = links.len();
    let out = TapInstance::from_parts(b.names, b.edges, links, root)?;
    let map = ReductionMap {
        kind: ReductionKind::NodeGadget,
        original_links: inst.num_links(),
        transformed_links,
        dummy_links,
        link_correspondence: (0..inst.num_links()).collect(),
        node_correspondence: identity_names(inst),
    };
    Ok((out, map))
}

fn require_feasible(inst: &TapInstance, a: &IntegralSolution) -> Result<(), ReduceError> {
    match inst.first_uncovered(a) {
        Some(e) => Err(ReduceError::Infeasible { edge: inst.edge_name(e) }),
        None => Ok(()),
    }
}

fn check_range(a: &IntegralSolution, n: usize) -> Result<(), ReduceError> {
    match a.chosen.iter().find(|&&l| l >= n) {
        Some(&l) => Err(ReduceError::UnknownLink(l)),
        None => Ok(()),
    }
}

impl ReductionMap {
    fn check_sizes(&self, orig: Option<&TapInstance>, transformed: Option<&TapInstance>) -> Result<(), ReduceError> {
        for (inst, expected) in [(orig, self.original_links), (transformed, self.transformed_links)] {
            if let Some(inst) = inst {
                if inst.num_links() != expected {
                    return Err(ReduceError::SizeMismatch { expected, found: inst.num_links() });
                }
            }
        }
        Ok(())
    }

    fn dummy_set(&self) -> HashSet<LinkId> {
        self.dummy_links.iter().copied().collect()
    }
}

/// `A' = image(A) ∪ dummies`, feasible whenever `A` is.
pub fn push_solution(
    map: &ReductionMap,
    original: &TapInstance,
    a: &IntegralSolution,
) -> Result<IntegralSolution, ReduceError> {
    map.check_sizes(Some(original), None)?;
    check_range(a, original.num_links())?;
    require_feasible(original, a)?;
    let image = a.chosen.iter().map(|&l| map.link_correspondence[l]);
    Ok(IntegralSolution::new(image.chain(map.dummy_links.iter().copied())))
}

/// Preimage of the non-dummy links of a feasible `A'`.
pub fn lift_solution(
    map: &ReductionMap,
    transformed: &TapInstance,
    a: &IntegralSolution,
) -> Result<IntegralSolution, ReduceError> {
    map.check_sizes(None, Some(transformed))?;
    check_range(a, transformed.num_links())?;
    require_feasible(transformed, a)?;
    if let Some(&l) = map.dummy_links.iter().find(|l| !a.contains(**l)) {
        return Err(ReduceError::MissingDummy { link: l });
    }
    let back = inverse(map);
    Ok(IntegralSolution::new(a.chosen.iter().filter_map(|l| back.get(l).copied())))
}

fn inverse(map: &ReductionMap) -> BTreeMap<LinkId, LinkId> {
    map.link_correspondence.iter().enumerate().map(|(o, &t)| (t, o)).collect()
}

/// Fractional push: mapped values, dummies at 1.
pub fn push_fractional(map: &ReductionMap, x: &FractionalSolution) -> FractionalSolution {
    let mut out = FractionalSolution::zeros(map.transformed_links);
    for (o, &t) in map.link_correspondence.iter().enumerate() {
        out.values[t] = x.get(o);
    }
    for &d in &map.dummy_links {
        out.values[d] = int(1);
    }
    out
}

/// Fractional lift: restriction to the non-dummy links.
pub fn lift_fractional(map: &ReductionMap, x: &FractionalSolution) -> FractionalSolution {
    let dummies = map.dummy_set();
    let mut out = FractionalSolution::zeros(map.original_links);
    for (o, &t) in map.link_correspondence.iter().enumerate() {
        debug_assert!(!dummies.contains(&t));
        out.values[o] = x.get(t);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{RawInstance, RawLink};

    fn raw(nodes: &[&str], edges: &[(&str, &str)], links: &[(&str, &str, i64)]) -> RawInstance {
        RawInstance {
            nodes: nodes.iter().map(|s| s.to_string()).collect(),
            tree_edges: edges.iter().map(|(a, b)| [a.to_string(), b.to_string()]).collect(),
            links: links
                .iter()
                .map(|(u, v, c)| RawLink { u: u.to_string(), v: v.to_string(), cost: int(*c) })
                .collect(),
            root: None,
            unweighted: false,
        }
    }

    fn star() -> TapInstance {
        TapInstance::from_raw(&raw(
            &["c", "x", "y", "z"],
            &[("c", "x"), ("c", "y"), ("c", "z")],
            &[("x", "y", 1), ("x", "z", 1), ("y", "z", 1)],
        ))
        .unwrap()
    }

    fn degrees_ok(t: &TapInstance) -> bool {
        (0..t.num_nodes()).all(|v| t.degree(v) == 1 || t.degree(v) == 3)
    }

    #[test]
    fn star_center_becomes_leaf() {
        let s = star();
        let (t, map) = binarize(&s).unwrap();
        assert_eq!(t.num_nodes(), s.num_nodes() + 4);
        assert_eq!(map.dummy_links.len(), 1);
        assert!(degrees_ok(&t));
        assert!(t.is_binary_leaf_link());
        assert!(t.is_leaf(t.node("c").unwrap()));
    }

    #[test]
    fn three_children_below_parent() {
        // v0 has a parent and children v1, v2, v3 as in the textbook gadget
        let inst = TapInstance::from_raw(&raw(
            &["p", "v0", "v1", "v2", "v3"],
            &[("p", "v0"), ("v0", "v1"), ("v0", "v2"), ("v0", "v3")],
            &[("p", "v1", 1), ("v2", "v3", 1), ("p", "v3", 2)],
        ))
        .unwrap();
        let (t, map) = binarize(&inst).unwrap();
        assert!(degrees_ok(&t) && t.is_binary_leaf_link());
        let d = t.link(map.dummy_links[0]);
        assert_eq!(t.node_name(d.u), "v0");
        assert_eq!(t.node_name(d.v), "v0'4");
        // v0 - v0'0 - v0'1 - v0'2 - v0'3 - v0'4
        assert_eq!(t.link_path(map.dummy_links[0]).len(), 5);
    }

    #[test]
    fn single_edge_unchanged() {
        let inst = TapInstance::from_raw(&raw(&["a", "b"], &[("a", "b")], &[("a", "b", 3)])).unwrap();
        let (t, map) = binarize(&inst).unwrap();
        assert_eq!(t.num_nodes(), 2);
        assert!(map.dummy_links.is_empty());
    }

    #[test]
    fn push_lift_round_trip() {
        let s = star();
        let (t, map) = binarize(&s).unwrap();
        let a = IntegralSolution::new([0, 1]);
        let pushed = push_solution(&map, &s, &a).unwrap();
        assert!(t.is_feasible_cover(&pushed));
        assert_eq!(t.integral_cost(&pushed), s.integral_cost(&a));
        assert_eq!(lift_solution(&map, &t, &pushed).unwrap(), a);
    }

    #[test]
    fn lift_rejects_missing_dummy() {
        let s = star();
        let (t, map) = binarize(&s).unwrap();
        // every original link, but no dummy: the chain end stays uncovered
        let a = IntegralSolution::new([0, 1, 2]);
        assert!(lift_solution(&map, &t, &a).is_err());
        assert!(push_solution(&map, &s, &IntegralSolution::new([0])).is_err());
    }

    #[test]
    fn name_collisions_avoided() {
        let inst = TapInstance::from_raw(&raw(
            &["c", "c'0", "x", "y"],
            &[("c", "c'0"), ("c", "x"), ("c", "y")],
            &[("x", "y", 1), ("c'0", "x", 1)],
        ))
        .unwrap();
        let (t, _) = binarize(&inst).unwrap();
        assert!(degrees_ok(&t));
    }

    #[test]
    fn gadget_on_star() {
        let s = star();
        let (t, map) = node_gadget_expand(&s).unwrap();
        assert_eq!(t.num_nodes(), 4 + 6);
        assert_eq!(map.dummy_links.len(), 2);
        assert!(degrees_ok(&t) && t.is_binary_leaf_link());
        let half = FractionalSolution::uniform(3, crate::rational::ratio(1, 2));
        let pushed = push_fractional(&map, &half);
        assert!(t.is_fractional_cover(&pushed));
        assert_eq!(lift_fractional(&map, &pushed), half);
    }

    #[test]
    fn gadget_requires_binary() {
        let inst = TapInstance::from_raw(&raw(&["a", "b", "c"], &[("a", "b"), ("b", "c")], &[("a", "c", 1)])).unwrap();
        assert!(matches!(node_gadget_expand(&inst), Err(ReduceError::NotBinaryLeafLink)));
    }

    #[test]
    fn map_serializes() {
        let (_, map) = binarize(&star()).unwrap();
        let s = serde_json::to_string(&map).unwrap();
        let back: ReductionMap = serde_json::from_str(&s).unwrap();
        assert_eq!(back, map);
    }
}
