//! Instance model: a spanning tree plus weighted candidate links, the cover
//! relation between them, and feasibility/cost evaluation.

use crate::rational::{self, Rational};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

pub type NodeId = usize;
pub type EdgeId = usize;
pub type LinkId = usize;

/// On-disk instance, exactly as read from JSON. Nothing is checked yet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawInstance {
    pub nodes: Vec<String>,
    pub tree_edges: Vec<[String; 2]>,
    pub links: Vec<RawLink>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<String>,
    /// Only meaningful for 3TAP instances.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub unweighted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawLink {
    pub u: String,
    pub v: String,
    #[serde(with = "rational::serde_str")]
    pub cost: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    DuplicateNode { node: String },
    UnknownNode { node: String, context: String },
    SelfLoop { node: String, context: String },
    EdgeCount { edges: usize, nodes: usize },
    NotATree { edge: [String; 2] },
    Disconnected { node: String },
    NegativeCost { link: usize, cost: String },
    DuplicateLink { link: usize, duplicate_of: usize },
    UnknownRoot { root: String },
    Empty,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateNode { node } => write!(f, "duplicate node {node:?}"),
            Violation::UnknownNode { node, context } => {
                write!(f, "unknown node {node:?} in {context}")
            }
            Violation::SelfLoop { node, context } => write!(f, "self-loop at {node:?} in {context}"),
            Violation::EdgeCount { edges, nodes } => write!(
                f,
                "not a tree: {edges} tree edges for {nodes} nodes (expected {})",
                nodes.saturating_sub(1)
            ),
            Violation::NotATree { edge } => {
                write!(f, "not a tree: edge {}-{} closes a cycle", edge[0], edge[1])
            }
            Violation::Disconnected { node } => {
                write!(f, "not a tree: node {node:?} is disconnected")
            }
            Violation::NegativeCost { link, cost } => {
                write!(f, "negative cost {cost} on link {link}")
            }
            Violation::DuplicateLink { link, duplicate_of } => {
                write!(f, "link {link} duplicates link {duplicate_of}")
            }
            Violation::UnknownRoot { root } => write!(f, "root {root:?} is not a node"),
            Violation::Empty => write!(f, "instance has no nodes"),
        }
    }
}

/// Structural report on a raw instance. An empty list means the instance is
/// a spanning tree with well-formed, non-negative links.
pub fn validate_instance(raw: &RawInstance) -> Vec<Violation> {
    let mut out = Vec::new();
    if raw.nodes.is_empty() {
        out.push(Violation::Empty);
        return out;
    }
    let mut index: HashMap<&str, usize> = HashMap::new();
    for (i, n) in raw.nodes.iter().enumerate() {
        if index.insert(n.as_str(), i).is_some() {
            out.push(Violation::DuplicateNode { node: n.clone() });
        }
    }
    if let Some(r) = &raw.root {
        if !index.contains_key(r.as_str()) {
            out.push(Violation::UnknownRoot { root: r.clone() });
        }
    }
    if raw.tree_edges.len() + 1 != raw.nodes.len() {
        out.push(Violation::EdgeCount {
            edges: raw.tree_edges.len(),
            nodes: raw.nodes.len(),
        });
    }
    let mut dsu = Dsu::new(raw.nodes.len());
    for (i, [a, b]) in raw.tree_edges.iter().enumerate() {
        let ctx = format!("tree edge {i}");
        let (ia, ib) = match (index.get(a.as_str()), index.get(b.as_str())) {
            (Some(&x), Some(&y)) => (x, y),
            (x, y) => {
                if x.is_none() {
                    out.push(Violation::UnknownNode { node: a.clone(), context: ctx.clone() });
                }
                if y.is_none() {
                    out.push(Violation::UnknownNode { node: b.clone(), context: ctx });
                }
                continue;
            }
        };
        if ia == ib {
            out.push(Violation::SelfLoop { node: a.clone(), context: ctx });
            continue;
        }
        if !dsu.union(ia, ib) {
            out.push(Violation::NotATree { edge: [a.clone(), b.clone()] });
        }
    }
    let r0 = dsu.find(0);
    for (i, n) in raw.nodes.iter().enumerate() {
        if dsu.find(i) != r0 {
            out.push(Violation::Disconnected { node: n.clone() });
        }
    }
    let mut seen: HashMap<(usize, usize, Rational), usize> = HashMap::new();
    for (i, l) in raw.links.iter().enumerate() {
        let ctx = format!("link {i}");
        if l.cost.is_negative() {
            out.push(Violation::NegativeCost { link: i, cost: l.cost.to_string() });
        }
        let (iu, iv) = match (index.get(l.u.as_str()), index.get(l.v.as_str())) {
            (Some(&x), Some(&y)) => (x, y),
            (x, y) => {
                if x.is_none() {
                    out.push(Violation::UnknownNode { node: l.u.clone(), context: ctx.clone() });
                }
                if y.is_none() {
                    out.push(Violation::UnknownNode { node: l.v.clone(), context: ctx });
                }
                continue;
            }
        };
        if iu == iv {
            out.push(Violation::SelfLoop { node: l.u.clone(), context: ctx });
            continue;
        }
        let key = (iu.min(iv), iu.max(iv), l.cost.clone());
        if let Some(&j) = seen.get(&key) {
            out.push(Violation::DuplicateLink { link: i, duplicate_of: j });
        } else {
            seen.insert(key, i);
        }
    }
    out
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu((0..n).collect())
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra] = rb;
        true
    }
}

#[derive(Debug, thiserror::Error)]
pub enum InstanceError {
    #[error("invalid instance: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("unknown tree edge {0}")]
    UnknownEdge(EdgeId),
    #[error("unknown link {0}")]
    UnknownLink(LinkId),
    #[error("solution entry {u}-{v} matches no link")]
    NoSuchLink { u: String, v: String },
    #[error("solution entry {u}-{v} is ambiguous between parallel links; give an \"id\"")]
    AmbiguousLink { u: String, v: String },
    #[error("negative value {value} on link {link}")]
    NegativeValue { link: LinkId, value: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Link {
    pub u: NodeId,
    pub v: NodeId,
    pub cost: Rational,
}

/// A rooting of the tree: parent pointers, depths, and the orientation of
/// every edge (its lower endpoint).
#[derive(Debug, Clone)]
pub struct Rooting {
    pub root: NodeId,
    pub parent: Vec<Option<NodeId>>,
    pub parent_edge: Vec<Option<EdgeId>>,
    pub depth: Vec<usize>,
    pub children: Vec<Vec<NodeId>>,
    /// Lower (child-side) endpoint of every edge.
    pub edge_child: Vec<NodeId>,
    /// Nodes in breadth-first order from the root.
    pub bfs: Vec<NodeId>,
}

impl Rooting {
    /// Depth of an edge: the depth of its lower endpoint (edges at the root
    /// have depth 1).
    pub fn edge_depth(&self, e: EdgeId) -> usize {
        self.depth[self.edge_child[e]]
    }

    pub fn parent_of_edge(&self, e: EdgeId) -> Option<EdgeId> {
        let upper = self.parent[self.edge_child[e]]?;
        self.parent_edge[upper]
    }

    pub fn lca(&self, mut a: NodeId, mut b: NodeId) -> NodeId {
        while self.depth[a] > self.depth[b] {
            a = self.parent[a].unwrap();
        }
        while self.depth[b] > self.depth[a] {
            b = self.parent[b].unwrap();
        }
        while a != b {
            a = self.parent[a].unwrap();
            b = self.parent[b].unwrap();
        }
        a
    }

    /// Edges from `below` up to its ancestor `above`, listed top-down.
    pub fn vertical_path(&self, mut below: NodeId, above: NodeId) -> Vec<EdgeId> {
        let mut out = Vec::new();
        while below != above {
            out.push(self.parent_edge[below].expect("not an ancestor"));
            below = self.parent[below].expect("not an ancestor");
        }
        out.reverse();
        out
    }

    /// True when `a` is an ancestor of (or equal to) `b`.
    pub fn is_ancestor(&self, a: NodeId, mut b: NodeId) -> bool {
        while self.depth[b] > self.depth[a] {
            b = self.parent[b].unwrap();
        }
        a == b
    }
}

/// An immutable, validated TAP instance with cover sets precomputed.
#[derive(Debug, Clone)]
pub struct TapInstance {
    names: Vec<String>,
    index: HashMap<String, NodeId>,
    edges: Vec<(NodeId, NodeId)>,
    links: Vec<Link>,
    explicit_root: bool,
    adjacency: Vec<Vec<(NodeId, EdgeId)>>,
    rooting: Rooting,
    link_paths: Vec<Vec<EdgeId>>,
    cover: Vec<Vec<LinkId>>,
    covers_bits: Vec<Vec<u64>>,
}

impl TapInstance {
    pub fn from_raw(raw: &RawInstance) -> Result<Self, InstanceError> {
        let violations = validate_instance(raw);
        if !violations.is_empty() {
            return Err(InstanceError::Invalid(violations));
        }
        let names = raw.nodes.clone();
        let index: HashMap<String, NodeId> =
            names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        let edges = raw
            .tree_edges
            .iter()
            .map(|[a, b]| (index[a], index[b]))
            .collect();
        let links = raw
            .links
            .iter()
            .map(|l| Link { u: index[&l.u], v: index[&l.v], cost: l.cost.clone() })
            .collect();
        let root = match &raw.root {
            Some(r) => index[r],
            None => default_root(&names),
        };
        Ok(Self::assemble(names, index, edges, links, root, raw.root.is_some()))
    }

    /// Builds an instance from parts that are known to be well formed
    /// (used by generators and reductions).
    pub fn from_parts(
        names: Vec<String>,
        edges: Vec<(NodeId, NodeId)>,
        links: Vec<Link>,
        root: Option<NodeId>,
    ) -> Result<Self, InstanceError> {
        let raw = RawInstance {
            tree_edges: edges
                .iter()
                .map(|&(a, b)| [names[a].clone(), names[b].clone()])
                .collect(),
            links: links
                .iter()
                .map(|l| RawLink {
                    u: names[l.u].clone(),
                    v: names[l.v].clone(),
                    cost: l.cost.clone(),
                })
                .collect(),
            root: root.map(|r| names[r].clone()),
            nodes: names,
            unweighted: false,
        };
        Self::from_raw(&raw)
    }

    fn assemble(
        names: Vec<String>,
        index: HashMap<String, NodeId>,
        edges: Vec<(NodeId, NodeId)>,
        links: Vec<Link>,
        root: NodeId,
        explicit_root: bool,
    ) -> Self {
        let n = names.len();
        let mut adjacency = vec![Vec::new(); n];
        for (e, &(a, b)) in edges.iter().enumerate() {
            adjacency[a].push((b, e));
            adjacency[b].push((a, e));
        }
        for adj in adjacency.iter_mut() {
            adj.sort();
        }
        let rooting = build_rooting(&adjacency, edges.len(), root);
        let link_paths: Vec<Vec<EdgeId>> = links
            .iter()
            .map(|l| path_between(&rooting, l.u, l.v))
            .collect();
        let mut cover = vec![Vec::new(); edges.len()];
        let words = links.len().div_ceil(64).max(1);
        let mut covers_bits = vec![vec![0u64; words]; edges.len()];
        for (l, path) in link_paths.iter().enumerate() {
            for &e in path {
                cover[e].push(l);
                covers_bits[e][l / 64] |= 1 << (l % 64);
            }
        }
        TapInstance {
            names,
            index,
            edges,
            links,
            explicit_root,
            adjacency,
            rooting,
            link_paths,
            cover,
            covers_bits,
        }
    }

    pub fn to_raw(&self) -> RawInstance {
        RawInstance {
            nodes: self.names.clone(),
            tree_edges: self
                .edges
                .iter()
                .map(|&(a, b)| [self.names[a].clone(), self.names[b].clone()])
                .collect(),
            links: self
                .links
                .iter()
                .map(|l| RawLink {
                    u: self.names[l.u].clone(),
                    v: self.names[l.v].clone(),
                    cost: l.cost.clone(),
                })
                .collect(),
            root: self.explicit_root.then(|| self.names[self.rooting.root].clone()),
            unweighted: false,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.names.len()
    }
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }
    pub fn num_links(&self) -> usize {
        self.links.len()
    }
    pub fn node_name(&self, v: NodeId) -> &str {
        &self.names[v]
    }
    pub fn node_names(&self) -> &[String] {
        &self.names
    }
    pub fn node(&self, name: &str) -> Result<NodeId, InstanceError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| InstanceError::UnknownNode(name.to_string()))
    }
    pub fn edge(&self, e: EdgeId) -> (NodeId, NodeId) {
        self.edges[e]
    }
    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }
    pub fn link(&self, l: LinkId) -> &Link {
        &self.links[l]
    }
    pub fn links(&self) -> &[Link] {
        &self.links
    }
    pub fn root(&self) -> NodeId {
        self.rooting.root
    }
    pub fn rooting(&self) -> &Rooting {
        &self.rooting
    }
    pub fn rooted_at(&self, root: NodeId) -> Rooting {
        build_rooting(&self.adjacency, self.edges.len(), root)
    }
    pub fn neighbors(&self, v: NodeId) -> &[(NodeId, EdgeId)] {
        &self.adjacency[v]
    }
    pub fn degree(&self, v: NodeId) -> usize {
        self.adjacency[v].len()
    }
    pub fn is_leaf(&self, v: NodeId) -> bool {
        self.degree(v) == 1
    }
    pub fn edge_between(&self, a: NodeId, b: NodeId) -> Option<EdgeId> {
        self.adjacency[a].iter().find(|&&(n, _)| n == b).map(|&(_, e)| e)
    }
    pub fn edge_name(&self, e: EdgeId) -> String {
        let (a, b) = self.edges[e];
        format!("{}-{}", self.names[a], self.names[b])
    }
    pub fn link_name(&self, l: LinkId) -> String {
        let k = &self.links[l];
        format!("#{l}({}-{})", self.names[k.u], self.names[k.v])
    }

    /// Every node has degree 1 or 3 and every link joins two leaves.
    pub fn is_binary_leaf_link(&self) -> bool {
        (0..self.num_nodes()).all(|v| matches!(self.degree(v), 1 | 3))
            && self.links.iter().all(|l| self.is_leaf(l.u) && self.is_leaf(l.v))
    }

    /// The unique tree path from `u` to `v`, in order.
    pub fn tree_path(&self, u: NodeId, v: NodeId) -> Vec<EdgeId> {
        path_between(&self.rooting, u, v)
    }

    pub fn tree_path_by_name(&self, u: &str, v: &str) -> Result<Vec<EdgeId>, InstanceError> {
        Ok(self.tree_path(self.node(u)?, self.node(v)?))
    }

    /// Links whose tree path contains `e` (the set δ(e)), ascending.
    pub fn cover_set(&self, e: EdgeId) -> &[LinkId] {
        &self.cover[e]
    }

    pub fn checked_cover_set(&self, e: EdgeId) -> Result<&[LinkId], InstanceError> {
        self.cover.get(e).map(|v| v.as_slice()).ok_or(InstanceError::UnknownEdge(e))
    }

    /// Tree edges covered by link `l`, in path order from `u` to `v`.
    pub fn link_path(&self, l: LinkId) -> &[EdgeId] {
        &self.link_paths[l]
    }

    pub fn covers(&self, l: LinkId, e: EdgeId) -> bool {
        self.covers_bits[e][l / 64] >> (l % 64) & 1 == 1
    }

    /// Tree edges no link covers. Every LP is infeasible when this is non-empty.
    pub fn uncoverable_edges(&self) -> Vec<EdgeId> {
        (0..self.num_edges()).filter(|&e| self.cover[e].is_empty()).collect()
    }

    pub fn coverage(&self, x: &FractionalSolution, e: EdgeId) -> Rational {
        self.cover[e].iter().map(|&l| x.get(l)).sum()
    }

    pub fn checked_coverage(&self, x: &FractionalSolution, e: EdgeId) -> Result<Rational, InstanceError> {
        if e >= self.num_edges() {
            return Err(InstanceError::UnknownEdge(e));
        }
        Ok(self.coverage(x, e))
    }

    /// First tree edge (by index) no chosen link covers.
    pub fn first_uncovered(&self, a: &IntegralSolution) -> Option<EdgeId> {
        let mut covered = vec![false; self.num_edges()];
        for &l in &a.chosen {
            for &e in &self.link_paths[l] {
                covered[e] = true;
            }
        }
        covered.iter().position(|c| !c)
    }

    /// Every tree edge has a covering link in `a`; equivalently the tree plus
    /// `a` is two-edge-connected.
    pub fn is_feasible_cover(&self, a: &IntegralSolution) -> bool {
        a.chosen.iter().all(|&l| l < self.num_links()) && self.first_uncovered(a).is_none()
    }

    /// EDGE-LP feasibility: coverage at least one on every edge.
    pub fn is_fractional_cover(&self, x: &FractionalSolution) -> bool {
        let one = rational::int(1);
        (0..self.num_edges()).all(|e| self.coverage(x, e) >= one)
    }

    pub fn integral_cost(&self, a: &IntegralSolution) -> Rational {
        a.chosen.iter().map(|&l| self.links[l].cost.clone()).sum()
    }

    pub fn fractional_cost(&self, x: &FractionalSolution) -> Rational {
        x.values
            .iter()
            .zip(&self.links)
            .filter(|(v, _)| !v.is_zero())
            .map(|(v, l)| v * &l.cost)
            .sum()
    }

    /// Tree edges that are bridges of the multigraph T ∪ A, found with a
    /// lowlink search independent of the cover relation.
    pub fn bridges_with(&self, a: &IntegralSolution) -> Vec<EdgeId> {
        let n = self.num_nodes();
        // (neighbor, multigraph edge id); tree edges keep their ids.
        let mut adj: Vec<Vec<(NodeId, usize)>> = vec![Vec::new(); n];
        for (e, &(x, y)) in self.edges.iter().enumerate() {
            adj[x].push((y, e));
            adj[y].push((x, e));
        }
        for (i, &l) in a.chosen.iter().enumerate() {
            let link = &self.links[l];
            let id = self.num_edges() + i;
            adj[link.u].push((link.v, id));
            adj[link.v].push((link.u, id));
        }
        let mut disc = vec![usize::MAX; n];
        let mut low = vec![0; n];
        let mut timer = 0;
        let mut bridges = Vec::new();
        // Iterative DFS: (node, edge used to enter, next adjacency index).
        let mut stack: Vec<(NodeId, usize, usize)> = Vec::new();
        for s in 0..n {
            if disc[s] != usize::MAX {
                continue;
            }
            disc[s] = timer;
            low[s] = timer;
            timer += 1;
            stack.push((s, usize::MAX, 0));
            while let Some(&mut (v, in_edge, ref mut next)) = stack.last_mut() {
                if *next < adj[v].len() {
                    let (w, id) = adj[v][*next];
                    *next += 1;
                    if id == in_edge {
                        continue;
                    }
                    if disc[w] == usize::MAX {
                        disc[w] = timer;
                        low[w] = timer;
                        timer += 1;
                        stack.push((w, id, 0));
                    } else {
                        low[v] = low[v].min(disc[w]);
                    }
                } else {
                    stack.pop();
                    if let Some(&(p, _, _)) = stack.last() {
                        low[p] = low[p].min(low[v]);
                        if low[v] > disc[p] && in_edge < self.num_edges() {
                            bridges.push(in_edge);
                        }
                    }
                }
            }
        }
        bridges.sort();
        bridges
    }
}

fn default_root(names: &[String]) -> NodeId {
    (0..names.len()).min_by(|&a, &b| names[a].cmp(&names[b])).unwrap()
}

fn build_rooting(adjacency: &[Vec<(NodeId, EdgeId)>], num_edges: usize, root: NodeId) -> Rooting {
    let n = adjacency.len();
    let mut parent = vec![None; n];
    let mut parent_edge = vec![None; n];
    let mut depth = vec![0; n];
    let mut children = vec![Vec::new(); n];
    let mut edge_child = vec![0; num_edges];
    let mut seen = vec![false; n];
    let mut bfs = Vec::with_capacity(n);
    let mut queue = VecDeque::from([root]);
    seen[root] = true;
    while let Some(v) = queue.pop_front() {
        bfs.push(v);
        for &(w, e) in &adjacency[v] {
            if !seen[w] {
                seen[w] = true;
                parent[w] = Some(v);
                parent_edge[w] = Some(e);
                depth[w] = depth[v] + 1;
                edge_child[e] = w;
                children[v].push(w);
                queue.push_back(w);
            }
        }
    }
    Rooting { root, parent, parent_edge, depth, children, edge_child, bfs }
}

fn path_between(r: &Rooting, u: NodeId, v: NodeId) -> Vec<EdgeId> {
    let a = r.lca(u, v);
    let mut up = r.vertical_path(u, a);
    up.reverse();
    up.extend(r.vertical_path(v, a));
    up
}

/// A set of chosen links.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntegralSolution {
    pub chosen: BTreeSet<LinkId>,
}

impl IntegralSolution {
    pub fn new(chosen: impl IntoIterator<Item = LinkId>) -> Self {
        IntegralSolution { chosen: chosen.into_iter().collect() }
    }
    pub fn contains(&self, l: LinkId) -> bool {
        self.chosen.contains(&l)
    }
    pub fn len(&self) -> usize {
        self.chosen.len()
    }
    pub fn is_empty(&self) -> bool {
        self.chosen.is_empty()
    }
    pub fn to_fractional(&self, num_links: usize) -> FractionalSolution {
        let mut x = FractionalSolution::zeros(num_links);
        for &l in &self.chosen {
            x.values[l] = rational::int(1);
        }
        x
    }
}

/// A non-negative rational value per link, dense over link ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FractionalSolution {
    pub values: Vec<Rational>,
}

impl FractionalSolution {
    pub fn zeros(num_links: usize) -> Self {
        FractionalSolution { values: vec![Rational::zero(); num_links] }
    }

    pub fn from_values(values: Vec<Rational>) -> Result<Self, InstanceError> {
        if let Some((l, v)) = values.iter().enumerate().find(|(_, v)| v.is_negative()) {
            return Err(InstanceError::NegativeValue { link: l, value: v.to_string() });
        }
        Ok(FractionalSolution { values })
    }

    pub fn uniform(num_links: usize, value: Rational) -> Self {
        FractionalSolution { values: vec![value; num_links] }
    }

    pub fn get(&self, l: LinkId) -> Rational {
        self.values.get(l).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Links with non-zero value, ascending.
    pub fn support(&self) -> Vec<LinkId> {
        (0..self.values.len()).filter(|&l| !self.values[l].is_zero()).collect()
    }

    pub fn add(&self, other: &FractionalSolution) -> FractionalSolution {
        let n = self.len().max(other.len());
        FractionalSolution { values: (0..n).map(|l| self.get(l) + other.get(l)).collect() }
    }

    pub fn scale(&self, factor: &Rational) -> FractionalSolution {
        FractionalSolution { values: self.values.iter().map(|v| v * factor).collect() }
    }
}

/// Solution file: `{"links":[{"u":..,"v":..,"value":"p/q"},...]}`. An
/// optional `"id"` pins an entry to one of several parallel links.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub links: Vec<SolutionEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<LinkId>,
    pub u: String,
    pub v: String,
    #[serde(with = "rational::serde_str")]
    pub value: Rational,
}

impl SolutionFile {
    pub fn from_fractional(inst: &TapInstance, x: &FractionalSolution) -> Self {
        let links = x
            .support()
            .into_iter()
            .map(|l| {
                let link = inst.link(l);
                SolutionEntry {
                    id: Some(l),
                    u: inst.node_name(link.u).to_string(),
                    v: inst.node_name(link.v).to_string(),
                    value: x.values[l].clone(),
                }
            })
            .collect();
        SolutionFile { links }
    }

    pub fn from_integral(inst: &TapInstance, a: &IntegralSolution) -> Self {
        Self::from_fractional(inst, &a.to_fractional(inst.num_links()))
    }

    pub fn to_fractional(&self, inst: &TapInstance) -> Result<FractionalSolution, InstanceError> {
        let mut x = FractionalSolution::zeros(inst.num_links());
        for entry in &self.links {
            let l = match entry.id {
                Some(id) => {
                    if id >= inst.num_links() {
                        return Err(InstanceError::UnknownLink(id));
                    }
                    id
                }
                None => {
                    let (u, v) = (inst.node(&entry.u)?, inst.node(&entry.v)?);
                    let matches: Vec<LinkId> = (0..inst.num_links())
                        .filter(|&l| {
                            let k = inst.link(l);
                            (k.u, k.v) == (u, v) || (k.u, k.v) == (v, u)
                        })
                        .collect();
                    match matches.as_slice() {
                        [l] => *l,
                        [] => {
                            return Err(InstanceError::NoSuchLink {
                                u: entry.u.clone(),
                                v: entry.v.clone(),
                            })
                        }
                        _ => {
                            return Err(InstanceError::AmbiguousLink {
                                u: entry.u.clone(),
                                v: entry.v.clone(),
                            })
                        }
                    }
                }
            };
            if entry.value.is_negative() {
                return Err(InstanceError::NegativeValue { link: l, value: entry.value.to_string() });
            }
            x.values[l] += &entry.value;
        }
        Ok(x)
    }

    /// Links with value exactly one; other non-zero values are rejected.
    pub fn to_integral(&self, inst: &TapInstance) -> Result<IntegralSolution, InstanceError> {
        let x = self.to_fractional(inst)?;
        let one = rational::int(1);
        for (l, v) in x.values.iter().enumerate() {
            if !v.is_zero() && *v != one {
                return Err(InstanceError::NegativeValue { link: l, value: v.to_string() });
            }
        }
        Ok(IntegralSolution::new(x.support()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

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

    fn path_abc() -> TapInstance {
        TapInstance::from_raw(&raw(&["a", "b", "c"], &[("a", "b"), ("b", "c")], &[("a", "c", 1)]))
            .unwrap()
    }

    fn star3() -> TapInstance {
        TapInstance::from_raw(&raw(
            &["c", "x", "y", "z"],
            &[("x", "c"), ("c", "y"), ("z", "c")],
            &[("x", "y", 1), ("x", "z", 1), ("y", "z", 1)],
        ))
        .unwrap()
    }

    #[test]
    fn validation_reports() {
        assert!(validate_instance(&raw(&["a", "b", "c"], &[("a", "b"), ("b", "c")], &[("a", "c", 1)]))
            .is_empty());
        let cyc = raw(&["a", "b", "c"], &[("a", "b"), ("b", "c"), ("c", "a")], &[]);
        let v = validate_instance(&cyc);
        assert!(v.iter().any(|x| matches!(x, Violation::NotATree { .. })));
        let neg = raw(&["a", "b"], &[("a", "b")], &[("a", "b", -1)]);
        assert_eq!(
            validate_instance(&neg),
            vec![Violation::NegativeCost { link: 0, cost: "-1".into() }]
        );
        let dup = raw(&["a", "b"], &[("a", "b")], &[("a", "b", 1), ("b", "a", 1), ("a", "b", 2)]);
        assert_eq!(
            validate_instance(&dup),
            vec![Violation::DuplicateLink { link: 1, duplicate_of: 0 }]
        );
        let disc = raw(&["a", "b", "c", "d"], &[("a", "b"), ("a", "b"), ("c", "d")], &[]);
        let v = validate_instance(&disc);
        assert!(v.iter().any(|x| matches!(x, Violation::Disconnected { .. })));
    }

    #[test]
    fn tree_paths() {
        let p = path_abc();
        assert_eq!(p.tree_path_by_name("a", "c").unwrap(), vec![0, 1]);
        assert!(p.tree_path_by_name("a", "a").unwrap().is_empty());
        assert!(p.tree_path_by_name("a", "q").is_err());
        let s = star3();
        let (x, y, c) = (s.node("x").unwrap(), s.node("y").unwrap(), s.node("c").unwrap());
        let path = s.tree_path(x, y);
        assert_eq!(path, vec![s.edge_between(x, c).unwrap(), s.edge_between(c, y).unwrap()]);
    }

    #[test]
    fn cover_sets() {
        let p = TapInstance::from_raw(&raw(
            &["a", "b", "c"],
            &[("a", "b"), ("b", "c")],
            &[("a", "c", 1), ("b", "c", 1)],
        ))
        .unwrap();
        assert_eq!(p.cover_set(0), &[0]);
        assert_eq!(p.cover_set(1), &[0, 1]);
        let s = star3();
        let xc = s.edge_between(s.node("x").unwrap(), s.node("c").unwrap()).unwrap();
        // links (x,y)=0 and (x,z)=1
        assert_eq!(s.cover_set(xc), &[0, 1]);
        assert!(s.checked_cover_set(99).is_err());
    }

    #[test]
    fn coverage_and_cost() {
        let s = star3();
        let zero = FractionalSolution::zeros(3);
        assert_eq!(s.coverage(&zero, 0), int(0));
        let half = FractionalSolution::uniform(3, ratio(1, 2));
        for e in 0..3 {
            assert_eq!(s.coverage(&half, e), int(1));
        }
        assert_eq!(s.fractional_cost(&half), ratio(3, 2));
        assert_eq!(s.integral_cost(&IntegralSolution::default()), int(0));
        assert_eq!(s.integral_cost(&IntegralSolution::new([0, 1])), int(2));
    }

    #[test]
    fn feasibility() {
        let p = path_abc();
        assert!(p.is_feasible_cover(&IntegralSolution::new([0])));
        assert!(!p.is_feasible_cover(&IntegralSolution::default()));
        let s = star3();
        assert!(!s.is_feasible_cover(&IntegralSolution::new([0])));
        assert_eq!(s.first_uncovered(&IntegralSolution::new([0])), Some(2));
        assert!(s.is_feasible_cover(&IntegralSolution::new([0, 1])));
    }

    #[test]
    fn bridges_agree_on_small_cases() {
        let s = star3();
        assert_eq!(s.bridges_with(&IntegralSolution::new([0])), vec![2]);
        assert!(s.bridges_with(&IntegralSolution::new([0, 2])).is_empty());
        assert_eq!(s.bridges_with(&IntegralSolution::default()), vec![0, 1, 2]);
    }

    #[test]
    fn parallel_links_stay_distinct() {
        let p = TapInstance::from_raw(&raw(&["a", "b"], &[("a", "b")], &[("a", "b", 1), ("a", "b", 2)]))
            .unwrap();
        assert_eq!(p.cover_set(0), &[0, 1]);
        let file = SolutionFile {
            links: vec![SolutionEntry { id: None, u: "a".into(), v: "b".into(), value: int(1) }],
        };
        assert!(matches!(file.to_fractional(&p), Err(InstanceError::AmbiguousLink { .. })));
    }

    #[test]
    fn default_root_is_smallest_name() {
        let s = star3();
        assert_eq!(s.node_name(s.root()), "c");
        let mut r = raw(&["b", "a"], &[("a", "b")], &[("a", "b", 1)]);
        assert_eq!(TapInstance::from_raw(&r).unwrap().root(), 1);
        r.root = Some("b".into());
        assert_eq!(TapInstance::from_raw(&r).unwrap().root(), 0);
    }

    #[test]
    fn json_costs_accept_integers_and_fractions() {
        let text = r#"{"nodes":["a","b"],"tree_edges":[["a","b"]],
            "links":[{"u":"a","v":"b","cost":3},{"u":"b","v":"a","cost":"1/2"}]}"#;
        let raw: RawInstance = serde_json::from_str(text).unwrap();
        assert_eq!(raw.links[0].cost, int(3));
        assert_eq!(raw.links[1].cost, ratio(1, 2));
    }
}
