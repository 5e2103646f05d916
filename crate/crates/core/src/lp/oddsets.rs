//! Odd node sets and their rows, using bitmasks over nodes and tree edges.

use super::{Constraint, Provenance, Sense, Term};
use crate::instance::{IntegralSolution, NodeId, TapInstance};
use crate::rational::int;

pub struct OddSets {
    n: usize,
    edges: Vec<(NodeId, NodeId)>,
    /// Tree-path edge mask per link.
    paths: Vec<u64>,
}

impl OddSets {
    /// Needs at most 64 nodes (so at most 63 edges).
    pub fn new(inst: &TapInstance) -> Self {
        assert!(inst.num_nodes() <= 64);
        let paths = (0..inst.num_links())
            .map(|l| inst.link_path(l).iter().fold(0u64, |m, &e| m | 1 << e))
            .collect();
        OddSets { n: inst.num_nodes(), edges: inst.edges().to_vec(), paths }
    }

    /// One representative per distinct row: every odd set, except that when
    /// `|V|` is even a set and its (also odd) complement give the same row,
    /// so only the one avoiding the last node is kept.
    pub fn masks(&self) -> impl Iterator<Item = u64> + '_ {
        let n = self.n;
        // With |V| odd the full set is odd too, but its row reads 0 ≥ 1.
        let limit: u64 = if n.is_multiple_of(2) { 1 << (n - 1) } else { (1 << n) - 1 };
        (1..limit).filter(|m| m.count_ones() % 2 == 1)
    }

    /// Tree edges with exactly one endpoint in `set`.
    pub fn cut(&self, set: u64) -> u64 {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, &(a, b))| (set >> a & 1) != (set >> b & 1))
            .fold(0, |m, (e, _)| m | 1 << e)
    }

    /// `[ℓ ∈ δ(S)] + #{e ∈ δ(S)∩T : ℓ covers e}`. A link crosses the cut iff
    /// its tree path crosses it an odd number of times, so this is always even.
    pub fn coef(&self, link: usize, cut: u64) -> u32 {
        let p = (self.paths[link] & cut).count_ones();
        p + (p & 1)
    }

    pub fn constraint(&self, set: u64) -> Constraint {
        let cut = self.cut(set);
        let coeffs = (0..self.paths.len())
            .filter_map(|l| {
                let c = self.coef(l, cut);
                debug_assert!(c.is_multiple_of(2));
                (c > 0).then(|| Term { var: l, coef: int(c as i64) })
            })
            .collect();
        Constraint {
            coeffs,
            sense: Sense::Ge,
            rhs: int(cut.count_ones() as i64 + 1),
            provenance: Provenance::OddSet {
                nodes: (0..self.n).filter(|&v| set >> v & 1 == 1).collect(),
            },
        }
    }

    /// First odd set whose row fails at the 0/1 vector of `a`.
    pub fn first_violated_integral(&self, a: &IntegralSolution) -> Option<u64> {
        let chosen: Vec<usize> = a.chosen.iter().copied().collect();
        self.masks().find(|&m| {
            let cut = self.cut(m);
            let lhs: u32 = chosen.iter().map(|&l| self.coef(l, cut)).sum();
            lhs < cut.count_ones() + 1
        })
    }
}
