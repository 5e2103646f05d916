//! Independent oracles for the integration tests. Nothing here goes through
//! the library's cover sets or tree paths: paths come from a fresh BFS and
//! feasibility from a union-find connectivity check.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use tap_core::color::Decomposition;
use tap_core::rational::Rational;
use tap_core::threetap::ThreeTapInstance;
use tap_core::{FractionalSolution, IntegralSolution, TapInstance};

fn adjacency(inst: &TapInstance) -> Vec<Vec<(usize, usize)>> {
    let mut adj = vec![Vec::new(); inst.num_nodes()];
    for (e, &(a, b)) in inst.edges().iter().enumerate() {
        adj[a].push((b, e));
        adj[b].push((a, e));
    }
    adj
}

/// Tree edges between `u` and `v`, by BFS from `u`.
pub fn bfs_path(inst: &TapInstance, u: usize, v: usize) -> BTreeSet<usize> {
    let adj = adjacency(inst);
    let mut back: Vec<Option<(usize, usize)>> = vec![None; inst.num_nodes()];
    let mut seen = vec![false; inst.num_nodes()];
    seen[u] = true;
    let mut queue = VecDeque::from([u]);
    while let Some(a) = queue.pop_front() {
        for &(b, e) in &adj[a] {
            if !seen[b] {
                seen[b] = true;
                back[b] = Some((a, e));
                queue.push_back(b);
            }
        }
    }
    let mut out = BTreeSet::new();
    let mut w = v;
    while let Some((p, e)) = back[w] {
        out.insert(e);
        w = p;
    }
    out
}

/// Edge mask per link, from [`bfs_path`].
pub fn link_masks(inst: &TapInstance) -> Vec<u128> {
    (0..inst.num_links())
        .map(|l| {
            let k = inst.link(l);
            bfs_path(inst, k.u, k.v).into_iter().fold(0u128, |m, e| m | 1 << e)
        })
        .collect()
}

fn find(p: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while p[r] != r {
        r = p[r];
    }
    let mut y = x;
    while p[y] != r {
        let n = p[y];
        p[y] = r;
        y = n;
    }
    r
}

/// Two-edge-connectivity of `T ∪ chosen`: deleting any single tree edge
/// leaves the graph connected. (Links are never bridges once every tree
/// edge survives deletion, since every link closes a cycle with the tree.)
pub fn two_edge_connected(inst: &TapInstance, chosen: &[usize]) -> bool {
    let n = inst.num_nodes();
    (0..inst.num_edges()).all(|skip| {
        let mut p: Vec<usize> = (0..n).collect();
        let mut comps = n;
        let mut join = |a: usize, b: usize, p: &mut Vec<usize>| {
            let (ra, rb) = (find(p, a), find(p, b));
            if ra != rb {
                p[ra] = rb;
                comps -= 1;
            }
        };
        for (e, &(a, b)) in inst.edges().iter().enumerate() {
            if e != skip {
                join(a, b, &mut p);
            }
        }
        for &l in chosen {
            let k = inst.link(l);
            join(k.u, k.v, &mut p);
        }
        comps == 1
    })
}

/// Minimum cost over all link subsets (feasible by [`two_edge_connected`]'s
/// criterion, evaluated via BFS masks). `None` when infeasible.
pub fn brute_force_tap(inst: &TapInstance) -> Option<Rational> {
    let m = inst.num_links();
    assert!(m <= 20, "brute force limited to 20 links");
    let masks = link_masks(inst);
    let full: u128 = if inst.num_edges() == 128 { u128::MAX } else { (1u128 << inst.num_edges()) - 1 };
    let mut best: Option<Rational> = None;
    for s in 0u32..(1 << m) {
        let cover = (0..m).filter(|&l| s >> l & 1 == 1).fold(0u128, |c, l| c | masks[l]);
        if cover != full {
            continue;
        }
        let cost: Rational = (0..m).filter(|&l| s >> l & 1 == 1).map(|l| inst.link(l).cost.clone()).sum();
        if best.as_ref().is_none_or(|b| cost < *b) {
            best = Some(cost);
        }
    }
    best
}

/// Independent certificate check: convex weights, every class two-edge
/// connected, and `Σ λ_i [ℓ ∈ A_i] ≤ scale · x_ℓ` for every link. Returns the
/// cheapest class cost.
pub fn check_certificate(inst: &TapInstance, x: &FractionalSolution, d: &Decomposition) -> Result<Rational, String> {
    let zero = Rational::from_integer(0.into());
    let one = Rational::from_integer(1.into());
    if d.classes.len() != d.lambdas.len() || d.classes.is_empty() {
        return Err("class and weight counts differ or are zero".into());
    }
    if d.lambdas.iter().any(|l| *l < zero) {
        return Err("negative weight".into());
    }
    if d.lambdas.iter().cloned().sum::<Rational>() != one {
        return Err("weights do not sum to one".into());
    }
    let mut mass: BTreeMap<usize, Rational> = BTreeMap::new();
    let mut best: Option<Rational> = None;
    for (i, (class, lam)) in d.classes.iter().zip(&d.lambdas).enumerate() {
        let chosen: Vec<usize> = class.chosen.iter().copied().collect();
        if chosen.iter().any(|&l| l >= inst.num_links()) {
            return Err(format!("class {i} names an unknown link"));
        }
        if !two_edge_connected(inst, &chosen) {
            return Err(format!("class {i} leaves a bridge"));
        }
        for &l in &chosen {
            *mass.entry(l).or_insert_with(|| zero.clone()) += lam;
        }
        let cost: Rational = chosen.iter().map(|&l| inst.link(l).cost.clone()).sum();
        if best.as_ref().is_none_or(|b| cost < *b) {
            best = Some(cost);
        }
    }
    for (l, m) in mass {
        if m > &d.scale * x.get(l) {
            return Err(format!("link {l} carries mass {m} above scale times {}", x.get(l)));
        }
    }
    Ok(best.unwrap())
}

/// Fractional cost of `x`, summed directly.
pub fn cost_of(inst: &TapInstance, x: &FractionalSolution) -> Rational {
    (0..inst.num_links()).map(|l| inst.link(l).cost.clone() * x.get(l)).sum()
}

/// Every odd-set row at the 0/1 vector of `chosen`, enumerated from scratch:
/// for each odd `S`, links crossing `S` plus, per cut tree edge, the chosen
/// links covering it must reach `|δ_T(S)| + 1`.
pub fn odd_rows_hold(inst: &TapInstance, chosen: &[usize]) -> bool {
    let n = inst.num_nodes();
    assert!(n <= 20);
    let masks = link_masks(inst);
    for s in 1u32..(1 << n) - 1 {
        if s.count_ones() % 2 == 0 {
            continue;
        }
        let inside = |v: usize| s >> v & 1 == 1;
        let cut: Vec<usize> =
            (0..inst.num_edges()).filter(|&e| { let (a, b) = inst.edge(e); inside(a) != inside(b) }).collect();
        let mut lhs = 0;
        for &l in chosen {
            let k = inst.link(l);
            if inside(k.u) != inside(k.v) {
                lhs += 1;
            }
            lhs += cut.iter().filter(|&&e| masks[l] >> e & 1 == 1).count();
        }
        if lhs < cut.len() + 1 {
            return false;
        }
    }
    true
}

/// Direct triangle rule: every tree edge `ab` has a node `v` with `av` and
/// `bv` both present among tree edges and chosen links.
pub fn triangles_ok(t: &ThreeTapInstance, chosen: &[usize]) -> bool {
    let inst = t.tree();
    let n = inst.num_nodes();
    let mut present = vec![vec![false; n]; n];
    for &(a, b) in inst.edges() {
        present[a][b] = true;
        present[b][a] = true;
    }
    for &l in chosen {
        let k = inst.link(l);
        present[k.u][k.v] = true;
        present[k.v][k.u] = true;
    }
    inst.edges().iter().all(|&(a, b)| (0..n).any(|v| v != a && v != b && present[a][v] && present[b][v]))
}

/// Minimum 3TAP cost by enumerating link subsets.
pub fn brute_force_3tap(t: &ThreeTapInstance) -> Option<Rational> {
    let m = t.num_links();
    assert!(m <= 20, "brute force limited to 20 links");
    let mut best: Option<Rational> = None;
    for s in 0u32..(1 << m) {
        let chosen: Vec<usize> = (0..m).filter(|&l| s >> l & 1 == 1).collect();
        if !triangles_ok(t, &chosen) {
            continue;
        }
        let cost = t.cost(&IntegralSolution::new(chosen));
        if best.as_ref().is_none_or(|b| cost < *b) {
            best = Some(cost);
        }
    }
    best
}
