mod common;

use proptest::prelude::*;
use std::collections::BTreeSet;
use tap_core::exact::{exact_3tap, exact_set_cover, ExactConfig};
use tap_core::gen::{self, CostRange};
use tap_core::rational::{harmonic, int, Rational};
use tap_core::threetap::{
    greedy_3tap, max_density_star, setcover_gadget, star_decomposition, unweighted_3tap, unweighted_lower_bound,
    SetCoverInstance, ThreeTapInstance,
};
use tap_core::IntegralSolution;

const COSTS: CostRange = CostRange { lo: 0, hi: 9 };

fn three(n: usize, p: f64, unweighted: bool, seed: u64) -> ThreeTapInstance {
    ThreeTapInstance::from_raw(&gen::random_3tap(n, p, unweighted, COSTS, seed).unwrap()).unwrap()
}

fn optimum(t: &ThreeTapInstance) -> Rational {
    exact_3tap(t, &ExactConfig::default()).unwrap().optimum_cost.unwrap()
}

/// Densest star by enumeration: spoke costs come straight from the link
/// list (cheapest parallel link, zero along tree edges). `None` is +∞.
fn densest_by_hand(t: &ThreeTapInstance, uncovered: &BTreeSet<usize>) -> Option<Option<Rational>> {
    let inst = t.tree();
    let n = inst.num_nodes();
    let spoke = |v: usize, u: usize| -> Option<Rational> {
        if inst.edges().iter().any(|&(a, b)| (a, b) == (u, v) || (a, b) == (v, u)) {
            return Some(int(0));
        }
        inst.links().iter().filter(|l| (l.u, l.v) == (u, v) || (l.u, l.v) == (v, u)).map(|l| l.cost.clone()).min()
    };
    let mut best: Option<Option<Rational>> = None;
    for v in 0..n {
        let cand: Vec<(usize, Rational)> = (0..n).filter(|&u| u != v).filter_map(|u| spoke(v, u).map(|c| (u, c))).collect();
        for mask in 1u32..(1 << cand.len()) {
            let set: BTreeSet<usize> = (0..cand.len()).filter(|i| mask >> i & 1 == 1).map(|i| cand[i].0).collect();
            let cost: Rational = (0..cand.len()).filter(|i| mask >> i & 1 == 1).map(|i| cand[i].1.clone()).sum();
            let m = uncovered.iter().filter(|&&e| {
                let (a, b) = inst.edge(e);
                set.contains(&a) && set.contains(&b)
            }).count();
            if m == 0 {
                continue;
            }
            let d = if cost == int(0) { None } else { Some(int(m as i64) / cost) };
            let wins = match (&best, &d) {
                (None, _) => true,
                (Some(None), _) => false,
                (Some(Some(_)), None) => true,
                (Some(Some(b)), Some(x)) => x > b,
            };
            if wins {
                best = Some(d);
            }
        }
    }
    best
}

/// Minimum set cover by enumeration.
fn set_cover_by_hand(sc: &SetCoverInstance) -> Option<Rational> {
    let members = sc.members();
    let k = sc.sets.len();
    (0u32..(1 << k))
        .filter(|s| (0..sc.elements.len()).all(|j| (0..k).any(|i| s >> i & 1 == 1 && members[i].contains(&j))))
        .map(|s| (0..k).filter(|i| s >> i & 1 == 1).map(|i| sc.sets[i].cost.clone()).sum::<Rational>())
        .min()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn feasibility_matches_the_triangle_rule(n in 3usize..=8, p in 0.1f64..0.6, seed in any::<u64>()) {
        let t = three(n, p, false, seed);
        let m = t.num_links();
        let mut rng = gen::rng(seed ^ 3);
        for _ in 0..20 {
            let chosen: Vec<usize> = (0..m).filter(|_| rand::Rng::gen_bool(&mut rng, 0.5)).collect();
            prop_assert_eq!(t.is_feasible(&IntegralSolution::new(chosen.iter().copied())), common::triangles_ok(&t, &chosen));
        }
        let all: Vec<usize> = (0..m).collect();
        prop_assert!(common::triangles_ok(&t, &all));
    }

    #[test]
    fn exact_matches_enumeration(n in 3usize..=7, p in 0.1f64..0.5, seed in any::<u64>()) {
        let t = three(n, p, false, seed);
        prop_assume!(t.num_links() <= 16);
        let r = exact_3tap(&t, &ExactConfig::default()).unwrap();
        prop_assert_eq!(r.optimum_cost.clone(), common::brute_force_3tap(&t));
        let w = r.witness.unwrap();
        prop_assert!(common::triangles_ok(&t, &w));
    }

    #[test]
    fn stars_of_a_solution_cover_at_twice_the_cost(n in 3usize..=9, p in 0.1f64..0.6, seed in any::<u64>()) {
        let t = three(n, p, false, seed);
        let a = exact_3tap(&t, &ExactConfig::default()).unwrap().witness_solution().unwrap();
        let stars = star_decomposition(&t, &a).unwrap();
        prop_assert_eq!(stars.len(), t.num_nodes());
        let cov: BTreeSet<usize> = stars.iter().flat_map(|s| s.covered.iter().copied()).collect();
        prop_assert_eq!(cov.len(), t.num_edges());
        let total: Rational = stars.iter().map(|s| s.cost.clone()).sum();
        prop_assert_eq!(total, int(2) * t.cost(&a));
        // A link's cost is charged at both ends.
        for s in &stars {
            let at: Rational = a.chosen.iter().map(|&l| t.tree().link(l)).filter(|l| l.u == s.center || l.v == s.center).map(|l| l.cost.clone()).sum();
            prop_assert_eq!(&s.cost, &at);
        }
    }

    #[test]
    fn unweighted_bounds(n in 3usize..=9, p in 0.05f64..0.5, seed in any::<u64>()) {
        let t = three(n, p, true, seed);
        let opt = optimum(&t);
        prop_assert!(opt >= int(unweighted_lower_bound(n) as i64));
        let a = unweighted_3tap(&t).unwrap();
        let chosen: Vec<usize> = a.chosen.iter().copied().collect();
        prop_assert!(common::triangles_ok(&t, &chosen));
        prop_assert!(t.cost(&a) <= int(4) * opt);
    }

    #[test]
    fn max_density_star_is_densest(n in 3usize..=8, p in 0.1f64..0.6, seed in any::<u64>()) {
        let t = three(n, p, false, seed);
        let mut rng = gen::rng(seed ^ 9);
        let mut uncovered: BTreeSet<usize> = (0..t.num_edges()).filter(|_| rand::Rng::gen_bool(&mut rng, 0.6)).collect();
        if uncovered.is_empty() {
            uncovered.insert(0);
        }
        let star = max_density_star(&t, &uncovered).unwrap();
        prop_assert_eq!(Some(star.density(&uncovered)), densest_by_hand(&t, &uncovered));
    }

    #[test]
    fn greedy_within_harmonic_bound(n in 3usize..=9, p in 0.1f64..0.6, seed in any::<u64>()) {
        let t = three(n, p, false, seed);
        let (a, _) = greedy_3tap(&t).unwrap();
        let chosen: Vec<usize> = a.chosen.iter().copied().collect();
        prop_assert!(common::triangles_ok(&t, &chosen));
        prop_assert!(t.cost(&a) <= int(2) * harmonic(n - 1) * optimum(&t));
    }

    #[test]
    fn set_cover_gadget_keeps_the_optimum(seed in any::<u64>()) {
        let sc = gen::random_set_cover(3, 3, CostRange { lo: 1, hi: 6 }, seed);
        let g = setcover_gadget(&sc).unwrap();
        let want = set_cover_by_hand(&sc);
        prop_assert_eq!(exact_set_cover(&sc).unwrap().optimum_cost, want.clone());
        prop_assert_eq!(exact_3tap(&g, &ExactConfig::default()).unwrap().optimum_cost, want);
    }
}
