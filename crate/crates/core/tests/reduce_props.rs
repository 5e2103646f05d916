mod common;

use proptest::prelude::*;
use tap_core::exact::{exact_tap, ExactConfig};
use tap_core::gen::{self, CostRange};
use tap_core::reduce::{self, binarize, lift_solution, node_gadget_expand, push_solution, ReduceError};
use tap_core::{IntegralSolution, TapInstance};

fn tree(n: usize, links: usize, seed: u64) -> TapInstance {
    TapInstance::from_raw(&gen::random_tree(n, links, CostRange { lo: 1, hi: 10 }, seed).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn binarize_shape(n in 2usize..=12, links in 1usize..10, seed in any::<u64>()) {
        let inst = tree(n, links, seed);
        let (b, map) = binarize(&inst).unwrap();
        prop_assert!((0..b.num_nodes()).all(|v| b.degree(v) == 1 || b.degree(v) == 3));
        prop_assert!(b.is_binary_leaf_link());
        prop_assert_eq!(map.link_correspondence.len(), inst.num_links());
        for (o, &t) in map.link_correspondence.iter().enumerate() {
            prop_assert_eq!(&b.link(t).cost, &inst.link(o).cost);
        }
        for &d in &map.dummy_links {
            prop_assert_eq!(b.link(d).cost.clone(), tap_core::rational::int(0));
        }
    }

    #[test]
    fn binarize_preserves_optimum(n in 2usize..=9, links in 1usize..9, seed in any::<u64>()) {
        let inst = tree(n, links, seed);
        let (b, _) = binarize(&inst).unwrap();
        let cfg = ExactConfig::default();
        let here = exact_tap(&inst, &cfg).unwrap().optimum_cost;
        prop_assert_eq!(&here, &common::brute_force_tap(&inst));
        prop_assert_eq!(exact_tap(&b, &cfg).unwrap().optimum_cost, here);
    }

    #[test]
    fn push_and_lift_keep_cost(n in 2usize..=12, links in 1usize..12, seed in any::<u64>()) {
        let inst = tree(n, links, seed);
        let (b, map) = binarize(&inst).unwrap();
        let a = gen::random_minimal_cover(&inst, &mut gen::rng(seed));
        let pushed = push_solution(&map, &inst, &a).unwrap();
        let pc: Vec<usize> = pushed.chosen.iter().copied().collect();
        prop_assert!(common::two_edge_connected(&b, &pc));
        prop_assert_eq!(b.integral_cost(&pushed), inst.integral_cost(&a));
        let back = lift_solution(&map, &b, &pushed).unwrap();
        prop_assert_eq!(&back, &a);

        // A cover of the binarized tree lifts to a cover of the same cost.
        let a2 = gen::random_minimal_cover(&b, &mut gen::rng(seed ^ 5));
        let lifted = lift_solution(&map, &b, &a2).unwrap();
        let lc: Vec<usize> = lifted.chosen.iter().copied().collect();
        prop_assert!(common::two_edge_connected(&inst, &lc));
        prop_assert_eq!(inst.integral_cost(&lifted), b.integral_cost(&a2));
    }

    #[test]
    fn gadget_correspondence(h in 2usize..=6, seed in any::<u64>()) {
        let raw = gen::random_binary(2 * h, 0.5, CostRange { lo: 1, hi: 10 }, seed).unwrap();
        let inst = TapInstance::from_raw(&raw).unwrap();
        let (g, map) = node_gadget_expand(&inst).unwrap();
        prop_assert!(g.is_binary_leaf_link());
        let a = gen::random_minimal_cover(&inst, &mut gen::rng(seed));
        let pushed = push_solution(&map, &inst, &a).unwrap();
        prop_assert!(g.is_feasible_cover(&pushed));
        prop_assert_eq!(g.integral_cost(&pushed), inst.integral_cost(&a));
        prop_assert_eq!(&lift_solution(&map, &g, &pushed).unwrap(), &a);
        let x = gen::random_feasible_x(&inst, &[2, 3], seed);
        let px = reduce::push_fractional(&map, &x);
        prop_assert_eq!(g.fractional_cost(&px), inst.fractional_cost(&x));
        prop_assert_eq!(reduce::lift_fractional(&map, &px), x);
    }
}

#[test]
fn lift_rejects_infeasible_and_dummy_free_solutions() {
    let inst = tree(7, 5, 3);
    let (b, map) = binarize(&inst).unwrap();
    let empty = IntegralSolution::new([]);
    assert!(matches!(lift_solution(&map, &b, &empty), Err(ReduceError::Infeasible { .. })));
    assert!(matches!(push_solution(&map, &inst, &empty), Err(ReduceError::Infeasible { .. })));
}
