mod common;

use proptest::prelude::*;
use tap_core::exact::{exact_tap, exact_tap_with, ExactConfig, ExactError, Method};
use tap_core::gen::{self, CostRange};
use tap_core::lp::{build_lp, solve_lp, Model, ODD_SET_NODE_LIMIT};
use tap_core::rational::int;
use tap_core::TapInstance;

const COSTS: CostRange = CostRange { lo: 0, hi: 12 };

fn tree(n: usize, links: usize, seed: u64) -> TapInstance {
    TapInstance::from_raw(&gen::random_tree(n, links, COSTS, seed).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn both_methods_agree_with_enumeration(n in 2usize..=10, links in 1usize..14, seed in any::<u64>()) {
        let inst = tree(n, links, seed);
        let brute = common::brute_force_tap(&inst);
        for method in [Method::Exhaustive, Method::BranchAndBound] {
            let r = exact_tap_with(&inst, method).unwrap();
            prop_assert_eq!(&r.optimum_cost, &brute, "{:?}", method);
            if let Some(w) = &r.witness {
                prop_assert!(common::two_edge_connected(&inst, w));
                prop_assert_eq!(Some(inst.integral_cost(&r.witness_solution().unwrap())), brute.clone());
            } else {
                prop_assert!(brute.is_none());
            }
        }
    }

    /// EDGE ≤ ODD ≤ OPT ≤ 2·EDGE on binary leaf-to-leaf instances.
    #[test]
    fn optimum_sits_between_lp_and_twice_lp(h in 2usize..=6, seed in any::<u64>()) {
        let inst = TapInstance::from_raw(&gen::random_binary(2 * h, 0.5, CostRange { lo: 1, hi: 12 }, seed).unwrap()).unwrap();
        let opt = exact_tap(&inst, &ExactConfig::default()).unwrap().optimum_cost.unwrap();
        let edge = solve_lp(&build_lp(&inst, Model::Edge, 0).unwrap(), None).unwrap().value;
        let odd = solve_lp(&build_lp(&inst, Model::Odd, ODD_SET_NODE_LIMIT).unwrap(), None).unwrap().value;
        prop_assert!(edge <= odd && odd <= opt);
        prop_assert!(opt <= int(2) * edge);
    }
}

#[test]
fn refuses_above_the_link_limit() {
    let inst = tree(10, 20, 1);
    let cfg = ExactConfig { exhaustive_links: 4, max_links: inst.num_links() - 1 };
    assert!(matches!(exact_tap(&inst, &cfg), Err(ExactError::TooManyLinks { .. })));
}

#[test]
fn infeasible_instances_report_none() {
    let one = int(1);
    let inst = gen::instance(&["a", "b", "c"], &[("a", "b"), ("b", "c")], &[("a", "b", one)]);
    let r = exact_tap(&inst, &ExactConfig::default()).unwrap();
    assert_eq!(r.optimum_cost, None);
    assert_eq!(common::brute_force_tap(&inst), None);
}
