use hyperdisc_core::exact::{self, ExactError};
use hyperdisc_core::{Colouring, Hypergraph};
use proptest::prelude::*;

fn brute_force(n: usize, edges: &[Vec<usize>]) -> u64 {
    (0u32..1 << n)
        .map(|mask| {
            edges
                .iter()
                .map(|e| e.iter().map(|&v| if mask >> v & 1 == 1 { 1i64 } else { -1 }).sum::<i64>().unsigned_abs())
                .max()
                .unwrap_or(0)
        })
        .min()
        .unwrap()
}

fn instance() -> impl Strategy<Value = (usize, Vec<Vec<usize>>)> {
    (1usize..=12, 0usize..=10).prop_flat_map(|(n, m)| {
        let edge = proptest::collection::btree_set(0..n, 0..=n).prop_map(|s| s.into_iter().collect::<Vec<_>>());
        (Just(n), proptest::collection::vec(edge, m))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn solvers_agree_with_brute_force((n, edges) in instance()) {
        let h = Hypergraph::from_edges(n, edges.clone()).unwrap();
        let expected = brute_force(n, &edges);
        let gray = exact::disc_exact(&h, 30).unwrap();
        let bb = exact::disc_branch_bound(&h, None).unwrap();
        prop_assert_eq!(gray.disc, expected);
        prop_assert_eq!(bb.disc, expected);
        prop_assert_eq!(h.colouring_discrepancy(&gray.witness).unwrap(), expected);
        prop_assert_eq!(h.colouring_discrepancy(&bb.witness).unwrap(), expected);
        prop_assert!(expected >= exact::parity_lower_bound(&h));
    }

    #[test]
    fn adding_an_edge_never_lowers_discrepancy((n, edges) in instance(), extra in proptest::collection::btree_set(0usize..12, 0..=12)) {
        let h = Hypergraph::from_edges(n, edges.clone()).unwrap();
        let mut more = edges;
        more.push(extra.into_iter().filter(|&v| v < n).collect());
        let g = Hypergraph::from_edges(n, more).unwrap();
        prop_assert!(exact::disc_exact(&g, 30).unwrap().disc >= exact::disc_exact(&h, 30).unwrap().disc);
    }

    #[test]
    fn negating_a_witness_keeps_its_discrepancy((n, edges) in instance()) {
        let h = Hypergraph::from_edges(n, edges).unwrap();
        let r = exact::disc_exact(&h, 30).unwrap();
        let negated: Colouring = r.witness.negated();
        prop_assert_eq!(h.colouring_discrepancy(&negated).unwrap(), r.disc);
    }

    #[test]
    fn any_hint_gives_the_same_answer((n, edges) in instance(), hint in 0u64..16) {
        let h = Hypergraph::from_edges(n, edges).unwrap();
        prop_assert_eq!(
            exact::disc_branch_bound(&h, Some(hint)).unwrap().disc,
            exact::disc_branch_bound(&h, None).unwrap().disc
        );
    }
}

#[test]
fn size_limit_is_enforced() {
    let h = Hypergraph::from_edges(20, [vec![0, 19]]).unwrap();
    assert_eq!(exact::disc_exact(&h, 16), Err(ExactError::TooLarge { n: 20, limit: 16 }));
    assert_eq!(exact::disc_exact(&h, 20).unwrap().disc, 0);
}
