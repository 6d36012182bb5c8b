use hyperdisc_core::partial::{self, budget_check, PartialColouringRequest, PartialError, WalkParams};
use hyperdisc_core::{generate, FractionalColouring, ModelParams};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    /// Successful walks respect every edge budget, stay in the cube, never
    /// unfreeze a frozen input and freeze at least half the vertices.
    #[test]
    fn postconditions_hold(n in 8usize..40, m in 1usize..40, p in 0.2f64..0.8, seed: u64, start in proptest::collection::vec(-1.0f64..=1.0, 40)) {
        let h = generate(&ModelParams::edge_independent(n, m, p, seed)).unwrap();
        let lambda = 4.0 * (16.0 * m as f64 / n as f64).max(1.0).ln().sqrt() + 1.0;
        prop_assume!(budget_check(&h, &vec![lambda; m]) <= 1.0);
        let rho: Vec<f64> = start[..n].iter().map(|x| (x * 0.9).clamp(-1.0, 1.0)).collect();
        let req = PartialColouringRequest {
            h: &h,
            rho: FractionalColouring::new(rho.clone()).unwrap(),
            lambda: vec![lambda; m],
            delta: 1.0 / n as f64,
            seed: seed ^ 1,
            max_attempts: 20,
            walk: WalkParams::default(),
        };
        let r = partial::partial_colour(&req).unwrap();
        let psi = r.psi.values();
        prop_assert!(psi.iter().all(|x| x.abs() <= 1.0));
        prop_assert!(psi.iter().filter(|x| x.abs() >= 1.0 - req.delta).count() >= n.div_ceil(2));
        for e in 0..m {
            let moved: f64 = h.edge(e).map(|v| psi[v] - rho[v]).sum();
            prop_assert!(moved.abs() <= lambda * (h.edge_size(e) as f64).sqrt() + 1e-6);
        }
        for (v, &x) in rho.iter().enumerate() {
            if x.abs() >= 1.0 - req.delta {
                prop_assert_eq!(psi[v], x);
            }
        }
    }
}

#[test]
fn same_seed_same_result() {
    let h = generate(&ModelParams::edge_independent(32, 32, 0.5, 3)).unwrap();
    let req = PartialColouringRequest {
        h: &h,
        rho: FractionalColouring::zeros(32),
        lambda: vec![8.0; 32],
        delta: 1.0 / 32.0,
        seed: 9,
        max_attempts: 10,
        walk: WalkParams::default(),
    };
    assert_eq!(partial::partial_colour(&req).unwrap().psi, partial::partial_colour(&req).unwrap().psi);
}

#[test]
fn infeasible_budget_is_rejected() {
    let h = generate(&ModelParams::edge_independent(16, 64, 0.5, 3)).unwrap();
    let req = PartialColouringRequest {
        h: &h,
        rho: FractionalColouring::zeros(16),
        lambda: vec![0.5; 64],
        delta: 1.0 / 16.0,
        seed: 9,
        max_attempts: 10,
        walk: WalkParams::default(),
    };
    assert!(matches!(partial::partial_colour(&req), Err(PartialError::BudgetInfeasible { .. })));
}
