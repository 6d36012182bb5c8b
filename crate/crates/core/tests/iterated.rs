use hyperdisc_core::iterated::{self, IteratedError, Phase, RunOptions};
use hyperdisc_core::{generate, ModelParams};

#[test]
fn runs_are_reproducible_and_self_consistent() {
    let (n, m, d) = (128, 2048, 256);
    let schedule = iterated::make_schedule(n, m, d as f64, None).unwrap();
    for seed in 0..4 {
        let h = generate(&ModelParams::edge_dependent(n, m, d, seed)).unwrap();
        let a = iterated::run(&h, &schedule, seed).unwrap();
        assert_eq!(a, iterated::run(&h, &schedule, seed).unwrap());
        assert_eq!(a.phi.len(), n);
        assert_eq!(h.colouring_discrepancy(&a.phi).unwrap(), a.disc);
        assert!(a.telescoping_error <= 1e-9);
        assert_eq!(a.trace.last().unwrap().phase, Phase::Post);
        for t in a.trace.iter().filter(|t| t.phase != Phase::Post) {
            assert!(t.movement_max <= t.movement_bound + 1e-6);
            assert_eq!(t.active_count, schedule.active_count(t.round_index));
        }
    }
}

#[test]
fn keeps_round_hypergraphs_on_request() {
    let (n, m, d) = (64, 512, 64);
    let schedule = iterated::make_schedule(n, m, d as f64, None).unwrap();
    let h = generate(&ModelParams::edge_dependent(n, m, d, 1)).unwrap();
    let opts = RunOptions { keep_round_hypergraphs: true, ..RunOptions::default() };
    let r = iterated::run_with(&h, &schedule, 1, &opts).unwrap();
    assert_eq!(r.round_hypergraphs.len(), schedule.rounds as usize);
}

#[test]
fn rejects_non_dense_input() {
    let h = generate(&ModelParams::edge_dependent(64, 32, 8, 1)).unwrap();
    assert!(matches!(iterated::make_schedule(64, 32, 8.0, None), Err(IteratedError::NotDense { .. })));
    let schedule = iterated::make_schedule(64, 512, 64.0, None).unwrap();
    assert!(iterated::run(&h, &schedule, 0).is_err());
}
