use slide_core::eval::complexity::{empirical_sample_complexity, ComplexityProtocol};
use slide_core::eval::oracle::exhaustive_best_subset_with;
use slide_core::slide::{gic, solve_fixed_d, splice_once, SplicingState};
use slide_core::{
    exact_distribution, generate_rrg, reconstruct, reconstruct_with_trace, sample_exact, solve_node, CouplingMatrix,
    Dataset, NodeObjective, Pattern, SlideConfig, SolverSettings,
};

fn ferro_data(p: usize, beta: f64, n: usize, seed: u64) -> (CouplingMatrix, Dataset) {
    let truth = generate_rrg(p, 3, beta, beta, Pattern::FerroOneWeak, seed).unwrap();
    let data = sample_exact(&exact_distribution(&truth).unwrap(), n, seed + 100).unwrap();
    (truth, data)
}

#[test]
fn oracle_dominates_splicing_and_usually_matches() {
    let settings = SolverSettings::default();
    let config = SlideConfig::default();
    let mut matches = 0;
    let mut cases = 0;
    for seed in 0..3 {
        let (_, data) = ferro_data(8, 0.6, 1500, seed);
        for i in 0..8 {
            let obj = NodeObjective::new(&data, i);
            let empty = obj.maximize(&[], None, &settings);
            let sigma = config.sigma(3, data.n(), data.p());
            let spliced = solve_fixed_d(&obj, 3, &empty, sigma, &settings, 1000).solution;
            let (best, best_pl) = exhaustive_best_subset_with(&obj, 3, &settings).unwrap();
            assert!(best_pl >= spliced.pl_value - 1e-10);
            cases += 1;
            matches += usize::from(best == spliced.support);
        }
    }
    assert!(matches * 10 >= cases * 9, "{matches}/{cases}");
}

#[test]
fn accepted_splices_improve_by_more_than_sigma() {
    let (_, data) = ferro_data(10, 0.5, 800, 4);
    let settings = SolverSettings::default();
    let obj = NodeObjective::new(&data, 0);
    // Start from the three worst-looking candidates so splicing has work to do.
    let start = obj.maximize(&[6, 7, 8], None, &settings);
    let sigma = 1e-4;
    let mut state = SplicingState::new(start);
    let mut accepted = 0;
    loop {
        let before = state.solution.pl_value;
        let (next, ok) = splice_once(&obj, state, 3, sigma, &settings);
        if !ok {
            assert_eq!(next.solution.pl_value, before);
            break;
        }
        assert!(next.solution.pl_value - before > sigma);
        assert_eq!(next.active.len(), 3);
        accepted += 1;
        assert!(accepted < 100);
        state = next;
    }
}

#[test]
fn output_is_symmetric_with_zero_diagonal() {
    for seed in 0..4 {
        let (_, data) = ferro_data(10, 0.4, 300, seed);
        let j = reconstruct(&data, &SlideConfig::default()).unwrap();
        for a in 0..10 {
            assert_eq!(j.get(a, a), 0.0);
            for b in 0..10 {
                assert_eq!(j.get(a, b), j.get(b, a));
            }
        }
    }
}

#[test]
fn thread_count_does_not_change_estimate() {
    let (_, data) = ferro_data(12, 0.5, 600, 2);
    let run = |t| reconstruct_with_trace(&data, &SlideConfig { threads: Some(t), ..Default::default() }).unwrap();
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(8));
}

#[test]
fn gic_choice_is_invariant_to_pl_shift() {
    let (_, data) = ferro_data(10, 0.6, 1000, 5);
    let node = solve_node(&data, 3, &SlideConfig { gic_patience: None, ..Default::default() }).unwrap();
    let (n, p) = (data.n(), data.p());
    for shift in [-3.0, -0.1, 0.0, 0.5, 7.0] {
        let values: Vec<f64> = node
            .per_d
            .iter()
            .enumerate()
            .map(|(d, s)| {
                let mut shifted = s.clone();
                shifted.pl_value += shift;
                gic(&shifted, d, n, p)
            })
            .collect();
        let mut best = 0;
        for (d, v) in values.iter().enumerate() {
            if *v > values[best] {
                best = d;
            }
        }
        assert_eq!(best, node.chosen_d, "shift {shift}");
    }
}

#[test]
fn patience_matches_full_sweep_on_recoverable_models() {
    for seed in 0..4 {
        let (_, data) = ferro_data(12, 0.6, 1500, seed);
        let full = reconstruct(&data, &SlideConfig { gic_patience: None, ..Default::default() }).unwrap();
        let early = reconstruct(&data, &SlideConfig::default()).unwrap();
        assert_eq!(full, early, "seed {seed}");
    }
}

#[test]
fn easy_model_is_recovered_at_moderate_n() {
    let (truth, data) = ferro_data(10, 0.8, 3000, 1);
    assert!(reconstruct(&data, &SlideConfig::default()).unwrap().same_support(&truth));
}

#[test]
fn complexity_trace_is_reproducible() {
    let truth = CouplingMatrix::from_edges(4, &[(0, 1, 1.5)]).unwrap();
    let protocol = ComplexityProtocol { trials: 45, ..Default::default() };
    // With λ known, τ = λ/2 removes the small spurious couplings that the
    // GIC penalty alone lets through at p = 4.
    let config = SlideConfig { lambda: Some(1.5), ..Default::default() };
    let a = empirical_sample_complexity(&truth, &protocol, &config, 8).unwrap();
    let b = empirical_sample_complexity(&truth, &protocol, &config, 8).unwrap();
    assert_eq!(a, b);
    assert!(a.n_emp <= 500, "n_emp = {}", a.n_emp);
    let last = a.trace.iter().find(|t| t.n == a.n_emp).unwrap();
    assert_eq!(last.successes, 45);
}

#[test]
fn pure_noise_node_selects_no_neighbours() {
    let mut empty = 0;
    for seed in 0..100 {
        let data = sample_exact(&exact_distribution(&CouplingMatrix::zeros(10)).unwrap(), 2000, seed).unwrap();
        empty += usize::from(solve_node(&data, 0, &SlideConfig::default()).unwrap().chosen_d == 0);
    }
    assert!(empty >= 95, "chosen_d = 0 in {empty}/100");
}
