use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slide_core::eval::{exact_recovery, structure_metrics};
use slide_core::exact::{config_spins, energy};
use slide_core::{
    conditional_prob, exact_distribution, gibbs_sample, maximize_on_support, sample_exact, BenchmarkModel, CouplingMatrix,
    Dataset, NodeObjective, Pattern, SolverSettings, Topology,
};

fn random_coupling(p: usize, scale: f64, seed: u64) -> CouplingMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut j = CouplingMatrix::zeros(p);
    for a in 0..p {
        for b in (a + 1)..p {
            j.set(a, b, rng.random_range(-scale..scale));
        }
    }
    j
}

fn random_dataset(n: usize, p: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spins = (0..n * p).map(|_| if rng.random::<bool>() { 1 } else { -1 }).collect();
    Dataset::new(p, spins).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn exact_distribution_is_normalized(p in 2usize..=12, seed in any::<u64>()) {
        let dist = exact_distribution(&random_coupling(p, 1.0, seed)).unwrap();
        let total: f64 = dist.probabilities().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-12, "sum = {}", total);
    }

    #[test]
    fn conditional_matches_enumeration(p in 2usize..=8, seed in any::<u64>()) {
        let j = random_coupling(p, 1.0, seed);
        let dist = exact_distribution(&j).unwrap();
        for k in 0..(1usize << p) {
            let z = config_spins(k, p);
            for i in 0..p {
                let mut flipped = z.clone();
                flipped[i] = -flipped[i];
                let (a, b) = (dist.prob(&z), dist.prob(&flipped));
                let cond = conditional_prob(j.row(i), &z, i);
                prop_assert!((cond - a / (a + b)).abs() <= 1e-10);
            }
            let expect = (energy(&j, &z) - dist.log_partition()).exp();
            prop_assert!((dist.prob(&z) - expect).abs() <= 1e-12);
        }
    }

    #[test]
    fn pl_is_concave(seed in any::<u64>(), t in 0.01f64..0.99) {
        let (n, p) = (60, 6);
        let data = random_dataset(n, p, seed);
        let obj = NodeObjective::new(&data, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let a: Vec<f64> = (0..p).map(|_| rng.random_range(-3.0..3.0)).collect();
        let b: Vec<f64> = (0..p).map(|_| rng.random_range(-3.0..3.0)).collect();
        let mix: Vec<f64> = a.iter().zip(&b).map(|(x, y)| t * x + (1.0 - t) * y).collect();
        let lhs = obj.value(&mix);
        let rhs = t * obj.value(&a) + (1.0 - t) * obj.value(&b);
        prop_assert!(lhs >= rhs - 1e-12, "{} < {}", lhs, rhs);
        prop_assert!(obj.value(&a) < 0.0);
    }

    #[test]
    fn restriction_is_monotone(seed in any::<u64>(), mask in 0u32..(1 << 5), extra in 0u32..(1 << 5)) {
        let data = sample_exact(&exact_distribution(&random_coupling(6, 0.8, seed)).unwrap(), 300, seed).unwrap();
        let small: Vec<usize> = (1..6).filter(|j| mask >> (j - 1) & 1 == 1).collect();
        let large: Vec<usize> = (1..6).filter(|j| (mask | extra) >> (j - 1) & 1 == 1).collect();
        let s = SolverSettings::default();
        let a = maximize_on_support(&data, 0, &small, None, &s);
        let b = maximize_on_support(&data, 0, &large, None, &s);
        prop_assert!(a.pl_value <= b.pl_value + 1e-10);
    }

    #[test]
    fn metrics_stay_in_range(seed in any::<u64>(), density in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = 7;
        let mut a = CouplingMatrix::zeros(p);
        let mut b = CouplingMatrix::zeros(p);
        for i in 0..p {
            for j in (i + 1)..p {
                if rng.random::<f64>() < density { a.set(i, j, 1.0); }
                if rng.random::<f64>() < density { b.set(i, j, -0.5); }
            }
        }
        let m = structure_metrics(&a, &b).unwrap();
        prop_assert!((-1.0..=1.0).contains(&m.mcc));
        prop_assert!((0.0..=1.0).contains(&m.tpr) && (0.0..=1.0).contains(&m.fpr));
        let c = m.counts;
        prop_assert_eq!(c.tp + c.tn + c.fp + c.fn_, 21);
        if b.edge_count() > 0 && b.edge_count() < 21 {
            prop_assert_eq!(exact_recovery(&a, &b).unwrap(), m.tpr == 1.0 && m.fpr == 0.0);
        }
    }
}

#[test]
fn generated_models_satisfy_declared_params() {
    let specs = [
        (Topology::Rrg { p: 16, d: 3 }, Pattern::FerroOneWeak),
        (Topology::Rrg { p: 16, d: 3 }, Pattern::MixedTwoWeak),
        (Topology::Rrg { p: 16, d: 4 }, Pattern::DegreeDisentangled),
        (Topology::Pbsl { l: 4 }, Pattern::FerroOneWeak),
        (Topology::Pbsl { l: 4 }, Pattern::MixedTwoWeak),
        (Topology::Pbsl { l: 5 }, Pattern::FerroOneWeakNegative),
        (Topology::Pbsl { l: 4 }, Pattern::DegreeDisentangled),
    ];
    for (topology, pattern) in specs {
        for seed in 0..10 {
            let spec = BenchmarkModel { topology, pattern, beta: 0.6, lambda: 0.3, seed };
            let j = spec.build().unwrap();
            let params = spec.declared_params();
            assert!(params.admits(&j), "{spec:?} violates {params:?}");
            assert_eq!(j.max_degree(), topology.degree());
            assert_eq!(spec.build().unwrap(), j);
        }
    }
}

#[test]
fn gibbs_with_zero_coupling_is_unbiased() {
    let n = 4000;
    let data = gibbs_sample(&CouplingMatrix::zeros(5), n, 50, 2, 17).unwrap();
    for m in data.means() {
        assert!(m.abs() <= 4.0 / (n as f64).sqrt(), "mean {m}");
    }
}

#[test]
fn samplers_are_deterministic() {
    let j = random_coupling(6, 0.7, 3);
    let dist = exact_distribution(&j).unwrap();
    assert_eq!(sample_exact(&dist, 500, 9).unwrap(), sample_exact(&dist, 500, 9).unwrap());
    assert_eq!(gibbs_sample(&j, 500, 60, 3, 9).unwrap(), gibbs_sample(&j, 500, 60, 3, 9).unwrap());
    assert_ne!(gibbs_sample(&j, 500, 60, 3, 9).unwrap(), gibbs_sample(&j, 500, 60, 3, 10).unwrap());
}
