use lazycg_core::augment::{augmenting_weak_separation, call_budget, AugSeparationConfig};
use lazycg_core::domains::{Graph, DEFAULT_VERTEX_CAP};
use lazycg_core::linalg::{dist2, dot, sub};
use lazycg_core::weaksep::{Backend, CacheConfig, LazyOracle, LocalOutcome, PairOutcome};
use lazycg_core::{ActiveSet, Domain, Vertex};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn domains() -> Vec<Domain> {
    vec![
        Domain::simplex(5).unwrap(),
        Domain::hypercube(6).unwrap(),
        Domain::spanning_tree(Graph::complete(4).unwrap()).unwrap(),
    ]
}

/// Random convex combination of up to four vertices.
fn random_active(vs: &[Vertex], rng: &mut ChaCha8Rng) -> ActiveSet {
    let m = rng.gen_range(1..=4);
    let mut atoms: Vec<(Vertex, f64)> = Vec::new();
    for _ in 0..m {
        let v = vs[rng.gen_range(0..vs.len())].clone();
        if atoms.iter().all(|(w, _)| *w != v) {
            atoms.push((v, rng.gen::<f64>() + 0.05));
        }
    }
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    for a in atoms.iter_mut() {
        a.1 /= total;
    }
    ActiveSet::from_atoms(atoms).unwrap()
}

fn max_gain(vs: &[Vertex], c: &[f64], x: &[f64]) -> f64 {
    vs.iter()
        .map(|z| dot(c, x) - z.dot(c))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn stateful_contract(backend: Backend, which: usize, seed: u64, k: f64) -> Result<(), TestCaseError> {
    let d = &domains()[which];
    let vs = d.enumerate_vertices(DEFAULT_VERTEX_CAP).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cache = CacheConfig {
        enabled: true,
        keep_size: 3,
        eviction_period: 4,
    };
    let mut oracle = LazyOracle::new(cache, backend);
    for _ in 0..10 {
        let active = random_active(&vs, &mut rng);
        let x = active.point();
        let c: Vec<f64> = (0..d.dimension()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let phi = rng.gen_range(0.01..2.0);
        let a = oracle.separate_with(d, &c, &x, Some(&active), phi, k).unwrap();
        // the exact backend ignores the threshold: positive iff the LMO improves
        let threshold = if backend == Backend::Exact { 0.0 } else { phi };
        match a.vertex() {
            Some(y) => {
                prop_assert!(vs.contains(y));
                prop_assert!(dot(&c, &sub(&x, &y.coords)) > threshold / k);
            }
            None => {
                prop_assert!(a.lp_called);
                prop_assert!(max_gain(&vs, &c, &x) <= threshold + 1e-12);
            }
        }
        prop_assert!(oracle.cache.len() <= 3 + 4);
    }
    let s = oracle.stats;
    prop_assert_eq!(s.total_queries, s.positive_answers + s.negative_answers);
    prop_assert!(s.cache_hits + s.lp_calls + s.aug_calls >= s.positive_answers);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn lmo_backend_contract(which in 0usize..3, seed in any::<u64>(), k in 1.0f64..4.0) {
        stateful_contract(Backend::Lmo, which, seed, k)?;
    }

    #[test]
    fn augmentation_backend_contract(which in 0usize..3, seed in any::<u64>(), k in 1.01f64..4.0) {
        stateful_contract(Backend::Augmentation, which, seed, k)?;
    }

    #[test]
    fn exact_backend_contract(which in 0usize..3, seed in any::<u64>()) {
        stateful_contract(Backend::Exact, which, seed, 1.0)?;
    }

    #[test]
    fn pair_oracle_contract(which in 0usize..3, seed in any::<u64>(), k in 1.0f64..3.0) {
        let d = &domains()[which];
        let vs = d.enumerate_vertices(DEFAULT_VERTEX_CAP).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut oracle = LazyOracle::new(CacheConfig::default(), Backend::Lmo);
        for _ in 0..5 {
            let x = random_active(&vs, &mut rng).point();
            let supp = lazycg_core::domains::support_of(&x);
            let g: Vec<f64> = (0..d.dimension()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let phi = rng.gen_range(0.01..2.0);
            let a = oracle.separate_pair(d, &g, &x, phi, k).unwrap();
            let gx = dot(&g, &x);
            let admissible: Vec<f64> = vs
                .iter()
                .filter(|v| v.support().iter().all(|i| supp.contains(i)))
                .map(|v| v.dot(&g))
                .collect();
            let best_away = admissible.iter().cloned().fold(gx, f64::max);
            let best_plus = vs.iter().map(|v| v.dot(&g)).fold(f64::INFINITY, f64::min);
            match a.outcome {
                PairOutcome::Positive { plus, minus } => {
                    let away = match &minus {
                        Some(m) => {
                            prop_assert!(m.support().iter().all(|i| supp.contains(i)));
                            m.dot(&g)
                        }
                        None => gx,
                    };
                    let sigma = (gx - plus.dot(&g)) + (away - gx);
                    prop_assert!(sigma > phi / k);
                }
                PairOutcome::Negative => {
                    prop_assert!((gx - best_plus) + (best_away - gx) <= phi + 1e-12);
                }
            }
        }
    }

    #[test]
    fn local_oracle_stays_in_ball(seed in any::<u64>(), r in 0.01f64..2.0, k in 1.0f64..3.0) {
        let d = Domain::simplex(4).unwrap();
        let vs = d.enumerate_vertices(DEFAULT_VERTEX_CAP).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let active = random_active(&vs, &mut rng);
        let x = active.point();
        let c: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let phi = rng.gen_range(0.001..1.0);
        let mut oracle = LazyOracle::new(CacheConfig::default(), Backend::Lmo);
        let a = oracle.separate_local(&d, &c, &active, r, phi, k).unwrap();
        if let LocalOutcome::Positive(step) = a.outcome {
            let y = &step.point;
            prop_assert!(dist2(&x, y) <= 2.0 * r + 1e-9);
            prop_assert!(dot(&c, &sub(&x, y)) > phi / k);
            prop_assert!(y.iter().all(|v| *v >= -1e-12));
            prop_assert!((y.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            let donated: f64 = step.donors.iter().map(|(_, g)| g).sum();
            prop_assert!((donated - step.delta).abs() <= 1e-12);
            for (i, g) in &step.donors {
                prop_assert!(*g <= active.atoms()[*i].weight + 1e-15);
            }
        }
    }

    #[test]
    fn augmentation_run_respects_budget_and_recurrence(
        which in 1usize..3,
        seed in any::<u64>(),
        k_pick in 0usize..3,
    ) {
        let k = [1.582, 2.0, 4.0][k_pick];
        let d = &domains()[which];
        let vs = d.enumerate_vertices(DEFAULT_VERTEX_CAP).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let active = random_active(&vs, &mut rng);
        let x = active.point();
        let c: Vec<f64> = (0..d.dimension()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let phi = rng.gen_range(0.01..2.0);
        let cfg = AugSeparationConfig::new(k, d.l1_diameter()).unwrap();
        let run = augmenting_weak_separation(d, &cfg, &c, &x, &active, phi).unwrap();
        prop_assert!(run.aug_calls <= cfg.budget());
        let ratio = 1.0 - 1.0 / d.l1_diameter();
        for w in run.potentials.windows(2) {
            prop_assert!(w[1] < ratio * w[0] + 1e-12);
        }
        match run.answer.vertex() {
            Some(y) => prop_assert!(dot(&c, &sub(&x, &y.coords)) > phi / k),
            None => prop_assert!(max_gain(&vs, &c, &x) <= phi + 1e-12),
        }
    }
}

#[test]
fn call_budget_examples() {
    assert_eq!(call_budget(2.0, 2.0).unwrap(), 1);
    assert_eq!(call_budget(2.0, 4.0).unwrap(), 3);
    assert_eq!(call_budget(3.0, 1.0).unwrap(), 1);
    let e_k = 1.0 / (1.0 - (-1.0f64).exp());
    for k in 1..40 {
        assert!(call_budget(e_k, k as f64).unwrap() <= k);
    }
    assert!(call_budget(1.0, 4.0).is_err());
    assert!(AugSeparationConfig::new(0.5, 4.0).is_err());
}

#[test]
fn separation_examples_on_the_simplex() {
    let d = Domain::simplex(3).unwrap();
    let x = [1.0 / 3.0; 3];
    let c = [1.0, 0.0, 0.0];
    let mut oracle = LazyOracle::new(CacheConfig::default(), Backend::Lmo);
    let a = oracle.separate(&d, &c, &x, 0.2, 1.0).unwrap();
    assert_eq!(a.vertex(), Some(&Vertex::unit(3, 1)));
    assert!(a.lp_called && !a.served_from_cache);
    let a = oracle.separate(&d, &c, &x, 0.5, 1.0).unwrap();
    assert!(!a.is_positive());
    assert!((a.exact_dual_gap.unwrap() - 1.0 / 3.0).abs() < 1e-15);
    let a = oracle.separate(&d, &c, &x, 0.2, 1.0).unwrap();
    assert!(a.served_from_cache && !a.lp_called);
    assert_eq!(a.vertex(), Some(&Vertex::unit(3, 1)));
    assert_eq!(oracle.stats.lp_calls, 2);
    assert_eq!(oracle.stats.cache_hits, 1);
    assert!(oracle.separate(&d, &c, &x, 0.0, 1.0).is_err());
    assert!(oracle.separate(&d, &c, &x, 0.1, 0.5).is_err());
    assert!(oracle.separate(&d, &c[..2], &x, 0.1, 1.0).is_err());
}

#[test]
fn pair_examples_on_the_simplex() {
    let d = Domain::simplex(3).unwrap();
    let x = [0.5, 0.5, 0.0];
    let g = [0.0, 1.0, 0.0];
    let mut oracle = LazyOracle::new(CacheConfig::default(), Backend::Lmo);
    match oracle.separate_pair(&d, &g, &x, 0.4, 1.0).unwrap().outcome {
        PairOutcome::Positive { plus, minus } => {
            assert_eq!(plus, Vertex::unit(3, 0));
            assert_eq!(minus, Some(Vertex::unit(3, 1)));
        }
        PairOutcome::Negative => panic!("expected a positive answer"),
    }
    let mut fresh = LazyOracle::new(CacheConfig::default(), Backend::Lmo);
    assert_eq!(fresh.separate_pair(&d, &g, &x, 1.5, 1.0).unwrap().outcome, PairOutcome::Negative);
    let e1 = [1.0, 0.0, 0.0];
    assert_eq!(
        fresh.separate_pair(&d, &[0.0, 1.0, 1.0], &e1, 1e-9, 1.0).unwrap().outcome,
        PairOutcome::Negative
    );
}

#[test]
fn exact_backend_never_caches() {
    let d = Domain::hypercube(3).unwrap();
    let mut oracle = LazyOracle::new(CacheConfig::default(), Backend::Exact);
    let x = [0.0, 0.0, 0.0];
    let c = [-1.0, 0.5, -0.2];
    for _ in 0..5 {
        let a = oracle.separate(&d, &c, &x, 100.0, 1.0).unwrap();
        // threshold-free: any strict improvement is positive
        assert_eq!(a.vertex().unwrap().coords, vec![1.0, 0.0, 1.0]);
        assert!(a.lp_called);
    }
    assert_eq!(oracle.stats.lp_calls, 5);
    assert_eq!(oracle.stats.cache_hits, 0);
}
