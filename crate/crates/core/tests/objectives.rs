use lazycg_core::domains::Graph;
use lazycg_core::linalg::{dot, norm2, sub};
use lazycg_core::objectives::{
    adversarial_wrapper, generate_identity_instance, generate_linear_stream,
    generate_regression_instance, line_search, short_step, Aggregate,
};
use lazycg_core::{Domain, DomainKind, Objective, QuadraticForm, QuadraticObjective};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random point of the simplex or the cube, matching `domain`.
fn random_point(domain: &Domain, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = domain.dimension();
    let raw: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    if matches!(domain.kind(), DomainKind::ProbabilitySimplex) {
        let s: f64 = raw.iter().sum();
        raw.iter().map(|v| v / s).collect()
    } else {
        raw
    }
}

fn instances() -> Vec<(Domain, QuadraticObjective)> {
    let mut out = Vec::new();
    for (i, d) in [
        Domain::simplex(4).unwrap(),
        Domain::hypercube(5).unwrap(),
        Domain::simplex(6).unwrap(),
    ]
    .into_iter()
    .enumerate()
    {
        let f = generate_regression_instance(&d, 0.7, 8, i as u64).unwrap();
        out.push((d.clone(), f));
        let g = generate_identity_instance(&d, 10 + i as u64).unwrap();
        out.push((d, g));
    }
    out
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (d, f) in instances() {
        for _ in 0..100 {
            let x = random_point(&d, &mut rng);
            let g = f.gradient(&x);
            let h = 1e-6 * (1.0 + norm2(&x));
            let fd: Vec<f64> = (0..x.len())
                .map(|i| {
                    let mut p = x.clone();
                    let mut m = x.clone();
                    p[i] += h;
                    m[i] -= h;
                    (f.value(&p) - f.value(&m)) / (2.0 * h)
                })
                .collect();
            let err = norm2(&sub(&g, &fd)) / norm2(&g).max(1.0);
            assert!(err <= 1e-5, "relative error {err}");
        }
    }
}

#[test]
fn curvature_bounds_the_smoothness_inequality() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (d, f) in instances() {
        let c = f.meta().curvature;
        for _ in 0..1000 {
            let x = random_point(&d, &mut rng);
            let y = random_point(&d, &mut rng);
            let gamma: f64 = rng.gen();
            let z: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + gamma * (b - a)).collect();
            let rhs = f.value(&x) + gamma * dot(&f.gradient(&x), &sub(&y, &x)) + c * gamma * gamma / 2.0;
            assert!(f.value(&z) <= rhs + 1e-9 * (1.0 + rhs.abs()));
        }
    }
}

#[test]
fn strong_convexity_lower_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    for (d, f) in instances() {
        let s = f.meta().strong_convexity;
        if s <= 0.0 {
            continue;
        }
        checked += 1;
        for _ in 0..1000 {
            let x = random_point(&d, &mut rng);
            let y = random_point(&d, &mut rng);
            let diff = sub(&y, &x);
            let lhs = f.value(&y) - f.value(&x);
            let rhs = dot(&f.gradient(&x), &diff) + s / 2.0 * dot(&diff, &diff);
            assert!(lhs >= rhs - 1e-9 * (1.0 + lhs.abs()));
        }
    }
    assert!(checked >= 3);
}

#[test]
fn quadratic_metadata_follows_spectrum() {
    let d = Domain::hypercube(3).unwrap();
    // AᵀA = diag(4, 1, 9)
    let a = vec![2.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 3.0];
    let f = QuadraticObjective::new(a, 3, vec![0.0; 3], &d).unwrap();
    let m = f.meta();
    let d2 = d.l2_diameter() * d.l2_diameter();
    assert!((m.smoothness - 18.0).abs() < 1e-9);
    assert!((m.strong_convexity - 2.0).abs() < 1e-9);
    assert!((m.curvature - 18.0 * d2).abs() < 1e-8);
    // rank deficient
    let f = QuadraticObjective::new(vec![1.0, 1.0, 0.0], 1, vec![1.0], &d).unwrap();
    assert_eq!(f.meta().strong_convexity, 0.0);
}

#[test]
fn line_search_examples() {
    let d = Domain::hypercube(2).unwrap();
    let norm_sq = QuadraticObjective::identity_target(vec![0.0, 0.0], &d).unwrap();
    assert_eq!(line_search(&norm_sq, &[1.0, 0.0], &[0.0, 0.0]), 1.0);
    let shifted = QuadraticObjective::identity_target(vec![0.5, 0.0], &d).unwrap();
    assert!((line_search(&shifted, &[1.0, 0.0], &[0.0, 0.0]) - 0.5).abs() < 1e-15);
    assert_eq!(line_search(&shifted, &[1.0, 0.0], &[1.0, 0.0]), 0.0);
}

#[test]
fn short_step_examples() {
    assert_eq!(short_step(1.0, 1.0, 2.0), 0.5);
    assert_eq!(short_step(5.0, 1.0, 1.0), 1.0);
    assert_eq!(short_step(1.0, 2.0, 1.0), 0.5);
}

/// Non-quadratic objective, exercising the backtracking path.
struct SoftMax;

impl Objective for SoftMax {
    fn dim(&self) -> usize {
        2
    }
    fn value(&self, x: &[f64]) -> f64 {
        (x[0].exp() + (2.0 * x[1]).exp()).ln() - 0.3 * x[0]
    }
    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let (a, b) = (x[0].exp(), (2.0 * x[1]).exp());
        vec![a / (a + b) - 0.3, 2.0 * b / (a + b)]
    }
    fn meta(&self) -> lazycg_core::ObjectiveMeta {
        lazycg_core::ObjectiveMeta::default()
    }
}

#[test]
fn backtracking_never_increases_f() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let x: Vec<f64> = (0..2).map(|_| rng.gen::<f64>()).collect();
        let v: Vec<f64> = (0..2).map(|_| rng.gen::<f64>()).collect();
        let gamma = line_search(&SoftMax, &x, &v);
        assert!((0.0..=1.0).contains(&gamma));
        let z: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + gamma * (b - a)).collect();
        assert!(SoftMax.value(&z) <= SoftMax.value(&x) + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn exact_line_search_is_optimal(seed in 0u64..1000, which in 0usize..6) {
        let (d, f) = &instances()[which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_point(d, &mut rng);
        let v = random_point(d, &mut rng);
        let gamma = line_search(f, &x, &v);
        let at = |g: f64| {
            let z: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a + g * (b - a)).collect();
            f.value(&z)
        };
        let best = at(gamma);
        for _ in 0..100 {
            let other: f64 = rng.gen();
            prop_assert!(best <= at(other) + 1e-9);
        }
    }
}

#[test]
fn generators_are_deterministic() {
    let d = Domain::spanning_tree(Graph::complete(4).unwrap()).unwrap();
    let a = generate_regression_instance(&d, 0.5, 7, 42).unwrap();
    let b = generate_regression_instance(&d, 0.5, 7, 42).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, generate_regression_instance(&d, 0.5, 7, 43).unwrap());
    let dense = generate_regression_instance(&Domain::simplex(2).unwrap(), 1.0, 2, 9).unwrap();
    assert!(dense.matrix().0.iter().all(|v| *v > 0.0));
    assert_eq!(
        generate_linear_stream(3, 10, 5).unwrap(),
        generate_linear_stream(3, 10, 5).unwrap()
    );
}

#[test]
fn regression_target_is_attainable_in_the_cube() {
    // b = A·w with w in [0,1)ⁿ, so the minimum over the cube is 0
    let d = Domain::hypercube(4).unwrap();
    let f = generate_regression_instance(&d, 0.6, 6, 11).unwrap();
    let best = lazycg_core::reference::certified_minimum(&f, &d, 1e-12, 200_000).unwrap();
    assert!(best.value >= 0.0);
    assert!(best.value < 1e-6);
}

#[test]
fn generator_rejects_bad_parameters() {
    let d = Domain::simplex(3).unwrap();
    assert!(generate_regression_instance(&d, 0.0, 3, 0).is_err());
    assert!(generate_regression_instance(&d, 1.5, 3, 0).is_err());
    assert!(generate_regression_instance(&d, 0.5, 0, 0).is_err());
    assert!(generate_linear_stream(3, 0, 0).is_err());
}

#[test]
fn linear_stream_ranges_and_lipschitz() {
    let s = generate_linear_stream(4, 50, 8).unwrap();
    assert_eq!(s.rounds(), 50);
    let mut max_norm: f64 = 0.0;
    for l in s.losses() {
        assert!(l.is_linear());
        assert!(l.linear.iter().all(|c| (-1.0..1.0).contains(c)));
        assert!((0.0..1.0).contains(&l.constant));
        max_norm = max_norm.max(norm2(&l.linear));
    }
    assert_eq!(s.lipschitz(), max_norm);
}

#[test]
fn aggregate_gradient_is_sum_of_gradients() {
    let d = Domain::simplex(3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let stream = generate_linear_stream(3, 5, 1).unwrap();
    let quad = generate_regression_instance(&d, 0.8, 4, 2).unwrap().to_form();
    let mut agg = Aggregate::new(3);
    let mut parts: Vec<QuadraticForm> = stream.losses().to_vec();
    parts.push(quad);
    for p in &parts {
        agg.push(p);
    }
    assert_eq!(agg.rounds(), parts.len());
    for _ in 0..20 {
        let x = random_point(&d, &mut rng);
        let mut sum = vec![0.0; 3];
        let mut value = 0.0;
        for p in &parts {
            for (s, g) in sum.iter_mut().zip(p.gradient(&x)) {
                *s += g;
            }
            value += p.value(&x);
        }
        assert!(norm2(&sub(&agg.gradient(&x), &sum)) <= 1e-12);
        assert!((agg.value(&x) - value).abs() <= 1e-12);
    }
}

#[test]
fn two_linear_losses_aggregate_linearly() {
    let mut agg = Aggregate::new(2);
    agg.push(&QuadraticForm::linear(vec![1.0, -2.0], 0.5));
    agg.push(&QuadraticForm::linear(vec![0.5, 3.0], 0.25));
    assert_eq!(agg.gradient(&[0.3, 0.7]), vec![1.5, 1.0]);
    assert!(agg.as_form().is_linear());
    let zero = QuadraticForm::linear(vec![0.0, 0.0], 0.0);
    assert_eq!(zero.gradient(&[0.2, 0.8]), vec![0.0, 0.0]);
}

#[test]
fn wrapper_examples() {
    let loss = QuadraticForm::linear(vec![0.5, -1.0], 0.0);
    let anchor = [1.0, 0.0];
    let iterate = [0.0, 1.0];
    let w = adversarial_wrapper(&loss, &anchor, &iterate, 1.0, 1.0, 1).unwrap();
    // at the anchor the quadratic term vanishes
    assert!((w.value(&anchor) - 0.5).abs() < 1e-15);
    assert_eq!(w.gradient(&anchor), vec![0.5, -1.0]);
    let g = w.gradient(&[2.0, 0.0]);
    assert!((g[0] - 4.5).abs() < 1e-12 && (g[1] + 1.0).abs() < 1e-12);

    let w = adversarial_wrapper(&loss, &anchor, &iterate, 2.0, 4.0, 3).unwrap();
    assert_eq!(w.meta.curvature, 4.0);
    assert_eq!(w.meta.strong_convexity, 1.0);
    assert_eq!(w.meta.lipschitz, 6.0);
    assert!(adversarial_wrapper(&loss, &anchor, &iterate, 0.0, 1.0, 1).is_err());
    assert!(adversarial_wrapper(&loss, &anchor, &iterate, 1.0, 1.0, 0).is_err());
}
