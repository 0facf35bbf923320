use bayesimax::conjugate::{BetaBernoulliSpec, FamilySpec, GammaPoissonSpec, NormalNormalSpec};
use bayesimax::mcent::{estimate_family, Estimator, McConfig};

/// Allowance for the finite-J downward bias of the kNN estimator in one
/// dimension at J = 10⁴.
const BIAS_ALLOWANCE_1E4: f64 = 0.01;

fn specs() -> Vec<FamilySpec> {
    vec![
        FamilySpec::NormalNormal(NormalNormalSpec::new(0.0, 1.0, 1.0, 1).unwrap()),
        FamilySpec::BetaBernoulli(BetaBernoulliSpec::new(2.0, 3.0, 5).unwrap()),
        FamilySpec::GammaPoisson(GammaPoissonSpec::new(3.0, 2.0, 4).unwrap()),
    ]
}

#[test]
fn nested_estimate_within_three_se_plus_bias_allowance() {
    for (i, spec) in specs().iter().enumerate() {
        let exact = spec.conditional_entropy().unwrap();
        let cfg = McConfig::new(400, 10_000, 3, 500 + i as u64).unwrap();
        let est = estimate_family(spec, Estimator::Nested, &cfg).unwrap();
        let gap = (est.value - exact).abs();
        assert!(
            gap <= 3.0 * est.stderr + BIAS_ALLOWANCE_1E4,
            "{}: estimate {} exact {exact} stderr {}",
            spec.name(),
            est.value,
            est.stderr
        );
    }
}

#[test]
fn decomposed_estimate_is_unbiased() {
    for (i, spec) in specs().iter().enumerate() {
        let exact = spec.conditional_entropy().unwrap();
        let cfg = McConfig::new(4000, 400, 3, 700 + i as u64).unwrap();
        let est = estimate_family(spec, Estimator::Decomposed, &cfg).unwrap();
        assert!(
            (est.value - exact).abs() <= 3.0 * est.stderr,
            "{}: estimate {} exact {exact} stderr {}",
            spec.name(),
            est.value,
            est.stderr
        );
    }
}

#[test]
fn stderr_shrinks_when_replicates_quadruple() {
    let spec = FamilySpec::BetaBernoulli(BetaBernoulliSpec::new(2.0, 3.0, 5).unwrap());
    let repetitions = 20;
    let shrunk = (0..repetitions)
        .filter(|r| {
            let small = McConfig::new(100, 400, 3, 10_000 + r).unwrap();
            let large = McConfig::new(400, 400, 3, 20_000 + r).unwrap();
            let s = estimate_family(&spec, Estimator::Nested, &small)
                .unwrap()
                .stderr;
            let l = estimate_family(&spec, Estimator::Nested, &large)
                .unwrap()
                .stderr;
            l <= 0.7 * s
        })
        .count();
    assert!(
        shrunk * 100 >= 95 * repetitions as usize,
        "{shrunk}/{repetitions}"
    );
}

#[test]
fn same_seed_gives_identical_estimates_across_thread_counts() {
    let spec = FamilySpec::GammaPoisson(GammaPoissonSpec::new(2.0, 1.0, 1).unwrap());
    let cfg = McConfig::new(64, 500, 3, 3).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| estimate_family(&spec, Estimator::Nested, &cfg).unwrap())
    };
    assert_eq!(run(1), run(8));
}
