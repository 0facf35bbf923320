mod common;

use bayesimax::conjugate::{
    bb_conditional_entropy, gp_conditional_entropy, nn_conditional_entropy, BetaBernoulliSpec,
    GammaPoissonSpec, NormalNormalSpec,
};
use bayesimax::game::{DiscreteGame, Rule};
use bayesimax::mcent::{knn_entropy, EntropyEstimate, McConfig};
use bayesimax::scores::{divergence, entropy, expected_score};
use bayesimax::{DiscreteDist, ScoreKind};
use proptest::prelude::*;

fn dist(m: usize) -> impl Strategy<Value = DiscreteDist> {
    prop::collection::vec(0.01f64..1.0, m).prop_map(|w| DiscreteDist::normalized(w).unwrap())
}

fn dist_pair() -> impl Strategy<Value = (DiscreteDist, DiscreteDist)> {
    (2usize..=6).prop_flat_map(|m| (dist(m), dist(m)))
}

fn score_kind() -> impl Strategy<Value = ScoreKind> {
    prop::sample::select(ScoreKind::ALL.to_vec())
}

/// Game with full-support rows plus a prior of matching size.
fn game_and_prior() -> impl Strategy<Value = (DiscreteGame, DiscreteDist)> {
    (2usize..=5, 2usize..=5, score_kind()).prop_flat_map(|(k, m, s)| {
        (prop::collection::vec(dist(m), k), dist(k)).prop_map(move |(rows, prior)| {
            let rows = rows.iter().map(|r| r.weights().to_vec()).collect();
            (DiscreteGame::from_matrix(rows, s).unwrap(), prior)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn score_decomposes_into_entropy_plus_divergence(kind in score_kind(), (p, q) in dist_pair()) {
        let lhs = -expected_score(kind, &p, &q).unwrap();
        let rhs = entropy(kind, &p) + divergence(kind, &p, &q).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()), "{lhs} vs {rhs}");
    }

    #[test]
    fn divergence_is_nonnegative_and_zero_only_at_p(kind in score_kind(), (p, q) in dist_pair()) {
        let d = divergence(kind, &p, &q).unwrap();
        prop_assert!(d >= -1e-15);
        prop_assert!(divergence(kind, &p, &p).unwrap().abs() <= 1e-15);
        if p.sup_distance(&q) > 1e-6 {
            prop_assert!(d > 0.0, "divergence {d} at distinct p, q");
        }
    }

    #[test]
    fn truthful_report_beats_any_other(kind in score_kind(), (p, q) in dist_pair()) {
        let honest = expected_score(kind, &p, &p).unwrap();
        let other = expected_score(kind, &p, &q).unwrap();
        prop_assert!(honest >= other - 1e-12);
    }

    #[test]
    fn bayes_rule_minimizes_bayes_risk(
        (game, prior) in game_and_prior(),
        seeds in prop::collection::vec(0.01f64..1.0, 30),
    ) {
        let m = game.num_outcomes();
        let k = game.num_params();
        let reports = (0..m)
            .map(|x| DiscreteDist::normalized((0..k).map(|t| seeds[(x * k + t) % seeds.len()] + 0.01 * t as f64).collect()).unwrap())
            .collect();
        let rule = Rule { reports };
        let best = game.min_bayes_risk(&prior).unwrap();
        prop_assert!(best <= game.bayes_risk(&rule, &prior).unwrap() + 1e-12);
    }

    #[test]
    fn risk_equals_prior_entropy_minus_information((game, prior) in game_and_prior()) {
        let d = game.decomposition(&prior).unwrap();
        prop_assert!((d.prior_entropy - d.information - d.min_bayes_risk).abs() <= 1e-12);
        prop_assert!(d.information >= -1e-12);
        prop_assert!((d.prior_entropy - entropy(game.score(), &prior)).abs() <= 1e-12);
    }

    #[test]
    fn posteriors_are_normalized((game, prior) in game_and_prior()) {
        for x in 0..game.num_outcomes() {
            let post = game.posterior(&prior, x).unwrap();
            let total: f64 = post.weights().iter().sum();
            prop_assert!((total - 1.0).abs() <= 1e-12);
            prop_assert!(post.weights().iter().all(|w| *w >= 0.0));
        }
        let marginal = game.marginal(&prior).unwrap();
        prop_assert!((marginal.weights().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn merging_outcomes_cannot_lower_risk((game, prior) in game_and_prior()) {
        prop_assume!(game.num_outcomes() >= 3);
        let merged: Vec<Vec<f64>> = game
            .likelihood()
            .iter()
            .map(|row| {
                let mut r = row[..row.len() - 1].to_vec();
                *r.last_mut().unwrap() += row[row.len() - 1];
                r
            })
            .collect();
        let coarse = DiscreteGame::from_matrix(merged, game.score()).unwrap();
        let fine_risk = game.min_bayes_risk(&prior).unwrap();
        let coarse_risk = coarse.min_bayes_risk(&prior).unwrap();
        prop_assert!(coarse_risk >= fine_risk - 1e-12, "{coarse_risk} < {fine_risk}");
    }

    #[test]
    fn splitting_an_outcome_in_proportion_changes_nothing((game, prior) in game_and_prior()) {
        let split: Vec<Vec<f64>> = game
            .likelihood()
            .iter()
            .map(|row| {
                let mut r = row.clone();
                let last = r.pop().unwrap();
                r.push(0.3 * last);
                r.push(0.7 * last);
                r
            })
            .collect();
        let g2 = DiscreteGame::from_matrix(split, game.score()).unwrap();
        let a = game.min_bayes_risk(&prior).unwrap();
        let b = g2.min_bayes_risk(&prior).unwrap();
        prop_assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
    }

    #[test]
    fn knn_entropy_is_translation_invariant(
        pts in prop::collection::vec(-10.0f64..10.0, 20..200),
        shift in -5.0f64..5.0,
    ) {
        let base = knn_entropy(&pts, 1, 3);
        prop_assume!(base.is_ok());
        let moved: Vec<f64> = pts.iter().map(|v| v + shift).collect();
        let moved_h = knn_entropy(&moved, 1, 3).unwrap();
        prop_assert!((base.unwrap() - moved_h).abs() <= 1e-6);
    }

    #[test]
    fn estimate_reports_mean_and_standard_error(per_rep in prop::collection::vec(-5.0f64..5.0, 2..100)) {
        let n = per_rep.len() as f64;
        let cfg = McConfig::new(per_rep.len(), 10, 3, 0).unwrap();
        let est = EntropyEstimate::from_replicates(per_rep.clone(), cfg);
        let mean = per_rep.iter().sum::<f64>() / n;
        let var = per_rep.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        prop_assert!((est.value - mean).abs() <= 1e-12);
        prop_assert!((est.stderr - (var / n).sqrt()).abs() <= 1e-12);
        prop_assert_eq!(est.per_rep, per_rep);
    }

    #[test]
    fn normal_normal_risk_falls_with_n(tau2 in 0.01f64..100.0, sigma2 in 0.01f64..100.0, n in 0u64..200) {
        let a = nn_conditional_entropy(&NormalNormalSpec::new(0.0, tau2, sigma2, n).unwrap());
        let b = nn_conditional_entropy(&NormalNormalSpec::new(0.0, tau2, sigma2, n + 1).unwrap());
        prop_assert!(b <= a + 1e-12);
    }

    #[test]
    fn beta_bernoulli_risk_falls_with_n(alpha in 0.2f64..20.0, beta in 0.2f64..20.0, n in 0u64..40) {
        let a = bb_conditional_entropy(&BetaBernoulliSpec::new(alpha, beta, n).unwrap()).unwrap();
        let b = bb_conditional_entropy(&BetaBernoulliSpec::new(alpha, beta, n + 1).unwrap()).unwrap();
        prop_assert!(b <= a + 1e-10, "{b} > {a}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gamma_poisson_risk_falls_with_n(alpha in 0.5f64..10.0, beta in 0.2f64..5.0, n in 0u64..10) {
        let a = gp_conditional_entropy(&GammaPoissonSpec::new(alpha, beta, n).unwrap(), 1e-12).unwrap();
        let b = gp_conditional_entropy(&GammaPoissonSpec::new(alpha, beta, n + 1).unwrap(), 1e-12).unwrap();
        prop_assert!(b <= a + 1e-9, "{b} > {a}");
    }
}

#[test]
fn suite_games_satisfy_decomposition_under_every_score() {
    for kind in ScoreKind::ALL {
        for game in common::game_suite(kind) {
            let prior = DiscreteDist::uniform(game.num_params()).unwrap();
            let d = game.decomposition(&prior).unwrap();
            assert!((d.prior_entropy - d.information - d.min_bayes_risk).abs() <= 1e-12);
        }
    }
}
