#![allow(dead_code)]

use bayesimax::game::DiscreteGame;
use bayesimax::rng::StreamRng;
use bayesimax::{DiscreteDist, ScoreKind};
use rand::Rng;
use rand_distr::{Distribution, Exp1};

/// A point drawn uniformly from the probability simplex.
pub fn dirichlet_one(rng: &mut StreamRng, m: usize) -> DiscreteDist {
    let raw: Vec<f64> = (0..m).map(|_| Exp1.sample(rng)).collect();
    DiscreteDist::normalized(raw).expect("positive draws")
}

/// A random game with 2..=5 parameters and outcomes and strictly positive
/// likelihood rows.
pub fn random_game(rng: &mut StreamRng, score: ScoreKind) -> DiscreteGame {
    let k = rng.random_range(2..=5);
    let m = rng.random_range(2..=5);
    let rows = (0..k)
        .map(|_| dirichlet_one(rng, m).weights().to_vec())
        .collect();
    DiscreteGame::from_matrix(rows, score).expect("valid game")
}

/// The fixed set of 20 games used by the acceptance checks.
pub fn game_suite(score: ScoreKind) -> Vec<DiscreteGame> {
    let mut rng = bayesimax::rng::seeded(2024);
    (0..20).map(|_| random_game(&mut rng, score)).collect()
}
