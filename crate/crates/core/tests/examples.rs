macro_rules! example {
    ($name:ident, $file:literal) => {
        #[allow(dead_code)]
        mod $name {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", $file));
        }
    };
}

example!(scoring_rules, "scoring_rules.rs");
example!(finite_game, "finite_game.rs");
example!(conjugate_entropy, "conjugate_entropy.rs");
example!(nested_monte_carlo, "nested_monte_carlo.rs");
example!(asymptotics, "asymptotics.rs");
example!(optimize_hyperparameters, "optimize_hyperparameters.rs");
example!(nearly_bayesimax, "nearly_bayesimax.rs");

#[test]
fn scoring_rules_runs() {
    scoring_rules::run_example().unwrap();
}

#[test]
fn finite_game_runs() {
    finite_game::run_example().unwrap();
}

#[test]
fn conjugate_entropy_runs() {
    conjugate_entropy::run_example().unwrap();
}

#[test]
fn nested_monte_carlo_runs() {
    nested_monte_carlo::run_with(40).unwrap();
}

#[test]
fn asymptotics_runs() {
    asymptotics::run_example().unwrap();
}

#[test]
fn optimize_hyperparameters_runs() {
    optimize_hyperparameters::run_example().unwrap();
}

#[test]
fn nearly_bayesimax_runs() {
    nearly_bayesimax::run_example().unwrap();
}
