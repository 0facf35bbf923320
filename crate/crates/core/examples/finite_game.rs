// A binary symmetric channel as a prior disclosure game: decomposition of
// r_S, truth-telling, the Bayesimax prior and its least-favorable check.

use bayesimax::game::DiscreteGame;
use bayesimax::{DiscreteDist, ScoreKind};

pub fn run_example() -> bayesimax::Result<()> {
    let game = DiscreteGame::symmetric_channel(0.2, ScoreKind::Logarithmic)?;
    let prior = DiscreteDist::new(vec![0.7, 0.3])?;

    let d = game.decomposition(&prior)?;
    println!(
        "r = {:.6} = H {:.6} - I {:.6}",
        d.min_bayes_risk, d.prior_entropy, d.information
    );

    let report = game.verify_truth_telling(&prior, 1000, 42)?;
    println!(
        "truth-telling: {} violations in {} trials, min margin {:?}",
        report.violations.len(),
        report.trials,
        report.min_margin
    );

    let best = game.find_bayesimax(20, 2000)?;
    let lf = game.check_least_favorable(&DiscreteDist::normalized(best.argmax.clone())?, 1e-6)?;
    println!(
        "Bayesimax prior {:?} with r = {:.6}; least favorable: {}",
        best.argmax, best.value, lf.pass
    );
    print!("{}", lf.profile.to_csv());
    Ok(())
}

fn main() -> bayesimax::Result<()> {
    run_example()
}
