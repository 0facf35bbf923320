// Large-sample approximation through the Fisher information, against the
// exact Beta–Bernoulli and Normal–Normal values.

use bayesimax::asymptotics::{
    asymptotic_conditional_entropy, FisherModel, PriorSpec, DEFAULT_QUAD_POINTS,
};
use bayesimax::conjugate::{BetaBernoulliSpec, FamilySpec, NormalNormalSpec};

pub fn run_example() -> bayesimax::Result<()> {
    let prior = PriorSpec::Beta {
        alpha: 2.0,
        beta: 2.0,
    };
    println!(
        "{:>4} {:>10} {:>10} {:>10}",
        "n", "exact", "asymptotic", "gap"
    );
    for n in [10u64, 20, 40, 80, 160] {
        let exact = FamilySpec::BetaBernoulli(BetaBernoulliSpec::new(2.0, 2.0, n)?)
            .conditional_entropy()?;
        let approx = asymptotic_conditional_entropy(
            &prior,
            &FisherModel::Bernoulli,
            n,
            DEFAULT_QUAD_POINTS,
        )?;
        println!(
            "{n:>4} {exact:>10.6} {:>10.6} {:>10.2e}",
            approx.value,
            exact - approx.value
        );
    }

    let nn = NormalNormalSpec::new(0.0, 10.0, 1.0, 100)?;
    let exact = FamilySpec::NormalNormal(nn).conditional_entropy()?;
    let approx = asymptotic_conditional_entropy(
        &PriorSpec::Normal {
            mu: 0.0,
            tau2: 10.0,
        },
        &FisherModel::NormalKnownVar { sigma2: 1.0 },
        100,
        DEFAULT_QUAD_POINTS,
    )?;
    println!(
        "normal_normal n = 100, tau2 = 10: gap {:.3e}",
        exact - approx.value
    );
    Ok(())
}

fn main() -> bayesimax::Result<()> {
    run_example()
}
