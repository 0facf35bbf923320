// Exact conditional entropies of the three conjugate families and how they
// shrink as data accumulate.

use bayesimax::conjugate::{BetaBernoulliSpec, FamilySpec, GammaPoissonSpec, NormalNormalSpec};

pub fn run_example() -> bayesimax::Result<()> {
    println!(
        "{:>4} {:>14} {:>14} {:>14}",
        "n", "normal_normal", "beta_bernoulli", "gamma_poisson"
    );
    for n in [0, 1, 2, 5, 10, 50] {
        let specs = [
            FamilySpec::NormalNormal(NormalNormalSpec::new(0.0, 1.0, 1.0, n)?),
            FamilySpec::BetaBernoulli(BetaBernoulliSpec::new(2.0, 3.0, n)?),
            FamilySpec::GammaPoisson(GammaPoissonSpec::new(3.0, 2.0, n)?),
        ];
        let r: Vec<f64> = specs
            .iter()
            .map(|s| s.conditional_entropy())
            .collect::<bayesimax::Result<_>>()?;
        println!("{n:>4} {:>14.6} {:>14.6} {:>14.6}", r[0], r[1], r[2]);
    }
    Ok(())
}

fn main() -> bayesimax::Result<()> {
    run_example()
}
