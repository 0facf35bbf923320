// Bayesimax search over conjugate hyperparameter boxes. The Beta–Bernoulli
// optimum sits on the diagonal; Normal–Normal runs to the edge of the box.

use bayesimax::conjugate::{BetaBernoulliSpec, FamilySpec, NormalNormalSpec};
use bayesimax::optimizer::{
    maximize_conditional_entropy, BayesimaxTarget, ConjugateTarget, Coordinate, MethodConfig,
    SearchBox,
};

pub fn run_example() -> bayesimax::Result<()> {
    let method = MethodConfig::default();
    for n in [1u64, 2, 4, 8, 16] {
        let target = ConjugateTarget::new(
            FamilySpec::BetaBernoulli(BetaBernoulliSpec::new(1.0, 1.0, n)?),
            vec![Coordinate::Alpha, Coordinate::Beta],
            SearchBox::cube(2, 0.2, 20.0)?,
        )?;
        let r = maximize_conditional_entropy(&BayesimaxTarget::Conjugate(target), &method)?;
        println!(
            "beta_bernoulli n = {n:>2}: alpha = {:.4}, beta = {:.4}, r = {:.6} ({:?})",
            r.argmax[0], r.argmax[1], r.value, r.status
        );
    }

    let target = ConjugateTarget::new(
        FamilySpec::NormalNormal(NormalNormalSpec::new(0.0, 1.0, 1.0, 1)?),
        vec![Coordinate::Tau2],
        SearchBox::new(vec![0.1], vec![100.0])?,
    )?;
    let r = maximize_conditional_entropy(&BayesimaxTarget::Conjugate(target), &method)?;
    println!(
        "normal_normal: tau2 = {:.4}, r = {:.6} ({:?})",
        r.argmax[0], r.value, r.status
    );
    Ok(())
}

fn main() -> bayesimax::Result<()> {
    run_example()
}
