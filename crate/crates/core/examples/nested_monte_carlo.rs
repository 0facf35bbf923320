// Nested Monte Carlo with a k-nearest-neighbor entropy estimate, compared
// with the exact value. Pass a replicate count to change the budget.

use bayesimax::conjugate::{BetaBernoulliSpec, FamilySpec};
use bayesimax::mcent::{estimate_family, Estimator, McConfig};

const DEFAULT_REPS: usize = 200;

pub fn run_example() -> bayesimax::Result<()> {
    run_with(DEFAULT_REPS)
}

pub fn run_with(reps: usize) -> bayesimax::Result<()> {
    let spec = FamilySpec::BetaBernoulli(BetaBernoulliSpec::new(2.0, 3.0, 5)?);
    let exact = spec.conditional_entropy()?;
    let cfg = McConfig::new(reps, 1000, 3, 42)?;
    for estimator in [Estimator::Nested, Estimator::Decomposed] {
        let e = estimate_family(&spec, estimator, &cfg)?;
        println!(
            "{estimator:?}: {:.5} ± {:.5} (exact {exact:.5}, z = {:.2})",
            e.value,
            e.stderr,
            (e.value - exact) / e.stderr
        );
    }
    Ok(())
}

fn main() -> bayesimax::Result<()> {
    let reps = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(DEFAULT_REPS);
    run_with(reps)
}
