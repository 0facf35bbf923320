// The three strictly proper scores, their entropies and divergences, and a
// check that honest reporting beats every perturbation.

use bayesimax::scores::{divergence, entropy, expected_score};
use bayesimax::{DiscreteDist, ScoreKind};

pub fn run_example() -> bayesimax::Result<()> {
    let p = DiscreteDist::new(vec![0.5, 0.3, 0.2])?;
    let q = DiscreteDist::new(vec![0.4, 0.4, 0.2])?;
    for kind in ScoreKind::ALL {
        let honest = expected_score(kind, &p, &p)?;
        let shaded = expected_score(kind, &p, &q)?;
        println!(
            "{kind:?}: H(p) = {:.6}, E_p S(p) = {honest:.6}, E_p S(q) = {shaded:.6}, D(p, q) = {:.6}",
            entropy(kind, &p),
            divergence(kind, &p, &q)?
        );
        assert!(honest > shaded);
    }
    Ok(())
}

fn main() -> bayesimax::Result<()> {
    run_example()
}
