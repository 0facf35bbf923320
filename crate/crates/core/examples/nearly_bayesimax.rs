// When r_S has no maximizer, a sequence of ever more diffuse priors climbs
// toward the supremum.

use std::f64::consts::{E, PI};

use bayesimax::conjugate::{FamilySpec, GammaPoissonSpec, NormalNormalSpec};
use bayesimax::optimizer::{conjugate_sequence, Coordinate, EntropyObjective, GeometricPath};

pub fn run_example() -> bayesimax::Result<()> {
    let base = FamilySpec::NormalNormal(NormalNormalSpec::new(0.0, 1.0, 1.0, 1)?);
    let path = GeometricPath {
        start: 1.0,
        ratio: 10.0,
        steps: 6,
    };
    let s = conjugate_sequence(&base, Coordinate::Tau2, &EntropyObjective::Exact, &path)?;
    for p in &s.points {
        println!("tau2 = {:>8}: r = {:.6}", p.param, p.value);
    }
    println!("{:?}; supremum {:.6}", s.shape, 0.5 * (2.0 * PI * E).ln());

    let base = FamilySpec::GammaPoisson(GammaPoissonSpec::new(1.0, 1.0, 3)?);
    let path = GeometricPath {
        start: 1.0,
        ratio: 2.0,
        steps: 8,
    };
    let s = conjugate_sequence(&base, Coordinate::Alpha, &EntropyObjective::Exact, &path)?;
    let values: Vec<String> = s.points.iter().map(|p| format!("{:.3}", p.value)).collect();
    println!(
        "gamma_poisson alpha = 2^i: {} ({:?})",
        values.join(", "),
        s.shape
    );
    Ok(())
}

fn main() -> bayesimax::Result<()> {
    run_example()
}
