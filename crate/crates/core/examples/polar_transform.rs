//! The polarity transform `𝒜φ(y) = sup_x (⟨x, y⟩ - 1) / φ(x)` and its closed form on norms.

use logconcave::transforms::{polar_dual, polar_transform};
use logconcave::{ClosedFormKind, GridSpec, LogConcaveFunction, Result};

fn main() -> Result<()> {
    let f = LogConcaveFunction::from_kind(ClosedFormKind::Gaussian, &[1.0], 1)?;
    let grid = GridSpec::symmetric(1, 2001, 20.0)?;
    let sampled = polar_transform(&f.sample_potential(&grid)?, &grid)?;
    let exact = polar_dual(&f)?;
    println!("{:>6} {:>12} {:>12}", "y", "sampled", "exact");
    for y in [0.5, 1.0, 2.0, 4.0] {
        println!("{y:>6} {:>12.6} {:>12.6}", sampled.value_at(&[y]).get(), exact.potential(&[y]));
    }

    // |x| is its own polar up to the zero set at the origin
    let norm = LogConcaveFunction::from_kind(ClosedFormKind::ExpEuclideanNorm, &[1.0], 2)?;
    let p = polar_dual(&norm)?;
    println!("A|x|([0.6, 0.8]) = {}", p.potential(&[0.6, 0.8]));
    Ok(())
}
