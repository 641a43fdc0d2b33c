//! Covering numbers `N(f, g)`: the least total mass of `μ` with `μ ∗ g ≥ f`.

use logconcave::covering::{functional_covering, CoverConfig};
use logconcave::{ClosedFormKind, LogConcaveFunction, Result};

fn main() -> Result<()> {
    let f = LogConcaveFunction::from_kind(ClosedFormKind::IndicatorCube, &[1.0], 1)?.shift(&[1.0])?;
    let g = LogConcaveFunction::from_kind(ClosedFormKind::IndicatorCube, &[0.5], 1)?;
    let cfg = CoverConfig { spacing: Some(0.01), ..CoverConfig::default() };
    let c = functional_covering(&f, &g, &cfg)?;
    println!("N(1_[0,2], 1_[-1/2,1/2]) = {:.6} (gap {:e})", c.primal_value, c.gap);
    for a in c.primal_measure.atoms.iter().filter(|a| a.weight > 1e-9) {
        println!("  atom at {:+.3} weight {:.4}", a.location[0], a.weight);
    }

    let gauss = LogConcaveFunction::gaussian(1);
    for t in [1.0, 2.0, 4.0] {
        let c = functional_covering(&f, &gauss.dilate(t)?, &CoverConfig::default())?;
        println!("N(1_[0,2], {t}⊙g) = {:.6}", c.primal_value);
    }
    Ok(())
}
