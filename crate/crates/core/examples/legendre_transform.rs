//! Discrete Legendre transform of `|x|` and `|x|²/2` in one dimension.

use logconcave::transforms::{legendre, legendre_1d_fast, DualGridPair};
use logconcave::{LogConcaveFunction, Result};

fn main() -> Result<()> {
    let f = LogConcaveFunction::from_kind(logconcave::ClosedFormKind::ExpEuclideanNorm, &[1.0], 1)?;
    let primal = f.sampling_grid(401)?;
    let phi = f.sample_potential(&primal)?;
    let pair = DualGridPair::for_potential(&phi, 401)?;
    let fast = legendre_1d_fast(&phi, &pair.dual)?;
    let brute = legendre(&phi, &pair.dual)?;

    // ℒ|x| is the indicator of [-1, 1]
    for y in [-1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5] {
        println!("L|x|({y:+.1}) = {}", fast.value_at(&[y]).get());
    }
    let worst = fast.values().zip(brute.values()).filter(|(a, _)| a.is_finite()).map(|(a, b)| (a.get() - b.get()).abs()).fold(0.0, f64::max);
    println!("fast vs brute: {worst:e}");

    let g = LogConcaveFunction::gaussian(1);
    let grid = g.sampling_grid(401)?;
    let psi = g.sample_potential(&grid)?;
    let dual = DualGridPair::for_potential(&psi, 401)?.dual;
    let l = legendre_1d_fast(&psi, &dual)?;
    println!("gaussian: L(|x|²/2)(1.5) = {:.6} (exact 1.125)", l.value_at(&[1.5]).get());
    Ok(())
}
