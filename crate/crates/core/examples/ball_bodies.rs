//! Ball bodies `K_t(f)` with radial function `(t ∫₀^∞ f(rθ) r^{t-1} dr / f(0))^{1/t}`.

use std::sync::Arc;

use logconcave::bodies::{ball_body, inclusion_factor, level_set_body, volume, DirectionSet};
use logconcave::{ClosedFormKind, LogConcaveFunction, Result};

fn main() -> Result<()> {
    let f = LogConcaveFunction::from_kind(ClosedFormKind::ExpPNorm, &[1.0, 1.0], 2)?;
    let dirs = Arc::new(DirectionSet::default_for(2)?);
    for t in [1.0, 2.0, 3.0] {
        let k = ball_body(&f, t, &dirs)?;
        let r = level_set_body(&f, t, &dirs)?;
        println!(
            "t = {t}: vol K_t = {:.5}, vol R_t = {:.5}, R_t ⊆ λ e K_t with λ = {:.4}",
            volume(&k),
            volume(&r),
            inclusion_factor(&r, &k.scaled(std::f64::consts::E))?
        );
    }
    Ok(())
}
