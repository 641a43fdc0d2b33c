//! Level-set bodies `R_t(f) = {x : f(x) ≥ e^{-t} ‖f‖_∞}` of an isotropic Gaussian.

use std::sync::Arc;

use logconcave::bodies::{level_set_body, volume, volume_radius, DirectionSet};
use logconcave::harness::zoo::member;
use logconcave::Result;

fn main() -> Result<()> {
    let f = member("gaussian", 2).expect("zoo member")?;
    let dirs = Arc::new(DirectionSet::default_for(2)?);
    for t in [1.0, 4.0, 16.0, 100.0] {
        let r = level_set_body(&f, t, &dirs)?;
        // f = e^{-π|x|²}: R_t is the disc of radius √(t/π)
        println!("t = {t:>5}: volume {:.6}, volume radius {:.6}, exact radius {:.6}", volume(&r), volume_radius(&r), (t / std::f64::consts::PI).sqrt());
    }
    Ok(())
}
