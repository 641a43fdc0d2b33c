//! Santaló ratios `vol(K) vol(K°) / ω_n²` and their functional analogue.

use std::sync::Arc;

use logconcave::bodies::{unit_ball_volume, volume, DirectionSet, PBall, RadialBody};
use logconcave::isotropic::moments;
use logconcave::transforms::legendre_dual;
use logconcave::{ClosedFormKind, LogConcaveFunction, Result};

fn main() -> Result<()> {
    let dirs = Arc::new(DirectionSet::default_for(2)?);
    let w2 = unit_ball_volume(2).powi(2);
    for (name, body) in [("ball", PBall::euclidean(2)), ("square", PBall::cube(2, 1.0)), ("l4", PBall::new(2, 4.0, 1.0))] {
        let k = RadialBody::sample(dirs.clone(), &body)?;
        println!("{name:>7}: {:.5}", volume(&k) * volume(&k.polar()?) / w2);
    }
    println!("square exact 8/π² = {:.5}", 8.0 / std::f64::consts::PI.powi(2));

    for kind in [ClosedFormKind::Gaussian, ClosedFormKind::ExpEuclideanNorm, ClosedFormKind::IndicatorCube] {
        let f = LogConcaveFunction::closed_form(logconcave::ClosedFormSpec::default_of(kind), 2)?;
        let ratio = moments(&f)?.mass * moments(&legendre_dual(&f)?)?.mass / (2.0 * std::f64::consts::PI).powi(2);
        println!("{:>20}: {ratio:.5}", kind.name());
    }
    Ok(())
}
