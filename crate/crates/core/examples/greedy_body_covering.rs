//! Certified bracket for the covering number of a square by a smaller disc.

use std::sync::Arc;

use logconcave::bodies::{DirectionSet, PBall, RadialBody};
use logconcave::covering::covering_number_bodies;
use logconcave::Result;

fn main() -> Result<()> {
    let dirs = Arc::new(DirectionSet::default_for(2)?);
    let square = RadialBody::sample(dirs.clone(), &PBall::cube(2, 1.0))?;
    for r in [1.5, 1.0, 0.5] {
        let disc = RadialBody::sample(dirs.clone(), &PBall::euclidean(2).scaled(r))?;
        let c = covering_number_bodies(&square, &disc)?;
        println!("disc radius {r}: {} ≤ N ≤ {} ({})", c.lower, c.upper, c.method);
    }
    Ok(())
}
