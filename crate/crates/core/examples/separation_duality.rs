//! Covering and separation are LP duals: `M(f, ḡ) = N(f, g)`.

use logconcave::covering::{functional_covering, functional_separation, CoverConfig};
use logconcave::harness::zoo::function_zoo;
use logconcave::Result;

fn main() -> Result<()> {
    let zoo = function_zoo(1)?;
    let cfg = CoverConfig::default();
    let g = &zoo[0].1;
    println!("{:>20} {:>12} {:>12} {:>10}", "f", "N(f,g)", "M(f,ḡ)", "gap");
    for (name, f) in &zoo {
        let n = functional_covering(f, g, &cfg)?;
        let m = functional_separation(f, &g.reflect(), &cfg)?;
        println!("{name:>20} {:>12.8} {:>12.8} {:>10.1e}", n.primal_value, m.dual_value, n.gap);
    }
    Ok(())
}
