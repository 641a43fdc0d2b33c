//! `t ↦ ln N` against dilates of the Gaussian for the isotropic cube indicator.

use logconcave::harness::profile::{ProfileConfig, DEFAULT_T};
use logconcave::harness::regularity_profile;
use logconcave::harness::zoo::member;
use logconcave::Result;

fn main() -> Result<()> {
    let f = member("indicator_cube", 1).expect("zoo member")?;
    let p = regularity_profile("indicator_cube", &f, &DEFAULT_T, &ProfileConfig::default())?;
    print!("{:>6}", "t");
    for c in &p.columns {
        print!(" {:>12}", c.name);
    }
    println!();
    for (k, t) in p.t_values.iter().enumerate() {
        print!("{t:>6}");
        for c in &p.columns {
            print!(" {:>12.6}", c.ln_cover[k]);
        }
        println!();
    }
    for c in &p.columns {
        println!("kappa_hat[{}] = {:.6}", c.name, c.kappa_hat);
    }
    Ok(())
}
