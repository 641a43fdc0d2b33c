use logconcave::isotropic::{isotropic_constant, isotropize, moments};
use logconcave::{ClosedFormKind, LogConcaveFunction, Result};

fn main() -> Result<()> {
    for (label, f) in [
        ("cube", LogConcaveFunction::from_kind(ClosedFormKind::IndicatorCube, &[3.0], 2)?),
        ("gaussian", LogConcaveFunction::from_kind(ClosedFormKind::Gaussian, &[0.4], 2)?.shift(&[1.0, -2.0])?),
        ("l1", LogConcaveFunction::from_kind(ClosedFormKind::ExpPNorm, &[1.0, 2.0], 2)?),
    ] {
        let (g, record) = isotropize(&f)?;
        let m = moments(&g)?;
        println!(
            "{label:>8}: L_f = {:.6}, mass {:.6}, sup {:.6}, cov diag ({:.6}, {:.6}), L after = {:.6}",
            record.isotropic_constant,
            m.mass,
            g.sup_norm(),
            m.covariance[(0, 0)],
            m.covariance[(1, 1)],
            isotropic_constant(&g)?
        );
    }
    println!("cube constant 1/√12 = {:.6}", 12f64.sqrt().recip());
    Ok(())
}
