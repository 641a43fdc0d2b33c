use std::f64::consts::PI;
use std::sync::Arc;

use crate::bodies::metrics::{unit_ball_volume, volume};
use crate::bodies::DirectionSet;
use crate::error::Result;
use crate::isotropic::moments;
use crate::transforms::legendre_dual;

use super::inclusion::suite_directions;
use super::report::SuiteReport;
use super::zoo::function_zoo;

/// Multiplicative slack on the volume product inequalities and equality cases.
pub const VOLUME_TOL: f64 = 1e-2;

/// `vol(K) vol(K°) / ω_n²` over the body zoo and `∫f ∫f* / (2π)ⁿ` over the function zoo.
pub fn run_volume_product_suite(dim: usize) -> Result<SuiteReport> {
    run_volume_product_suite_with(dim, VOLUME_TOL)
}

pub fn run_volume_product_suite_with(dim: usize, tol: f64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(format!("volume_products_dim{dim}"));
    report.tolerance("volume", tol).grid("directions", suite_directions(dim));
    let dirs = Arc::new(DirectionSet::with_count(dim, suite_directions(dim))?);
    let omega = unit_ball_volume(dim);
    for (name, k) in super::zoo::body_zoo(dim, &dirs)? {
        let ratio = volume(&k) * volume(&k.polar()?) / (omega * omega);
        report.at_most(&format!("santalo[{name}]"), "vol(K) vol(K°) ≤ ω_n²", ratio, 1.0 + tol)?;
        if name == "ball" {
            report.at_least("santalo_equality[ball]", "vol(B) vol(B°) = ω_n²", ratio, 1.0 - tol)?;
        }
        if name == "cube" && dim == 2 {
            let exact = 8.0 / (PI * PI);
            report.at_most("cube_product", "vol([-1,1]²) vol(B₁²) = 8", (ratio - exact).abs(), tol)?;
        }
    }
    for (name, f) in function_zoo(dim)? {
        let dual = match legendre_dual(&f) {
            Ok(d) => d,
            Err(e) => {
                report.failed(format!("functional_santalo[{name}]"), "∫e^{-φ} ∫e^{-ℒφ} ≤ (2π)ⁿ", &e)?;
                continue;
            }
        };
        let ratio = moments(&f)?.mass * moments(&dual)?.mass / (2.0 * PI).powi(dim as i32);
        report.at_most(&format!("functional_santalo[{name}]"), "∫e^{-φ} ∫e^{-ℒφ} ≤ (2π)ⁿ", ratio, 1.0 + tol)?;
        if name == "gaussian" {
            report.at_least("functional_equality[gaussian]", "∫g ∫g* = (2π)ⁿ", ratio, 1.0 - tol)?;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn products_in_low_dimension() {
        for dim in 1..=2 {
            let r = run_volume_product_suite(dim).unwrap();
            assert!(r.all_pass(), "{:?}", r.failures().collect::<Vec<_>>());
        }
        let r = run_volume_product_suite(2).unwrap();
        assert!(r.cases.iter().any(|c| c.id == "cube_product"));
    }
}
