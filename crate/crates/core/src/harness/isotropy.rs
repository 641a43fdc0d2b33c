use nalgebra::DMatrix;

use crate::error::Result;
use crate::isotropic::{isotropic_constant, isotropize, moments};

use super::report::SuiteReport;
use super::zoo::raw_zoo;

/// Tolerance on the output identities of isotropization.
pub const ISOTROPY_TOL: f64 = 1e-4;

const GAUSSIAN_PROBES: [f64; 6] = [0.0, 0.1, 0.25, 0.5, 0.8, 1.2];

/// Output identities of isotropization for every raw zoo member, the Gaussian image, and the cube constant.
pub fn run_isotropization_suite(dim: usize) -> Result<SuiteReport> {
    run_isotropization_suite_with(dim, ISOTROPY_TOL)
}

pub fn run_isotropization_suite_with(dim: usize, tol: f64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(format!("isotropization_dim{dim}"));
    report.tolerance("isotropy", tol);
    for (name, f) in raw_zoo(dim)? {
        let (g, record) = match isotropize(&f) {
            Ok(out) => out,
            Err(e) => {
                report.failed(format!("isotropize[{name}]"), "f̃ isotropic", &e)?;
                continue;
            }
        };
        let sup_probe = g.sampling_grid(41)?.nodes().map(|x| g.value(&x)).fold(g.value(&vec![0.0; dim]), f64::max);
        report.at_most(&format!("sup_norm[{name}]"), "‖f̃‖_∞ = 1", (sup_probe - 1.0).abs(), tol)?;
        let m = moments(&g)?;
        report.at_most(&format!("mass[{name}]"), "∫f̃ = 1", (m.mass - 1.0).abs(), tol)?;
        report.at_most(&format!("barycenter[{name}]"), "∫x f̃ = 0", m.barycenter.norm(), tol)?;
        let l2 = record.isotropic_constant.powi(2);
        let off = (&m.covariance - DMatrix::identity(dim, dim) * l2).abs().max();
        report.at_most(&format!("covariance[{name}]"), "Cov(f̃) = L_f² I", off, tol)?;
        report.record(&format!("isotropic_constant[{name}]"), "L_f", record.isotropic_constant)?;
        if name == "gaussian" {
            let mut err = 0.0f64;
            for r in GAUSSIAN_PROBES {
                let mut x = vec![0.0; dim];
                x[0] = r;
                if dim > 1 {
                    x[dim - 1] -= r / 2.0;
                }
                let norm2: f64 = x.iter().map(|v| v * v).sum();
                err = err.max((g.value(&x) - (-std::f64::consts::PI * norm2).exp()).abs());
            }
            report.at_most("gaussian_image", "e^{-|x|²/2} ↦ e^{-π|x|²}", err, tol)?;
        }
        if name == "indicator_cube" {
            let l = isotropic_constant(&g)?;
            report.at_most("cube_constant", "L_{[-1/2,1/2]ⁿ} = 12^{-1/2}", (l - 12f64.powf(-0.5)).abs(), tol)?;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zoo_identities_hold() {
        for dim in 1..=3 {
            let r = run_isotropization_suite(dim).unwrap();
            assert!(r.all_pass(), "{:?}", r.failures().collect::<Vec<_>>());
            assert!(r.cases.iter().any(|c| c.id == "cube_constant"));
        }
    }
}
