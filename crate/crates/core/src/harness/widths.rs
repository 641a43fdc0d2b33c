use crate::bodies::metrics::mean_width_functionals;
use crate::bodies::PBall;
use crate::error::Result;

use super::report::SuiteReport;

pub const WIDTH_SAMPLES: usize = 100_000;
/// Allowed deviation in standard errors.
pub const WIDTH_SIGMAS: f64 = 3.0;
/// Floor on the allowed deviation, for estimators whose samples are all equal.
const ROUNDING: f64 = 1e-12;

/// Monte Carlo `M` and `M*` of the Euclidean ball in dims 1–3 and `M*` of the cube `[-1,1]³`.
pub fn run_mean_width_suite(seed: u64) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("mean_widths");
    report.environment.seed = seed;
    report.grid("samples", WIDTH_SAMPLES).tolerance("sigmas", WIDTH_SIGMAS);
    for dim in 1..=3 {
        let w = mean_width_functionals(&PBall::euclidean(dim), WIDTH_SAMPLES, seed)?;
        let allowed = |s: f64| WIDTH_SIGMAS * s + ROUNDING;
        report.at_most(&format!("ball_m[dim{dim}]"), "M(B₂ⁿ) = 1", (w.m - 1.0).abs(), allowed(w.stderr_m))?;
        report.at_most(&format!("ball_m_star[dim{dim}]"), "M*(B₂ⁿ) = 1", (w.m_star - 1.0).abs(), allowed(w.stderr_m_star))?;
    }
    let w = mean_width_functionals(&PBall::cube(3, 1.0), WIDTH_SAMPLES, seed)?;
    report.at_most("cube_m_star[dim3]", "M*([-1,1]³) = E‖θ‖₁ = 3/2", (w.m_star - 1.5).abs(), WIDTH_SIGMAS * w.stderr_m_star)?;
    report.record("cube_m_star.value", "M*([-1,1]³) = E‖θ‖₁ = 3/2", w.m_star)?;
    report.record("cube_m_star.stderr", "M*([-1,1]³) = E‖θ‖₁ = 3/2", w.stderr_m_star)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn widths_match_exact_values() {
        let r = run_mean_width_suite(7).unwrap();
        assert!(r.all_pass(), "{:?}", r.failures().collect::<Vec<_>>());
        assert_eq!(r, run_mean_width_suite(7).unwrap());
    }
}
