use crate::covering::decomposition_checks;
use crate::error::Result;
use crate::functions::LogConcaveFunction;

use super::report::SuiteReport;
use super::zoo::function_zoo;

const LEVEL_TAIL: &str = "f ≤ 1_{R_f} + exp(-50n‖x‖_{R_f})";
const LAYERS: &str = "exp(-50n‖x‖_{R_f}) ≤ Σ_{k≤200} e^{-k} 1_{((k+1)/50n) R_f}";
const ANNULI: &str = "e^{-|x|²/2} ≤ Σ_k e^{-a²k²r²/2} 1_{a(k+1) r B₂ⁿ}";

/// Zero violations of the three pointwise decompositions of a geometric `f` at every lattice node.
pub fn decomposition_cases(report: &mut SuiteReport, name: &str, f: &LogConcaveFunction) -> Result<()> {
    let d = match decomposition_checks(f) {
        Ok(d) => d,
        Err(e) => {
            for (part, anchor) in [("level_tail", LEVEL_TAIL), ("layers", LAYERS), ("annuli", ANNULI)] {
                report.failed(format!("{part}[{name}]"), anchor, &e)?;
            }
            return Ok(());
        }
    };
    for (part, anchor, check) in [
        ("level_tail", LEVEL_TAIL, &d.level_tail),
        ("layers", LAYERS, &d.exponential_layers),
        ("annuli", ANNULI, &d.gaussian_annuli),
    ] {
        let id = format!("{part}[{name}]");
        report.at_most(&id, anchor, check.violations as f64, 0.0)?;
        report.record(format!("{id}.nodes"), anchor, check.nodes as f64)?;
        report.record(format!("{id}.worst_margin"), anchor, check.worst_margin)?;
    }
    Ok(())
}

pub fn run_decomposition_suite(dim: usize) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(format!("decompositions_dim{dim}"));
    for (name, f) in function_zoo(dim)? {
        decomposition_cases(&mut report, &name, &f)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_violations_in_dim_one() {
        let r = run_decomposition_suite(1).unwrap();
        assert!(r.all_pass(), "{:?}", r.failures().collect::<Vec<_>>());
        assert_eq!(r.cases.len(), 6 * 9);
    }
}
