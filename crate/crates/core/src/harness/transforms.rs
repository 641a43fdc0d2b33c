use crate::error::Result;
use crate::functions::{GridPotential, GridSpec, LogConcaveFunction};
use crate::transforms::{legendre, legendre_1d_fast, legendre_dual, polar_dual, polar_transform, DualGridPair};

use super::report::SuiteReport;
use super::zoo::{function_zoo, raw_zoo};

/// Lattice sizes for one dimension of the transform suite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransformGrids {
    /// Points per axis for the biconjugate check, on the function's sampling lattice.
    pub biconjugate: usize,
    /// Half-extent of the primal and intermediate lattices of the commutation check.
    pub commute_extent: f64,
    pub commute_primal: usize,
    /// Points per axis of the output lattice on `[-COMMUTE_OUT, COMMUTE_OUT]ⁿ`.
    pub commute_out: usize,
}

pub const COMMUTE_OUT: f64 = 2.0;

impl TransformGrids {
    pub fn for_dim(dim: usize) -> Self {
        match dim {
            1 => TransformGrids { biconjugate: 2001, commute_extent: 20.0, commute_primal: 4001, commute_out: 81 },
            2 => TransformGrids { biconjugate: 101, commute_extent: 6.0, commute_primal: 121, commute_out: 41 },
            _ => TransformGrids { biconjugate: 25, commute_extent: 3.0, commute_primal: 31, commute_out: 11 },
        }
    }
}

fn transform(phi: &GridPotential, out: &GridSpec) -> Result<GridPotential> {
    if phi.dim() == 1 {
        legendre_1d_fast(phi, out)
    } else {
        legendre(phi, out)
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `max |ℒℒφ - φ|` over nodes with `|x| ≤ R/2` and `φ(x) < ∞`, and the larger lattice spacing `h`.
pub fn biconjugate_error(f: &LogConcaveFunction, points: usize) -> Result<(f64, f64)> {
    let primal = f.sampling_grid(points)?;
    let phi = f.sample_potential(&primal)?;
    let pair = DualGridPair::for_potential(&phi, points)?;
    let back = transform(&transform(&phi, &pair.dual)?, &primal)?;
    let reach = primal.half_extent() / 2.0;
    let mut err = 0.0f64;
    for i in 0..primal.len() {
        let v = phi.raw()[i];
        if v.is_finite() && norm(&primal.node(i)) <= reach {
            err = err.max((back.raw()[i] - v).abs());
        }
    }
    Ok((err, primal.spacing.max(pair.dual.spacing)))
}

/// `‖ℒφ - φ‖_∞` for `φ = |x|²/2` sampled on `[-8, 8]ⁿ`, over dual nodes in `[-6, 6]ⁿ`, and the primal spacing.
pub fn gaussian_self_duality(dim: usize, points: usize) -> Result<(f64, f64)> {
    let g = LogConcaveFunction::gaussian(dim);
    let primal = GridSpec::symmetric(dim, points, 8.0)?;
    let dual = GridSpec::symmetric(dim, points, 6.0)?;
    let l = transform(&g.sample_potential(&primal)?, &dual)?;
    let err = (0..dual.len())
        .map(|j| {
            let y = dual.node(j);
            (l.raw()[j] - 0.5 * y.iter().map(|v| v * v).sum::<f64>()).abs()
        })
        .fold(0.0, f64::max);
    Ok((err, primal.spacing))
}

/// Comparison of `𝒜ℒφ` and `ℒ𝒜φ` on sampled lattices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CommuteCheck {
    pub discrepancy: f64,
    /// Worst distance of either sampled composition from the exact closed form.
    pub exact_error: f64,
    pub spacing: f64,
    pub nodes: usize,
}

/// Both orders of the composition, compared at output nodes where the exact composition is finite
/// and stays finite a further `2h√n` outward.
pub fn commute_check(f: &LogConcaveFunction, grids: TransformGrids) -> Result<CommuteCheck> {
    let n = f.dim();
    let primal = GridSpec::symmetric(n, grids.commute_primal, grids.commute_extent)?;
    let out = GridSpec::symmetric(n, grids.commute_out, COMMUTE_OUT)?;
    let phi = f.sample_potential(&primal)?;
    let a_l = polar_transform(&transform(&phi, &primal)?, &out)?;
    let l_a = transform(&polar_transform(&phi, &primal)?, &out)?;
    let exact = polar_dual(&legendre_dual(f)?)?;
    let h = primal.spacing.max(out.spacing);
    let push = 2.0 * h * (n as f64).sqrt();
    let mut check = CommuteCheck { discrepancy: 0.0, exact_error: 0.0, spacing: h, nodes: 0 };
    for j in 0..out.len() {
        let x = out.node(j);
        let e = exact.potential(&x);
        let r = norm(&x);
        let outward: Vec<f64> = if r > 0.0 { x.iter().map(|v| v + push * v / r).collect() } else { x.clone() };
        if !e.is_finite() || !exact.potential(&outward).is_finite() {
            continue;
        }
        let (a, b) = (a_l.raw()[j], l_a.raw()[j]);
        check.discrepancy = check.discrepancy.max((a - b).abs());
        check.exact_error = check.exact_error.max((a - e).abs()).max((b - e).abs());
        check.nodes += 1;
    }
    Ok(check)
}

/// `max |fast - brute|` of the one-dimensional Legendre transform of `f` on its sampling lattice.
pub fn fast_legendre_agreement(f: &LogConcaveFunction, points: usize) -> Result<f64> {
    let primal = f.sampling_grid(points)?;
    let phi = f.sample_potential(&primal)?;
    let pair = DualGridPair::for_potential(&phi, points)?;
    let fast = legendre_1d_fast(&phi, &pair.dual)?;
    let brute = legendre(&phi, &pair.dual)?;
    Ok(fast.raw().iter().zip(brute.raw()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// Biconjugation and the fast 1D transform over the function zoo, Gaussian self-duality, and
/// commutation of the two transforms over the raw closed forms, all in `dim`.
pub fn run_transform_suite(dim: usize) -> Result<SuiteReport> {
    let grids = TransformGrids::for_dim(dim);
    let mut report = SuiteReport::new(format!("transforms_dim{dim}"));
    report
        .grid("biconjugate", grids.biconjugate)
        .grid("commute_primal", grids.commute_primal)
        .grid("commute_out", grids.commute_out);
    let (err, h) = gaussian_self_duality(dim, grids.commute_out.max(grids.biconjugate))?;
    report.at_most("gaussian_self_dual", "ℒ(|x|²/2) = |x|²/2", err, 2.0 * h)?;
    for (name, f) in function_zoo(dim)? {
        match biconjugate_error(&f, grids.biconjugate) {
            Ok((err, h)) => report.at_most(&format!("biconjugate[{name}]"), "ℒℒφ = φ", err, 3.0 * h)?,
            Err(e) => report.failed(&format!("biconjugate[{name}]"), "ℒℒφ = φ", &e)?,
        }
        if dim == 1 {
            match fast_legendre_agreement(&f, grids.biconjugate) {
                Ok(d) => report.at_most(&format!("fast_legendre[{name}]"), "ℒφ(y) = max_x ⟨x, y⟩ - φ(x)", d, 1e-12)?,
                Err(e) => report.failed(&format!("fast_legendre[{name}]"), "ℒφ(y) = max_x ⟨x, y⟩ - φ(x)", &e)?,
            }
        }
    }
    for (name, f) in raw_zoo(dim)? {
        match commute_check(&f, grids) {
            Ok(c) => {
                let id = format!("commute[{name}]");
                report.at_most(&id, "𝒜ℒ = ℒ𝒜", c.discrepancy, 5.0 * c.spacing)?;
                report.record(&format!("{id}.exact_error"), "𝒜ℒ = ℒ𝒜", c.exact_error)?;
                report.record(&format!("{id}.nodes"), "𝒜ℒ = ℒ𝒜", c.nodes as f64)?;
            }
            Err(e) => report.failed(&format!("commute[{name}]"), "𝒜ℒ = ℒ𝒜", &e)?,
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zoo_passes_in_low_dimension() {
        for dim in 1..=2 {
            let r = run_transform_suite(dim).unwrap();
            assert!(r.all_pass(), "{:?}", r.failures().collect::<Vec<_>>());
        }
    }
}
