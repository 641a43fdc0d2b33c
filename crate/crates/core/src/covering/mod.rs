//! Functional covering and separation numbers as finite linear programs, greedy covering
//! numbers of bodies, the classical two-sided bounds, and pointwise decompositions.

mod bodies;
mod bounds;
mod decompose;

pub use bodies::{covering_number_bodies, BodyCovering};
pub use bounds::{bound_suite, BoundCheck, BoundReport};
pub use decompose::{decomposition_checks, DecompositionReport};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::lcf::TAIL_LEVEL;
use crate::functions::{GridSpec, LogConcaveFunction};
use crate::lp::PackingLp;

/// Constraint points with `f(x) <` this are dropped.
pub const RHS_FLOOR: f64 = 1e-12;

/// Lattice points per axis used for covering programs in dimensions 1, 2, 3.
pub fn default_lp_points(dim: usize) -> usize {
    match dim {
        1 => 257,
        2 => 21,
        _ => 11,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: Vec<f64>,
    pub weight: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    pub atoms: Vec<Atom>,
}

impl DiscreteMeasure {
    /// Atoms with weight above `1e-15`; zero weights are dropped.
    pub fn from_weights(points: &[Vec<f64>], weights: &[f64]) -> Self {
        let atoms = points
            .iter()
            .zip(weights)
            .filter(|(_, w)| **w > 1e-15)
            .map(|(p, w)| Atom { location: p.clone(), weight: *w })
            .collect();
        DiscreteMeasure { atoms }
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }
}

/// `μ ∗ g ≥ f` imposed at constraint points `x_j` with `μ` supported on translate points `t_i`.
#[derive(Clone, Debug)]
pub struct CoveringLP {
    pub dim: usize,
    pub constraint_points: Vec<Vec<f64>>,
    pub translate_points: Vec<Vec<f64>>,
    /// Row-major: `matrix[j * translates + i] = g(x_j - t_i)`.
    pub matrix: Vec<f64>,
    pub rhs: Vec<f64>,
    /// Constraint points removed by the floor on `f`.
    pub dropped: usize,
}

impl CoveringLP {
    pub fn entry(&self, j: usize, i: usize) -> f64 {
        self.matrix[j * self.translate_points.len() + i]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoveringCertificate {
    /// Covering value `Σ μ_i`.
    pub primal_value: f64,
    pub primal_measure: DiscreteMeasure,
    /// Separation value `Σ f(x_j) ρ_j`.
    pub dual_value: f64,
    pub dual_measure: DiscreteMeasure,
    pub gap: f64,
    /// `min_j (μ∗g)(x_j) - f(x_j)`.
    pub constraint_residual: f64,
    /// `max_i (ρ∗ḡ)(t_i) - 1`.
    pub packing_residual: f64,
    /// `|value_h - value_{h/2}|` when a refinement run was made.
    pub grid_refinement_delta: Option<f64>,
    pub lattice: GridSpec,
    pub iterations: usize,
}

impl CoveringCertificate {
    pub fn relative_gap(&self) -> f64 {
        self.gap.abs() / (1.0 + self.primal_value.abs())
    }
}

/// Covering program with explicit constraint points `x_j`, right-hand sides `b_j`, translates `t_i`
/// and entries `A[j][i] = kernel(x_j, t_i)`.
pub fn build_program(
    dim: usize,
    rhs_points: Vec<(Vec<f64>, f64)>,
    translate_points: Vec<Vec<f64>>,
    kernel: impl Fn(&[f64], &[f64]) -> f64 + Sync,
) -> Result<CoveringLP> {
    assemble(dim, rhs_points, translate_points, kernel, 0)
}

fn assemble(
    dim: usize,
    rhs_points: Vec<(Vec<f64>, f64)>,
    translate_points: Vec<Vec<f64>>,
    kernel: impl Fn(&[f64], &[f64]) -> f64 + Sync,
    dropped: usize,
) -> Result<CoveringLP> {
    if rhs_points.is_empty() {
        return Err(Error::input("covering program has no constraint points"));
    }
    if let Some(bad) = rhs_points.iter().map(|p| &p.0).chain(&translate_points).find(|x| x.len() != dim) {
        return Err(Error::Dimension { expected: dim, got: bad.len() });
    }
    let k = translate_points.len();
    let rows: Vec<Vec<f64>> = rhs_points
        .par_iter()
        .map(|(x, _)| translate_points.iter().map(|t| kernel(x, t)).collect())
        .collect();
    let mut matrix = Vec::with_capacity(rows.len() * k);
    for r in rows {
        matrix.extend(r);
    }
    let (constraint_points, rhs) = rhs_points.into_iter().unzip();
    Ok(CoveringLP { dim, constraint_points, translate_points, matrix, rhs, dropped })
}

pub(crate) fn weighted_points(f: &LogConcaveFunction, constraints: &GridSpec) -> (Vec<(Vec<f64>, f64)>, usize) {
    let all: Vec<(Vec<f64>, f64)> = constraints.nodes().map(|x| {
        let v = f.value(&x);
        (x, v)
    }).collect();
    let total = all.len();
    let kept: Vec<_> = all.into_iter().filter(|(_, v)| *v >= RHS_FLOOR).collect();
    let dropped = total - kept.len();
    (kept, dropped)
}

/// `A[j][i] = g(x_j - t_i)`, `b[j] = f(x_j)`.
pub fn build_covering_lp(
    f: &LogConcaveFunction,
    g: &LogConcaveFunction,
    constraints: &GridSpec,
    translates: &GridSpec,
) -> Result<CoveringLP> {
    crate::error::check_dim(f.dim(), g.dim())?;
    crate::error::check_dim(f.dim(), constraints.dim)?;
    crate::error::check_dim(f.dim(), translates.dim)?;
    let (points, dropped) = weighted_points(f, constraints);
    let n = f.dim();
    assemble(n, points, translates.nodes().collect(), |x, t| {
        let mut d = [0.0; 3];
        for a in 0..n {
            d[a] = x[a] - t[a];
        }
        g.value(&d[..n])
    }, dropped)
}

/// Solve `min Σμ  s.t. Aμ ≥ b, μ ≥ 0` through its packing dual.
pub fn solve_covering_lp(lp: &CoveringLP, lattice: &GridSpec) -> Result<CoveringCertificate> {
    let k = lp.translate_points.len();
    let m = lp.constraint_points.len();
    if m == 0 || k == 0 {
        return Err(Error::input("covering program is empty"));
    }
    for j in 0..m {
        if lp.matrix[j * k..(j + 1) * k].iter().all(|v| *v <= 0.0) {
            return Err(Error::CoveringImpossible(format!(
                "no translate reaches constraint point {:?}",
                lp.constraint_points[j]
            )));
        }
    }
    // translates that touch no constraint point carry no weight
    let active: Vec<usize> = (0..k).filter(|&i| (0..m).any(|j| lp.matrix[j * k + i] > 0.0)).collect();
    let rows = active.len();
    let mut a = Vec::with_capacity(rows * m);
    for j in 0..m {
        let row = &lp.matrix[j * k..(j + 1) * k];
        a.extend(active.iter().map(|&i| row[i]));
    }
    let packing = PackingLp::new(rows, m, a, lp.rhs.clone(), vec![1.0; rows])?;
    let sol = packing.solve().map_err(|e| match e {
        Error::Solver(msg) if msg.contains("unbounded") => Error::CoveringImpossible(msg),
        other => other,
    })?;
    let mut mu = vec![0.0; k];
    for (r, &i) in active.iter().enumerate() {
        mu[i] = sol.y[r];
    }
    let constraint_residual = (0..m)
        .map(|j| {
            let row = &lp.matrix[j * k..(j + 1) * k];
            row.iter().zip(&mu).map(|(a, b)| a * b).sum::<f64>() - lp.rhs[j]
        })
        .fold(f64::INFINITY, f64::min);
    let packing_residual = (0..k)
        .map(|i| (0..m).map(|j| lp.matrix[j * k + i] * sol.x[j]).sum::<f64>() - 1.0)
        .fold(f64::NEG_INFINITY, f64::max);
    let primal_value: f64 = mu.iter().sum();
    let dual_value: f64 = sol.x.iter().zip(&lp.rhs).map(|(a, b)| a * b).sum();
    Ok(CoveringCertificate {
        primal_value,
        primal_measure: DiscreteMeasure::from_weights(&lp.translate_points, &mu),
        dual_value,
        dual_measure: DiscreteMeasure::from_weights(&lp.constraint_points, &sol.x),
        gap: primal_value - dual_value,
        constraint_residual,
        packing_residual,
        grid_refinement_delta: None,
        lattice: lattice.clone(),
        iterations: sol.iterations,
    })
}

/// How the lattice of a covering program is chosen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoverConfig {
    /// Points per axis; ignored when `spacing` is set.
    pub points_per_axis: Option<usize>,
    pub spacing: Option<f64>,
    /// Lattice half-extent; defaults to the region where `f ≥ 10⁻¹² ‖f‖_∞`, padded by 5%.
    pub half_extent: Option<f64>,
    /// Rerun at half spacing and record the change in value.
    pub refine: bool,
}

impl Default for CoverConfig {
    fn default() -> Self {
        CoverConfig { points_per_axis: None, spacing: None, half_extent: None, refine: false }
    }
}

impl CoverConfig {
    pub fn with_points(points: usize) -> Self {
        CoverConfig { points_per_axis: Some(points), ..Self::default() }
    }

    pub fn refined(mut self) -> Self {
        self.refine = true;
        self
    }

    /// Shared constraint/translate lattice for covering `f`.
    pub fn lattice_for(&self, f: &LogConcaveFunction) -> Result<GridSpec> {
        let n = f.dim();
        let r = match self.half_extent {
            Some(r) => r,
            None => 1.05 * f.level_radius(TAIL_LEVEL + f.base_min()) + 1e-9,
        };
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::input("covering lattice needs a bounded support"));
        }
        match self.spacing {
            Some(h) => {
                if !(h > 0.0 && h.is_finite()) {
                    return Err(Error::input(format!("spacing must be positive, got {h}")));
                }
                let k = (r / h - 1e-9).ceil().max(1.0) as usize;
                GridSpec::new(n, 2 * k + 1, h)
            }
            None => GridSpec::symmetric(n, self.points_per_axis.unwrap_or_else(|| default_lp_points(n)), r),
        }
    }
}

fn with_refinement(
    cfg: &CoverConfig,
    f: &LogConcaveFunction,
    solve: impl Fn(&GridSpec) -> Result<CoveringCertificate>,
    value: impl Fn(&CoveringCertificate) -> f64,
) -> Result<CoveringCertificate> {
    let lattice = cfg.lattice_for(f)?;
    let mut cert = solve(&lattice)?;
    if cfg.refine {
        let fine = solve(&lattice.refined())?;
        cert.grid_refinement_delta = Some((value(&cert) - value(&fine)).abs());
    }
    Ok(cert)
}

/// `N(f, g)` on a shared constraint/translate lattice.
pub fn functional_covering(f: &LogConcaveFunction, g: &LogConcaveFunction, cfg: &CoverConfig) -> Result<CoveringCertificate> {
    with_refinement(cfg, f, |lat| solve_covering_lp(&build_covering_lp(f, g, lat, lat)?, lat), |c| c.primal_value)
}

/// `M(f, g) = sup{∫f dρ : ρ∗g ≤ 1}` with `ρ` on the lattice and `ρ∗g ≤ 1` imposed at its nodes.
///
/// The separation value is `dual_value`; `primal_value` is the covering number of the
/// same program, i.e. `N(f, ḡ)`.
pub fn functional_separation(f: &LogConcaveFunction, g: &LogConcaveFunction, cfg: &CoverConfig) -> Result<CoveringCertificate> {
    crate::error::check_dim(f.dim(), g.dim())?;
    let n = f.dim();
    with_refinement(
        cfg,
        f,
        |lat| {
            let (points, dropped) = weighted_points(f, lat);
            // column x_j of the packing program: (ρ_j δ_{x_j} ∗ g)(t_i) = g(t_i - x_j)
            let lp = assemble(n, points, lat.nodes().collect(), |x, t| {
                let mut d = [0.0; 3];
                for a in 0..n {
                    d[a] = t[a] - x[a];
                }
                g.value(&d[..n])
            }, dropped)?;
            solve_covering_lp(&lp, lat)
        },
        |c| c.dual_value,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::ClosedFormKind;
    use approx::assert_relative_eq;

    fn interval(lo: f64, hi: f64) -> LogConcaveFunction {
        let half = (hi - lo) / 2.0;
        LogConcaveFunction::from_kind(ClosedFormKind::IndicatorCube, &[half], 1)
            .unwrap()
            .shift(&[lo + half])
            .unwrap()
    }

    #[test]
    fn single_point_program() {
        let g = LogConcaveFunction::gaussian(1);
        let lat = GridSpec::new(1, 3, 1e3).unwrap();
        let lp = build_covering_lp(&g, &g, &lat, &lat).unwrap();
        assert_eq!(lp.constraint_points, vec![vec![0.0]]);
        assert_eq!(lp.rhs, vec![1.0]);
        assert_eq!(lp.entry(0, 1), 1.0);
        let cert = solve_covering_lp(&lp, &lat).unwrap();
        assert_relative_eq!(cert.primal_value, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn indicator_matrix_is_banded() {
        let f = interval(0.0, 2.0);
        let g = interval(-0.5, 0.5);
        let lat = CoverConfig { spacing: Some(0.01), ..CoverConfig::default() }.lattice_for(&f).unwrap();
        let lp = build_covering_lp(&f, &g, &lat, &lat).unwrap();
        assert!(lp.matrix.iter().all(|v| *v == 0.0 || *v == 1.0));
        let k = lp.translate_points.len();
        for j in 0..lp.constraint_points.len() {
            let ones: Vec<usize> = (0..k).filter(|&i| lp.entry(j, i) == 1.0).collect();
            assert!(ones.windows(2).all(|w| w[1] == w[0] + 1));
            // the shared lattice ends at 2.11, clipping the band of the rightmost rows
            if lp.constraint_points[j][0] <= 1.6 {
                assert_eq!(ones.len(), 101);
            }
        }
    }

    #[test]
    fn interval_needs_two_translates() {
        let f = interval(0.0, 2.0);
        let g = interval(-0.5, 0.5);
        let cfg = CoverConfig { spacing: Some(0.01), ..CoverConfig::default() };
        let n = functional_covering(&f, &g, &cfg).unwrap();
        assert!((n.primal_value - 2.0).abs() <= 0.02, "{}", n.primal_value);
        assert!(n.relative_gap() <= 1e-7);
        assert!(n.constraint_residual >= -1e-8);
        let m = functional_separation(&f, &g.reflect(), &cfg).unwrap();
        assert!((m.dual_value - n.primal_value).abs() <= 1e-6);
        let doubled = functional_covering(&f.scale(2.0).unwrap(), &g, &cfg).unwrap();
        assert_relative_eq!(doubled.primal_value, 2.0 * n.primal_value, max_relative = 1e-9);
    }

    #[test]
    fn uncovered_support_is_reported() {
        let f = interval(-1.0, 1.0);
        let g = interval(-0.1, 0.1);
        let lat = cfg_lattice(&f);
        let far = GridSpec::with_center(1, 3, 0.05, vec![50.0]).unwrap();
        let lp = build_covering_lp(&f, &g, &lat, &far).unwrap();
        assert!(matches!(solve_covering_lp(&lp, &lat), Err(Error::CoveringImpossible(_))));
    }

    fn cfg_lattice(f: &LogConcaveFunction) -> GridSpec {
        CoverConfig::default().lattice_for(f).unwrap()
    }

    #[test]
    fn self_covering_is_one() {
        for dim in 1..=2 {
            for kind in [ClosedFormKind::Gaussian, ClosedFormKind::ExpEuclideanNorm, ClosedFormKind::IndicatorCube] {
                let f = LogConcaveFunction::closed_form(crate::ClosedFormSpec::default_of(kind), dim).unwrap();
                let c = functional_covering(&f, &f, &CoverConfig::default()).unwrap();
                assert_relative_eq!(c.primal_value, 1.0, epsilon = 1e-6);
                assert_relative_eq!(c.dual_value, 1.0, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn dilation_monotonicity() {
        let f = LogConcaveFunction::from_kind(ClosedFormKind::ExpEuclideanNorm, &[1.0], 1).unwrap();
        let g = LogConcaveFunction::gaussian(1);
        let cfg = CoverConfig::default();
        let mut last = f64::INFINITY;
        for t in [1.0, 2.0, 4.0] {
            let v = functional_covering(&f, &g.dilate(t).unwrap(), &cfg).unwrap().primal_value;
            assert!(v <= last * (1.0 + 1e-9));
            last = v;
        }
        assert_relative_eq!(
            functional_covering(&g, &g.dilate(1.0).unwrap(), &cfg).unwrap().primal_value,
            1.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn refinement_delta_is_small() {
        let f = LogConcaveFunction::from_kind(ClosedFormKind::ExpEuclideanNorm, &[1.0], 1).unwrap();
        let g = LogConcaveFunction::gaussian(1);
        let cfg = CoverConfig { half_extent: Some(20.0), ..CoverConfig::default() }.refined();
        let c = functional_covering(&f, &g, &cfg).unwrap();
        let delta = c.grid_refinement_delta.unwrap();
        assert!(delta <= 0.05 * c.primal_value, "{delta} vs {}", c.primal_value);
    }
}
