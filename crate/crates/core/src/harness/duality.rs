use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::report::SuiteReport;
use super::zoo::function_zoo;
use crate::bodies::{DirectionSet, PBall, RadialBody};
use crate::covering::bound_suite;
use crate::covering::covering_number_bodies;
use crate::covering::{
    build_covering_lp, build_program, functional_covering, functional_separation, solve_covering_lp, CoverConfig,
};
use crate::error::Result;
use crate::functions::{ClosedFormKind, GridSpec, LogConcaveFunction};

#[derive(Clone, Debug, PartialEq)]
pub struct DualityConfig {
    pub cover: CoverConfig,
    /// `|primal - dual| ≤ gap_tol (1 + value)`.
    pub gap_tol: f64,
    /// Violation allowed on either feasibility certificate.
    pub residual_tol: f64,
    /// `|M(f, ḡ) - N(f, g)|`.
    pub identity_tol: f64,
    /// Relative slack on the integral bounds and on discretized comparisons.
    pub bound_tol: f64,
    /// Relative slack on identities that hold exactly on a shared lattice.
    pub exact_tol: f64,
    pub bounds: bool,
}

impl Default for DualityConfig {
    fn default() -> Self {
        DualityConfig {
            cover: CoverConfig::default(),
            gap_tol: 1e-7,
            residual_tol: 1e-8,
            identity_tol: 1e-6,
            bound_tol: 0.02,
            exact_tol: 1e-9,
            bounds: true,
        }
    }
}

impl DualityConfig {
    fn describe(&self, report: &mut SuiteReport) {
        report
            .tolerance("duality_gap", self.gap_tol)
            .tolerance("residual", self.residual_tol)
            .tolerance("separation_identity", self.identity_tol)
            .tolerance("bounds", self.bound_tol)
            .tolerance("exact", self.exact_tol);
    }
}

fn map_point(m: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (m * DVector::from_column_slice(x)).iter().copied().collect()
}

fn test_map(n: usize) -> DMatrix<f64> {
    let mut t = DMatrix::identity(n, n);
    t[(0, 0)] = 1.3;
    if n >= 2 {
        t[(0, 1)] = 0.4;
        t[(1, 1)] = 0.8;
    }
    if n >= 3 {
        t[(2, 0)] = -0.2;
        t[(2, 2)] = 1.1;
    }
    t
}

/// LP certificates, the separation identity, the elementary properties of `N`, and the integral bounds.
pub fn run_duality_suite(f: &LogConcaveFunction, g: &LogConcaveFunction, cfg: &DualityConfig) -> Result<SuiteReport> {
    let n = f.dim();
    let mut report = SuiteReport::new("duality");
    cfg.describe(&mut report);
    let lattice = cfg.cover.lattice_for(f)?;
    report.grid("lp_points_per_axis", lattice.points_per_axis);
    let cover = functional_covering(f, g, &cfg.cover)?;
    let value = cover.primal_value;
    report.record("covering_number", "N(f, g) = inf{μ(ℝⁿ) : μ ∗ g ≥ f}", value)?;
    report.at_most("lp_gap", "strong duality of the covering and packing programs", cover.gap.abs(), cfg.gap_tol * (1.0 + value))?;
    report.at_most("covering_residual", "μ ∗ g ≥ f at every constraint node", (-cover.constraint_residual).max(0.0), cfg.residual_tol)?;
    report.at_most("packing_residual", "ρ ∗ g ≤ 1 at every translate node", cover.packing_residual.max(0.0), cfg.residual_tol)?;

    let sep = functional_separation(f, &g.reflect(), &cfg.cover)?;
    report.at_most(
        "separation_identity",
        "M(f, ḡ) = N(f, g) with ḡ(x) = g(-x)",
        (sep.dual_value - value).abs(),
        cfg.identity_tol,
    )?;

    // homogeneity
    let (a, b) = (2.0, 0.5);
    let scaled = functional_covering(&f.scale(a)?, &g.scale(b)?, &cfg.cover)?;
    report.at_most(
        "homogeneity",
        "N(af, bg) = (a/b) N(f, g)",
        (scaled.primal_value - a / b * value).abs(),
        cfg.exact_tol.max(1e-6) * a / b * value,
    )?;

    // linear invariance, with the lattice carried along by T⁻¹
    let t = test_map(n);
    let t_inv = t.clone().try_inverse().expect("test map is invertible");
    let (ft, gt) = (f.apply_linear(&t)?, g.apply_linear(&t)?);
    let rows: Vec<(Vec<f64>, f64)> = lattice
        .nodes()
        .map(|x| map_point(&t_inv, &x))
        .map(|y| {
            let v = ft.value(&y);
            (y, v)
        })
        .filter(|(_, v)| *v >= crate::covering::RHS_FLOOR)
        .collect();
    let translates: Vec<Vec<f64>> = lattice.nodes().map(|x| map_point(&t_inv, &x)).collect();
    let mapped = build_program(n, rows, translates, |x, s| {
        let d: Vec<f64> = x.iter().zip(s).map(|(a, b)| a - b).collect();
        gt.value(&d)
    })?;
    let mapped = solve_covering_lp(&mapped, &lattice)?;
    report.at_most(
        "linear_invariance",
        "N(f∘T, g∘T) = N(f, g) for T ∈ GL_n",
        (mapped.primal_value - value).abs(),
        cfg.exact_tol.max(1e-8) * (1.0 + value),
    )?;

    // subadditivity in f on a lattice holding both summands
    let mut shift = vec![0.0; n];
    shift[0] = 4.0 * lattice.spacing;
    let f2 = f.shift(&shift)?;
    let wide = GridSpec::new(n, lattice.points_per_axis + 8, lattice.spacing)?;
    let sum_rows: Vec<(Vec<f64>, f64)> = wide
        .nodes()
        .map(|x| {
            let v = f.value(&x) + f2.value(&x);
            (x, v)
        })
        .filter(|(_, v)| *v >= crate::covering::RHS_FLOOR)
        .collect();
    let solve_rows = |rows: Vec<(Vec<f64>, f64)>| -> Result<f64> {
        let lp = build_program(n, rows, wide.nodes().collect(), |x, s| {
            let d: Vec<f64> = x.iter().zip(s).map(|(a, b)| a - b).collect();
            g.value(&d)
        })?;
        Ok(solve_covering_lp(&lp, &wide)?.primal_value)
    };
    let n_sum = solve_rows(sum_rows)?;
    let n1 = solve_covering_lp(&build_covering_lp(f, g, &wide, &wide)?, &wide)?.primal_value;
    let n2 = solve_covering_lp(&build_covering_lp(&f2, g, &wide, &wide)?, &wide)?.primal_value;
    report.at_most("subadditivity", "N(f₁ + f₂, g) ≤ N(f₁, g) + N(f₂, g)", n_sum, (n1 + n2) * (1.0 + cfg.exact_tol))?;

    // monotonicity in g
    let wider = functional_covering(f, &g.dilate(2.0)?, &cfg.cover)?;
    report.at_most(
        "monotone_in_g",
        "N(f₁, g₁) ≤ N(f₂, g₂) when f₁ ≤ f₂ and g₁ ≥ g₂ (here g₁ = 2⊙g ≥ g)",
        wider.primal_value,
        value * (1.0 + cfg.exact_tol),
    )?;

    if cfg.bounds {
        let bounds = bound_suite(f, g, &cfg.cover, cfg.bound_tol)?;
        for check in &bounds.checks {
            let anchor = match check.name.as_str() {
                "integral_ratio" => "∫f / ∫g ≤ N(f, g)",
                "asplund_p2" => "N(f, g) ≤ ∫(f ⋆ ḡ) / ∫ḡ²",
                "convolution_lower" => "∫f² / ‖f ∗ ḡ‖_∞ ≤ N(f, g) for geometric f, g",
                "convolution_upper" => "N(f, g) ≤ 2ⁿ ∫f² / ‖f ∗ g‖_∞ for geometric f, g",
                "even_lower" => "∫f² / ∫fg ≤ N(f, g) for even geometric f, g",
                "even_upper" => "N(f, g) ≤ 2ⁿ ∫f² / ∫fg for even geometric f, g",
                other => other,
            };
            report.register(format!("bound_{}", check.name), anchor, Some(check.bound), check.margin, true)?;
        }
    }
    Ok(report)
}

/// `N(f, g) ≤ N(f, h) N(h, g)` for one triple, each value on the lattice of its first argument.
pub fn submultiplicativity(
    f: &LogConcaveFunction,
    h: &LogConcaveFunction,
    g: &LogConcaveFunction,
    cfg: &DualityConfig,
) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("submultiplicativity");
    cfg.describe(&mut report);
    let fg = functional_covering(f, g, &cfg.cover)?.primal_value;
    let fh = functional_covering(f, h, &cfg.cover)?.primal_value;
    let hg = functional_covering(h, g, &cfg.cover)?.primal_value;
    report.at_most("submultiplicativity", "N(f, g) ≤ N(f, h) N(h, g)", fg, fh * hg * (1.0 + cfg.bound_tol))?;
    Ok(report)
}

/// The default witness `(e^{-|x|}, gaussian, 1_{[-1,1]})` in dimension one.
pub fn submultiplicativity_witness(cfg: &DualityConfig) -> Result<SuiteReport> {
    let f = LogConcaveFunction::from_kind(ClosedFormKind::ExpEuclideanNorm, &[1.0], 1)?;
    let h = LogConcaveFunction::gaussian(1);
    let g = LogConcaveFunction::from_kind(ClosedFormKind::IndicatorCube, &[1.0], 1)?;
    submultiplicativity(&f, &h, &g, cfg)
}

/// Covering and separation of indicators against geometric covering and packing of the bodies.
pub fn indicator_comparison(dim: usize, cfg: &DualityConfig) -> Result<SuiteReport> {
    let mut report = SuiteReport::new("indicators");
    cfg.describe(&mut report);
    let dirs = Arc::new(DirectionSet::default_for(dim)?);
    let k_fn = LogConcaveFunction::from_kind(ClosedFormKind::IndicatorCube, &[1.0], dim)?;
    // dyadic spacing puts the faces of both cubes on lattice nodes
    let spacing = match dim {
        1 => 1.0 / 64.0,
        2 => 1.0 / 8.0,
        _ => 1.0 / 4.0,
    };
    let lp_cfg = CoverConfig { spacing: Some(spacing), ..cfg.cover.clone() };
    for (label, t_fn, t_body) in [
        ("half_cube", LogConcaveFunction::from_kind(ClosedFormKind::IndicatorCube, &[0.5], dim)?, PBall::cube(dim, 0.5)),
        ("ball_0.7", LogConcaveFunction::from_kind(ClosedFormKind::IndicatorBall, &[0.7], dim)?, PBall::new(dim, 2.0, 0.7)),
    ] {
        let k = RadialBody::sample(dirs.clone(), &PBall::cube(dim, 1.0))?;
        let t = RadialBody::sample(dirs.clone(), &t_body)?;
        let bodies = covering_number_bodies(&k, &t)?;
        let cover = functional_covering(&k_fn, &t_fn, &lp_cfg)?;
        let sep = functional_separation(&k_fn, &t_fn, &lp_cfg)?;
        report.at_most(
            format!("indicator_covering[{label}]"),
            "N(1_K, 1_T) ≤ N(K, T)",
            cover.primal_value,
            bodies.upper as f64 * (1.0 + cfg.bound_tol),
        )?;
        report.at_least(
            format!("indicator_separation[{label}]"),
            "M(K, T) ≤ M(1_K, 1_T)",
            sep.dual_value,
            bodies.lower as f64 * (1.0 - cfg.bound_tol),
        )?;
        report.record(format!("body_covering_upper[{label}]"), "N(K, T) from a lattice tiling", bodies.upper as f64)?;
        report.record(format!("body_packing_lower[{label}]"), "M(K, T) from a greedy packing", bodies.lower as f64)?;
    }
    Ok(report)
}

/// Certificates for `N(f, g)` over every ordered pair of zoo members in `dim`.
pub fn lp_certificates(dim: usize, cfg: &DualityConfig) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(format!("lp_certificates_dim{dim}"));
    cfg.describe(&mut report);
    let zoo = function_zoo(dim)?;
    report.grid("lp_points_per_axis", cfg.cover.lattice_for(&zoo[0].1)?.points_per_axis);
    for (a, f) in &zoo {
        for (b, g) in &zoo {
            let id = format!("lp_gap[{a},{b}]");
            let anchor = "strong duality of the covering and packing programs";
            match functional_covering(f, g, &cfg.cover) {
                Ok(c) => {
                    report.at_most(&id, anchor, c.gap.abs(), cfg.gap_tol * (1.0 + c.primal_value))?;
                    report.record(format!("covering_number[{a},{b}]"), "N(f, g) = inf{μ(ℝⁿ) : μ ∗ g ≥ f}", c.primal_value)?;
                }
                Err(e) => report.failed(id, anchor, &e)?,
            }
        }
    }
    Ok(report)
}

/// `N(f, f) = 1` for every zoo member, and `N(1_{[0,2]}, 1_{[-1/2,1/2]}) = 2` at spacing `0.01` in dimension one.
pub fn exact_values(dim: usize, cfg: &DualityConfig) -> Result<SuiteReport> {
    let mut report = SuiteReport::new(format!("exact_values_dim{dim}"));
    cfg.describe(&mut report);
    for (name, f) in function_zoo(dim)? {
        let id = format!("self_cover[{name}]");
        match functional_covering(&f, &f, &cfg.cover) {
            Ok(c) => report.at_most(&id, "N(f, f) = 1", (c.primal_value - 1.0).abs(), cfg.identity_tol)?,
            Err(e) => report.failed(id, "N(f, f) = 1", &e)?,
        }
    }
    if dim == 1 {
        let f = LogConcaveFunction::from_kind(ClosedFormKind::IndicatorCube, &[1.0], 1)?.shift(&[1.0])?;
        let g = LogConcaveFunction::from_kind(ClosedFormKind::IndicatorCube, &[0.5], 1)?;
        let lp_cfg = CoverConfig { spacing: Some(0.01), ..cfg.cover.clone() };
        let anchor = "N(1_{[0,2]}, 1_{[-1/2,1/2]}) = 2";
        match functional_covering(&f, &g, &lp_cfg) {
            Ok(c) => report.at_most("interval_pair", anchor, (c.primal_value - 2.0).abs(), cfg.bound_tol)?,
            Err(e) => report.failed("interval_pair", anchor, &e)?,
        }
    }
    Ok(report)
}
