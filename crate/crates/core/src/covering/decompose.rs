use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bodies::construct::level_gauge;
use crate::bodies::metrics::volume_radius;
use crate::bodies::{level_set_body, DirectionSet};
use crate::error::{Error, Result};
use crate::functions::grid::default_points;
use crate::functions::{GridSpec, LogConcaveFunction};

/// Relative slack allowed for floating-point evaluation of both sides.
const EVAL_SLACK: f64 = 1e-9;
/// Last index of the exponential layer sum.
pub const LAYER_TERMS: usize = 200;
/// Annulus width factor `a`.
pub const ANNULUS_FACTOR: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionCheck {
    pub nodes: usize,
    pub violations: usize,
    /// `min (rhs - lhs) / rhs` over nodes with `rhs > 0`.
    pub worst_margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    /// `f ≤ 1_{R_f} + exp(-50n‖x‖_{R_f})`.
    pub level_tail: DecompositionCheck,
    /// `exp(-50n‖x‖_{R_f}) ≤ Σ_{k≤200} e^{-k} 1_{((k+1)/50n) R_f}`.
    pub exponential_layers: DecompositionCheck,
    /// `e^{-|x|²/2} ≤ Σ_k e^{-a²k²r²/2} 1_{a(k+1) r B}` with `r = vrad(R_f)`.
    pub gaussian_annuli: DecompositionCheck,
    pub lattice_half_extent: f64,
    pub volume_radius: f64,
    pub annulus_factor: f64,
}

impl DecompositionReport {
    pub fn violations(&self) -> usize {
        self.level_tail.violations + self.exponential_layers.violations + self.gaussian_annuli.violations
    }
}

fn tally(pairs: &[(f64, f64)]) -> DecompositionCheck {
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    for &(lhs, rhs) in pairs {
        if lhs > rhs * (1.0 + EVAL_SLACK) {
            violations += 1;
        }
        if rhs > 0.0 {
            worst = worst.min((rhs - lhs) / rhs);
        }
    }
    DecompositionCheck { nodes: pairs.len(), violations, worst_margin: worst }
}

fn layer_sum(level: f64, s: f64) -> f64 {
    // x ∈ ((k+1)/level) R_f  ⇔  k ≥ level·s - 1
    let k0 = (level * s - 1.0).ceil().max(0.0);
    if k0 > LAYER_TERMS as f64 {
        return 0.0;
    }
    (k0 as usize..=LAYER_TERMS).map(|k| (-(k as f64)).exp()).sum()
}

fn annulus_sum(norm: f64, a: f64, r: f64) -> f64 {
    let k0 = (norm / (a * r) - 1.0).ceil().max(0.0) as usize;
    let mut total = 0.0;
    for k in k0.. {
        let term = (-(a * k as f64 * r).powi(2) / 2.0).exp();
        total += term;
        if term < 1e-300 || k > k0 + 10_000 {
            break;
        }
    }
    total
}

/// Pointwise decompositions of a geometric `f` and of the standard Gaussian, checked at every lattice node.
///
/// The lattice for the first two checks stays inside `(201/50n) R_f`, where the truncated
/// layer sum is exact; the annulus check runs on the Gaussian's own sampling lattice.
pub fn decomposition_checks(f: &LogConcaveFunction) -> Result<DecompositionReport> {
    if !f.is_geometric() {
        return Err(Error::input("decompositions need a geometric function"));
    }
    let n = f.dim();
    let level = 50.0 * n as f64;
    let dirs = Arc::new(DirectionSet::default_for(n)?);
    let rf = level_set_body(f, level, &dirs)?;
    let rho_max = rf.rho.iter().copied().fold(0.0, f64::max);
    let rho_min = rf.rho.iter().copied().fold(f64::INFINITY, f64::min);
    let reach = 0.95 * (LAYER_TERMS as f64 + 1.0) / level * rho_min / (n as f64).sqrt();
    let half = (1.25 * rho_max).min(reach);
    let lattice = GridSpec::symmetric(n, default_points(n), half)?;
    let gauges: Vec<(f64, f64)> = (0..lattice.len())
        .into_par_iter()
        .map(|i| {
            let x = lattice.node(i);
            Ok((f.value(&x), level_gauge(f, level, &x)?))
        })
        .collect::<Result<_>>()?;
    let tail: Vec<(f64, f64)> = gauges
        .iter()
        .map(|&(v, s)| (v, if s <= 1.0 { 1.0 } else { 0.0 } + (-level * s).exp()))
        .collect();
    let layers: Vec<(f64, f64)> = gauges.iter().map(|&(_, s)| ((-level * s).exp(), layer_sum(level, s))).collect();
    let r = volume_radius(&rf);
    let g = LogConcaveFunction::gaussian(n);
    let g_lattice = g.sampling_grid(default_points(n))?;
    let annuli: Vec<(f64, f64)> = g_lattice
        .nodes()
        .map(|x| {
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            (g.value(&x), annulus_sum(norm, ANNULUS_FACTOR, r))
        })
        .collect();
    Ok(DecompositionReport {
        level_tail: tally(&tail),
        exponential_layers: tally(&layers),
        gaussian_annuli: tally(&annuli),
        lattice_half_extent: half,
        volume_radius: r,
        annulus_factor: ANNULUS_FACTOR,
    })
}
