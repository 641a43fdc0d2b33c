use serde::{Deserialize, Serialize};

use crate::covering::{functional_covering, CoverConfig};
use crate::error::{Error, Result};
use crate::functions::LogConcaveFunction;
use crate::transforms::{legendre_dual, scaled_polar};

/// Scales at which profiles are computed by default.
pub const DEFAULT_T: [f64; 7] = [1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0];

/// Growth of the translate hull when a program turns out infeasible.
const HULL_GROWTH: f64 = 1.5;

/// Rounding allowance on an LP value and its `ln`/`exp` round trip.
const ROUNDING_ULPS: f64 = 16.0;

/// Column names, in order.
pub const COLUMNS: [&str; 4] = ["f_by_g", "g_by_f", "fstar_by_g", "g_by_fstar"];
pub const POLAR_COLUMNS: [&str; 2] = ["g_by_fa", "fa_by_g"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileConfig {
    pub cover: CoverConfig,
    /// Also profile `N(g, t⊙f_𝒜)` and `N(f_𝒜, t⊙g)`.
    pub scaled_polar: bool,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig { cover: CoverConfig::default(), scaled_polar: false }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileColumn {
    pub name: String,
    /// `ln N` at each `t`.
    pub ln_cover: Vec<f64>,
    /// `(t/n) ln N`.
    pub normalized: Vec<f64>,
    /// Duality gap of each program.
    pub gaps: Vec<f64>,
    /// `max_t (t/n) ln N`.
    pub kappa_hat: f64,
    /// Hull expansions needed.
    pub expansions: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularityProfile {
    pub function: String,
    pub dim: usize,
    pub t_values: Vec<f64>,
    /// `N(f, t⊙g)`, `N(g, t⊙f)`, `N(f*, t⊙g)`, `N(g, t⊙f*)` for the standard Gaussian `g`, then the optional polar pair.
    pub columns: Vec<ProfileColumn>,
}

impl RegularityProfile {
    /// Largest increase of any `ln N` column between consecutive scales (`≤ 0` when monotone).
    pub fn worst_increase(&self) -> f64 {
        self.columns
            .iter()
            .flat_map(|c| c.ln_cover.windows(2).map(|w| w[1] - w[0]))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest increase between consecutive scales once each value is lowered to its dual bound
    /// `N - gap`, less a few ulps of rounding; positive only when the certified brackets themselves increase.
    pub fn worst_certified_increase(&self) -> f64 {
        self.columns
            .iter()
            .flat_map(|c| {
                (1..c.ln_cover.len()).map(move |k| {
                    let lower = c.ln_cover[k].exp() * (1.0 - ROUNDING_ULPS * f64::EPSILON) - c.gaps[k].abs();
                    lower.max(f64::MIN_POSITIVE).ln() - c.ln_cover[k - 1]
                })
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn all_finite(&self) -> bool {
        self.columns.iter().all(|c| c.ln_cover.iter().all(|v| v.is_finite()) && c.kappa_hat.is_finite())
    }

    pub fn column(&self, name: &str) -> Option<&ProfileColumn> {
        self.columns.iter().find(|c| c.name == name)
    }
}

fn column(
    name: &str,
    first: &LogConcaveFunction,
    second: &LogConcaveFunction,
    t_values: &[f64],
    cfg: &CoverConfig,
) -> Result<ProfileColumn> {
    match column_with(name, first, second, t_values, cfg, 0) {
        Err(Error::CoveringImpossible(_)) => {
            let base = cfg.lattice_for(first)?;
            let grown = CoverConfig { half_extent: Some(base.half_extent() * HULL_GROWTH), ..cfg.clone() };
            column_with(name, first, second, t_values, &grown, 1)
        }
        other => other,
    }
}

/// One lattice for every scale, which keeps the column monotone.
fn column_with(
    name: &str,
    first: &LogConcaveFunction,
    second: &LogConcaveFunction,
    t_values: &[f64],
    cfg: &CoverConfig,
    expansions: usize,
) -> Result<ProfileColumn> {
    let n = first.dim() as f64;
    let (mut ln_cover, mut gaps) = (Vec::new(), Vec::new());
    for &t in t_values {
        let cert = functional_covering(first, &second.dilate(t)?, cfg)?;
        ln_cover.push(cert.primal_value.ln());
        gaps.push(cert.gap);
    }
    Ok(finish(name, n, t_values, ln_cover, gaps, expansions))
}

fn finish(name: &str, n: f64, t_values: &[f64], ln_cover: Vec<f64>, gaps: Vec<f64>, expansions: usize) -> ProfileColumn {
    let normalized: Vec<f64> = t_values.iter().zip(&ln_cover).map(|(t, v)| t / n * v).collect();
    let kappa_hat = normalized.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    ProfileColumn { name: name.to_string(), ln_cover, normalized, gaps, kappa_hat, expansions }
}

/// Covering numbers of `f`, its Legendre dual and (optionally) its scaled polar against dilates of the standard Gaussian.
pub fn regularity_profile(
    name: &str,
    f: &LogConcaveFunction,
    t_values: &[f64],
    cfg: &ProfileConfig,
) -> Result<RegularityProfile> {
    if t_values.is_empty() || t_values.iter().any(|t| !(*t >= 1.0 && t.is_finite())) {
        return Err(Error::input("profile scales must be finite and at least 1"));
    }
    if t_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::input("profile scales must be increasing"));
    }
    if !f.is_geometric() {
        return Err(Error::Normalization("profiles need a geometric function".into()));
    }
    let n = f.dim();
    let g = LogConcaveFunction::gaussian(n);
    let fstar = legendre_dual(f)?;
    let mut pairs: Vec<(&str, LogConcaveFunction, LogConcaveFunction)> = vec![
        (COLUMNS[0], f.clone(), g.clone()),
        (COLUMNS[1], g.clone(), f.clone()),
        (COLUMNS[2], fstar.clone(), g.clone()),
        (COLUMNS[3], g.clone(), fstar),
    ];
    if cfg.scaled_polar {
        let fa = scaled_polar(f, n)?;
        pairs.push((POLAR_COLUMNS[0], g.clone(), fa.clone()));
        pairs.push((POLAR_COLUMNS[1], fa, g.clone()));
    }
    let columns = pairs
        .iter()
        .map(|(name, a, b)| column(name, a, b, t_values, &cfg.cover))
        .collect::<Result<Vec<_>>>()?;
    Ok(RegularityProfile { function: name.to_string(), dim: n, t_values: t_values.to_vec(), columns })
}
