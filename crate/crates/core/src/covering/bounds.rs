use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{functional_covering, CoverConfig};
use crate::error::Result;
use crate::functions::lcf::TAIL_LEVEL;
use crate::functions::{GridSpec, LogConcaveFunction};

fn quadrature_points(dim: usize) -> usize {
    match dim {
        1 => 1025,
        2 => 129,
        _ => 25,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    /// `"lower"` or `"upper"`.
    pub side: String,
    pub bound: f64,
    pub value: f64,
    /// Relative slack; negative means the check failed.
    pub margin: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub lp_value: f64,
    pub lp_gap: f64,
    pub integral_f: f64,
    pub integral_g: f64,
    pub integral_f_squared: f64,
    pub integral_fg: f64,
    pub sup_f_conv_g_reflected: f64,
    pub sup_f_conv_g: f64,
    /// `∫(f ⋆ ḡ) / ∫ḡ²`.
    pub asplund_bound: f64,
    pub checks: Vec<BoundCheck>,
}

impl BoundReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn lower(name: &str, bound: f64, value: f64, tol: f64) -> BoundCheck {
    let margin = (value * (1.0 + tol) - bound) / bound.abs().max(1e-300);
    BoundCheck { name: name.into(), side: "lower".into(), bound, value, margin, pass: margin >= 0.0 }
}

fn upper(name: &str, bound: f64, value: f64, tol: f64) -> BoundCheck {
    let margin = (bound * (1.0 + tol) - value) / bound.abs().max(1e-300);
    BoundCheck { name: name.into(), side: "upper".into(), bound, value, margin, pass: margin >= 0.0 }
}

/// Index offsets of a lattice with `p` points per axis inside its doubled lattice (`2p-1` per axis).
struct Lattices {
    q: GridSpec,
    d: GridSpec,
}

impl Lattices {
    fn new(dim: usize, radius: f64) -> Result<Self> {
        let p = quadrature_points(dim);
        let q = GridSpec::symmetric(dim, p, radius)?;
        let d = GridSpec::new(dim, 2 * p - 1, q.spacing)?;
        Ok(Lattices { q, d })
    }

    /// Flat index in `d` of the node `q[a] - q[b]`, with `b` read in `d` coordinates shifted by `shift`.
    fn difference(&self, a: &[usize; 3], b: &[usize; 3], shift: i64) -> Option<usize> {
        let n = self.q.dim;
        let size = self.d.points_per_axis as i64;
        let mut idx = [0usize; 3];
        for k in 0..n {
            let v = a[k] as i64 - b[k] as i64 + shift;
            if v < 0 || v >= size {
                return None;
            }
            idx[k] = v as usize;
        }
        Some(self.d.flat_index(&idx[..n]))
    }
}

/// Integral bounds around `N(f, g)`, each checked against the covering value with relative tolerance `tol`.
pub fn bound_suite(f: &LogConcaveFunction, g: &LogConcaveFunction, cfg: &CoverConfig, tol: f64) -> Result<BoundReport> {
    crate::error::check_dim(f.dim(), g.dim())?;
    let n = f.dim();
    let cover = functional_covering(f, g, cfg)?;
    let radius = |h: &LogConcaveFunction| h.level_radius(TAIL_LEVEL + h.base_min());
    let lat = Lattices::new(n, 1.05 * radius(f).max(radius(g)))?;
    let (q, d) = (&lat.q, &lat.d);
    let fq: Vec<f64> = q.nodes().map(|x| f.value(&x)).collect();
    let wq: Vec<f64> = (0..q.len()).map(|i| q.trapezoid_weight(i)).collect();
    let gq: Vec<f64> = q.nodes().map(|x| g.value(&x)).collect();
    let gd: Vec<f64> = d.nodes().map(|x| g.value(&x)).collect();
    let integral = |v: &dyn Fn(usize) -> f64| (0..q.len()).map(|i| wq[i] * v(i)).sum::<f64>();
    let integral_f = integral(&|i| fq[i]);
    let integral_g = integral(&|i| gq[i]);
    let integral_f_squared = integral(&|i| fq[i] * fq[i]);
    let integral_fg = integral(&|i| fq[i] * gq[i]);
    let integral_g_squared = integral(&|i| gq[i] * gq[i]);
    let p = q.points_per_axis as i64;
    let support: Vec<usize> = (0..q.len()).filter(|&i| fq[i] > 0.0).collect();
    let idx: Vec<[usize; 3]> = (0..q.len()).map(|i| q.multi_index(i)).collect();
    // (f∗ḡ)(x) = ∫f(y) g(y-x) dy and (f∗g)(x) = ∫f(y) g(x-y) dy at lattice nodes x
    let (sup_reflected, sup_plain) = (0..q.len())
        .into_par_iter()
        .map(|xi| {
            let mut a = 0.0;
            let mut b = 0.0;
            for &yi in &support {
                let w = wq[yi] * fq[yi];
                if let Some(k) = lat.difference(&idx[yi], &idx[xi], p - 1) {
                    a += w * gd[k];
                }
                if let Some(k) = lat.difference(&idx[xi], &idx[yi], p - 1) {
                    b += w * gd[k];
                }
            }
            (a, b)
        })
        .reduce(|| (0.0f64, 0.0f64), |u, v| (u.0.max(v.0), u.1.max(v.1)));
    // (f ⋆ ḡ)(x) = sup_y f(y) g(y-x) for x on the doubled lattice
    let half = (p - 1) / 2;
    let asplund_integral: f64 = (0..d.len())
        .into_par_iter()
        .map(|xi| {
            let c = d.multi_index(xi);
            let best = support
                .iter()
                .filter_map(|&yi| lat.difference(&idx[yi], &c, 2 * (p - 1) - half).map(|k| fq[yi] * gd[k]))
                .fold(0.0f64, f64::max);
            d.trapezoid_weight(xi) * best
        })
        .sum();
    let asplund_bound = asplund_integral / integral_g_squared;
    let value = cover.primal_value;
    let dim_factor = 2f64.powi(n as i32);
    let mut checks = vec![
        lower("integral_ratio", integral_f / integral_g, value, tol),
        upper("asplund_p2", asplund_bound, value, tol),
    ];
    if f.is_geometric() && g.is_geometric() {
        checks.push(lower("convolution_lower", integral_f_squared / sup_reflected, value, tol));
        checks.push(upper("convolution_upper", dim_factor * integral_f_squared / sup_plain, value, tol));
        if f.is_even() && g.is_even() {
            checks.push(lower("even_lower", integral_f_squared / integral_fg, value, tol));
            checks.push(upper("even_upper", dim_factor * integral_f_squared / integral_fg, value, tol));
        }
    }
    Ok(BoundReport {
        lp_value: value,
        lp_gap: cover.gap,
        integral_f,
        integral_g,
        integral_f_squared,
        integral_fg,
        sup_f_conv_g_reflected: sup_reflected,
        sup_f_conv_g: sup_plain,
        asplund_bound,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::ClosedFormKind;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn gaussian_pair() {
        let g = LogConcaveFunction::gaussian(1);
        let r = bound_suite(&g, &g, &CoverConfig::default(), 0.02).unwrap();
        assert!(r.all_pass(), "{:?}", r.checks);
        assert_relative_eq!(r.integral_f_squared, PI.sqrt(), max_relative = 1e-8);
        assert_relative_eq!(r.sup_f_conv_g_reflected, PI.sqrt(), max_relative = 1e-8);
        // f ⋆ f = e^{-x²/4}: ∫ = 2√π over ∫f² = √π
        assert_relative_eq!(r.asplund_bound, 2.0, max_relative = 1e-3);
        assert_eq!(r.checks.len(), 6);
    }

    #[test]
    fn exponential_against_gaussian() {
        let f = LogConcaveFunction::from_kind(ClosedFormKind::ExpEuclideanNorm, &[1.0], 1).unwrap();
        let g = LogConcaveFunction::gaussian(1);
        let r = bound_suite(&f, &g, &CoverConfig::default(), 0.02).unwrap();
        assert!(r.all_pass(), "{:?}", r.checks);
        let even = r.checks.iter().find(|c| c.name == "even_lower").unwrap();
        assert!(even.bound <= r.lp_value);
    }

    #[test]
    fn interval_ratio_is_attained() {
        let f = LogConcaveFunction::from_kind(ClosedFormKind::IndicatorCube, &[1.0], 1).unwrap().shift(&[1.0]).unwrap();
        let g = LogConcaveFunction::from_kind(ClosedFormKind::IndicatorCube, &[0.5], 1).unwrap();
        let cfg = CoverConfig { spacing: Some(0.01), ..CoverConfig::default() };
        let r = bound_suite(&f, &g, &cfg, 0.02).unwrap();
        assert!((r.integral_f / r.integral_g - 2.0).abs() < 0.01);
        assert!((r.lp_value - 2.0).abs() <= 0.02);
        assert!(r.all_pass(), "{:?}", r.checks);
    }
}
