//! Legendre and polarity transforms of geometric convex potentials.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::functions::grid::lower_hull;
use crate::functions::{Backing, Canonical, GridPotential, GridSpec, LogConcaveFunction};

/// Margin applied to the estimated maximal slope when sizing a dual lattice.
pub const SLOPE_MARGIN: f64 = 1.25;

/// Slack on `⟨x, y⟩ > 1` at zeros of the potential.
const POLAR_SLACK: f64 = 1e-12;

/// A primal lattice together with the slope-space lattice of its transforms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualGridPair {
    pub primal: GridSpec,
    pub dual: GridSpec,
}

impl DualGridPair {
    /// Dual lattice with `points` per axis spanning `SLOPE_MARGIN` times the largest finite slope of `phi`.
    /// Potentials without finite slopes (indicators) get a dual lattice as wide as the primal one.
    pub fn for_potential(phi: &GridPotential, points: usize) -> Result<Self> {
        let slope = max_slope(phi);
        let extent = if slope > 0.0 { SLOPE_MARGIN * slope } else { phi.grid().half_extent() };
        Ok(DualGridPair { primal: phi.grid().clone(), dual: GridSpec::symmetric(phi.dim(), points, extent)? })
    }

    /// Whether every finite slope of `phi` lies inside the dual lattice.
    pub fn covers_slopes(&self, phi: &GridPotential) -> bool {
        max_slope(phi) <= self.dual.half_extent() * (1.0 + 1e-12)
    }
}

/// Largest one-sided difference quotient between finite neighbouring nodes along any axis.
pub fn max_slope(phi: &GridPotential) -> f64 {
    let g = phi.grid();
    let raw = phi.raw();
    let p = g.points_per_axis;
    let mut best = 0.0f64;
    for i in 0..g.len() {
        if !raw[i].is_finite() {
            continue;
        }
        let idx = g.multi_index(i);
        for a in 0..g.dim {
            if idx[a] + 1 < p {
                let mut j = idx;
                j[a] += 1;
                let v = raw[g.flat_index(&j)];
                if v.is_finite() {
                    best = best.max((v - raw[i]).abs() / g.spacing);
                }
            }
        }
    }
    best
}

/// Discrete Legendre transform `(ℒφ)(y) = max_x ⟨x, y⟩ - φ(x)` over primal nodes, at each dual node.
pub fn legendre(phi: &GridPotential, dual: &GridSpec) -> Result<GridPotential> {
    check_dim(phi.dim(), dual.dim)?;
    dual.validate()?;
    let g = phi.grid();
    let finite: Vec<(Vec<f64>, f64)> = (0..g.len())
        .filter(|&i| phi.raw()[i].is_finite())
        .map(|i| (g.node(i), phi.raw()[i]))
        .collect();
    if finite.is_empty() {
        return Err(Error::input("potential is identically +inf"));
    }
    let values = (0..dual.len())
        .into_par_iter()
        .map(|j| {
            let y = dual.node(j);
            finite
                .iter()
                .map(|(x, v)| dot(x, &y) - v)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    GridPotential::from_raw(dual.clone(), values)
}

/// One-dimensional Legendre transform in linear time: lower convex hull plus a monotone slope sweep.
pub fn legendre_1d_fast(phi: &GridPotential, dual: &GridSpec) -> Result<GridPotential> {
    if phi.dim() != 1 || dual.dim != 1 {
        return Err(Error::input("legendre_1d_fast needs one-dimensional grids"));
    }
    dual.validate()?;
    let g = phi.grid();
    let pts: Vec<(f64, f64)> = (0..g.len())
        .filter(|&i| phi.raw()[i].is_finite())
        .map(|i| (g.axis_coord(0, i), phi.raw()[i]))
        .collect();
    if pts.is_empty() {
        return Err(Error::input("potential is identically +inf"));
    }
    let hull = lower_hull(&pts);
    let mut k = 0;
    let values = (0..dual.len())
        .map(|j| {
            let y = dual.axis_coord(0, j);
            let val = |i: usize| hull[i].0 * y - hull[i].1;
            while k + 1 < hull.len() && val(k + 1) >= val(k) {
                k += 1;
            }
            val(k)
        })
        .collect();
    GridPotential::from_raw(dual.clone(), values)
}

/// Polarity transform `φ°(x) = sup_{φ(y) > 0} (⟨x, y⟩ - 1) / φ(y)`, `+∞` when a zero `y` of `φ`
/// has `⟨x, y⟩ > 1`, clamped below at 0.
pub fn polar_transform(phi: &GridPotential, out: &GridSpec) -> Result<GridPotential> {
    check_dim(phi.dim(), out.dim)?;
    out.validate()?;
    let g = phi.grid();
    let mut zeros = Vec::new();
    let mut positive = Vec::new();
    for i in 0..g.len() {
        let v = phi.raw()[i];
        if v <= 0.0 {
            zeros.push(g.node(i));
        } else if v.is_finite() {
            positive.push((g.node(i), v));
        }
    }
    let values = (0..out.len())
        .into_par_iter()
        .map(|j| {
            let x = out.node(j);
            if zeros.iter().any(|y| dot(&x, y) > 1.0 + POLAR_SLACK) {
                return f64::INFINITY;
            }
            positive
                .iter()
                .map(|(y, v)| (dot(&x, y) - 1.0) / v)
                .fold(0.0f64, f64::max)
        })
        .collect();
    GridPotential::from_raw(out.clone(), values)
}

/// Bound on the truncation error of the sampled polarity transform when the primal lattice
/// stops at radius `y_max` and `f ≤ A e^{-B|x|}`.
pub fn polar_truncation_bound(b: f64, y_max: f64) -> f64 {
    1.0 / (b * y_max)
}

/// Outer and inner factors of the scaled polar `φ_𝒜(x) = outer · φ°(x / inner)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolarScales {
    pub outer: f64,
    pub inner: f64,
}

impl PolarScales {
    /// `outer = (50n)²`, `inner = n`.
    pub fn standard(n: usize) -> Self {
        let n = n as f64;
        PolarScales { outer: (50.0 * n).powi(2), inner: n }
    }
}

fn require_geometric(f: &LogConcaveFunction) -> Result<()> {
    if !f.is_geometric() {
        return Err(Error::Normalization(
            "transforms need a geometric function (f(0) = max f = 1, no translation)".into(),
        ));
    }
    Ok(())
}

/// `M^{-T}` for the effective map `M` of `f`.
fn inverse_transpose(f: &LogConcaveFunction) -> DMatrix<f64> {
    f.effective_map().try_inverse().expect("maps are invertible").transpose()
}

fn closed_form_image(f: &LogConcaveFunction, canonical: Canonical) -> Result<LogConcaveFunction> {
    LogConcaveFunction::from_canonical(canonical, f.dim()).apply_linear(&inverse_transpose(f))
}

/// Legendre dual `f* = e^{-ℒφ}`; exact for closed forms, sampled otherwise.
pub fn legendre_dual(f: &LogConcaveFunction) -> Result<LogConcaveFunction> {
    require_geometric(f)?;
    match f.backing() {
        Backing::ClosedForm { canonical, .. } => closed_form_image(f, canonical.legendre()),
        Backing::Grid(_) => {
            let primal = native_grid(f)?;
            let phi = f.sample_potential(&primal)?;
            let pair = DualGridPair::for_potential(&phi, primal.points_per_axis)?;
            Ok(LogConcaveFunction::from_grid(legendre(&phi, &pair.dual)?))
        }
    }
}

/// `e^{-φ°}`; exact for closed forms, sampled otherwise.
pub fn polar_dual(f: &LogConcaveFunction) -> Result<LogConcaveFunction> {
    require_geometric(f)?;
    match f.backing() {
        Backing::ClosedForm { canonical, .. } => closed_form_image(f, canonical.polar()),
        Backing::Grid(_) => {
            let primal = native_grid(f)?;
            let phi = f.sample_potential(&primal)?;
            let out = polar_output_grid(&phi)?;
            Ok(LogConcaveFunction::from_grid(polar_transform(&phi, &out)?))
        }
    }
}

/// `f_𝒜 = e^{-φ_𝒜}` with `φ_𝒜(x) = (50n)² φ°(x/n)`.
pub fn scaled_polar(f: &LogConcaveFunction, n: usize) -> Result<LogConcaveFunction> {
    scaled_polar_with(f, PolarScales::standard(n))
}

pub fn scaled_polar_with(f: &LogConcaveFunction, scales: PolarScales) -> Result<LogConcaveFunction> {
    if !(scales.outer > 0.0 && scales.inner > 0.0) {
        return Err(Error::input("polar scales must be positive"));
    }
    let polar = polar_dual(f)?;
    let scaled = match polar.backing() {
        Backing::ClosedForm { canonical, .. } => {
            LogConcaveFunction::from_canonical(scale_canonical(*canonical, scales.outer), f.dim())
                .apply_linear(polar.linear_map())?
        }
        Backing::Grid(g) => LogConcaveFunction::from_grid(g.scaled(scales.outer)),
    };
    scaled.dilate(scales.inner)
}

fn scale_canonical(c: Canonical, k: f64) -> Canonical {
    match c {
        Canonical::Indicator { .. } => c,
        Canonical::Linear { p, c } => Canonical::Linear { p, c: c * k },
        Canonical::Quadratic { p, c } => Canonical::Quadratic { p, c: c * k },
    }
}

/// Sampled Legendre dual on explicit lattices, regardless of backing.
pub fn legendre_dual_sampled(f: &LogConcaveFunction, primal: &GridSpec, dual: &GridSpec) -> Result<LogConcaveFunction> {
    require_geometric(f)?;
    let phi = f.sample_potential(primal)?;
    Ok(LogConcaveFunction::from_grid(legendre(&phi, dual)?))
}

/// Sampled `e^{-φ°}` on explicit lattices, regardless of backing.
pub fn polar_dual_sampled(f: &LogConcaveFunction, primal: &GridSpec, out: &GridSpec) -> Result<LogConcaveFunction> {
    require_geometric(f)?;
    let phi = f.sample_potential(primal)?;
    Ok(LogConcaveFunction::from_grid(polar_transform(&phi, out)?))
}

/// The backing lattice of a grid function with trivial map, otherwise its sampling lattice.
fn native_grid(f: &LogConcaveFunction) -> Result<GridSpec> {
    match f.backing() {
        Backing::Grid(g) if f.effective_map() == DMatrix::identity(f.dim(), f.dim()) => Ok(g.grid().clone()),
        _ => f.sampling_grid(crate::functions::grid::default_points(f.dim())),
    }
}

/// Output lattice for a sampled polar: the polar of the primal hull's inner ball is contained in
/// the support of `φ°` near zero, so span the reciprocal of the smallest sampled radius of `{φ ≤ 1}`.
fn polar_output_grid(phi: &GridPotential) -> Result<GridSpec> {
    let g = phi.grid();
    let mut r_min = g.half_extent();
    for i in 0..g.len() {
        let v = phi.raw()[i];
        if v > 1.0 || v.is_infinite() {
            let x = g.node(i);
            r_min = r_min.min(dot(&x, &x).sqrt());
        }
    }
    let extent = (4.0 / r_min.max(g.spacing)).max(1.0);
    GridSpec::symmetric(g.dim, g.points_per_axis, extent)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{ClosedFormKind, ExtReal};
    use approx::assert_relative_eq;

    fn sample(grid: &GridSpec, phi: impl Fn(&[f64]) -> f64 + Sync) -> GridPotential {
        GridPotential::from_fn(grid.clone(), |x| ExtReal::new(phi(x)).unwrap()).unwrap()
    }

    #[test]
    fn gaussian_is_self_dual() {
        let grid = GridSpec::symmetric(1, 257, 8.0).unwrap();
        let h = grid.spacing;
        let phi = sample(&grid, |x| 0.5 * x[0] * x[0]);
        let dual = GridSpec::symmetric(1, 257, 6.0).unwrap();
        let l = legendre(&phi, &dual).unwrap();
        for (j, v) in l.values().enumerate() {
            let y = dual.node(j)[0];
            assert!((v.get() - 0.5 * y * y).abs() <= 2.0 * h);
        }
        assert_eq!(l.value(dual.origin_index().unwrap()).get(), 0.0);
    }

    #[test]
    fn indicator_interval_gives_absolute_value() {
        let grid = GridSpec::symmetric(1, 201, 2.0).unwrap();
        let phi = sample(&grid, |x| if x[0].abs() <= 1.0 + 1e-12 { 0.0 } else { f64::INFINITY });
        let dual = GridSpec::symmetric(1, 101, 5.0).unwrap();
        let l = legendre(&phi, &dual).unwrap();
        for (j, v) in l.values().enumerate() {
            assert_relative_eq!(v.get(), dual.node(j)[0].abs(), epsilon = 1e-12);
        }
    }

    #[test]
    fn quartic_at_slope_four() {
        // brute-force oracle: max over a fine grid of 4x - x⁴, attained at x = 1
        let oracle = (0..=200_000)
            .map(|i| -3.0 + 6.0 * i as f64 / 200_000.0)
            .map(|x| 4.0 * x - x.powi(4))
            .fold(f64::NEG_INFINITY, f64::max);
        assert_relative_eq!(oracle, 3.0, epsilon = 1e-8);
        let grid = GridSpec::symmetric(1, 2001, 2.0).unwrap();
        let phi = sample(&grid, |x| x[0].powi(4));
        let dual = GridSpec::new(1, 9, 1.0).unwrap();
        let slow = legendre(&phi, &dual).unwrap();
        let fast = legendre_1d_fast(&phi, &dual).unwrap();
        let at4 = dual.flat_index(&[8]);
        assert_relative_eq!(slow.value(at4).get(), oracle, epsilon = 1e-6);
        assert_relative_eq!(fast.value(at4).get(), oracle, epsilon = 1e-6);
    }

    #[test]
    fn fast_legendre_matches_brute_force() {
        let grid = GridSpec::symmetric(1, 100_001, 10.0).unwrap();
        let phi = sample(&grid, |x| 0.5 * x[0] * x[0]);
        let dual = GridSpec::symmetric(1, 2001, 8.0).unwrap();
        let slow = legendre(&phi, &dual).unwrap();
        let fast = legendre_1d_fast(&phi, &dual).unwrap();
        let diff = slow.raw().iter().zip(fast.raw()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-12, "diff {diff}");
        let abs = sample(&GridSpec::symmetric(1, 101, 5.0).unwrap(), |x| x[0].abs());
        let d = GridSpec::symmetric(1, 21, 2.0).unwrap();
        let l = legendre_1d_fast(&abs, &d).unwrap();
        for (j, v) in l.values().enumerate() {
            let y = d.node(j)[0];
            if y.abs() <= 1.0 + 1e-12 {
                assert!(v.get().abs() < 1e-12);
            } else {
                assert!(v.get() >= (y.abs() - 1.0) * 5.0 - 1e-9);
            }
        }
    }

    #[test]
    fn polar_of_cube_indicator_is_cross_polytope_indicator() {
        let grid = GridSpec::symmetric(2, 41, 2.0).unwrap();
        let phi = sample(&grid, |x| if x.iter().all(|v| v.abs() <= 1.0 + 1e-12) { 0.0 } else { f64::INFINITY });
        let out = GridSpec::symmetric(2, 41, 2.0).unwrap();
        let polar = polar_transform(&phi, &out).unwrap();
        for (j, v) in polar.values().enumerate() {
            let x = out.node(j);
            let inside = x[0].abs() + x[1].abs() <= 1.0 + 1e-9;
            assert_eq!(v.is_finite(), inside, "x={x:?}");
            if inside {
                assert_eq!(v.get(), 0.0);
            }
        }
    }

    #[test]
    fn polar_of_absolute_value() {
        // brute-force oracle over a very wide 1D grid; the sup is approached as |y| → ∞
        let wide = GridSpec::symmetric(1, 40_001, 2000.0).unwrap();
        let phi = sample(&wide, |x| x[0].abs());
        let out = GridSpec::symmetric(1, 81, 2.0).unwrap();
        let polar = polar_transform(&phi, &out).unwrap();
        let h = out.spacing;
        for (j, v) in polar.values().enumerate() {
            let x = out.node(j)[0];
            let oracle = (1..=40_000)
                .map(|i| i as f64 * 0.05 * x.signum())
                .map(|y| (x * y - 1.0) / y.abs())
                .fold(0.0f64, f64::max);
            assert!((v.get() - x.abs()).abs() <= 2.0 * h);
            assert!((v.get() - oracle).abs() <= 1e-3 + 1e-12);
        }
        let quad = sample(&GridSpec::symmetric(1, 101, 5.0).unwrap(), |x| 0.5 * x[0] * x[0]);
        let at0 = polar_transform(&quad, &GridSpec::symmetric(1, 3, 1.0).unwrap()).unwrap();
        assert_eq!(at0.value(1).get(), 0.0);
    }

    #[test]
    fn order_reversal() {
        let grid = GridSpec::symmetric(2, 21, 3.0).unwrap();
        let phi = sample(&grid, |x| x[0].abs() + x[1] * x[1]);
        let psi = sample(&grid, |x| 2.0 * x[0].abs() + x[1] * x[1] + x[0] * x[0]);
        let out = GridSpec::symmetric(2, 15, 2.0).unwrap();
        let (lp, lq) = (legendre(&phi, &out).unwrap(), legendre(&psi, &out).unwrap());
        let (ap, aq) = (polar_transform(&phi, &out).unwrap(), polar_transform(&psi, &out).unwrap());
        for i in 0..out.len() {
            assert!(lp.value(i) >= lq.value(i));
            assert!(ap.value(i) >= aq.value(i));
        }
    }

    #[test]
    fn dilation_covariance() {
        let grid = GridSpec::symmetric(1, 401, 4.0).unwrap();
        let phi = sample(&grid, |x| x[0].powi(2) + x[0].abs());
        let t = 2.0;
        let wide = GridSpec::symmetric(1, 401, 8.0).unwrap();
        let phi_t = sample(&wide, |x| {
            let s = x[0] / t;
            s * s + s.abs()
        });
        let dual = GridSpec::symmetric(1, 41, 2.0).unwrap();
        let dual_t = GridSpec::symmetric(1, 41, 4.0).unwrap();
        let a = legendre(&phi_t, &dual).unwrap();
        let b = legendre(&phi, &dual_t).unwrap();
        for i in 0..dual.len() {
            assert_relative_eq!(a.value(i).get(), b.value(i).get(), epsilon = 1e-12);
        }
    }

    #[test]
    fn closed_form_duals() {
        let g = LogConcaveFunction::gaussian(2);
        let gs = legendre_dual(&g).unwrap();
        for x in [[0.0, 0.0], [1.0, -2.0]] {
            assert_relative_eq!(gs.value(&x), g.value(&x), max_relative = 1e-14);
        }
        let ball = LogConcaveFunction::from_kind(ClosedFormKind::IndicatorBall, &[1.0], 2).unwrap();
        let bs = legendre_dual(&ball).unwrap();
        assert_relative_eq!(bs.value(&[3.0, 4.0]), (-5.0f64).exp(), max_relative = 1e-14);
        let back = legendre_dual(&bs).unwrap();
        assert_eq!(back.value(&[0.6, 0.8]), 1.0);
        assert_eq!(back.value(&[0.7, 0.8]), 0.0);
        let cube = LogConcaveFunction::from_kind(ClosedFormKind::IndicatorCube, &[1.0], 2).unwrap();
        let fa = scaled_polar(&cube, 2).unwrap();
        assert_eq!(fa.value(&[1.0, 0.9]), 1.0);
        assert_eq!(fa.value(&[1.2, 0.9]), 0.0);
        assert_eq!(fa.value(&[0.0, 0.0]), 1.0);
    }

    #[test]
    fn linear_images_transform_contravariantly() {
        let t = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.0, 1.0]);
        let f = LogConcaveFunction::from_kind(ClosedFormKind::ExpPNorm, &[1.0, 1.0], 2)
            .unwrap()
            .apply_linear(&t)
            .unwrap();
        let exact = legendre_dual(&f).unwrap();
        let grid = GridSpec::symmetric(2, 129, 40.0).unwrap();
        let dual = GridSpec::symmetric(2, 65, 3.0).unwrap();
        let sampled = legendre(&f.sample_potential(&grid).unwrap(), &dual).unwrap();
        for j in 0..dual.len() {
            let y = dual.node(j);
            let e = exact.potential(&y);
            let s = sampled.raw()[j];
            if e == 0.0 {
                assert!(s.abs() < 1e-9, "y={y:?} s={s}");
            } else if e.is_infinite() {
                assert!(s > 0.0);
            }
        }
    }

    #[test]
    fn sampled_gaussian_scaled_polar_matches_brute_force() {
        // brute-force oracle for 𝒜(x²/2) at a few points, then scaled as in φ_𝒜
        let f = LogConcaveFunction::gaussian(1);
        let fa = scaled_polar(&f, 1).unwrap();
        for x in [0.01f64, 0.02, -0.03] {
            let oracle = (1..=400_000)
                .map(|i| i as f64 * 1e-3 * x.signum())
                .map(|y| (x * y - 1.0) / (0.5 * y * y))
                .fold(0.0f64, f64::max);
            let expected = (-(2500.0 * oracle)).exp();
            assert_relative_eq!(fa.value(&[x]), expected, max_relative = 1e-6);
        }
        assert_eq!(fa.value(&[0.0]), 1.0);
    }
}
