use std::sync::Arc;

use rayon::prelude::*;

use super::directions::DirectionSet;
use super::star::RadialBody;
use crate::error::{Error, Result};
use crate::functions::LogConcaveFunction;
use crate::quadrature::integrate;

/// Relative tolerance of the ray bisection.
pub const BISECTION_TOL: f64 = 1e-12;

/// Largest radius probed along a ray before declaring a body unbounded.
const RAY_CAP: f64 = 1e9;

/// Largest `r` along `u` where `pred(r)` holds, assuming `pred` holds on an initial segment.
fn ray_exit(u: &[f64], start: f64, pred: impl Fn(f64) -> bool) -> Result<f64> {
    let mut lo = 0.0;
    let mut hi = start;
    while pred(hi) {
        lo = hi;
        hi *= 2.0;
        if hi > RAY_CAP {
            return Err(Error::UnboundedBody { direction: u.to_vec() });
        }
    }
    if lo == 0.0 {
        // shrink until the predicate holds
        let mut probe = hi;
        loop {
            probe *= 0.5;
            if probe < 1e-300 {
                return Ok(0.0);
            }
            if pred(probe) {
                lo = probe;
                hi = 2.0 * probe;
                break;
            }
        }
    }
    while hi - lo > BISECTION_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

fn along(u: &[f64], r: f64) -> [f64; 3] {
    let mut x = [0.0; 3];
    for (xi, ui) in x.iter_mut().zip(u) {
        *xi = ui * r;
    }
    x
}

fn ray_start(f: &LogConcaveFunction, t: f64) -> f64 {
    let r = f.level_radius(t.max(1.0) + f.potential(&vec![0.0; f.dim()]));
    if r.is_finite() && r > 0.0 {
        r / 4.0
    } else {
        1.0
    }
}

/// `R_t(f) = {x : f(x) ≥ e^{-t} f(0)}`, by ray bisection.
pub fn level_set_body(f: &LogConcaveFunction, t: f64, dirs: &Arc<DirectionSet>) -> Result<RadialBody> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::input(format!("level must be positive, got {t}")));
    }
    crate::error::check_dim(f.dim(), dirs.dim)?;
    let n = f.dim();
    let phi0 = f.potential(&vec![0.0; n]);
    if !phi0.is_finite() {
        return Err(Error::input("f(0) must be positive"));
    }
    let start = ray_start(f, t);
    let rho = dirs
        .directions
        .par_iter()
        .map(|u| ray_exit(u, start, |r| f.potential(&along(u, r)[..n]) - phi0 <= t))
        .collect::<Result<Vec<_>>>()?;
    RadialBody::new(dirs.clone(), rho)
}

/// `‖x‖_{R_t(f)}`, with the boundary of the level set located by bisection along the ray through `x`.
pub fn level_gauge(f: &LogConcaveFunction, t: f64, x: &[f64]) -> Result<f64> {
    let n = f.dim();
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r == 0.0 {
        return Ok(0.0);
    }
    let u: Vec<f64> = x.iter().map(|v| v / r).collect();
    let phi0 = f.potential(&vec![0.0; n]);
    let exit = ray_exit(&u, ray_start(f, t), |s| f.potential(&along(&u, s)[..n]) - phi0 <= t)?;
    Ok(r / exit)
}

/// Last radius along `u` where the potential is finite (`∞` when it never leaves the domain).
fn support_radius(f: &LogConcaveFunction, u: &[f64], start: f64) -> f64 {
    let n = f.dim();
    match ray_exit(u, start, |r| f.potential(&along(u, r)[..n]).is_finite()) {
        Ok(r) => r,
        Err(_) => f64::INFINITY,
    }
}

/// `ln ∫₀^∞ t r^{t-1} e^{-ψ(r)} dr` for a convex non-decreasing `ψ` on `[0, r_sup]`,
/// integrated in `v = ln r` around the maximum of the log-integrand.
pub(crate) fn log_radial_integral(t: f64, psi: impl Fn(f64) -> f64, r_sup: f64) -> Result<f64> {
    let g = |v: f64| {
        let r = v.exp();
        if r > r_sup {
            f64::NEG_INFINITY
        } else {
            t * v - psi(r)
        }
    };
    let v_sup = if r_sup.is_finite() { r_sup.ln() } else { f64::INFINITY };
    // bracket the maximum of the concave log-integrand
    let mut hi = if v_sup.is_finite() { v_sup } else { 0.0 };
    if v_sup.is_infinite() {
        let mut steps = 0;
        while g(hi + 1.0) > g(hi) {
            hi += 1.0;
            steps += 1;
            if steps > 700 {
                return Err(Error::input("radial integral diverges"));
            }
        }
        hi += 1.0;
    }
    let mut lo = hi - 1.0;
    while g(lo - 1.0) >= g(lo) && lo > -700.0 {
        lo -= 1.0;
    }
    lo -= 1.0;
    let (mut a, mut b) = (lo, hi);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        if b - a < 1e-12 * (1.0 + a.abs()) {
            break;
        }
        let c = b - inv_phi * (b - a);
        let d = a + inv_phi * (b - a);
        if g(c) < g(d) {
            a = c;
        } else {
            b = d;
        }
    }
    let v_star = if g(hi) >= g(0.5 * (a + b)) { hi } else { 0.5 * (a + b) };
    let g_star = g(v_star);
    if !g_star.is_finite() {
        return Err(Error::input("radial integrand vanishes"));
    }
    const DROP: f64 = 45.0;
    let mut width = 1.0 / t;
    while g(v_star - width) - g_star > -DROP {
        width *= 2.0;
    }
    let v_lo = v_star - width;
    let v_hi = if v_star >= v_sup - 1e-15 {
        v_sup
    } else {
        let mut width = 1.0 / t;
        loop {
            let v = (v_star + width).min(v_sup);
            if v >= v_sup || g(v) - g_star <= -DROP {
                break v;
            }
            width *= 2.0;
        }
    };
    let integrand = |v: f64| {
        let e = g(v) - g_star;
        if e.is_finite() {
            t * e.exp()
        } else {
            0.0
        }
    };
    let res = integrate(integrand, v_lo, v_hi, 1e-11, 0.0, 4000);
    if !(res.value > 0.0) {
        return Err(Error::input("radial integral vanishes"));
    }
    Ok(g_star + res.value.ln())
}

/// Ball body `K_t(f)` with `ρ(u)^t = (1/f(0)) ∫₀^∞ t r^{t-1} f(ru) dr`.
pub fn ball_body(f: &LogConcaveFunction, t: f64, dirs: &Arc<DirectionSet>) -> Result<RadialBody> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::input(format!("order must be positive, got {t}")));
    }
    crate::error::check_dim(f.dim(), dirs.dim)?;
    let n = f.dim();
    let phi0 = f.potential(&vec![0.0; n]);
    if !phi0.is_finite() {
        return Err(Error::input("f(0) must be positive"));
    }
    let start = ray_start(f, 1.0);
    let rho = dirs
        .directions
        .par_iter()
        .map(|u| {
            let r_sup = support_radius(f, u, start);
            let psi = |r: f64| f.potential(&along(u, r)[..n]);
            let log = log_radial_integral(t, psi, r_sup)?;
            Ok(((log + phi0) / t).exp())
        })
        .collect::<Result<Vec<_>>>()?;
    RadialBody::new(dirs.clone(), rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::star::{PBall, StarBody};
    use crate::functions::ClosedFormKind;
    use approx::assert_relative_eq;

    fn dirs(dim: usize) -> Arc<DirectionSet> {
        Arc::new(DirectionSet::default_for(dim).unwrap())
    }

    #[test]
    fn gaussian_level_sets() {
        let g = LogConcaveFunction::gaussian(2);
        let r = level_set_body(&g, 100.0, &dirs(2)).unwrap();
        assert!(r.rho.iter().all(|v| (v - 10.0 * 2f64.sqrt()).abs() < 1e-9));
    }

    #[test]
    fn exponential_and_cube_level_sets() {
        let e = LogConcaveFunction::from_kind(ClosedFormKind::ExpEuclideanNorm, &[1.0], 2).unwrap();
        let r = level_set_body(&e, 3.0, &dirs(2)).unwrap();
        assert!(r.rho.iter().all(|v| (v - 3.0).abs() < 1e-9));
        let cube = LogConcaveFunction::from_kind(ClosedFormKind::IndicatorCube, &[1.0], 2).unwrap();
        let d = dirs(2);
        for t in [0.5, 7.0] {
            let r = level_set_body(&cube, t, &d).unwrap();
            for (u, v) in d.directions.iter().zip(&r.rho) {
                assert_relative_eq!(*v, 1.0 / u[0].abs().max(u[1].abs()), max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn unbounded_level_set_is_reported() {
        let g = LogConcaveFunction::gaussian(1);
        let flat = g.dilate(1e10).unwrap();
        assert!(matches!(level_set_body(&flat, 1.0, &dirs(1)), Err(Error::UnboundedBody { .. })));
    }

    #[test]
    fn ball_bodies_of_indicators_are_the_body() {
        let cube = LogConcaveFunction::from_kind(ClosedFormKind::IndicatorCube, &[1.0], 2).unwrap();
        let d = dirs(2);
        let shape = PBall::cube(2, 1.0);
        for t in [0.5, 3.0, 100.0] {
            let k = ball_body(&cube, t, &d).unwrap();
            for (u, v) in d.directions.iter().zip(&k.rho) {
                assert_relative_eq!(*v, shape.radial(u), max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn gaussian_ball_bodies() {
        // Gaussian radial moments: t ∫ r^{t-1} e^{-r²/2} dr = t 2^{t/2-1} Γ(t/2)
        for dim in 1..=3 {
            let g = LogConcaveFunction::gaussian(dim);
            let k = ball_body(&g, 2.0, &dirs(dim)).unwrap();
            assert!(k.rho.iter().all(|v| (v - 2f64.sqrt()).abs() < 1e-7));
        }
        let g = LogConcaveFunction::gaussian(1);
        let k = ball_body(&g, 4.0, &dirs(1)).unwrap();
        assert!(k.rho.iter().all(|v| (v - 8f64.powf(0.25)).abs() < 1e-7));
        let t = 150.0f64;
        let exact = ((t.ln() + (t / 2.0 - 1.0) * 2f64.ln() + statrs::function::gamma::ln_gamma(t / 2.0)) / t).exp();
        let k = ball_body(&g, t, &dirs(1)).unwrap();
        assert_relative_eq!(k.rho[0], exact, max_relative = 1e-8);
    }
}
