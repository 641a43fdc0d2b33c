use std::sync::Arc;

use statrs::function::gamma::ln_gamma;

use super::report::SuiteReport;
use crate::bodies::{ball_body, inclusion_factor, level_set_body, DirectionSet, RadialBody};
use crate::error::Result;
use crate::functions::LogConcaveFunction;
use crate::isotropic::{is_isotropic, isotropize};
use crate::transforms::{legendre_dual, polar_dual, scaled_polar};

/// Multiplicative slack on every inclusion.
pub const INCLUSION_TOL: f64 = 1.01;

/// Directions per body; finer than the default on the sphere, where sampled hulls miss corners.
pub fn suite_directions(dim: usize) -> usize {
    match dim {
        3 => 8192,
        d => crate::bodies::directions::default_direction_count(d),
    }
}

/// `Γ(t+1)^{1/t}`.
fn gamma_root(t: f64) -> f64 {
    (ln_gamma(t + 1.0) / t).exp()
}

struct Checker<'a> {
    report: &'a mut SuiteReport,
    tol: f64,
}

impl Checker<'_> {
    /// `a·A ⊆ b·B`, checked as `a·c(A,B)/b ≤ tol`.
    fn inclusion(&mut self, id: &str, anchor: &str, a: f64, inner: &Result<RadialBody>, b: f64, outer: &Result<RadialBody>) -> Result<()> {
        match (inner, outer) {
            (Ok(k), Ok(t)) => {
                let factor = a * inclusion_factor(k, t)? / b;
                self.report.at_most(id, anchor, factor, self.tol)
            }
            (Err(e), _) | (_, Err(e)) => self.report.failed(id, anchor, e),
        }
    }
}

/// Geometric isotropic version of `f`, leaving already-normalized input untouched.
pub fn normalized(f: &LogConcaveFunction) -> Result<LogConcaveFunction> {
    if f.is_geometric() && is_isotropic(f, 1e-4)? {
        return Ok(f.clone());
    }
    Ok(isotropize(f)?.0)
}

/// Every inclusion between level-set bodies, Ball bodies and polars of `f`, with measured factors.
pub fn run_inclusion_suite(f: &LogConcaveFunction) -> Result<SuiteReport> {
    run_inclusion_suite_with(f, INCLUSION_TOL)
}

pub fn run_inclusion_suite_with(f: &LogConcaveFunction, tol: f64) -> Result<SuiteReport> {
    let f = normalized(f)?;
    let n = f.dim();
    let nf = n as f64;
    let dirs = Arc::new(DirectionSet::with_count(n, suite_directions(n))?);
    let mut report = SuiteReport::new("inclusion");
    report.grid("directions", dirs.len()).tolerance("inclusion", tol);
    let r = |t: f64| level_set_body(&f, t, &dirs);
    let k = |t: f64| ball_body(&f, t, &dirs);
    let polar = |b: &Result<RadialBody>| b.as_ref().map_err(clone_err).and_then(|b| b.polar());
    let big = 50.0 * nf;
    let rf = r(big);
    let rf_polar = polar(&rf);
    let k_n1 = k(nf + 1.0);
    let mut c = Checker { report: &mut report, tol };

    // level sets against Ball bodies
    for (t, s) in [(1.0, 1.0), (1.0, nf + 1.0), (nf, 2.0 * nf), (big, big)] {
        c.inclusion(
            &format!("level_in_ball_body[t={t},s={s}]"),
            "R_t(f) ⊆ e^{t/s} K_s(f) for s ≥ t > 0",
            1.0,
            &r(t),
            (t / s).exp(),
            &k(s),
        )?;
    }
    for t in [4.0 * nf, 10.0 * nf] {
        let kt = k(t);
        let r5 = r(5.0 * t);
        c.inclusion(
            &format!("ball_body_in_level[t={t}]"),
            "(1 - 2n/t) K_t(f) ⊆ R_{5t}(f) for t ≥ 2n",
            1.0 - 2.0 * nf / t,
            &kt,
            1.0,
            &r5,
        )?;
        if f.is_even() {
            c.inclusion(
                &format!("ball_body_in_level_even[t={t}]"),
                "(1 - e^{-t}) K_t(f) ⊆ R_{5t}(f) for even f and t ≥ 2n",
                1.0 - (-t).exp(),
                &kt,
                1.0,
                &r5,
            )?;
        }
    }

    // monotonicity of Ball bodies in the order
    let sup_ratio = f.sup_norm() / f.value(&vec![0.0; n]);
    c.report.at_most("sup_over_center", "‖f‖_∞ / f(0) ≤ eⁿ for centered log-concave f", sup_ratio, nf.exp())?;
    for (t, s) in [(1.0, nf + 1.0), (nf + 1.0, 10.0 * nf), (nf + 1.0, big)] {
        let (kt, ks) = (k(t), k(s));
        c.inclusion(
            &format!("ball_body_orders_lower[t={t},s={s}]"),
            "Γ(t+1)^{1/t}/Γ(s+1)^{1/s} K_s(f) ⊆ K_t(f) for 0 < t ≤ s",
            gamma_root(t) / gamma_root(s),
            &ks,
            1.0,
            &kt,
        )?;
        c.inclusion(
            &format!("ball_body_orders_upper[t={t},s={s}]"),
            "K_t(f) ⊆ (‖f‖_∞/f(0))^{1/t-1/s} K_s(f) for 0 < t ≤ s",
            1.0,
            &kt,
            sup_ratio.powf(1.0 / t - 1.0 / s),
            &ks,
        )?;
    }

    // R_f against K_{n+1}
    let alpha1 = std::f64::consts::E * gamma_root(big) / gamma_root(nf + 1.0);
    let alpha2 = 4.0 / (5.0 * std::f64::consts::E);
    let k_big = k(big);
    let k_10 = k(10.0 * nf);
    c.inclusion("rf_in_ball_body_50n", "R_f ⊆ e K_{50n}(f)", 1.0, &rf, std::f64::consts::E, &k_big)?;
    c.inclusion("rf_upper", "R_f ⊆ α₁ K_{n+1}(f), α₁ = e Γ(50n+1)^{1/50n} / Γ(n+2)^{1/(n+1)}", 1.0, &rf, alpha1, &k_n1)?;
    c.inclusion("rf_lower_step", "(4/5e) K_{n+1}(f) ⊆ (4/5) K_{10n}(f)", alpha2, &k_n1, 0.8, &k_10)?;
    c.inclusion("rf_ball_body_10n", "(4/5) K_{10n}(f) ⊆ R_{50n}(f)", 0.8, &k_10, 1.0, &rf)?;
    c.inclusion("rf_lower", "α₂ K_{n+1}(f) ⊆ R_f, α₂ = 4/(5e)", alpha2, &k_n1, 1.0, &rf)?;

    // level sets of the Legendre dual against polars of level sets
    let dual = legendre_dual(&f);
    let r_dual = |t: f64| match &dual {
        Ok(d) => level_set_body(d, t, &dirs),
        Err(e) => Err(clone_err(e)),
    };
    for (t, s) in [(1.0, 1.0), (nf, 2.0 * nf), (big, big)] {
        let lt = r_dual(t);
        c.inclusion(
            &format!("legendre_level_lower[t={t}]"),
            "t {φ ≤ t}° ⊆ {ℒφ ≤ t}",
            t,
            &polar(&r(t)),
            1.0,
            &lt,
        )?;
        c.inclusion(
            &format!("legendre_level_upper[t={t},s={s}]"),
            "{ℒφ ≤ t} ⊆ (t + s) {φ ≤ s}°",
            1.0,
            &lt,
            t + s,
            &polar(&r(s)),
        )?;
    }
    let r_star = r_dual(big);
    c.inclusion("dual_level_lower", "50n (R_f)° ⊆ R_{f*}", big, &rf_polar, 1.0, &r_star)?;
    c.inclusion("dual_level_upper", "R_{f*} ⊆ 100n (R_f)°", 1.0, &r_star, 2.0 * big, &rf_polar)?;
    let r51 = r(51.0 * nf);
    c.inclusion("dual_level_shifted", "50n (R_{51n}(f))° ⊆ R_{f*}", big, &polar(&r51), 1.0, &r_star)?;
    c.inclusion("level_51n", "R_{51n}(f) ⊆ (51/50) R_f", 1.0, &r51, 51.0 / 50.0, &rf)?;

    // polarity transform
    let pol = polar_dual(&f);
    let r_pol = |t: f64| match &pol {
        Ok(p) => level_set_body(p, t, &dirs),
        Err(e) => Err(clone_err(e)),
    };
    for t in [0.5, 1.0, 2.0] {
        let inner = polar(&r(1.0 / t));
        let lt = r_pol(t);
        c.inclusion(&format!("polar_level_lower[t={t}]"), "({φ < 1/t})° ⊆ {φ° ≤ t}", 1.0, &inner, 1.0, &lt)?;
        c.inclusion(&format!("polar_level_upper[t={t}]"), "{φ° ≤ t} ⊆ 2 ({φ < 1/t})°", 1.0, &lt, 2.0, &inner)?;
    }
    let small = r_pol(1.0 / big);
    c.inclusion("polar_rf_lower", "(R_f)° ⊆ {φ° ≤ 1/(50n)}", 1.0, &rf_polar, 1.0, &small)?;
    c.inclusion("polar_rf_upper", "{φ° ≤ 1/(50n)} ⊆ 2 (R_f)°", 1.0, &small, 2.0, &rf_polar)?;
    let r_a = match scaled_polar(&f, n) {
        Ok(fa) => level_set_body(&fa, big, &dirs),
        Err(e) => Err(e),
    };
    c.inclusion("scaled_polar_lower", "n (R_f)° ⊆ R_{f_𝒜}", nf, &rf_polar, 1.0, &r_a)?;
    c.inclusion("scaled_polar_upper", "R_{f_𝒜} ⊆ 2n (R_f)°", 1.0, &r_a, 2.0 * nf, &rf_polar)?;
    Ok(report)
}

fn clone_err(e: &crate::Error) -> crate::Error {
    crate::Error::Estimation(e.to_string())
}
