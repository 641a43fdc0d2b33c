//! Closed-form potentials built from `p`-norms.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, ln_gamma};

use super::extreal::ExtReal;
use crate::error::{Error, Result};

/// Relative slack on the boundary of indicator supports.
pub const INDICATOR_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosedFormKind {
    /// `[σ]`: `φ = |x|²/(2σ²)`.
    Gaussian,
    /// `[r]`: convex indicator of `r·B₂ⁿ`.
    IndicatorBall,
    /// `[w]`: convex indicator of `[-w, w]ⁿ`.
    IndicatorCube,
    /// `[s]`: `φ = |x|/s`.
    ExpEuclideanNorm,
    /// `[c]` or `[c, p]`: `φ = c‖x‖_p²`.
    Quadratic,
    /// `[p, s]`: `φ = ‖x‖_p / s`.
    ExpPNorm,
    /// `[p, r]`: convex indicator of `r·B_pⁿ`.
    IndicatorPBall,
}

impl ClosedFormKind {
    pub const ALL: [ClosedFormKind; 7] = [
        ClosedFormKind::Gaussian,
        ClosedFormKind::IndicatorBall,
        ClosedFormKind::IndicatorCube,
        ClosedFormKind::ExpEuclideanNorm,
        ClosedFormKind::Quadratic,
        ClosedFormKind::ExpPNorm,
        ClosedFormKind::IndicatorPBall,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClosedFormKind::Gaussian => "gaussian",
            ClosedFormKind::IndicatorBall => "indicator_ball",
            ClosedFormKind::IndicatorCube => "indicator_cube",
            ClosedFormKind::ExpEuclideanNorm => "exp_euclidean_norm",
            ClosedFormKind::Quadratic => "quadratic",
            ClosedFormKind::ExpPNorm => "exp_p_norm",
            ClosedFormKind::IndicatorPBall => "indicator_p_ball",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

/// A closed-form potential; JSON shape `{"kind": …, "params": […]}` with `"inf"` allowed for `p = ∞`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormSpec {
    pub kind: ClosedFormKind,
    #[serde(default)]
    pub params: Vec<ExtReal>,
}

impl ClosedFormSpec {
    pub fn new(kind: ClosedFormKind, params: &[f64]) -> Result<Self> {
        let params = params
            .iter()
            .map(|&v| ExtReal::new(v).ok_or_else(|| Error::input(format!("bad parameter {v}"))))
            .collect::<Result<Vec<_>>>()?;
        let spec = ClosedFormSpec { kind, params };
        spec.canonical()?;
        Ok(spec)
    }

    /// Kind with its default parameters.
    pub fn default_of(kind: ClosedFormKind) -> Self {
        let params: &[f64] = match kind {
            ClosedFormKind::Quadratic => &[0.5],
            ClosedFormKind::ExpPNorm | ClosedFormKind::IndicatorPBall => &[1.0, 1.0],
            _ => &[],
        };
        ClosedFormSpec::new(kind, params).expect("defaults are valid")
    }

    pub fn gaussian() -> Self {
        Self::default_of(ClosedFormKind::Gaussian)
    }

    fn param(&self, i: usize, default: Option<f64>) -> Result<f64> {
        match self.params.get(i) {
            Some(v) => Ok(v.get()),
            None => default.ok_or_else(|| {
                Error::input(format!("{} needs at least {} parameters", self.kind.name(), i + 1))
            }),
        }
    }

    pub fn canonical(&self) -> Result<Canonical> {
        use ClosedFormKind::*;
        let positive = |v: f64, what: &str| -> Result<f64> {
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(Error::input(format!("{what} must be positive and finite, got {v}")))
            }
        };
        let exponent = |p: f64| -> Result<f64> {
            if p >= 1.0 {
                Ok(p)
            } else {
                Err(Error::input(format!("exponent p must lie in [1, inf], got {p}")))
            }
        };
        let max_params = match self.kind {
            Quadratic | ExpPNorm | IndicatorPBall => 2,
            _ => 1,
        };
        if self.params.len() > max_params {
            return Err(Error::input(format!("too many parameters for {}", self.kind.name())));
        }
        Ok(match self.kind {
            Gaussian => {
                let s = positive(self.param(0, Some(1.0))?, "sigma")?;
                Canonical::Quadratic { p: 2.0, c: 1.0 / (2.0 * s * s) }
            }
            IndicatorBall => Canonical::Indicator { p: 2.0, r: positive(self.param(0, Some(1.0))?, "radius")? },
            IndicatorCube => {
                Canonical::Indicator { p: f64::INFINITY, r: positive(self.param(0, Some(1.0))?, "half-width")? }
            }
            ExpEuclideanNorm => Canonical::Linear { p: 2.0, c: 1.0 / positive(self.param(0, Some(1.0))?, "scale")? },
            Quadratic => Canonical::Quadratic {
                p: exponent(self.param(1, Some(2.0))?)?,
                c: positive(self.param(0, None)?, "coefficient")?,
            },
            ExpPNorm => Canonical::Linear {
                p: exponent(self.param(0, None)?)?,
                c: 1.0 / positive(self.param(1, Some(1.0))?, "scale")?,
            },
            IndicatorPBall => Canonical::Indicator {
                p: exponent(self.param(0, None)?)?,
                r: positive(self.param(1, Some(1.0))?, "radius")?,
            },
        })
    }

    /// Whether the potential is even.
    pub fn is_even(&self) -> bool {
        true
    }
}

/// Normalized internal forms. `p = ∞` is allowed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Canonical {
    /// Convex indicator of `{‖z‖_p ≤ r}`.
    Indicator { p: f64, r: f64 },
    /// `c‖z‖_p`.
    Linear { p: f64, c: f64 },
    /// `c‖z‖_p²`.
    Quadratic { p: f64, c: f64 },
}

/// Hölder conjugate exponent.
pub fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

pub fn p_norm(z: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        z.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    } else if p == 1.0 {
        z.iter().map(|v| v.abs()).sum()
    } else if p == 2.0 {
        z.iter().map(|v| v * v).sum::<f64>().sqrt()
    } else {
        let m = z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if m == 0.0 {
            return 0.0;
        }
        m * z.iter().map(|v| (v.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// `vol(B_pⁿ)`.
pub fn p_ball_volume(n: usize, p: f64) -> f64 {
    if p.is_infinite() {
        return 2f64.powi(n as i32);
    }
    (n as f64 * (2.0 * gamma(1.0 + 1.0 / p)).ln() - ln_gamma(1.0 + n as f64 / p)).exp()
}

/// `∫_{B_pⁿ} z₁² dz`.
pub fn p_ball_second_moment(n: usize, p: f64) -> f64 {
    let nf = n as f64;
    if p.is_infinite() {
        return 2.0 / 3.0 * 2f64.powi(n as i32 - 1);
    }
    let log = (2.0 * gamma(3.0 / p)).ln() + (nf - 1.0) * (2.0 * gamma(1.0 + 1.0 / p)).ln()
        - (nf + 2.0).ln()
        - ln_gamma((nf + 2.0) / p);
    log.exp()
}

impl Canonical {
    pub fn potential(&self, z: &[f64]) -> f64 {
        match *self {
            Canonical::Indicator { p, r } => {
                if p_norm(z, p) <= r * (1.0 + INDICATOR_SLACK) {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Canonical::Linear { p, c } => c * p_norm(z, p),
            Canonical::Quadratic { p, c } => {
                let v = p_norm(z, p);
                c * v * v
            }
        }
    }

    pub fn exponent(&self) -> f64 {
        match *self {
            Canonical::Indicator { p, .. } | Canonical::Linear { p, .. } | Canonical::Quadratic { p, .. } => p,
        }
    }

    pub fn is_indicator(&self) -> bool {
        matches!(self, Canonical::Indicator { .. })
    }

    /// Legendre transform.
    pub fn legendre(&self) -> Canonical {
        match *self {
            Canonical::Indicator { p, r } => Canonical::Linear { p: conjugate_exponent(p), c: r },
            Canonical::Linear { p, c } => Canonical::Indicator { p: conjugate_exponent(p), r: c },
            Canonical::Quadratic { p, c } => Canonical::Quadratic { p: conjugate_exponent(p), c: 1.0 / (4.0 * c) },
        }
    }

    /// Polarity transform.
    pub fn polar(&self) -> Canonical {
        match *self {
            Canonical::Indicator { p, r } => Canonical::Indicator { p: conjugate_exponent(p), r: 1.0 / r },
            Canonical::Linear { p, c } => Canonical::Linear { p: conjugate_exponent(p), c: 1.0 / c },
            Canonical::Quadratic { p, c } => Canonical::Quadratic { p: conjugate_exponent(p), c: 1.0 / (4.0 * c) },
        }
    }

    /// Largest `‖z‖_p` with potential `≤ level`.
    pub fn level_norm(&self, level: f64) -> f64 {
        match *self {
            Canonical::Indicator { r, .. } => r,
            Canonical::Linear { c, .. } => level / c,
            Canonical::Quadratic { c, .. } => (level / c).sqrt(),
        }
    }

    /// `∫ e^{-φ}` and `∫ z₁² e^{-φ}` in dimension `n`.
    pub fn moments(&self, n: usize) -> (f64, f64) {
        let nf = n as f64;
        let p = self.exponent();
        let vol = p_ball_volume(n, p);
        let j = p_ball_second_moment(n, p);
        match *self {
            Canonical::Indicator { r, .. } => (vol * r.powi(n as i32), j * r.powi(n as i32 + 2)),
            Canonical::Linear { c, .. } => (
                vol * gamma(nf + 1.0) / c.powi(n as i32),
                j * gamma(nf + 3.0) / c.powi(n as i32 + 2),
            ),
            Canonical::Quadratic { c, .. } => (
                vol * gamma(nf / 2.0 + 1.0) * c.powf(-nf / 2.0),
                j * gamma(nf / 2.0 + 2.0) * c.powf(-(nf + 2.0) / 2.0),
            ),
        }
    }

    pub fn to_spec(&self) -> ClosedFormSpec {
        let ext = |v: f64| ExtReal::new(v).expect("valid");
        match *self {
            Canonical::Indicator { p, r } if p == 2.0 => {
                ClosedFormSpec { kind: ClosedFormKind::IndicatorBall, params: vec![ext(r)] }
            }
            Canonical::Indicator { p, r } if p.is_infinite() => {
                ClosedFormSpec { kind: ClosedFormKind::IndicatorCube, params: vec![ext(r)] }
            }
            Canonical::Indicator { p, r } => {
                ClosedFormSpec { kind: ClosedFormKind::IndicatorPBall, params: vec![ext(p), ext(r)] }
            }
            Canonical::Linear { p, c } if p == 2.0 => {
                ClosedFormSpec { kind: ClosedFormKind::ExpEuclideanNorm, params: vec![ext(1.0 / c)] }
            }
            Canonical::Linear { p, c } => {
                ClosedFormSpec { kind: ClosedFormKind::ExpPNorm, params: vec![ext(p), ext(1.0 / c)] }
            }
            Canonical::Quadratic { p, c } if p == 2.0 => {
                ClosedFormSpec { kind: ClosedFormKind::Quadratic, params: vec![ext(c)] }
            }
            Canonical::Quadratic { p, c } => {
                ClosedFormSpec { kind: ClosedFormKind::Quadratic, params: vec![ext(c), ext(p)] }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn brute_moments(canon: &Canonical, half: f64, m: usize) -> (f64, f64) {
        // midpoint rule on a 2D square
        let h = 2.0 * half / m as f64;
        let (mut mass, mut second) = (0.0, 0.0);
        for i in 0..m {
            for j in 0..m {
                let z = [-half + (i as f64 + 0.5) * h, -half + (j as f64 + 0.5) * h];
                let f = (-canon.potential(&z)).exp();
                mass += f * h * h;
                second += z[0] * z[0] * f * h * h;
            }
        }
        (mass, second)
    }

    #[test]
    fn moments_match_brute_force_in_the_plane() {
        let cases = [
            (Canonical::Quadratic { p: 2.0, c: 0.5 }, 12.0),
            (Canonical::Linear { p: 1.0, c: 1.0 }, 40.0),
            (Canonical::Linear { p: 4.0, c: 2.0 }, 20.0),
            (Canonical::Indicator { p: 2.0, r: 1.0 }, 1.2),
            (Canonical::Indicator { p: f64::INFINITY, r: 0.5 }, 0.6),
        ];
        for (canon, half) in cases {
            let (m, s) = canon.moments(2);
            let (bm, bs) = brute_moments(&canon, half, 1200);
            assert_relative_eq!(m, bm, max_relative = 5e-3);
            assert_relative_eq!(s, bs, max_relative = 5e-3);
        }
    }

    #[test]
    fn gaussian_mass_and_cube_covariance() {
        for n in 1..=3 {
            let (m, s) = Canonical::Quadratic { p: 2.0, c: 0.5 }.moments(n);
            assert_relative_eq!(m, (2.0 * std::f64::consts::PI).powf(n as f64 / 2.0), max_relative = 1e-12);
            assert_relative_eq!(s / m, 1.0, max_relative = 1e-12);
            let (m, s) = Canonical::Indicator { p: f64::INFINITY, r: 0.5 }.moments(n);
            assert_relative_eq!(m, 1.0, max_relative = 1e-12);
            assert_relative_eq!(s, 1.0 / 12.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn p_ball_volume_special_cases() {
        assert_relative_eq!(p_ball_volume(2, 2.0), std::f64::consts::PI, max_relative = 1e-12);
        assert_relative_eq!(p_ball_volume(3, 1.0), 8.0 / 6.0, max_relative = 1e-12);
        assert_relative_eq!(p_ball_volume(3, f64::INFINITY), 8.0);
        assert_relative_eq!(p_ball_volume(2, 1e9), 4.0, max_relative = 1e-6);
    }

    #[test]
    fn transforms_are_involutions() {
        for canon in [
            Canonical::Quadratic { p: 3.0, c: 0.7 },
            Canonical::Linear { p: 1.0, c: 2.0 },
            Canonical::Indicator { p: f64::INFINITY, r: 0.5 },
        ] {
            let back = canon.legendre().legendre();
            let z = [0.3, -0.2];
            assert_relative_eq!(back.potential(&z), canon.potential(&z), max_relative = 1e-12);
            let back = canon.polar().polar();
            assert_relative_eq!(back.potential(&z), canon.potential(&z), max_relative = 1e-12);
        }
    }

    #[test]
    fn spec_json_round_trip() {
        let spec: ClosedFormSpec = serde_json::from_str(r#"{"kind":"exp_p_norm","params":["inf",2.0]}"#).unwrap();
        assert_eq!(spec.canonical().unwrap(), Canonical::Linear { p: f64::INFINITY, c: 0.5 });
        let back: ClosedFormSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);
        assert!(ClosedFormSpec::new(ClosedFormKind::Gaussian, &[-1.0]).is_err());
        assert!(ClosedFormSpec::new(ClosedFormKind::ExpPNorm, &[0.5, 1.0]).is_err());
    }
}
