use std::io::Write;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::directions::{DirectionSet, Layout};
use crate::error::{Error, Result};
use crate::functions::closed_form::{conjugate_exponent, p_norm};
use crate::transforms::dot;

/// A star body with the origin in its interior.
pub trait StarBody: Sync {
    fn dim(&self) -> usize;
    /// `ρ(u)` for a unit vector `u`.
    fn radial(&self, u: &[f64]) -> f64;
    /// `h(u) = max_{x ∈ K} ⟨x, u⟩`.
    fn support(&self, u: &[f64]) -> f64;
    /// Minkowski functional `‖x‖_K`.
    fn gauge(&self, x: &[f64]) -> f64;
}

/// Radial function samples on a direction set. Every geometric query is answered for the convex
/// hull of the sampled boundary points `ρ(u)u`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialBody {
    pub dirs: Arc<DirectionSet>,
    pub rho: Vec<f64>,
}

/// Support function samples on a direction set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportBody {
    pub dirs: Arc<DirectionSet>,
    pub h: Vec<f64>,
}

impl RadialBody {
    pub fn new(dirs: Arc<DirectionSet>, rho: Vec<f64>) -> Result<Self> {
        if rho.len() != dirs.len() {
            return Err(Error::input(format!("expected {} radii, got {}", dirs.len(), rho.len())));
        }
        if let Some(bad) = rho.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return Err(Error::input(format!("radial samples must be positive and finite, got {bad}")));
        }
        Ok(RadialBody { dirs, rho })
    }

    pub fn from_fn(dirs: Arc<DirectionSet>, rho: impl Fn(&[f64]) -> f64 + Sync) -> Result<Self> {
        let r = dirs.directions.par_iter().map(|u| rho(u)).collect();
        Self::new(dirs, r)
    }

    /// Sample another star body on `dirs`.
    pub fn sample(dirs: Arc<DirectionSet>, body: &dyn StarBody) -> Result<Self> {
        Self::from_fn(dirs, |u| body.radial(u))
    }

    pub fn scaled(&self, c: f64) -> RadialBody {
        RadialBody { dirs: self.dirs.clone(), rho: self.rho.iter().map(|r| r * c).collect() }
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    pub fn vertex(&self, i: usize) -> Vec<f64> {
        self.dirs.directions[i].iter().map(|v| v * self.rho[i]).collect()
    }

    /// `h(u) = max_v ρ(v)⟨v, u⟩` at every sampled direction.
    pub fn support_body(&self) -> SupportBody {
        let h = self.dirs.directions.par_iter().map(|u| self.support(u)).collect();
        SupportBody { dirs: self.dirs.clone(), h }
    }

    /// `ρ_{K°}(u) = 1 / h_K(u)`.
    pub fn polar(&self) -> Result<RadialBody> {
        let s = self.support_body();
        if let Some(bad) = s.h.iter().find(|h| !(**h > 0.0)) {
            return Err(Error::input(format!("support function must be positive, got {bad}")));
        }
        RadialBody::new(self.dirs.clone(), s.h.iter().map(|h| 1.0 / h).collect())
    }

    /// `vol(K) / ω_n = Σ w ρⁿ`.
    pub fn volume_ratio(&self) -> f64 {
        let n = self.dirs.dim as i32;
        self.dirs.weights.iter().zip(&self.rho).map(|(w, r)| w * r.powi(n)).sum()
    }

    /// Rows `(direction components…, ρ, h)`.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let axes = ["u1", "u2", "u3"];
        let mut header: Vec<&str> = axes[..self.dirs.dim].to_vec();
        header.extend(["rho", "h"]);
        w.write_record(&header)?;
        let s = self.support_body();
        for (i, u) in self.dirs.directions.iter().enumerate() {
            let mut row: Vec<String> = u.iter().map(|v| format!("{v:.17e}")).collect();
            row.push(format!("{:.17e}", self.rho[i]));
            row.push(format!("{:.17e}", s.h[i]));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    fn gauge_line(&self, x: f64) -> f64 {
        if x >= 0.0 {
            x / self.rho[0]
        } else {
            -x / self.rho[1]
        }
    }

    fn gauge_plane(&self, x: &[f64]) -> f64 {
        let m = self.len();
        let mut theta = x[1].atan2(x[0]);
        if theta < 0.0 {
            theta += 2.0 * std::f64::consts::PI;
        }
        let k = ((theta / (2.0 * std::f64::consts::PI) * m as f64).floor() as usize).min(m - 1);
        let next = (k + 1) % m;
        let (p, q) = (self.vertex(k), self.vertex(next));
        let cross = |a: &[f64], b: &[f64]| a[0] * b[1] - a[1] * b[0];
        let det = cross(&p, &q);
        cross(x, &q) / det + cross(&p, x) / det
    }

    fn gauge_space(&self, x: &[f64]) -> f64 {
        let r = dot(x, x).sqrt();
        let u: Vec<f64> = x.iter().map(|v| v / r).collect();
        for k in [10usize, 24, 64] {
            let mut near: Vec<(f64, usize)> =
                self.dirs.directions.iter().enumerate().map(|(i, d)| (-dot(d, &u), i)).collect();
            let k = k.min(near.len());
            near.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0));
            let idx: Vec<usize> = near[..k].iter().map(|p| p.1).collect();
            let pts: Vec<Vec<f64>> = idx.iter().map(|&i| self.vertex(i)).collect();
            let mut best = f64::INFINITY;
            for a in 0..k {
                for b in a + 1..k {
                    for c in b + 1..k {
                        let m = Matrix3::new(
                            pts[a][0], pts[b][0], pts[c][0], pts[a][1], pts[b][1], pts[c][1], pts[a][2], pts[b][2],
                            pts[c][2],
                        );
                        if let Some(inv) = m.try_inverse() {
                            let l = inv * nalgebra::Vector3::new(u[0], u[1], u[2]);
                            if l.iter().all(|v| *v >= -1e-12) {
                                best = best.min(l.sum());
                            }
                        }
                    }
                }
            }
            if best.is_finite() {
                return best * r;
            }
        }
        let nearest = self
            .dirs
            .directions
            .iter()
            .enumerate()
            .max_by(|a, b| dot(a.1, &u).total_cmp(&dot(b.1, &u)))
            .map(|(i, _)| i)
            .expect("non-empty");
        r / self.rho[nearest]
    }
}

impl StarBody for RadialBody {
    fn dim(&self) -> usize {
        self.dirs.dim
    }

    fn radial(&self, u: &[f64]) -> f64 {
        1.0 / self.gauge(u)
    }

    fn support(&self, u: &[f64]) -> f64 {
        self.dirs
            .directions
            .iter()
            .zip(&self.rho)
            .map(|(v, r)| r * dot(v, u))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn gauge(&self, x: &[f64]) -> f64 {
        if x.iter().all(|v| *v == 0.0) {
            return 0.0;
        }
        match self.dirs.layout {
            Layout::Line => self.gauge_line(x[0]),
            Layout::Circle => self.gauge_plane(x),
            Layout::Fibonacci => self.gauge_space(x),
        }
    }
}

/// `{x : ‖A x‖_p ≤ r}`.
#[derive(Clone, Debug, PartialEq)]
pub struct PBall {
    pub p: f64,
    pub r: f64,
    pub map: DMatrix<f64>,
    inv_t: DMatrix<f64>,
}

impl PBall {
    pub fn new(dim: usize, p: f64, r: f64) -> Self {
        Self::with_map(p, r, DMatrix::identity(dim, dim)).expect("identity is invertible")
    }

    pub fn euclidean(dim: usize) -> Self {
        Self::new(dim, 2.0, 1.0)
    }

    /// `[-w, w]ⁿ`.
    pub fn cube(dim: usize, w: f64) -> Self {
        Self::new(dim, f64::INFINITY, w)
    }

    pub fn with_map(p: f64, r: f64, map: DMatrix<f64>) -> Result<Self> {
        let inv_t = map.clone().try_inverse().ok_or_else(|| Error::input("singular map"))?.transpose();
        Ok(PBall { p, r, map, inv_t })
    }

    pub fn scaled(&self, c: f64) -> Self {
        PBall { r: self.r * c, ..self.clone() }
    }
}

impl StarBody for PBall {
    fn dim(&self) -> usize {
        self.map.nrows()
    }

    fn radial(&self, u: &[f64]) -> f64 {
        1.0 / self.gauge(u)
    }

    fn support(&self, u: &[f64]) -> f64 {
        let v = &self.inv_t * DVector::from_column_slice(u);
        self.r * p_norm(v.as_slice(), conjugate_exponent(self.p))
    }

    fn gauge(&self, x: &[f64]) -> f64 {
        let v = &self.map * DVector::from_column_slice(x);
        p_norm(v.as_slice(), self.p) / self.r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cube2() -> RadialBody {
        let dirs = Arc::new(DirectionSet::default_for(2).unwrap());
        RadialBody::sample(dirs, &PBall::cube(2, 1.0)).unwrap()
    }

    #[test]
    fn ball_support_and_polar() {
        for dim in 1..=3 {
            let dirs = Arc::new(DirectionSet::default_for(dim).unwrap());
            let ball = RadialBody::sample(dirs, &PBall::euclidean(dim)).unwrap();
            let s = ball.support_body();
            assert!(s.h.iter().all(|h| (h - 1.0).abs() < 1e-12));
            let polar = ball.polar().unwrap();
            assert!(polar.rho.iter().all(|r| (r - 1.0).abs() < 1e-12));
            let p2 = ball.scaled(2.0).polar().unwrap();
            assert!(p2.rho.iter().all(|r| (r - 0.5).abs() < 1e-12));
        }
    }

    #[test]
    fn cube_support_and_polar() {
        let cube = cube2();
        let d = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(cube.support(&[d, d]), 2f64.sqrt(), max_relative = 1e-12);
        let polar = cube.polar().unwrap();
        // directions 0 and 90 are e₁ and (1,1)/√2
        assert_relative_eq!(polar.rho[0], 1.0, max_relative = 1e-12);
        assert_relative_eq!(polar.rho[90], d, max_relative = 1e-12);
    }

    #[test]
    fn segment_support() {
        let dirs = Arc::new(DirectionSet::line());
        let seg = RadialBody::new(dirs, vec![2.0, 1.0]).unwrap();
        assert_eq!(seg.support_body().h, vec![2.0, 1.0]);
    }

    #[test]
    fn minkowski_norm_examples() {
        let cube = cube2();
        assert_relative_eq!(cube.gauge(&[2.0, 1.0]), 2.0, max_relative = 1e-12);
        assert_eq!(cube.gauge(&[0.0, 0.0]), 0.0);
        let dirs = Arc::new(DirectionSet::default_for(3).unwrap());
        let ball = RadialBody::sample(dirs.clone(), &PBall::euclidean(3)).unwrap();
        let g = ball.gauge(&[1.0, 2.0, 2.0]);
        assert!((g - 3.0).abs() < 3.0 * 2e-3, "{g}");
        let cube3 = RadialBody::sample(dirs, &PBall::cube(3, 1.0)).unwrap();
        assert!((cube3.gauge(&[0.3, 0.2, 0.9]) - 0.9).abs() < 0.9 * 2e-2);
    }

    #[test]
    fn analytic_bodies() {
        let cube = PBall::cube(3, 1.0);
        assert_relative_eq!(cube.support(&[0.6, 0.0, 0.8]), 1.4);
        let t = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 0.5]));
        let body = PBall::with_map(2.0, 1.0, t).unwrap();
        assert_relative_eq!(body.radial(&[1.0, 0.0]), 0.5);
        assert_relative_eq!(body.support(&[0.0, 1.0]), 2.0);
    }

    #[test]
    fn csv_export() {
        let mut buf = Vec::new();
        cube2().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("u1,u2,rho,h\n"));
        assert_eq!(text.lines().count(), 721);
    }
}
