//! Moments, the isotropic constant, and isotropic position.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bodies::metrics::unit_ball_volume;
use crate::bodies::RadialBody;
use crate::error::{Error, Result};
use crate::functions::LogConcaveFunction;

/// Mass, barycenter and covariance of a log-concave function.
#[derive(Clone, Debug)]
pub struct MomentReport {
    pub mass: f64,
    pub barycenter: DVector<f64>,
    pub covariance: DMatrix<f64>,
    /// Relative change under grid halving; 0 for closed forms.
    pub quadrature_error: f64,
}

pub fn moments(f: &LogConcaveFunction) -> Result<MomentReport> {
    let base = f.base_moments();
    if !(base.mass > 0.0 && base.mass.is_finite()) {
        return Err(Error::input("function is not integrable on its support"));
    }
    let m = f.effective_map();
    let inv = m.clone().try_inverse().ok_or_else(|| Error::input("singular map"))?;
    let det = m.determinant().abs();
    Ok(MomentReport {
        mass: f.scalar() * base.mass / det,
        barycenter: &inv * (&base.mean - f.offset()),
        covariance: &inv * &base.covariance * inv.transpose(),
        quadrature_error: base.error,
    })
}

/// `L_f = (‖f‖_∞ / ∫f)^{1/n} det(Cov f)^{1/(2n)}`.
pub fn isotropic_constant(f: &LogConcaveFunction) -> Result<f64> {
    let m = moments(f)?;
    let n = f.dim() as f64;
    let det = m.covariance.determinant();
    if !(det > 0.0) {
        return Err(Error::input("degenerate covariance"));
    }
    Ok((f.sup_norm() / m.mass).powf(1.0 / n) * det.powf(1.0 / (2.0 * n)))
}

/// How a function was brought to isotropic position: `f̃(x) = f(shift + a·T x) / sup_norm_divisor`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsotropizationRecord {
    /// Barycenter removed before whitening.
    pub shift: Vec<f64>,
    /// Volume-preserving whitening map, row-major.
    pub t: Vec<Vec<f64>>,
    /// Final rescale `λ_{f₁} / L_f`.
    pub a: f64,
    pub sup_norm_divisor: f64,
    /// `L_f` of the input.
    pub isotropic_constant: f64,
}

impl IsotropizationRecord {
    pub fn whitening(&self) -> DMatrix<f64> {
        let n = self.t.len();
        DMatrix::from_fn(n, n, |i, j| self.t[i][j])
    }

    /// Replay the pipeline on `f`.
    pub fn apply(&self, f: &LogConcaveFunction) -> Result<LogConcaveFunction> {
        let mut g = f.clone();
        if self.shift.iter().any(|v| *v != 0.0) {
            let minus: Vec<f64> = self.shift.iter().map(|v| -v).collect();
            g = g.shift(&minus)?;
        }
        g = g.apply_linear(&(self.whitening() * self.a))?;
        if self.sup_norm_divisor != 1.0 {
            g = g.scale(1.0 / self.sup_norm_divisor)?;
        }
        Ok(g)
    }
}

fn symmetric_power(c: &DMatrix<f64>, power: f64) -> Result<DMatrix<f64>> {
    let eig = c.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::input("degenerate covariance"));
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.powf(power)));
    Ok(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

/// Center, whiten with the symmetric square root of the covariance (volume preserving),
/// divide by the supremum, and rescale so the mass is 1.
pub fn isotropize(f: &LogConcaveFunction) -> Result<(LogConcaveFunction, IsotropizationRecord)> {
    let n = f.dim();
    let m = moments(f)?;
    let det = m.covariance.determinant();
    if !(det > 0.0) {
        return Err(Error::input("degenerate covariance"));
    }
    let scale = m.covariance.trace().sqrt();
    let shift: Vec<f64> = if m.barycenter.norm() <= 1e-12 * scale {
        vec![0.0; n]
    } else {
        m.barycenter.iter().copied().collect()
    };
    let lambda = det.powf(1.0 / (2.0 * n as f64));
    let t = symmetric_power(&m.covariance, 0.5)? / lambda;
    let sup = f.sup_norm();
    let sup = if (sup - 1.0).abs() <= 1e-15 { 1.0 } else { sup };
    let a = (m.mass / sup).powf(1.0 / n as f64);
    let record = IsotropizationRecord {
        shift,
        t: (0..n).map(|i| (0..n).map(|j| t[(i, j)]).collect()).collect(),
        a,
        sup_norm_divisor: sup,
        isotropic_constant: (sup / m.mass).powf(1.0 / n as f64) * lambda,
    };
    Ok((record.apply(f)?, record))
}

/// Barycenter at the origin, unit mass, and scalar covariance, all within `tol`.
pub fn is_isotropic(f: &LogConcaveFunction, tol: f64) -> Result<bool> {
    let m = moments(f)?;
    let n = f.dim();
    let lambda2 = m.covariance.trace() / n as f64;
    let off = (&m.covariance - DMatrix::identity(n, n) * lambda2).abs().max();
    Ok(m.barycenter.norm() <= tol && (m.mass - 1.0).abs() <= tol && off <= tol)
}

/// Volume, barycenter and covariance of the uniform measure on a sampled star body.
pub fn body_moments(k: &RadialBody) -> (f64, DVector<f64>, DMatrix<f64>) {
    let n = k.dirs.dim;
    let nf = n as f64;
    let surface = nf * unit_ball_volume(n);
    let mut vol = 0.0;
    let mut first = DVector::zeros(n);
    let mut second = DMatrix::zeros(n, n);
    for ((u, w), r) in k.dirs.directions.iter().zip(&k.dirs.weights).zip(&k.rho) {
        let u = DVector::from_column_slice(u);
        vol += w * r.powi(n as i32) / nf;
        first += &u * (w * r.powi(n as i32 + 1) / (nf + 1.0));
        second += &u * u.transpose() * (w * r.powi(n as i32 + 2) / (nf + 2.0));
    }
    let vol = vol * surface;
    let bar = first * surface / vol;
    let cov = second * surface / vol - &bar * bar.transpose();
    (vol, bar, cov)
}

/// `α = max(‖T‖, ‖T⁻¹‖)` for the map `T` taking the uniform measure on `K` to isotropic position.
pub fn almost_isotropic_gap(k: &RadialBody) -> Result<f64> {
    let n = k.dirs.dim as f64;
    let (vol, _, cov) = body_moments(k);
    let det = cov.determinant();
    if !(det > 0.0 && vol > 0.0) {
        return Err(Error::input("body has empty interior"));
    }
    let s = (det.sqrt() / vol).powf(1.0 / n);
    let t = symmetric_power(&cov, -0.5)? * s;
    let norm = t.clone().singular_values().max();
    let inv_norm = 1.0 / t.singular_values().min();
    Ok(norm.max(inv_norm))
}

/// Whether the uniform measure on `K` is isotropic: unit volume, centered, scalar covariance.
pub fn is_isotropic_body(k: &RadialBody, tol: f64) -> bool {
    let n = k.dirs.dim;
    let (vol, bar, cov) = body_moments(k);
    let lambda2 = cov.trace() / n as f64;
    let off = (&cov - DMatrix::identity(n, n) * lambda2).abs().max();
    (vol - 1.0).abs() <= tol && bar.norm() <= tol && off <= tol
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;
    use std::sync::Arc;

    use super::*;
    use crate::bodies::{DirectionSet, PBall};
    use crate::functions::ClosedFormKind;
    use approx::assert_relative_eq;

    fn unit_cube(dim: usize) -> LogConcaveFunction {
        LogConcaveFunction::from_kind(ClosedFormKind::IndicatorCube, &[0.5], dim).unwrap()
    }

    #[test]
    fn gaussian_and_cube_moments() {
        for n in 1..=3 {
            let m = moments(&LogConcaveFunction::gaussian(n)).unwrap();
            assert_relative_eq!(m.mass, (2.0 * PI).powf(n as f64 / 2.0), max_relative = 1e-12);
            assert!((m.covariance.clone() - DMatrix::identity(n, n)).abs().max() < 1e-12);
            let c = moments(&unit_cube(n)).unwrap();
            assert_relative_eq!(c.mass, 1.0, max_relative = 1e-12);
            assert!((c.covariance - DMatrix::identity(n, n) / 12.0).abs().max() < 1e-12);
        }
    }

    #[test]
    fn isotropic_constants() {
        assert_relative_eq!(isotropic_constant(&LogConcaveFunction::gaussian(2)).unwrap(), 1.0 / (2.0 * PI).sqrt(), max_relative = 1e-12);
        assert_relative_eq!(isotropic_constant(&unit_cube(3)).unwrap(), 12f64.powf(-0.5), max_relative = 1e-12);
        let f = LogConcaveFunction::from_kind(ClosedFormKind::ExpPNorm, &[1.0, 1.0], 2).unwrap();
        let t = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0]));
        let l0 = isotropic_constant(&f).unwrap();
        let l1 = isotropic_constant(&f.apply_linear(&t).unwrap()).unwrap();
        assert_relative_eq!(l0, l1, max_relative = 1e-12);
    }

    #[test]
    fn gaussian_goes_to_exp_minus_pi_norm_squared() {
        let (g, rec) = isotropize(&LogConcaveFunction::gaussian(2)).unwrap();
        for x in [[0.0, 0.0], [0.3, -0.4], [1.0, 1.0]] {
            let expected = (-PI * (x[0] * x[0] + x[1] * x[1])).exp();
            assert_relative_eq!(g.value(&x), expected, max_relative = 1e-12);
        }
        assert_relative_eq!(rec.a, (2.0 * PI).sqrt(), max_relative = 1e-12);
        let m = moments(&g).unwrap();
        assert_relative_eq!(m.mass, 1.0, max_relative = 1e-12);
        assert!((m.covariance - DMatrix::identity(2, 2) / (2.0 * PI)).abs().max() < 1e-12);
    }

    #[test]
    fn isotropic_inputs_are_fixed_points() {
        let (c, rec) = isotropize(&unit_cube(2)).unwrap();
        assert_relative_eq!(rec.a, 1.0, max_relative = 1e-12);
        assert!((rec.whitening() - DMatrix::identity(2, 2)).abs().max() < 1e-12);
        let (_, again) = isotropize(&c).unwrap();
        assert_relative_eq!(again.a, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn skewed_input_is_recentred_and_whitened() {
        let t = DMatrix::from_row_slice(2, 2, &[1.0, 0.7, 0.0, 2.0]);
        let f = LogConcaveFunction::from_kind(ClosedFormKind::ExpPNorm, &[1.0, 1.0], 2)
            .unwrap()
            .apply_linear(&t)
            .unwrap()
            .shift(&[0.4, -0.2])
            .unwrap()
            .scale(3.0)
            .unwrap();
        let l = isotropic_constant(&f).unwrap();
        let (g, rec) = isotropize(&f).unwrap();
        assert_eq!(rec.shift.len(), 2);
        let m = moments(&g).unwrap();
        assert!(m.barycenter.norm() < 1e-12);
        assert_relative_eq!(m.mass, 1.0, max_relative = 1e-12);
        assert!((m.covariance - DMatrix::identity(2, 2) * l * l).abs().max() < 1e-12);
        assert_relative_eq!(g.sup_norm(), 1.0, max_relative = 1e-12);
        assert!(is_isotropic(&g, 1e-10).unwrap());
        let replay = rec.apply(&f).unwrap();
        assert_relative_eq!(replay.value(&[0.1, 0.2]), g.value(&[0.1, 0.2]));
        let json = serde_json::to_string(&rec).unwrap();
        assert_eq!(serde_json::from_str::<IsotropizationRecord>(&json).unwrap(), rec);
    }

    #[test]
    fn body_gap() {
        let dirs = Arc::new(DirectionSet::default_for(2).unwrap());
        let cube = RadialBody::sample(dirs.clone(), &PBall::cube(2, 0.5)).unwrap();
        assert!((almost_isotropic_gap(&cube).unwrap() - 1.0).abs() < 1e-3);
        assert!(is_isotropic_body(&cube, 1e-3));
        let t = DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 2.0]));
        let skew = RadialBody::sample(dirs, &PBall::with_map(f64::INFINITY, 0.5, t).unwrap()).unwrap();
        assert!((almost_isotropic_gap(&skew).unwrap() - 2.0).abs() < 2e-3);
        assert!(!is_isotropic_body(&skew, 1e-3));
    }

    #[test]
    fn grid_backed_moments_track_quadrature() {
        let g = LogConcaveFunction::gaussian(2);
        let pot = g.sample_potential(&g.sampling_grid(129).unwrap()).unwrap();
        let f = LogConcaveFunction::from_grid(pot).apply_linear(&DMatrix::identity(2, 2)).unwrap();
        let (iso, _) = isotropize(&f).unwrap();
        let m = moments(&iso).unwrap();
        assert!((m.mass - 1.0).abs() < 1e-4);
        let l = isotropic_constant(&f).unwrap();
        assert!((m.covariance - DMatrix::identity(2, 2) * l * l).abs().max() < 1e-4);
    }
}
