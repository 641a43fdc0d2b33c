use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::star::{RadialBody, StarBody};
use crate::error::{Error, Result};

/// `ω_n = π^{n/2} / Γ(n/2 + 1)`.
pub fn unit_ball_volume(n: usize) -> f64 {
    let h = n as f64 / 2.0;
    (h * std::f64::consts::PI.ln() - ln_gamma(h + 1.0)).exp()
}

/// `vrad(K) = (vol K / ω_n)^{1/n}`.
pub fn volume_radius(k: &RadialBody) -> f64 {
    k.volume_ratio().powf(1.0 / k.dirs.dim as f64)
}

pub fn volume(k: &RadialBody) -> f64 {
    unit_ball_volume(k.dirs.dim) * k.volume_ratio()
}

fn same_directions(k: &RadialBody, t: &RadialBody) -> Result<()> {
    if k.dirs != t.dirs {
        return Err(Error::input("bodies must share a direction set"));
    }
    Ok(())
}

/// Smallest `c` with `K ⊆ cT` for the sampled hulls: `max_u h_K(u) / h_T(u)`.
pub fn inclusion_factor(k: &RadialBody, t: &RadialBody) -> Result<f64> {
    same_directions(k, t)?;
    let (hk, ht) = (k.support_body(), t.support_body());
    Ok(hk.h.iter().zip(&ht.h).map(|(a, b)| a / b).fold(f64::NEG_INFINITY, f64::max))
}

/// `d_G(K, T)` as the product of the two inclusion factors.
pub fn geometric_distance(k: &RadialBody, t: &RadialBody) -> Result<f64> {
    Ok(inclusion_factor(k, t)? * inclusion_factor(t, k)?)
}

/// Monte Carlo estimates of `M(K)` and `M*(K)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanWidths {
    pub m: f64,
    pub m_star: f64,
    pub stderr_m: f64,
    pub stderr_m_star: f64,
    pub samples: usize,
    pub seed: u64,
}

const CHUNK: usize = 4096;

/// Uniform sphere points by normalizing Gaussian vectors; chunk `c` draws from stream `c` of the seed.
pub fn mean_width_functionals(k: &dyn StarBody, samples: usize, seed: u64) -> Result<MeanWidths> {
    if samples < 1000 {
        return Err(Error::input("mean widths need at least 1000 samples"));
    }
    let n = k.dim();
    let chunks = samples.div_ceil(CHUNK);
    let sums: Vec<[f64; 4]> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut acc = [0.0; 4];
            let mut u = [0.0; 3];
            for _ in 0..count {
                let mut norm = 0.0f64;
                for v in u.iter_mut().take(n) {
                    *v = StandardNormal.sample(&mut rng);
                    norm += *v * *v;
                }
                let norm = norm.sqrt();
                for v in u.iter_mut().take(n) {
                    *v /= norm;
                }
                let a = k.gauge(&u[..n]);
                let b = k.support(&u[..n]);
                acc[0] += a;
                acc[1] += a * a;
                acc[2] += b;
                acc[3] += b * b;
            }
            acc
        })
        .collect();
    let mut tot = [0.0; 4];
    for s in &sums {
        for i in 0..4 {
            tot[i] += s[i];
        }
    }
    let m = samples as f64;
    let stderr = |s: f64, s2: f64| ((s2 / m - (s / m).powi(2)).max(0.0) / (m - 1.0)).sqrt();
    Ok(MeanWidths {
        m: tot[0] / m,
        m_star: tot[2] / m,
        stderr_m: stderr(tot[0], tot[1]),
        stderr_m_star: stderr(tot[2], tot[3]),
        samples,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::bodies::directions::DirectionSet;
    use crate::bodies::star::PBall;
    use approx::assert_relative_eq;

    fn sampled(dim: usize, body: &dyn StarBody) -> RadialBody {
        RadialBody::sample(Arc::new(DirectionSet::default_for(dim).unwrap()), body).unwrap()
    }

    #[test]
    fn ball_volumes() {
        assert_relative_eq!(unit_ball_volume(1), 2.0, max_relative = 1e-14);
        assert_relative_eq!(unit_ball_volume(2), std::f64::consts::PI, max_relative = 1e-14);
        assert_relative_eq!(unit_ball_volume(3), 4.0 * std::f64::consts::PI / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn volume_radii() {
        for dim in 1..=3 {
            let b = sampled(dim, &PBall::euclidean(dim));
            assert_relative_eq!(volume_radius(&b), 1.0, max_relative = 1e-12);
            assert_relative_eq!(volume_radius(&b.scaled(3.0)), 3.0, max_relative = 1e-12);
        }
        // quadrature oracle: ∫ ρ² dθ/2π for the square, ρ = 1/max(|cos|,|sin|)
        let m = 1_000_000;
        let oracle: f64 = (0..m)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / m as f64;
                1.0 / a.cos().abs().max(a.sin().abs()).powi(2)
            })
            .sum::<f64>()
            / m as f64;
        let cube = sampled(2, &PBall::cube(2, 1.0));
        assert_relative_eq!(volume_radius(&cube), oracle.sqrt(), max_relative = 1e-4);
        assert_relative_eq!(volume_radius(&cube), (4.0 / std::f64::consts::PI).sqrt(), max_relative = 1e-4);
    }

    #[test]
    fn inclusions_and_distance() {
        let cube = sampled(2, &PBall::cube(2, 1.0));
        let ball = sampled(2, &PBall::euclidean(2));
        assert_relative_eq!(inclusion_factor(&cube, &cube).unwrap(), 1.0);
        assert_relative_eq!(inclusion_factor(&cube, &ball).unwrap(), 2f64.sqrt(), max_relative = 1e-9);
        assert_relative_eq!(inclusion_factor(&ball, &cube).unwrap(), 1.0, max_relative = 1e-9);
        assert_relative_eq!(geometric_distance(&cube, &ball).unwrap(), 2f64.sqrt(), max_relative = 1e-9);
        assert_relative_eq!(geometric_distance(&cube, &cube.scaled(5.0)).unwrap(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn bipolar_defect_is_small() {
        for dim in 2..=3 {
            let cube = sampled(dim, &PBall::cube(dim, 1.0));
            let bipolar = cube.polar().unwrap().polar().unwrap();
            let eps = geometric_distance(&cube, &bipolar).unwrap() - 1.0;
            assert!(eps < 0.02, "dim {dim}: {eps}");
        }
    }

    #[test]
    fn mean_widths_of_ball_and_cube() {
        let b = mean_width_functionals(&PBall::euclidean(3), 100_000, 7).unwrap();
        assert_relative_eq!(b.m, 1.0, epsilon = 1e-12);
        assert_relative_eq!(b.m_star, 1.0, epsilon = 1e-12);
        let c = mean_width_functionals(&PBall::cube(3, 1.0), 100_000, 7).unwrap();
        assert!((c.m_star - 1.5).abs() <= 3.0 * c.stderr_m_star);
        let c2 = mean_width_functionals(&PBall::cube(3, 2.0), 100_000, 7).unwrap();
        assert_relative_eq!(c2.m, c.m / 2.0, max_relative = 1e-12);
        assert_relative_eq!(c2.m_star, 2.0 * c.m_star, max_relative = 1e-12);
    }

    #[test]
    fn mean_widths_are_reproducible() {
        let cube = sampled(2, &PBall::cube(2, 1.0));
        let a = mean_width_functionals(&cube, 5000, 3).unwrap();
        let b = mean_width_functionals(&cube, 5000, 3).unwrap();
        assert_eq!(a, b);
    }
}
