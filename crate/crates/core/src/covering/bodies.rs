use serde::{Deserialize, Serialize};

use crate::bodies::{RadialBody, StarBody};
use crate::error::{Error, Result};

/// Certified bracket `lower ≤ M(K,T)` and `N(K,T) ≤ upper` for the sampled bodies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BodyCovering {
    pub upper: usize,
    pub lower: usize,
    /// Translates `x_j` with `K ⊆ ⋃ (x_j + T)`.
    pub centers: Vec<Vec<f64>>,
    /// Points of `K` whose translates of `T` are pairwise disjoint.
    pub packing: Vec<Vec<f64>>,
    /// Tiling that produced the upper bound.
    pub method: String,
}

const CONTAIN_TOL: f64 = 1e-12;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A lattice of translated copies of a polytope tile that covers space.
struct Tiling {
    name: String,
    basis: Vec<Vec<f64>>,
    offset: Vec<f64>,
    /// Tile vertices around its center.
    vertices: Vec<Vec<f64>>,
}

impl Tiling {
    fn circumradius(&self) -> f64 {
        self.vertices.iter().map(|v| dot(v, v).sqrt()).fold(0.0, f64::max)
    }

    fn support(&self, center: &[f64], u: &[f64]) -> f64 {
        dot(center, u) + self.vertices.iter().map(|v| dot(v, u)).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Largest scale `s` with `s·V ⊆ T`.
fn inscribed_scale(t: &RadialBody, unit_vertices: &[Vec<f64>]) -> f64 {
    1.0 / unit_vertices.iter().map(|v| t.gauge(v)).fold(0.0, f64::max)
}

fn scaled(vs: &[Vec<f64>], s: f64) -> Vec<Vec<f64>> {
    vs.iter().map(|v| v.iter().map(|x| x * s).collect()).collect()
}

fn rotate(v: &[f64], theta: f64) -> Vec<f64> {
    let (s, c) = theta.sin_cos();
    vec![c * v[0] - s * v[1], s * v[0] + c * v[1]]
}

fn tilings(k: &RadialBody, t: &RadialBody) -> Vec<Tiling> {
    let n = k.dirs.dim;
    let mut out = Vec::new();
    match n {
        1 => {
            let (right, left) = (t.rho[0], t.rho[1]);
            let len = right + left;
            let k_left = -k.rho[1];
            // first tile flush with the left end of K
            let aligned = k_left + left;
            for (i, off) in [aligned, 0.0, len / 2.0].into_iter().enumerate() {
                out.push(Tiling {
                    name: format!("interval/{i}"),
                    basis: vec![vec![len]],
                    offset: vec![off],
                    vertices: vec![vec![-left], vec![right]],
                });
            }
        }
        2 => {
            for (ri, theta) in [0.0, 15.0, 30.0, 45.0].iter().map(|d: &f64| d.to_radians()).enumerate() {
                let hex_unit: Vec<Vec<f64>> = (0..6)
                    .map(|j| {
                        let a = std::f64::consts::PI / 6.0 + j as f64 * std::f64::consts::PI / 3.0;
                        rotate(&[a.cos(), a.sin()], theta)
                    })
                    .collect();
                let s = inscribed_scale(t, &hex_unit);
                let r3 = 3f64.sqrt();
                let b1 = rotate(&[r3 * s, 0.0], theta);
                let b2 = rotate(&[r3 * s / 2.0, 1.5 * s], theta);
                let offsets = [
                    vec![0.0, 0.0],
                    vec![b1[0] / 2.0, b1[1] / 2.0],
                    vec![b2[0] / 2.0, b2[1] / 2.0],
                    vec![(b1[0] + b2[0]) / 3.0, (b1[1] + b2[1]) / 3.0],
                ];
                for (oi, off) in offsets.into_iter().enumerate() {
                    out.push(Tiling {
                        name: format!("hexagonal/{ri}/{oi}"),
                        basis: vec![b1.clone(), b2.clone()],
                        offset: off,
                        vertices: scaled(&hex_unit, s),
                    });
                }
                let sq_unit: Vec<Vec<f64>> = [[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]]
                    .iter()
                    .map(|v| rotate(v, theta))
                    .collect();
                let s = inscribed_scale(t, &sq_unit);
                let e1 = rotate(&[2.0 * s, 0.0], theta);
                let e2 = rotate(&[0.0, 2.0 * s], theta);
                for (oi, off) in [vec![0.0, 0.0], vec![(e1[0] + e2[0]) / 2.0, (e1[1] + e2[1]) / 2.0]].into_iter().enumerate() {
                    out.push(Tiling {
                        name: format!("square/{ri}/{oi}"),
                        basis: vec![e1.clone(), e2.clone()],
                        offset: off,
                        vertices: scaled(&sq_unit, s),
                    });
                }
            }
        }
        _ => {
            let cube_unit: Vec<Vec<f64>> = (0..8)
                .map(|m| (0..3).map(|a| if m >> a & 1 == 1 { 1.0 } else { -1.0 }).collect())
                .collect();
            let s = inscribed_scale(t, &cube_unit);
            let basis: Vec<Vec<f64>> = (0..3).map(|a| (0..3).map(|b| if a == b { 2.0 * s } else { 0.0 }).collect()).collect();
            for (oi, off) in [vec![0.0; 3], vec![s; 3]].into_iter().enumerate() {
                out.push(Tiling { name: format!("cubic/{oi}"), basis: basis.clone(), offset: off, vertices: scaled(&cube_unit, s) });
            }
        }
    }
    out
}

/// Greedy cover of `K` by `T`-translates centered on the tiles that meet the interior of `K`.
fn lattice_cover(k: &RadialBody, t: &RadialBody, tiling: &Tiling, k_support: &[(f64, f64)]) -> Vec<Vec<f64>> {
    let n = k.dirs.dim;
    let k_radius = k.rho.iter().copied().fold(0.0, f64::max);
    let reach = k_radius + tiling.circumradius();
    let min_step = tiling.basis.iter().map(|b| dot(b, b).sqrt()).fold(f64::INFINITY, f64::min);
    // the basis vectors of every tiling here are at least 60° apart, so this range suffices
    let z = (2.0 * reach / min_step).ceil() as i64 + 1;
    let scale = 1.0 + k_radius;
    let mut centers: Vec<Vec<f64>> = Vec::new();
    let range: Vec<i64> = (-z..=z).collect();
    let mut idx = vec![0i64; n];
    let total = range.len().pow(n as u32);
    for flat in 0..total {
        let mut rem = flat;
        for a in (0..n).rev() {
            idx[a] = range[rem % range.len()];
            rem /= range.len();
        }
        let mut c = tiling.offset.clone();
        for (a, &zi) in idx.iter().enumerate() {
            for (ci, bi) in c.iter_mut().zip(&tiling.basis[a]) {
                *ci += zi as f64 * bi;
            }
        }
        if dot(&c, &c).sqrt() > reach {
            continue;
        }
        // drop tiles separated from K, touching included
        let separated = k.dirs.directions.iter().zip(k_support).any(|(u, (hk, hk_neg))| {
            let neg: Vec<f64> = u.iter().map(|v| -v).collect();
            tiling.support(&c, &neg) + hk <= 1e-9 * scale || tiling.support(&c, u) + hk_neg <= 1e-9 * scale
        });
        if separated {
            continue;
        }
        let covered = centers.iter().any(|p| {
            tiling.vertices.iter().all(|v| {
                let x: Vec<f64> = v.iter().zip(&c).zip(p).map(|((vi, ci), pi)| vi + ci - pi).collect();
                t.gauge(&x) <= 1.0 + CONTAIN_TOL
            })
        });
        if !covered {
            centers.push(c);
        }
    }
    centers
}

fn difference_widths(t: &RadialBody) -> Vec<f64> {
    t.dirs
        .directions
        .iter()
        .map(|u| {
            let neg: Vec<f64> = u.iter().map(|v| -v).collect();
            t.support(u) + t.support(&neg)
        })
        .collect()
}

/// Greedy packing: candidates on a fine lattice inside `K`, taken in decreasing `‖·‖_K` order,
/// kept when their `T`-translate is disjoint from every kept one.
fn greedy_packing(k: &RadialBody, t: &RadialBody) -> Vec<Vec<f64>> {
    let n = k.dirs.dim;
    let widths = difference_widths(t);
    let k_radius = k.rho.iter().copied().fold(0.0, f64::max);
    let per_axis: usize = match n {
        1 => 801,
        2 => 61,
        _ => 21,
    };
    let h = 2.0 * k_radius / (per_axis - 1) as f64;
    let mut candidates: Vec<(f64, Vec<f64>)> = Vec::new();
    for flat in 0..per_axis.pow(n as u32) {
        let mut rem = flat;
        let mut x = vec![0.0; n];
        for a in (0..n).rev() {
            x[a] = -k_radius + (rem % per_axis) as f64 * h;
            rem /= per_axis;
        }
        let g = k.gauge(&x);
        if g <= 1.0 + CONTAIN_TOL {
            candidates.push((g, x));
        }
    }
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut chosen: Vec<Vec<f64>> = Vec::new();
    for (_, x) in candidates {
        // (x + T) ∩ (p + T) = ∅ iff x - p ∉ T - T; certified by a strictly separating direction
        let disjoint = chosen.iter().all(|p| {
            let d: Vec<f64> = x.iter().zip(p).map(|(a, b)| a - b).collect();
            t.dirs.directions.iter().zip(&widths).any(|(u, w)| dot(&d, u) > w * (1.0 + 1e-9))
        });
        if disjoint {
            chosen.push(x);
        }
    }
    chosen
}

pub fn covering_number_bodies(k: &RadialBody, t: &RadialBody) -> Result<BodyCovering> {
    crate::error::check_dim(k.dirs.dim, t.dirs.dim)?;
    if t.rho.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::input("T must contain the origin in its interior"));
    }
    let packing = greedy_packing(k, t);
    let n = k.dirs.dim;
    let fits = (0..k.len()).all(|i| t.gauge(&k.vertex(i)) <= 1.0 + CONTAIN_TOL);
    if fits {
        return Ok(BodyCovering { upper: 1, lower: packing.len(), centers: vec![vec![0.0; n]], packing, method: "single".into() });
    }
    let k_support: Vec<(f64, f64)> = k
        .dirs
        .directions
        .iter()
        .map(|u| {
            let neg: Vec<f64> = u.iter().map(|v| -v).collect();
            (k.support(u), k.support(&neg))
        })
        .collect();
    let (method, centers) = tilings(k, t)
        .into_iter()
        .map(|tl| {
            let c = lattice_cover(k, t, &tl, &k_support);
            (tl.name, c)
        })
        .min_by_key(|(_, c)| c.len())
        .expect("at least one tiling");
    Ok(BodyCovering { upper: centers.len(), lower: packing.len(), centers, packing, method })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::bodies::{DirectionSet, PBall};

    fn body(dim: usize, b: &PBall) -> RadialBody {
        RadialBody::sample(Arc::new(DirectionSet::default_for(dim).unwrap()), b).unwrap()
    }

    #[test]
    fn self_cover_is_one() {
        for dim in 1..=2 {
            let k = body(dim, &PBall::cube(dim, 1.0));
            let c = covering_number_bodies(&k, &k).unwrap();
            assert_eq!(c.upper, 1);
            assert!(c.lower >= 1);
        }
    }

    #[test]
    fn intervals() {
        let k = body(1, &PBall::cube(1, 2.0));
        let t = body(1, &PBall::cube(1, 1.0));
        let c = covering_number_bodies(&k, &t).unwrap();
        assert_eq!(c.upper, 2);
        assert!(c.lower >= 2);
        assert!(c.lower <= c.upper);
    }

    #[test]
    fn disk_of_radius_two_by_unit_disks() {
        let k = body(2, &PBall::new(2, 2.0, 2.0));
        let t = body(2, &PBall::euclidean(2));
        let c = covering_number_bodies(&k, &t).unwrap();
        assert!(c.upper <= 7, "{} via {}", c.upper, c.method);
        assert!(c.lower >= 2);
        // every vertex of K lies in some translate
        for i in 0..k.len() {
            let v = k.vertex(i);
            assert!(c.centers.iter().any(|p| t.gauge(&[v[0] - p[0], v[1] - p[1]]) <= 1.0 + 1e-9));
        }
    }

    #[test]
    fn cube_in_three_dimensions() {
        let k = body(3, &PBall::cube(3, 1.0));
        let t = body(3, &PBall::cube(3, 0.5));
        let c = covering_number_bodies(&k, &t).unwrap();
        assert!(c.upper >= 8);
        assert!(c.lower >= 1 && c.lower <= c.upper);
    }
}
