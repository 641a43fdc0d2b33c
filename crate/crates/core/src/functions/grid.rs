//! Uniform lattices and convex potentials sampled on them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::extreal::{ExtReal, INF_TOKEN};
use crate::error::{check_dim, Error, Result};

/// Largest node count a single grid may hold.
pub const MAX_NODES: usize = 1 << 24;

/// Default points per axis for dimensions 1, 2, 3.
pub fn default_points(dim: usize) -> usize {
    match dim {
        1 => 257,
        2 => 129,
        _ => 33,
    }
}

/// Slack used when deciding whether a point lies inside the lattice hull.
const HULL_EPS: f64 = 1e-9;

/// A symmetric uniform lattice `center + h·{-k, …, k}^dim` with `k = (points_per_axis - 1) / 2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub points_per_axis: usize,
    pub spacing: f64,
    pub center: Vec<f64>,
}

impl GridSpec {
    pub fn new(dim: usize, points_per_axis: usize, spacing: f64) -> Result<Self> {
        Self::with_center(dim, points_per_axis, spacing, vec![0.0; dim])
    }

    pub fn with_center(dim: usize, points_per_axis: usize, spacing: f64, center: Vec<f64>) -> Result<Self> {
        let spec = GridSpec { dim, points_per_axis, spacing, center };
        spec.validate()?;
        Ok(spec)
    }

    /// Lattice with the given number of points per axis spanning `[-half_extent, half_extent]^dim`.
    pub fn symmetric(dim: usize, points_per_axis: usize, half_extent: f64) -> Result<Self> {
        if !(half_extent > 0.0 && half_extent.is_finite()) {
            return Err(Error::input(format!("half extent must be positive, got {half_extent}")));
        }
        if points_per_axis < 3 || points_per_axis % 2 == 0 {
            return Err(Error::input(format!("points per axis must be odd and >= 3, got {points_per_axis}")));
        }
        let k = (points_per_axis - 1) / 2;
        Self::new(dim, points_per_axis, half_extent / k as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(Error::input(format!("grid dimension must be 1..=3, got {}", self.dim)));
        }
        if self.points_per_axis < 3 || self.points_per_axis % 2 == 0 {
            return Err(Error::input(format!(
                "points per axis must be odd and >= 3, got {}",
                self.points_per_axis
            )));
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return Err(Error::input(format!("spacing must be positive, got {}", self.spacing)));
        }
        check_dim(self.dim, self.center.len())?;
        if self.center.iter().any(|c| !c.is_finite()) {
            return Err(Error::input("grid center must be finite"));
        }
        let total = (self.points_per_axis as u128).pow(self.dim as u32);
        if total > MAX_NODES as u128 {
            return Err(Error::input(format!("grid has {total} nodes, budget is {MAX_NODES}")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn half_index(&self) -> usize {
        (self.points_per_axis - 1) / 2
    }

    pub fn half_extent(&self) -> f64 {
        self.half_index() as f64 * self.spacing
    }

    pub fn axis_coord(&self, axis: usize, i: usize) -> f64 {
        self.center[axis] + (i as f64 - self.half_index() as f64) * self.spacing
    }

    /// Row-major multi-index (first axis slowest).
    pub fn multi_index(&self, mut flat: usize) -> [usize; 3] {
        let p = self.points_per_axis;
        let mut idx = [0usize; 3];
        for a in (0..self.dim).rev() {
            idx[a] = flat % p;
            flat /= p;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx[..self.dim].iter().fold(0, |acc, &i| acc * self.points_per_axis + i)
    }

    pub fn node(&self, flat: usize) -> Vec<f64> {
        let idx = self.multi_index(flat);
        (0..self.dim).map(|a| self.axis_coord(a, idx[a])).collect()
    }

    pub fn nodes(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let r = self.half_extent() * (1.0 + HULL_EPS) + HULL_EPS;
        x.iter().zip(&self.center).all(|(xi, ci)| (xi - ci).abs() <= r)
    }

    /// Same hull, half the spacing.
    pub fn refined(&self) -> GridSpec {
        GridSpec {
            dim: self.dim,
            points_per_axis: 2 * self.points_per_axis - 1,
            spacing: self.spacing / 2.0,
            center: self.center.clone(),
        }
    }

    /// Same hull, twice the spacing; only available when the result is still symmetric.
    pub fn coarsened(&self) -> Option<GridSpec> {
        let p = (self.points_per_axis + 1) / 2;
        if p < 3 || p % 2 == 0 {
            return None;
        }
        Some(GridSpec { dim: self.dim, points_per_axis: p, spacing: self.spacing * 2.0, center: self.center.clone() })
    }

    /// Index of the node nearest to the origin of the ambient space, if it lies on the lattice hull.
    pub fn origin_index(&self) -> Option<usize> {
        let k = self.half_index() as f64;
        let mut idx = [0usize; 3];
        for a in 0..self.dim {
            let s = (-self.center[a]) / self.spacing + k;
            if s < -HULL_EPS || s > 2.0 * k + HULL_EPS {
                return None;
            }
            idx[a] = s.round().clamp(0.0, 2.0 * k) as usize;
        }
        Some(self.flat_index(&idx))
    }

    /// Trapezoid weight of a node (includes the `h^dim` cell volume).
    pub fn trapezoid_weight(&self, flat: usize) -> f64 {
        let idx = self.multi_index(flat);
        let last = self.points_per_axis - 1;
        let mut w = self.spacing.powi(self.dim as i32);
        for &i in &idx[..self.dim] {
            if i == 0 || i == last {
                w *= 0.5;
            }
        }
        w
    }
}

/// A convex potential `φ` sampled at every lattice node; `+∞` allowed.
#[derive(Clone, Debug, PartialEq)]
pub struct GridPotential {
    grid: GridSpec,
    values: Vec<f64>,
}

impl GridPotential {
    pub fn new(grid: GridSpec, values: Vec<ExtReal>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.len() {
            return Err(Error::input(format!("expected {} values, got {}", grid.len(), values.len())));
        }
        Ok(GridPotential { grid, values: values.into_iter().map(f64::from).collect() })
    }

    /// Values must not contain `NaN` or `-∞`.
    pub(crate) fn from_raw(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::input(format!("expected {} values, got {}", grid.len(), values.len())));
        }
        if values.iter().any(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
            return Err(Error::input("potential values must not be NaN or -inf"));
        }
        Ok(GridPotential { grid, values })
    }

    pub fn from_fn(grid: GridSpec, phi: impl Fn(&[f64]) -> ExtReal + Sync) -> Result<Self> {
        grid.validate()?;
        let values = (0..grid.len())
            .into_par_iter()
            .map(|i| phi(&grid.node(i)).get())
            .collect();
        Ok(GridPotential { grid, values })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim
    }

    pub fn value(&self, flat: usize) -> ExtReal {
        ExtReal::new(self.values[flat]).expect("grid values are valid extended reals")
    }

    pub fn values(&self) -> impl Iterator<Item = ExtReal> + '_ {
        self.values.iter().map(|&v| ExtReal::new(v).expect("valid"))
    }

    pub(crate) fn raw(&self) -> &[f64] {
        &self.values
    }

    /// Multilinear interpolation; `+∞` outside the lattice hull or when a weighted corner is infinite.
    pub fn value_at(&self, x: &[f64]) -> ExtReal {
        ExtReal::new(self.interpolate(x)).expect("valid")
    }

    pub(crate) fn interpolate(&self, x: &[f64]) -> f64 {
        let g = &self.grid;
        let k = g.half_index() as f64;
        let last = g.points_per_axis - 1;
        let mut base = [0usize; 3];
        let mut frac = [0.0f64; 3];
        for a in 0..g.dim {
            let s = (x[a] - g.center[a]) / g.spacing + k;
            if !(s >= -HULL_EPS && s <= last as f64 + HULL_EPS) {
                return f64::INFINITY;
            }
            let s = s.clamp(0.0, last as f64);
            let i0 = (s.floor() as usize).min(last - 1);
            base[a] = i0;
            frac[a] = s - i0 as f64;
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << g.dim) {
            let mut w = 1.0;
            let mut idx = [0usize; 3];
            for a in 0..g.dim {
                if corner >> a & 1 == 1 {
                    w *= frac[a];
                    idx[a] = base[a] + 1;
                } else {
                    w *= 1.0 - frac[a];
                    idx[a] = base[a];
                }
            }
            if w <= 0.0 {
                continue;
            }
            let v = self.values[g.flat_index(&idx)];
            if v.is_infinite() {
                return f64::INFINITY;
            }
            acc += w * v;
        }
        acc
    }

    /// Minimum finite value and its node.
    pub fn argmin(&self) -> Option<(usize, f64)> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, &v)| (i, v))
    }

    /// Shift so that `min φ = 0`, after checking that the minimizer sits within one cell of the origin.
    pub fn make_geometric(&self) -> Result<GridPotential> {
        let (imin, vmin) = self
            .argmin()
            .ok_or_else(|| Error::Normalization("potential is identically +inf".into()))?;
        let x = self.grid.node(imin);
        let tol = self.grid.spacing * (1.0 + 1e-9);
        if x.iter().any(|xi| xi.abs() > tol) {
            return Err(Error::Normalization(format!(
                "minimizer at {x:?} is more than one cell from the origin; recenter first"
            )));
        }
        let values = self.values.iter().map(|v| if v.is_finite() { v - vmin } else { *v }).collect();
        Ok(GridPotential { grid: self.grid.clone(), values })
    }

    /// Pointwise scaling of the potential by `lambda > 0`.
    pub fn scaled(&self, lambda: f64) -> GridPotential {
        GridPotential { grid: self.grid.clone(), values: self.values.iter().map(|v| v * lambda).collect() }
    }

    /// Replace values by their lower convex envelope along every axis line and lattice diagonal.
    pub fn convex_repair(&self) -> GridPotential {
        let g = &self.grid;
        let dirs = lattice_directions(g.dim);
        let mut values = self.values.clone();
        for _sweep in 0..20 {
            let mut change = 0.0f64;
            for d in &dirs {
                for line in lattice_lines(g, d) {
                    let ys: Vec<f64> = line.iter().map(|&i| values[i]).collect();
                    let env = lower_envelope_1d(&ys);
                    for (&i, &e) in line.iter().zip(&env) {
                        let old = values[i];
                        if e < old {
                            change = change.max(if old.is_finite() { old - e } else { f64::INFINITY });
                            values[i] = e;
                        }
                    }
                }
            }
            if change < 1e-12 {
                break;
            }
        }
        GridPotential { grid: self.grid.clone(), values }
    }

    /// Largest violation of midpoint convexity along lattice lines (0 for convex data).
    pub fn convexity_defect(&self) -> f64 {
        let g = &self.grid;
        let mut worst = 0.0f64;
        for d in lattice_directions(g.dim) {
            for line in lattice_lines(g, &d) {
                for w in line.windows(3) {
                    let (a, b, c) = (self.values[w[0]], self.values[w[1]], self.values[w[2]]);
                    if a.is_finite() && c.is_finite() {
                        worst = worst.max(b - 0.5 * (a + c));
                    }
                }
            }
        }
        worst
    }

    pub fn to_file(&self) -> GridFile {
        GridFile {
            dim: self.grid.dim,
            points_per_axis: self.grid.points_per_axis,
            spacing: self.grid.spacing,
            center: self.grid.center.clone(),
            values: self
                .values
                .iter()
                .map(|&v| {
                    if v.is_infinite() {
                        serde_json::Value::String(INF_TOKEN.into())
                    } else {
                        serde_json::json!(v)
                    }
                })
                .collect(),
            inf: Some(INF_TOKEN.into()),
        }
    }

    /// Parse a grid file; the potential is convexity-repaired before use.
    pub fn from_file(file: &GridFile) -> Result<Self> {
        let token = file.inf.as_deref().unwrap_or(INF_TOKEN);
        let center = if file.center.is_empty() { vec![0.0; file.dim] } else { file.center.clone() };
        let grid = GridSpec::with_center(file.dim, file.points_per_axis, file.spacing, center)?;
        let values = file
            .values
            .iter()
            .map(|v| match v {
                serde_json::Value::Number(n) => n
                    .as_f64()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::input(format!("bad grid value {n}"))),
                serde_json::Value::String(s) if s == token => Ok(f64::INFINITY),
                other => Err(Error::input(format!("bad grid value {other}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let raw = GridPotential::from_raw(grid, values)?;
        let origin = raw
            .grid
            .origin_index()
            .ok_or_else(|| Error::input("the origin must lie inside the lattice hull"))?;
        if !raw.values[origin].is_finite() {
            return Err(Error::input("potential must be finite at the origin"));
        }
        Ok(raw.convex_repair())
    }
}

/// On-disk grid format.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridFile {
    pub dim: usize,
    pub points_per_axis: usize,
    pub spacing: f64,
    #[serde(default)]
    pub center: Vec<f64>,
    pub values: Vec<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inf: Option<String>,
}

/// Exhaustive inf-convolution `(φ □ ψ)(x) = min_y φ(y) + ψ(x - y)` over lattice nodes `y`.
pub fn inf_convolution(phi: &GridPotential, psi: &GridPotential) -> Result<GridPotential> {
    if phi.grid != psi.grid {
        return Err(Error::input("inf-convolution requires identical grids"));
    }
    let g = &phi.grid;
    let centered = g.center.iter().all(|c| *c == 0.0);
    let p = g.points_per_axis as isize;
    let k = g.half_index() as isize;
    let finite_y: Vec<usize> = (0..g.len()).filter(|&j| phi.values[j].is_finite()).collect();
    let values = (0..g.len())
        .into_par_iter()
        .map(|i| {
            let xi = g.multi_index(i);
            let x = g.node(i);
            let mut best = f64::INFINITY;
            for &j in &finite_y {
                let psi_val = if centered {
                    // x - y is the node with index xi - yj + k on a zero-centered lattice
                    let yj = g.multi_index(j);
                    let mut idx = [0usize; 3];
                    let mut inside = true;
                    for a in 0..g.dim {
                        let d = xi[a] as isize - yj[a] as isize + k;
                        if d < 0 || d >= p {
                            inside = false;
                            break;
                        }
                        idx[a] = d as usize;
                    }
                    if !inside {
                        continue;
                    }
                    psi.values[g.flat_index(&idx)]
                } else {
                    let y = g.node(j);
                    let diff: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
                    psi.interpolate(&diff)
                };
                let v = phi.values[j] + psi_val;
                if v < best {
                    best = v;
                }
            }
            best
        })
        .collect();
    Ok(GridPotential { grid: g.clone(), values })
}

/// Canonical lattice directions in `{-1,0,1}^dim` (first nonzero entry positive).
fn lattice_directions(dim: usize) -> Vec<[isize; 3]> {
    let mut out = Vec::new();
    let n = 3usize.pow(dim as u32);
    for code in 0..n {
        let mut d = [0isize; 3];
        let mut c = code;
        for a in 0..dim {
            d[a] = (c % 3) as isize - 1;
            c /= 3;
        }
        if let Some(first) = d[..dim].iter().find(|v| **v != 0) {
            if *first > 0 {
                out.push(d);
            }
        }
    }
    out
}

/// Every maximal lattice line along direction `d`.
fn lattice_lines(g: &GridSpec, d: &[isize; 3]) -> Vec<Vec<usize>> {
    let p = g.points_per_axis as isize;
    let mut lines = Vec::new();
    for start in 0..g.len() {
        let s = g.multi_index(start);
        // a line starts where stepping backwards leaves the lattice
        let prev_inside = (0..g.dim).all(|a| {
            let v = s[a] as isize - d[a];
            (0..p).contains(&v)
        });
        if prev_inside {
            continue;
        }
        let mut line = Vec::new();
        let mut cur = [s[0] as isize, s[1] as isize, s[2] as isize];
        while (0..g.dim).all(|a| (0..p).contains(&cur[a])) {
            let idx = [cur[0] as usize, cur[1] as usize, cur[2] as usize];
            line.push(g.flat_index(&idx));
            for a in 0..g.dim {
                cur[a] += d[a];
            }
        }
        if line.len() >= 3 {
            lines.push(line);
        }
    }
    lines
}

/// Lower convex envelope of equally spaced samples. Infinite samples between the first and last
/// finite ones are filled in; samples outside that range stay infinite.
pub(crate) fn lower_envelope_1d(ys: &[f64]) -> Vec<f64> {
    let pts: Vec<(f64, f64)> = ys
        .iter()
        .enumerate()
        .filter(|(_, y)| y.is_finite())
        .map(|(i, &y)| (i as f64, y))
        .collect();
    let mut out = vec![f64::INFINITY; ys.len()];
    if pts.is_empty() {
        return out;
    }
    let hull = lower_hull(&pts);
    let mut seg = 0;
    let first = pts[0].0 as usize;
    let last = pts[pts.len() - 1].0 as usize;
    for (i, slot) in out.iter_mut().enumerate().take(last + 1).skip(first) {
        let x = i as f64;
        while seg + 1 < hull.len() && hull[seg + 1].0 < x {
            seg += 1;
        }
        *slot = if seg + 1 < hull.len() {
            let (x0, y0) = hull[seg];
            let (x1, y1) = hull[seg + 1];
            if x == x1 {
                y1
            } else {
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
        } else {
            hull[seg].1
        };
    }
    out
}

/// Lower convex hull of points sorted by `x` (Andrew's monotone chain).
pub(crate) fn lower_hull(pts: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for &p in pts {
        while hull.len() >= 2 {
            let (ax, ay) = hull[hull.len() - 2];
            let (bx, by) = hull[hull.len() - 1];
            // drop b when it lies on or above segment a–p
            let cross = (bx - ax) * (p.1 - ay) - (by - ay) * (p.0 - ax);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}
