use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::closed_form::{Canonical, ClosedFormKind, ClosedFormSpec};
use super::grid::{GridPotential, GridSpec};
use crate::error::{check_dim, Error, Result};

/// Potential level at which `e^{-φ}` drops below `10⁻¹²`.
pub const TAIL_LEVEL: f64 = 27.631_021_115_928_547;

/// Largest condition number accepted by [`LogConcaveFunction::apply_linear`].
pub const CONDITION_CAP: f64 = 1e12;

#[derive(Clone, Debug)]
pub enum Backing {
    ClosedForm { spec: ClosedFormSpec, canonical: Canonical },
    Grid(Arc<GridPotential>),
}

/// `f(x) = scalar · exp(-φ(A x / dilation + offset))` for a closed-form or sampled potential `φ`.
#[derive(Clone, Debug)]
pub struct LogConcaveFunction {
    dim: usize,
    backing: Backing,
    map: DMatrix<f64>,
    dilation: f64,
    offset: DVector<f64>,
    scalar: f64,
}

/// Moments of the backing function `e^{-φ}` in its own coordinates.
#[derive(Clone, Debug)]
pub(crate) struct BaseMoments {
    pub mass: f64,
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
    pub error: f64,
}

impl LogConcaveFunction {
    pub fn closed_form(spec: ClosedFormSpec, dim: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::input(format!("dimension must be 1..=3, got {dim}")));
        }
        let canonical = spec.canonical()?;
        Ok(Self::wrap(dim, Backing::ClosedForm { spec, canonical }))
    }

    pub fn from_kind(kind: ClosedFormKind, params: &[f64], dim: usize) -> Result<Self> {
        Self::closed_form(ClosedFormSpec::new(kind, params)?, dim)
    }

    pub fn gaussian(dim: usize) -> Self {
        Self::closed_form(ClosedFormSpec::gaussian(), dim).expect("valid dimension")
    }

    pub(crate) fn from_canonical(canonical: Canonical, dim: usize) -> Self {
        Self::wrap(dim, Backing::ClosedForm { spec: canonical.to_spec(), canonical })
    }

    pub fn from_grid(potential: GridPotential) -> Self {
        Self::wrap(potential.dim(), Backing::Grid(Arc::new(potential)))
    }

    fn wrap(dim: usize, backing: Backing) -> Self {
        LogConcaveFunction {
            dim,
            backing,
            map: DMatrix::identity(dim, dim),
            dilation: 1.0,
            offset: DVector::zeros(dim),
            scalar: 1.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn backing(&self) -> &Backing {
        &self.backing
    }

    pub fn linear_map(&self) -> &DMatrix<f64> {
        &self.map
    }

    pub fn dilation(&self) -> f64 {
        self.dilation
    }

    pub fn offset(&self) -> &DVector<f64> {
        &self.offset
    }

    pub fn scalar(&self) -> f64 {
        self.scalar
    }

    /// `A / dilation`.
    pub fn effective_map(&self) -> DMatrix<f64> {
        &self.map / self.dilation
    }

    pub fn canonical(&self) -> Option<Canonical> {
        match &self.backing {
            Backing::ClosedForm { canonical, .. } => Some(*canonical),
            Backing::Grid(_) => None,
        }
    }

    pub fn grid_potential(&self) -> Option<&GridPotential> {
        match &self.backing {
            Backing::Grid(g) => Some(g),
            Backing::ClosedForm { .. } => None,
        }
    }

    fn base_point_into(&self, x: &[f64], z: &mut [f64]) {
        for (i, zi) in z.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, xj) in x.iter().enumerate() {
                acc += self.map[(i, j)] * xj;
            }
            *zi = acc / self.dilation + self.offset[i];
        }
    }

    pub fn base_point(&self, x: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; self.dim];
        self.base_point_into(x, &mut z);
        z
    }

    fn base_potential(&self, z: &[f64]) -> f64 {
        match &self.backing {
            Backing::ClosedForm { canonical, .. } => canonical.potential(z),
            Backing::Grid(g) => g.interpolate(z),
        }
    }

    /// `φ` at `x`, excluding the scalar prefactor; `+∞` off the support.
    pub fn potential(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        let mut buf = [0.0; 3];
        let z = &mut buf[..self.dim];
        self.base_point_into(x, z);
        self.base_potential(z)
    }

    /// `f(x)` without dimension checking.
    pub fn value(&self, x: &[f64]) -> f64 {
        self.scalar * (-self.potential(x)).exp()
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok(self.value(x))
    }

    /// `t ⊙ f`, i.e. `x ↦ f(x / t)`.
    pub fn dilate(&self, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::input(format!("dilation must be positive, got {t}")));
        }
        let mut out = self.clone();
        out.dilation *= t;
        Ok(out)
    }

    /// `x ↦ f(T x)`.
    pub fn apply_linear(&self, t: &DMatrix<f64>) -> Result<Self> {
        if t.nrows() != self.dim || t.ncols() != self.dim {
            return Err(Error::Dimension { expected: self.dim, got: t.nrows().max(t.ncols()) });
        }
        if t.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("linear map has non-finite entries"));
        }
        let sv = t.clone().singular_values();
        let (smax, smin) = (sv.max(), sv.min());
        if !(smin > 0.0) || smax / smin > CONDITION_CAP {
            return Err(Error::input(format!("linear map is singular or ill-conditioned (singular values {smin:e}..{smax:e})")));
        }
        let mut out = self.clone();
        out.map = &self.map * t;
        Ok(out)
    }

    /// `x ↦ f(x - v)`.
    pub fn shift(&self, v: &[f64]) -> Result<Self> {
        check_dim(self.dim, v.len())?;
        let mut out = self.clone();
        let av = &self.map * DVector::from_column_slice(v) / self.dilation;
        out.offset = &self.offset - av;
        Ok(out)
    }

    /// `a · f`.
    pub fn scale(&self, a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::input(format!("scalar must be positive, got {a}")));
        }
        let mut out = self.clone();
        out.scalar *= a;
        Ok(out)
    }

    /// `x ↦ f(-x)`.
    pub fn reflect(&self) -> Self {
        let mut out = self.clone();
        out.map = -&self.map;
        out
    }

    /// Smallest value of the backing potential.
    pub fn base_min(&self) -> f64 {
        match &self.backing {
            Backing::ClosedForm { .. } => 0.0,
            Backing::Grid(g) => g.argmin().map(|(_, v)| v).unwrap_or(f64::INFINITY),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.scalar * (-self.base_min()).exp()
    }

    /// `f(0) = ‖f‖_∞ = 1` with the maximum attained at the origin.
    pub fn is_geometric(&self) -> bool {
        if (self.scalar - 1.0).abs() > 1e-12 || self.offset.iter().any(|v| v.abs() > 1e-12) {
            return false;
        }
        match &self.backing {
            Backing::ClosedForm { .. } => true,
            Backing::Grid(g) => {
                let at0 = g.interpolate(&vec![0.0; self.dim]);
                at0.abs() <= 1e-12 && self.base_min() >= -1e-12
            }
        }
    }

    pub fn is_even(&self) -> bool {
        if self.offset.iter().any(|v| v.abs() > 1e-12) {
            return false;
        }
        match &self.backing {
            Backing::ClosedForm { spec, .. } => spec.is_even(),
            Backing::Grid(g) => {
                let grid = g.grid();
                if grid.center.iter().any(|c| *c != 0.0) {
                    return false;
                }
                let n = grid.len();
                let raw = g.raw();
                (0..n).all(|i| {
                    let (a, b) = (raw[i], raw[n - 1 - i]);
                    a == b || (a - b).abs() <= 1e-12 * (1.0 + a.abs())
                })
            }
        }
    }

    /// Bound on `|x|` over `{φ ≤ level}`; for sampled potentials, the preimage of the lattice hull.
    pub fn level_radius(&self, level: f64) -> f64 {
        let inv = self.effective_map().try_inverse().expect("maps are invertible");
        let inv_norm = inv.clone().singular_values().max();
        let n = self.dim as f64;
        let base_radius = match &self.backing {
            Backing::ClosedForm { canonical, .. } => {
                let p = canonical.exponent();
                let factor = if p.is_infinite() { n.sqrt() } else if p >= 2.0 { n.powf(0.5 - 1.0 / p) } else { 1.0 };
                canonical.level_norm(level) * factor
            }
            Backing::Grid(g) => {
                let grid = g.grid();
                let c = grid.center.iter().map(|v| v * v).sum::<f64>().sqrt();
                n.sqrt() * grid.half_extent() + c
            }
        };
        inv_norm * (base_radius + self.offset.norm())
    }

    /// A symmetric lattice whose hull contains the region where `f ≥ 10⁻¹² ‖f‖_∞`.
    pub fn sampling_grid(&self, points_per_axis: usize) -> Result<GridSpec> {
        let r = self.level_radius(TAIL_LEVEL + self.base_min());
        GridSpec::symmetric(self.dim, points_per_axis, r * 1.05 + 1e-9)
    }

    /// Potential values at the nodes of `grid`.
    pub fn sample_potential(&self, grid: &GridSpec) -> Result<GridPotential> {
        check_dim(self.dim, grid.dim)?;
        let values = (0..grid.len()).map(|i| self.potential(&grid.node(i))).collect();
        GridPotential::from_raw(grid.clone(), values)
    }

    pub(crate) fn base_moments(&self) -> BaseMoments {
        let n = self.dim;
        match &self.backing {
            Backing::ClosedForm { canonical, .. } => {
                let (mass, second) = canonical.moments(n);
                BaseMoments {
                    mass,
                    mean: DVector::zeros(n),
                    covariance: DMatrix::identity(n, n) * (second / mass),
                    error: 0.0,
                }
            }
            Backing::Grid(g) => {
                let fine = trapezoid_moments(g, 1);
                let error = match g.grid().coarsened() {
                    Some(_) => {
                        let coarse = trapezoid_moments(g, 2);
                        let dm = (fine.0 - coarse.0).abs() / fine.0;
                        let dc = (&fine.2 - &coarse.2).abs().max() / fine.2.abs().max().max(1e-300);
                        dm.max(dc)
                    }
                    None => f64::NAN,
                };
                BaseMoments { mass: fine.0, mean: fine.1, covariance: fine.2, error }
            }
        }
    }

    /// `(A, B)` with `f(x) ≤ A e^{-B|x|}` at every node of the sampling lattice.
    pub fn envelope_constants(&self) -> Result<(f64, f64)> {
        let points = match self.dim {
            1 => 1025,
            2 => 129,
            _ => 33,
        };
        let grid = self.sampling_grid(points)?;
        let last = grid.points_per_axis - 1;
        let mut rate = f64::INFINITY;
        let mut samples = Vec::with_capacity(grid.len());
        for i in 0..grid.len() {
            let x = grid.node(i);
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            let fx = self.value(&x);
            let idx = grid.multi_index(i);
            let on_boundary = idx[..self.dim].iter().any(|&j| j == 0 || j == last);
            if on_boundary && r > 0.0 {
                let decay = if fx > 0.0 { (self.sup_norm().ln() - fx.ln()) / r } else { f64::INFINITY };
                rate = rate.min(decay);
            }
            samples.push((r, fx));
        }
        if !(rate > 0.0) {
            return Err(Error::Estimation("no decay detected on the lattice boundary".into()));
        }
        let b = if rate.is_finite() { 0.5 * rate } else { 1.0 };
        let a = samples
            .iter()
            .filter(|(_, fx)| *fx > 0.0)
            .map(|&(r, fx)| (fx.ln() + b * r).exp())
            .fold(0.0f64, f64::max);
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Estimation("function vanishes on the lattice".into()));
        }
        Ok((a, b))
    }

    /// Short human-readable label.
    pub fn label(&self) -> String {
        match &self.backing {
            Backing::ClosedForm { spec, .. } => {
                let ps: Vec<String> = spec.params.iter().map(|p| p.to_string()).collect();
                if ps.is_empty() {
                    spec.kind.name().to_string()
                } else {
                    format!("{}[{}]", spec.kind.name(), ps.join(","))
                }
            }
            Backing::Grid(g) => format!("grid[{}^{}]", g.grid().points_per_axis, g.dim()),
        }
    }
}

/// Trapezoid mass, mean and covariance of `e^{-φ}`, using every `stride`-th node.
fn trapezoid_moments(g: &GridPotential, stride: usize) -> (f64, DVector<f64>, DMatrix<f64>) {
    let spec = g.grid();
    let n = spec.dim;
    let grid = if stride == 1 { spec.clone() } else { spec.coarsened().expect("coarsening available") };
    let mut mass = 0.0;
    let mut first = DVector::zeros(n);
    let mut second = DMatrix::zeros(n, n);
    for i in 0..grid.len() {
        let idx = grid.multi_index(i);
        let fine_idx: Vec<usize> = idx[..n].iter().map(|&j| j * stride).collect();
        let v = g.raw()[spec.flat_index(&fine_idx)];
        if v.is_infinite() {
            continue;
        }
        let w = grid.trapezoid_weight(i) * (-v).exp();
        let x = DVector::from_vec(grid.node(i));
        mass += w;
        first += &x * w;
        second += &x * x.transpose() * w;
    }
    let mean = &first / mass;
    let cov = &second / mass - &mean * mean.transpose();
    (mass, mean, cov)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::extreal::ExtReal;
    use approx::assert_relative_eq;

    #[test]
    fn evaluation_examples() {
        let g1 = LogConcaveFunction::gaussian(1);
        assert_eq!(g1.evaluate(&[0.0]).unwrap(), 1.0);
        assert_relative_eq!(g1.evaluate(&[1.0]).unwrap(), (-0.5f64).exp(), max_relative = 1e-15);
        let cube = LogConcaveFunction::from_kind(ClosedFormKind::IndicatorCube, &[1.0], 2).unwrap();
        assert_eq!(cube.evaluate(&[1.5, 0.0]).unwrap(), 0.0);
        assert!(matches!(cube.evaluate(&[1.0]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn dilation_examples() {
        let g = LogConcaveFunction::gaussian(3);
        let d = g.dilate(2.0).unwrap();
        assert_relative_eq!(d.value(&[2.0, 0.0, 0.0]), (-0.5f64).exp(), max_relative = 1e-15);
        let x = [0.4, -1.1, 2.0];
        assert_eq!(g.dilate(1.0).unwrap().value(&x), g.value(&x));
        let six: Vec<f64> = x.iter().map(|v| v / 6.0).collect();
        assert_relative_eq!(g.dilate(2.0).unwrap().dilate(3.0).unwrap().value(&x), g.value(&six), max_relative = 1e-14);
        assert!(g.dilate(0.0).is_err());
    }

    #[test]
    fn linear_map_examples() {
        let g = LogConcaveFunction::gaussian(2);
        let x = [0.6, 0.8];
        assert_relative_eq!(g.apply_linear(&DMatrix::identity(2, 2)).unwrap().value(&x), g.value(&x));
        let two = DMatrix::identity(2, 2) * 2.0;
        assert_relative_eq!(g.apply_linear(&two).unwrap().value(&x), (-2.0f64).exp(), max_relative = 1e-14);
        let ball = LogConcaveFunction::from_kind(ClosedFormKind::IndicatorBall, &[1.0], 2).unwrap();
        let t = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0]));
        assert_eq!(ball.apply_linear(&t).unwrap().value(&[0.6, 0.0]), 0.0);
        let singular = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(g.apply_linear(&singular).is_err());
    }

    #[test]
    fn scalar_map_commutes_with_dilation() {
        let f = LogConcaveFunction::from_kind(ClosedFormKind::ExpPNorm, &[1.0, 1.0], 2).unwrap();
        let t = DMatrix::identity(2, 2) * 1.7;
        let a = f.apply_linear(&t).unwrap().dilate(2.5).unwrap();
        let b = f.dilate(2.5).unwrap().apply_linear(&t).unwrap();
        for x in [[0.1, 0.2], [-3.0, 1.0], [2.0, 2.0]] {
            assert_relative_eq!(a.value(&x), b.value(&x), max_relative = 1e-14);
        }
    }

    #[test]
    fn dilation_increases_geometric_functions() {
        let f = LogConcaveFunction::from_kind(ClosedFormKind::ExpEuclideanNorm, &[1.0], 2).unwrap();
        for t in [1.0, 1.5, 4.0] {
            let d = f.dilate(t).unwrap();
            for x in [[0.3, 0.1], [2.0, -1.0], [5.0, 5.0]] {
                assert!(d.value(&x) >= f.value(&x));
            }
        }
    }

    #[test]
    fn shift_and_reflect() {
        let f = LogConcaveFunction::from_kind(ClosedFormKind::ExpEuclideanNorm, &[1.0], 1).unwrap();
        let s = f.shift(&[2.0]).unwrap();
        assert_relative_eq!(s.value(&[2.0]), 1.0);
        assert_relative_eq!(s.value(&[3.0]), (-1.0f64).exp());
        assert!(!s.is_geometric() && !s.is_even());
        let r = s.reflect();
        assert_relative_eq!(r.value(&[-2.0]), 1.0);
    }

    #[test]
    fn grid_backed_evaluation_is_zero_outside() {
        let grid = GridSpec::symmetric(1, 101, 5.0).unwrap();
        let pot = GridPotential::from_fn(grid, |x| ExtReal::finite(x[0].abs())).unwrap();
        let f = LogConcaveFunction::from_grid(pot);
        assert_eq!(f.value(&[6.0]), 0.0);
        assert_relative_eq!(f.value(&[1.0]), (-1.0f64).exp(), max_relative = 1e-12);
        assert!(f.is_geometric() && f.is_even());
    }

    fn check_envelope(f: &LogConcaveFunction, a: f64, b: f64) {
        let grid = f.sampling_grid(401).unwrap();
        for x in grid.nodes() {
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!(f.value(&x) <= a * (-b * r).exp() * (1.0 + 1e-12), "x={x:?}");
        }
    }

    #[test]
    fn envelope_examples() {
        let g = LogConcaveFunction::gaussian(1);
        let (a, b) = g.envelope_constants().unwrap();
        check_envelope(&g, a, b);
        // (e^{1/2}, 1) is valid for the Gaussian
        check_envelope(&g, 0.5f64.exp(), 1.0);
        let e = LogConcaveFunction::from_kind(ClosedFormKind::ExpEuclideanNorm, &[1.0], 1).unwrap();
        check_envelope(&e, 1.0, 1.0);
        let ball = LogConcaveFunction::from_kind(ClosedFormKind::IndicatorBall, &[1.0], 1).unwrap();
        let (a, b) = ball.envelope_constants().unwrap();
        check_envelope(&ball, a, b);
        check_envelope(&ball, 3f64.exp(), 3.0);
    }

    #[test]
    fn grid_moments_match_closed_form() {
        let g = LogConcaveFunction::gaussian(2);
        let pot = g.sample_potential(&g.sampling_grid(129).unwrap()).unwrap();
        let m = LogConcaveFunction::from_grid(pot).base_moments();
        assert_relative_eq!(m.mass, 2.0 * std::f64::consts::PI, max_relative = 1e-8);
        assert_relative_eq!(m.covariance[(0, 0)], 1.0, max_relative = 1e-8);
        assert!(m.covariance[(0, 1)].abs() < 1e-10);
        assert!(m.error < 1e-6);
    }
}
