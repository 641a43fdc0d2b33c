//! Dense revised simplex for packing programs `max cᵀx  s.t.  A x ≤ r, x ≥ 0` with `r ≥ 0`.
//!
//! The slack basis is feasible, so no phase one is needed. The right-hand side is first
//! perturbed to break degeneracy; the perturbation is then removed and primal feasibility
//! restored by dual simplex steps. Programs on which the simplex stalls are handed to an
//! interior-point solver. Entering columns use Dantzig pricing with a Bland fallback
//! once the iteration count passes `10·(rows + cols)`; the ratio test is Harris' two-pass rule.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultSettingsBuilder, DefaultSolver, IPSolver, NonnegativeConeT, SolverStatus};
use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Feasibility tolerance of the Harris ratio test.
pub const HARRIS_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-11;
/// Relative size of the right-hand side perturbation.
const PERTURBATION: f64 = 1e-7;

#[derive(Clone, Debug)]
pub struct PackingLp {
    pub rows: usize,
    pub cols: usize,
    /// Column-major `rows × cols` matrix, all entries ≥ 0.
    pub a: Vec<f64>,
    pub c: Vec<f64>,
    pub rhs: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    /// Optimal packing vector `x`.
    pub x: Vec<f64>,
    /// Row multipliers `y ≥ 0`; they solve `min rᵀy  s.t. Aᵀy ≥ c`.
    pub y: Vec<f64>,
    pub primal_value: f64,
    pub dual_value: f64,
    pub iterations: usize,
    pub used_bland: bool,
}

impl PackingLp {
    pub fn new(rows: usize, cols: usize, a: Vec<f64>, c: Vec<f64>, rhs: Vec<f64>) -> Result<Self> {
        if a.len() != rows * cols || c.len() != cols || rhs.len() != rows {
            return Err(Error::input("packing program has inconsistent sizes"));
        }
        if a.iter().chain(&c).chain(&rhs).any(|v| !v.is_finite()) {
            return Err(Error::input("packing program has non-finite data"));
        }
        if rhs.iter().any(|v| *v < 0.0) {
            return Err(Error::input("packing right-hand side must be non-negative"));
        }
        Ok(PackingLp { rows, cols, a, c, rhs })
    }

    fn column(&self, j: usize) -> &[f64] {
        &self.a[j * self.rows..(j + 1) * self.rows]
    }

    pub fn solve(&self) -> Result<LpSolution> {
        match Simplex::new(self).run() {
            Err(Error::Solver(_)) => self.interior_point(),
            other => other,
        }
    }

    /// Interior-point solve; `x` is scaled onto `A x ≤ r` and `y` onto `Aᵀy ≥ c` so both stay feasible.
    fn interior_point(&self) -> Result<LpSolution> {
        let (m, n) = (self.rows, self.cols);
        let mut colptr = Vec::with_capacity(n + 1);
        let mut rowval = Vec::new();
        let mut nzval = Vec::new();
        colptr.push(0);
        for j in 0..n {
            for (i, v) in self.column(j).iter().enumerate() {
                if *v != 0.0 {
                    rowval.push(i);
                    nzval.push(*v);
                }
            }
            rowval.push(m + j);
            nzval.push(-1.0);
            colptr.push(rowval.len());
        }
        let a = CscMatrix::new(m + n, n, colptr, rowval, nzval);
        let p = CscMatrix::<f64>::zeros((n, n));
        let q: Vec<f64> = self.c.iter().map(|v| -v).collect();
        let mut b = self.rhs.clone();
        b.resize(m + n, 0.0);
        let settings = DefaultSettingsBuilder::default()
            .verbose(false)
            .max_iter(400)
            .tol_gap_abs(1e-12)
            .tol_gap_rel(1e-12)
            .tol_feas(1e-12)
            .build()
            .map_err(|e| Error::Solver(e.to_string()))?;
        let mut solver = DefaultSolver::new(&p, &q, &a, &b, &[NonnegativeConeT(m + n)], settings)
            .map_err(|e| Error::Solver(e.to_string()))?;
        solver.solve();
        let sol = &solver.solution;
        match sol.status {
            SolverStatus::Solved | SolverStatus::AlmostSolved => {}
            SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => {
                return Err(Error::Solver("packing program is unbounded".into()))
            }
            other => return Err(Error::Solver(format!("interior point terminated with {other:?}"))),
        }
        let mut x: Vec<f64> = sol.x.iter().map(|v| v.max(0.0)).collect();
        let mut y: Vec<f64> = sol.z[..m].iter().map(|v| v.max(0.0)).collect();
        let mut shrink = 1.0f64;
        for i in 0..m {
            let load: f64 = (0..n).map(|j| self.a[j * m + i] * x[j]).sum();
            if load > self.rhs[i] {
                shrink = shrink.min(self.rhs[i] / load);
            }
        }
        x.iter_mut().for_each(|v| *v *= shrink);
        let mut grow = 1.0f64;
        for j in 0..n {
            let cover: f64 = self.column(j).iter().zip(&y).map(|(a, b)| a * b).sum();
            if cover < self.c[j] {
                if cover <= 0.0 {
                    return Err(Error::Solver("interior point dual misses a column".into()));
                }
                grow = grow.max(self.c[j] / cover);
            }
        }
        y.iter_mut().for_each(|v| *v *= grow);
        let primal_value = x.iter().zip(&self.c).map(|(a, b)| a * b).sum();
        let dual_value = y.iter().zip(&self.rhs).map(|(a, b)| a * b).sum();
        Ok(LpSolution { x, y, primal_value, dual_value, iterations: sol.iterations as usize, used_bland: false })
    }
}

struct Simplex<'a> {
    lp: &'a PackingLp,
    m: usize,
    /// Variable index per basis row; `j < cols` structural, `cols + i` slack of row `i`.
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    /// Row-major `B⁻¹`.
    binv: Vec<f64>,
    xb: Vec<f64>,
    /// Working right-hand side.
    rhs: Vec<f64>,
    cost_scale: f64,
}

impl<'a> Simplex<'a> {
    fn new(lp: &'a PackingLp) -> Self {
        let m = lp.rows;
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            binv[i * m + i] = 1.0;
        }
        let mut in_basis = vec![false; lp.cols + m];
        for flag in in_basis.iter_mut().skip(lp.cols) {
            *flag = true;
        }
        let cost_scale = lp.c.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
        Simplex { lp, m, basis: (lp.cols..lp.cols + m).collect(), in_basis, binv, xb: lp.rhs.clone(), rhs: lp.rhs.clone(), cost_scale }
    }

    fn cost(&self, var: usize) -> f64 {
        if var < self.lp.cols {
            self.lp.c[var]
        } else {
            0.0
        }
    }

    fn multipliers(&self) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for (r, &var) in self.basis.iter().enumerate() {
            let cb = self.cost(var);
            if cb != 0.0 {
                for (yk, b) in y.iter_mut().zip(&self.binv[r * m..(r + 1) * m]) {
                    *yk += cb * b;
                }
            }
        }
        y
    }

    fn reduced_cost(&self, var: usize, y: &[f64]) -> f64 {
        if var < self.lp.cols {
            self.lp.c[var] - self.lp.column(var).iter().zip(y).map(|(a, b)| a * b).sum::<f64>()
        } else {
            -y[var - self.lp.cols]
        }
    }

    fn entering(&self, y: &[f64], bland: bool) -> Option<usize> {
        let tol = 1e-11 * self.cost_scale;
        let total = self.lp.cols + self.m;
        let mut best: Option<(usize, f64)> = None;
        for var in 0..total {
            if self.in_basis[var] {
                continue;
            }
            let d = self.reduced_cost(var, y);
            if d > tol {
                if bland {
                    return Some(var);
                }
                if best.is_none_or(|(_, b)| d > b) {
                    best = Some((var, d));
                }
            }
        }
        best.map(|(v, _)| v)
    }

    fn ftran(&self, var: usize) -> Vec<f64> {
        let m = self.m;
        let mut w = vec![0.0; m];
        if var < self.lp.cols {
            let col = self.lp.column(var);
            let nz: Vec<(usize, f64)> = col.iter().copied().enumerate().filter(|(_, v)| *v != 0.0).collect();
            for (r, wr) in w.iter_mut().enumerate() {
                let row = &self.binv[r * m..(r + 1) * m];
                *wr = nz.iter().map(|&(k, v)| row[k] * v).sum();
            }
        } else {
            let k = var - self.lp.cols;
            for (r, wr) in w.iter_mut().enumerate() {
                *wr = self.binv[r * m + k];
            }
        }
        w
    }

    fn leaving(&self, w: &[f64], bland: bool) -> Option<usize> {
        if bland {
            let mut best: Option<(usize, f64)> = None;
            for r in 0..self.m {
                if w[r] > PIVOT_TOL {
                    let ratio = self.xb[r].max(0.0) / w[r];
                    let better = match best {
                        None => true,
                        Some((b, br)) => ratio < br - 1e-15 || (ratio <= br + 1e-15 && self.basis[r] < self.basis[b]),
                    };
                    if better {
                        best = Some((r, ratio));
                    }
                }
            }
            return best.map(|(r, _)| r);
        }
        let mut theta_max = f64::INFINITY;
        for r in 0..self.m {
            if w[r] > PIVOT_TOL {
                theta_max = theta_max.min((self.xb[r].max(0.0) + HARRIS_TOL) / w[r]);
            }
        }
        if theta_max.is_infinite() {
            return None;
        }
        let mut best: Option<(usize, f64)> = None;
        for r in 0..self.m {
            if w[r] > PIVOT_TOL && self.xb[r].max(0.0) / w[r] <= theta_max && best.is_none_or(|(_, bw)| w[r] > bw) {
                best = Some((r, w[r]));
            }
        }
        best.map(|(r, _)| r)
    }

    fn pivot(&mut self, r: usize, var: usize, w: &[f64]) {
        let theta = self.xb[r].max(0.0) / w[r];
        self.pivot_by(r, var, w, theta);
    }

    fn pivot_by(&mut self, r: usize, var: usize, w: &[f64], theta: f64) {
        let m = self.m;
        for (i, x) in self.xb.iter_mut().enumerate() {
            *x -= theta * w[i];
        }
        self.xb[r] = theta;
        let inv = 1.0 / w[r];
        let pivot_row: Vec<f64> = self.binv[r * m..(r + 1) * m].iter().map(|v| v * inv).collect();
        for i in 0..m {
            if i == r || w[i] == 0.0 {
                continue;
            }
            let wi = w[i];
            for (b, p) in self.binv[i * m..(i + 1) * m].iter_mut().zip(&pivot_row) {
                *b -= wi * p;
            }
        }
        self.binv[r * m..(r + 1) * m].copy_from_slice(&pivot_row);
        self.in_basis[self.basis[r]] = false;
        self.in_basis[var] = true;
        self.basis[r] = var;
    }

    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        let mut b = DMatrix::zeros(m, m);
        for (r, &var) in self.basis.iter().enumerate() {
            if var < self.lp.cols {
                for (i, v) in self.lp.column(var).iter().enumerate() {
                    b[(i, r)] = *v;
                }
            } else {
                b[(var - self.lp.cols, r)] = 1.0;
            }
        }
        let inv = b.try_inverse().ok_or_else(|| Error::Solver("basis became singular".into()))?;
        for i in 0..m {
            for k in 0..m {
                self.binv[i * m + k] = inv[(i, k)];
            }
        }
        for i in 0..m {
            self.xb[i] = (0..m).map(|k| self.binv[i * m + k] * self.rhs[k]).sum();
        }
        Ok(())
    }

    /// Primal simplex from the current feasible basis.
    fn primal(&mut self, iterations: &mut usize, used_bland: &mut bool) -> Result<()> {
        let bland_after = 10 * (self.m + self.lp.cols);
        let cap = 2 * bland_after + 1000;
        let refactor_every = 64 + self.m / 2;
        let mut local = 0;
        loop {
            let bland = local >= bland_after;
            *used_bland |= bland;
            let y = self.multipliers();
            let Some(q) = self.entering(&y, bland) else { return Ok(()) };
            let w = self.ftran(q);
            let Some(r) = self.leaving(&w, bland) else {
                return Err(Error::Solver("packing program is unbounded".into()));
            };
            self.pivot(r, q, &w);
            local += 1;
            *iterations += 1;
            if local % refactor_every == 0 {
                self.refactor()?;
            }
            if local > cap {
                return Err(Error::Solver(format!("simplex did not converge in {cap} iterations")));
            }
        }
    }

    /// Dual simplex steps until `B⁻¹ r ≥ 0`, keeping every reduced cost non-positive.
    fn restore_feasibility(&mut self, iterations: &mut usize) -> Result<()> {
        let m = self.m;
        let scale = 1.0 + self.rhs.iter().fold(0.0f64, |a, v| a.max(*v));
        let cap = 10 * (m + self.lp.cols) + 100;
        let refactor_every = 64 + m / 2;
        for step in 1..=cap {
            let leaving = (0..m)
                .filter(|&r| self.xb[r] < -HARRIS_TOL * scale)
                .min_by(|&a, &b| self.xb[a].total_cmp(&self.xb[b]));
            let Some(r) = leaving else { return Ok(()) };
            let y = self.multipliers();
            let row = &self.binv[r * m..(r + 1) * m];
            let mut best: Option<(usize, f64, f64)> = None;
            for var in 0..self.lp.cols + m {
                if self.in_basis[var] {
                    continue;
                }
                let alpha = if var < self.lp.cols {
                    self.lp.column(var).iter().zip(row).map(|(a, b)| a * b).sum::<f64>()
                } else {
                    row[var - self.lp.cols]
                };
                if alpha < -PIVOT_TOL {
                    let ratio = self.reduced_cost(var, &y).min(0.0) / alpha;
                    if best.is_none_or(|(_, br, ba)| ratio < br || (ratio == br && alpha < ba)) {
                        best = Some((var, ratio, alpha));
                    }
                }
            }
            let Some((q, _, _)) = best else {
                return Err(Error::Solver("no dual pivot restores feasibility".into()));
            };
            let w = self.ftran(q);
            let theta = self.xb[r] / w[r];
            self.pivot_by(r, q, &w, theta);
            *iterations += 1;
            if step % refactor_every == 0 {
                self.refactor()?;
            }
        }
        Err(Error::Solver("dual simplex did not restore feasibility".into()))
    }

    fn run(mut self) -> Result<LpSolution> {
        let mut iterations = 0;
        let mut used_bland = false;
        self.rhs = perturbed(&self.lp.rhs);
        self.xb = self.rhs.clone();
        self.primal(&mut iterations, &mut used_bland)?;
        if iterations > 0 {
            self.rhs = self.lp.rhs.clone();
            self.refactor()?;
            self.restore_feasibility(&mut iterations)?;
            self.primal(&mut iterations, &mut used_bland)?;
            self.refactor()?;
        }
        let mut x = vec![0.0; self.lp.cols];
        for (r, &var) in self.basis.iter().enumerate() {
            if var < self.lp.cols {
                x[var] = self.xb[r].max(0.0);
            }
        }
        let y: Vec<f64> = self.multipliers().into_iter().map(|v| v.max(0.0)).collect();
        let primal_value = x.iter().zip(&self.lp.c).map(|(a, b)| a * b).sum();
        let dual_value = y.iter().zip(&self.lp.rhs).map(|(a, b)| a * b).sum();
        Ok(LpSolution { x, y, primal_value, dual_value, iterations, used_bland })
    }
}

/// `r_i + PERTURBATION (1 + r_i)(1 + ξ_i)` with a fixed hash sequence `ξ_i ∈ [0, 1)`.
fn perturbed(rhs: &[f64]) -> Vec<f64> {
    rhs.iter()
        .enumerate()
        .map(|(i, r)| {
            let h = (i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
            let xi = (h >> 11) as f64 / (1u64 << 53) as f64;
            r + PERTURBATION * (1.0 + r) * (1.0 + xi)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn dense(rows: &[&[f64]]) -> (usize, usize, Vec<f64>) {
        let m = rows.len();
        let n = rows[0].len();
        let mut a = vec![0.0; m * n];
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                a[j * m + i] = *v;
            }
        }
        (m, n, a)
    }

    #[test]
    fn textbook_program() {
        // max 3x + 5y  s.t. x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → (2, 6), value 36
        let (m, n, a) = dense(&[&[1.0, 0.0], &[0.0, 2.0], &[3.0, 2.0]]);
        let lp = PackingLp::new(m, n, a, vec![3.0, 5.0], vec![4.0, 12.0, 18.0]).unwrap();
        let s = lp.solve().unwrap();
        assert_relative_eq!(s.primal_value, 36.0, epsilon = 1e-10);
        assert_relative_eq!(s.dual_value, 36.0, epsilon = 1e-10);
        assert_relative_eq!(s.x[0], 2.0, epsilon = 1e-10);
        assert_relative_eq!(s.x[1], 6.0, epsilon = 1e-10);
        assert_relative_eq!(s.y[1], 1.5, epsilon = 1e-10);
        assert_relative_eq!(s.y[2], 1.0, epsilon = 1e-10);
    }

    #[test]
    fn unbounded_is_reported() {
        let (m, n, a) = dense(&[&[1.0, 0.0]]);
        let lp = PackingLp::new(m, n, a, vec![1.0, 1.0], vec![1.0]).unwrap();
        assert!(matches!(lp.solve(), Err(Error::Solver(_))));
    }

    #[test]
    fn degenerate_interval_packing() {
        // rows: windows of 3 consecutive points; max Σx with each window sum ≤ 1 → ⌈n/3⌉
        let n = 30;
        let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if (i as i64 - j as i64).abs() <= 1 { 1.0 } else { 0.0 }).collect()).collect();
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let (m, k, a) = dense(&refs);
        let lp = PackingLp::new(m, k, a, vec![1.0; n], vec![1.0; n]).unwrap();
        let s = lp.solve().unwrap();
        assert_relative_eq!(s.primal_value, 10.0, epsilon = 1e-9);
        assert_relative_eq!(s.dual_value, 10.0, epsilon = 1e-9);
    }

    #[test]
    fn random_programs_satisfy_strong_duality() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let m = rng.random_range(2..25);
            let n = rng.random_range(2..25);
            let a: Vec<f64> = (0..m * n).map(|_| if rng.random::<f64>() < 0.3 { 0.0 } else { rng.random::<f64>() }).collect();
            let c: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let rhs: Vec<f64> = (0..m).map(|_| rng.random::<f64>() + 0.1).collect();
            let lp = PackingLp::new(m, n, a.clone(), c.clone(), rhs.clone()).unwrap();
            let Ok(s) = lp.solve() else { continue };
            assert!((s.primal_value - s.dual_value).abs() <= 1e-9 * (1.0 + s.primal_value));
            for i in 0..m {
                let row: f64 = (0..n).map(|j| a[j * m + i] * s.x[j]).sum();
                assert!(row <= rhs[i] + 1e-9);
            }
            for j in 0..n {
                let col: f64 = (0..m).map(|i| a[j * m + i] * s.y[i]).sum();
                assert!(col >= c[j] - 1e-9);
            }
        }
    }
}
