//! Product-integration solver for the scalar relaxation equation
//! `z(t) + λ ∫_0^t A(t - s) z(s) ds = 1`.
//!
//! `z` is taken piecewise linear on a uniform grid and the convolution is
//! integrated exactly against that interpolant using cell moments of `A`.
//! Cell 0 uses the kernel's closed-form antiderivatives (so a singular `a`
//! with integrable `A` costs nothing extra); later cells, where `A` is
//! smooth, use a 16-point Gauss-Legendre rule in local coordinates, which
//! avoids the cancellation of differencing large antiderivatives.
//!
//! When `A` contains a power `t^β` with non-integer β, `z` behaves like
//! `t^{1+β}` near the origin and plain product integration drops to order
//! `1 + β`. Starting weights on the first few nodes restore second order:
//! the rule is made exact for `s^γ`, γ ∈ {0, 1} ∪ {non-integer powers
//! i + j(1+β) < 2}.
//!
//! Like the trapezoidal rule the scheme is A-stable but not L-stable: a mode
//! with `λ A dt ≫ 1` is damped by a factor close to -1 per step instead of
//! vanishing. Keep `λ A dt` moderate when such modes matter.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::MemoryKernel;
use crate::quad;

/// Contract bound on `|z|` for positive-definite kernels.
pub const TOL_BOUND: f64 = 1e-6;
/// At most this many non-integer exponents get starting weights.
const MAX_STARTING_EXPONENTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_end: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_end: f64, n_steps: usize) -> Result<Self> {
        if !(t_end > 0.0 && t_end.is_finite()) || n_steps == 0 {
            return Err(Error::domain("time grid needs t_end > 0 and n_steps >= 1"));
        }
        Ok(Self { t_end, n_steps })
    }

    /// Grid with step `dt` ending at `t_end`; `t_end/dt` must be an integer
    /// up to round-off.
    pub fn with_step(t_end: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::domain("dt must be positive"));
        }
        let n = (t_end / dt).round();
        if n < 1.0 || ((n * dt - t_end) / t_end).abs() > 1e-9 {
            return Err(Error::domain(format!("t_end = {t_end} is not a multiple of dt = {dt}")));
        }
        Self::new(t_end, n as usize)
    }

    pub fn dt(&self) -> f64 {
        self.t_end / self.n_steps as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.t_end * i as f64 / self.n_steps as f64
    }

    /// Index of the node equal to `t` (relative tolerance 1e-9 of dt).
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let x = t / self.dt();
        let i = x.round();
        if !(i >= 0.0 && i <= self.n_steps as f64) || (x - i).abs() > 1e-9 * x.max(1.0) {
            return Err(Error::OffGrid { t, dt: self.dt() });
        }
        Ok(i as usize)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarRelaxation {
    pub lambda: f64,
    pub grid: TimeGrid,
    /// `z` at the nodes `0..=n_steps`.
    pub values: Vec<f64>,
}

impl ScalarRelaxation {
    pub fn at(&self, t: f64) -> Result<f64> {
        Ok(self.values[self.grid.index_of(t)?])
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Quadrature weights for one kernel on one grid, shared by all λ.
#[derive(Debug, Clone)]
pub struct RelaxationSolver {
    grid: TimeGrid,
    alpha0: f64,
    /// `w[j]` multiplies `z_{n-j}`, j = 1..n-1.
    w: Vec<f64>,
    /// `w` reversed, so the history sum runs over two forward slices.
    w_rev: Vec<f64>,
    /// `gam[k]`: weight of the left node of cell k; `gam[n-1]` multiplies `z_0`.
    gam: Vec<f64>,
    start: Option<StartingWeights>,
}

#[derive(Debug, Clone)]
struct StartingWeights {
    /// Number of corrected nodes `0..m`.
    m: usize,
    /// Row n (1..=N) holds the weights for `z_0..z_{m-1}`.
    weights: Vec<f64>,
    exponents: Vec<f64>,
}

fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>, n: usize) -> Option<Vec<f64>> {
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))?;
        if a[piv * n + col] == 0.0 {
            return None;
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            b.swap(col, piv);
        }
        for r in col + 1..n {
            let f = a[r * n + col] / a[col * n + col];
            for k in col..n {
                a[r * n + k] -= f * a[col * n + k];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r * n + k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r * n + r];
    }
    Some(x)
}

fn non_integer(x: f64) -> bool {
    (x - x.round()).abs() > 1e-9
}

/// Exponents of the leading non-smooth terms of `z` near 0.
fn starting_exponents(kernel: &MemoryKernel) -> Vec<f64> {
    let mut out = Vec::new();
    for b in kernel.family.singular_exponents() {
        let nu = 1.0 + b;
        for i in 0..2 {
            let mut j = 1;
            loop {
                let e = i as f64 + j as f64 * nu;
                if e >= 2.0 - 1e-9 {
                    break;
                }
                if non_integer(e) {
                    out.push(e);
                }
                j += 1;
            }
        }
    }
    out.sort_by(|a, b| a.total_cmp(b));
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    out.truncate(MAX_STARTING_EXPONENTS);
    out
}

impl RelaxationSolver {
    pub fn new(kernel: &MemoryKernel, grid: TimeGrid) -> Result<Self> {
        let n = grid.n_steps;
        let h = grid.dt();
        let (p1, p2) = kernel.quad_moments(0.0, h)?;
        let mut alpha = vec![0.0; n];
        let mut gam = vec![0.0; n];
        alpha[0] = p1 - p2 / h;
        gam[0] = p2 / h;
        let (gx, gw) = quad::gl16_unit();
        for k in 1..n {
            let (mut i0, mut i1) = (0.0, 0.0);
            for (x, wt) in gx.iter().zip(gw) {
                let a = kernel.primitive_a((k as f64 + x) * h);
                i0 += wt * a;
                i1 += wt * x * a;
            }
            alpha[k] = (i0 - i1) * h;
            gam[k] = i1 * h;
        }
        let mut w = vec![0.0; n];
        for j in 1..n {
            w[j] = alpha[j] + gam[j - 1];
        }
        let w_rev = w.iter().rev().cloned().collect();
        let mut solver = Self {
            grid,
            alpha0: alpha[0],
            w,
            w_rev,
            gam,
            start: None,
        };
        let exps = starting_exponents(kernel);
        if !exps.is_empty() {
            solver.start = Some(solver.starting_weights(kernel, exps)?);
        }
        Ok(solver)
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    /// Non-integer exponents the rule has been made exact for.
    pub fn corrected_exponents(&self) -> &[f64] {
        self.start.as_ref().map(|s| s.exponents.as_slice()).unwrap_or(&[])
    }

    /// Base rule `Σ_j c_{n,j} f_j` applied to samples `f`.
    fn base_rule(&self, f: &[f64], n: usize) -> f64 {
        let mut s = self.alpha0 * f[n] + self.gam[n - 1] * f[0];
        for j in 1..n {
            s += self.w[j] * f[n - j];
        }
        s
    }

    fn starting_weights(&self, kernel: &MemoryKernel, exps: Vec<f64>) -> Result<StartingWeights> {
        let n_steps = self.grid.n_steps;
        let mut all = vec![0.0, 1.0];
        all.extend(&exps);
        let m = all.len().min(n_steps + 1);
        all.truncate(m);
        let pw = |t: f64, g: f64| if g == 0.0 { 1.0 } else { t.powf(g) };
        let mut mat = vec![0.0; m * m];
        for (p, &g) in all.iter().enumerate() {
            for q in 0..m {
                mat[p * m + q] = pw(self.grid.node(q), g);
            }
        }
        let samples: Vec<Vec<f64>> = all
            .iter()
            .map(|&g| (0..=n_steps).map(|i| pw(self.grid.node(i), g)).collect())
            .collect();
        let rows: Vec<Vec<f64>> = (1..=n_steps)
            .into_par_iter()
            .map(|n| {
                let t = self.grid.node(n);
                let rhs: Vec<f64> = all
                    .iter()
                    .zip(&samples)
                    .map(|(&g, f)| kernel.power_moment(g, t) - self.base_rule(f, n))
                    .collect();
                solve_dense(mat.clone(), rhs, m).unwrap_or_else(|| vec![0.0; m])
            })
            .collect();
        let mut weights = vec![0.0; m * (n_steps + 1)];
        for (n, r) in rows.into_iter().enumerate() {
            weights[(n + 1) * m..(n + 2) * m].copy_from_slice(&r);
        }
        Ok(StartingWeights {
            m,
            weights,
            exponents: exps,
        })
    }

    pub fn solve(&self, lambda: f64) -> Result<ScalarRelaxation> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::domain(format!("lambda must be finite and >= 0, got {lambda}")));
        }
        let n_steps = self.grid.n_steps;
        let mut z = vec![1.0; n_steps + 1];
        if lambda == 0.0 {
            return Ok(ScalarRelaxation {
                lambda,
                grid: self.grid,
                values: z,
            });
        }
        let denom = 1.0 + lambda * self.alpha0;
        if !(denom > 0.0) {
            return Err(Error::StepSize(format!(
                "1 + lambda*w_00 = {denom} at lambda = {lambda}, dt = {}",
                self.grid.dt()
            )));
        }
        let (m, sw) = match &self.start {
            Some(s) => (s.m, s.weights.as_slice()),
            None => (0, &[][..]),
        };
        // The first m-1 unknowns appear in each other's starting weights.
        let ns = m.saturating_sub(1).min(n_steps);
        if ns > 0 {
            let mut a = vec![0.0; ns * ns];
            let mut b = vec![1.0; ns];
            for n in 1..=ns {
                let r = n - 1;
                let mut coef = vec![0.0; n_steps + 1];
                coef[n] += self.alpha0;
                for j in 1..n {
                    coef[n - j] += self.w[j];
                }
                coef[0] += self.gam[n - 1];
                for q in 0..m {
                    coef[q] += sw[n * m + q];
                }
                a[r * ns + r] += 1.0;
                b[r] -= lambda * coef[0];
                for j in 1..=ns {
                    a[r * ns + j - 1] += lambda * coef[j];
                }
            }
            let x = solve_dense(a, b, ns)
                .ok_or_else(|| Error::StepSize("singular starting system".into()))?;
            z[1..=ns].copy_from_slice(&x);
        }
        let len = self.w_rev.len();
        for n in ns + 1..=n_steps {
            // Σ_{j=1}^{n-1} w_j z_{n-j} = Σ_{i=1}^{n-1} z_i w_rev[len-1-n+i].
            let mut s = self.gam[n - 1] * z[0];
            s += dot(&z[1..n], &self.w_rev[len - n..]);
            if m > 0 {
                let row = &sw[n * m..(n + 1) * m];
                s += row.iter().zip(&z[..m]).map(|(a, b)| a * b).sum::<f64>();
            }
            z[n] = (1.0 - lambda * s) / denom;
        }
        Ok(ScalarRelaxation {
            lambda,
            grid: self.grid,
            values: z,
        })
    }

    /// Solves every λ with the shared weights; order-independent and
    /// identical to one-at-a-time calls.
    pub fn solve_batch(&self, lambdas: &[f64]) -> Result<Vec<ScalarRelaxation>> {
        lambdas.par_iter().map(|&l| self.solve(l)).collect()
    }
}

/// Dot product with four independent accumulators so the loop vectorises.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

pub fn solve_relaxation(kernel: &MemoryKernel, lambda: f64, grid: TimeGrid) -> Result<ScalarRelaxation> {
    RelaxationSolver::new(kernel, grid)?.solve(lambda)
}

pub fn solve_relaxation_batch(
    kernel: &MemoryKernel,
    lambdas: &[f64],
    grid: TimeGrid,
) -> Result<Vec<ScalarRelaxation>> {
    RelaxationSolver::new(kernel, grid)?.solve_batch(lambdas)
}

/// `|z(t_i)| ≤ 2 e^{-ε min(λ,1) t_i} + 1e-9` at every node.
pub fn decay_envelope_check(rel: &ScalarRelaxation, epsilon: f64) -> bool {
    let rate = epsilon * rel.lambda.min(1.0);
    rel.values
        .iter()
        .enumerate()
        .all(|(i, z)| z.abs() <= 2.0 * (-rate * rel.grid.node(i)).exp() + 1e-9)
}

/// Largest ε for which [`decay_envelope_check`] holds on this solution.
pub fn fit_decay_rate(rel: &ScalarRelaxation) -> f64 {
    let lm = rel.lambda.min(1.0);
    rel.values
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, z)| z.abs() > 1e-300)
        .map(|(i, z)| {
            let t = rel.grid.node(i);
            let ratio = (z.abs() - 1e-9).max(1e-300) / 2.0;
            if ratio >= 1.0 {
                0.0
            } else {
                -ratio.ln() / (lm * t)
            }
        })
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelConvergenceReport {
    /// `sup_i |z_n(t_i) - z_∞(t_i)|` for each kernel in the sequence.
    pub sup_distance: Vec<f64>,
    /// `‖A_n - A_∞‖_{L¹(0, t_end)}` by the midpoint rule (A may be singular at 0).
    pub l1_distance: Vec<f64>,
}

/// Solves with each `A_n` and with the limit `A_∞` at one λ and reports how
/// far the solutions are apart alongside the kernel distances.
pub fn kernel_convergence_test(
    kernels: &[MemoryKernel],
    limit: &MemoryKernel,
    lambda: f64,
    grid: TimeGrid,
) -> Result<KernelConvergenceReport> {
    let z_inf = solve_relaxation(limit, lambda, grid)?;
    let h = grid.dt();
    let mut sup_distance = Vec::with_capacity(kernels.len());
    let mut l1_distance = Vec::with_capacity(kernels.len());
    for k in kernels {
        let z = solve_relaxation(k, lambda, grid)?;
        sup_distance.push(
            z.values
                .iter()
                .zip(&z_inf.values)
                .fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs())),
        );
        l1_distance.push(
            (0..grid.n_steps)
                .map(|i| {
                    let t = (i as f64 + 0.5) * h;
                    (k.primitive_a(t) - limit.primitive_a(t)).abs() * h
                })
                .sum(),
        );
    }
    Ok(KernelConvergenceReport {
        sup_distance,
        l1_distance,
    })
}
