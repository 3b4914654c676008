//! Fourier-side solutions `û(ξ,t) = z(|ξ|², t) û₀(ξ)` on a centred mode
//! lattice, Sobolev norms, and synthesis back to real space.
//!
//! Convention: `f̂(ξ) = ∫ e^{-ixξ} f(x) dx`, so Parseval carries `(2π)^{-n}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Hypothesis, Result};
use crate::kernels::MemoryKernel;
use crate::specfun::MittagLefflerParams;
use crate::volterra::{RelaxationSolver, TimeGrid};

/// Positive-definiteness sweep used to guard the solvers.
pub const PD_OMEGA_MAX: f64 = 1e4;
pub const PD_SAMPLES: usize = 4000;

/// Centred lattice `ξ = j dξ`, `j ∈ [-N/2, N/2)` per axis, or radii
/// `r = i dξ`, `i = 0..=N/2`, when `radial` is set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeGrid {
    pub n: usize,
    pub modes_per_axis: usize,
    pub xi_max: f64,
    pub radial: bool,
}

impl ModeGrid {
    pub fn new(n: usize, modes_per_axis: usize, xi_max: f64, radial: bool) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::domain(format!("dimension must be 1, 2 or 3, got {n}")));
        }
        if modes_per_axis < 2 || modes_per_axis % 2 != 0 {
            return Err(Error::domain("modes_per_axis must be even and >= 2"));
        }
        if !(xi_max > 0.0 && xi_max.is_finite()) {
            return Err(Error::domain("xi_max must be positive"));
        }
        Ok(Self {
            n,
            modes_per_axis,
            xi_max,
            radial,
        })
    }

    /// Same lattice indices, frequencies multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            xi_max: self.xi_max * factor,
            ..*self
        }
    }

    pub fn dxi(&self) -> f64 {
        2.0 * self.xi_max / self.modes_per_axis as f64
    }

    pub fn len(&self) -> usize {
        if self.radial {
            self.modes_per_axis / 2 + 1
        } else {
            self.modes_per_axis.pow(self.n as u32)
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Integer lattice coordinates of mode `idx` (axis 0 slowest).
    pub fn lattice(&self, idx: usize) -> [i64; 3] {
        let mut out = [0i64; 3];
        if self.radial {
            out[0] = idx as i64;
            return out;
        }
        let nn = self.modes_per_axis;
        let half = (nn / 2) as i64;
        let mut rem = idx;
        for d in (0..self.n).rev() {
            out[d] = (rem % nn) as i64 - half;
            rem /= nn;
        }
        out
    }

    /// Index of a lattice point, if it lies on the grid.
    pub fn index_of(&self, j: [i64; 3]) -> Option<usize> {
        if self.radial {
            return (0..self.len() as i64).contains(&j[0]).then_some(j[0] as usize);
        }
        let nn = self.modes_per_axis as i64;
        let half = nn / 2;
        let mut idx = 0usize;
        for &jd in j.iter().take(self.n) {
            if jd < -half || jd >= half {
                return None;
            }
            idx = idx * nn as usize + (jd + half) as usize;
        }
        Some(idx)
    }

    pub fn zero_index(&self) -> usize {
        self.index_of([0, 0, 0]).expect("origin is always on the lattice")
    }

    /// `|j|²`, exact in integers; modes sharing it share `|ξ|²`.
    pub fn key(&self, idx: usize) -> u64 {
        let j = self.lattice(idx);
        j.iter().map(|v| (v * v) as u64).sum()
    }

    pub fn xi(&self, idx: usize) -> [f64; 3] {
        let j = self.lattice(idx);
        let d = self.dxi();
        [j[0] as f64 * d, j[1] as f64 * d, j[2] as f64 * d]
    }

    pub fn xi_sq(&self, idx: usize) -> f64 {
        self.key(idx) as f64 * self.dxi() * self.dxi()
    }

    /// Quadrature weight of mode `idx` in `(2π)^{-n} ∫ · dξ`.
    pub fn weight(&self, idx: usize) -> f64 {
        let d = self.dxi();
        if self.radial {
            let r = idx as f64 * d;
            let end = if idx == 0 || idx == self.len() - 1 { 0.5 } else { 1.0 };
            let surface = match self.n {
                1 => 2.0,
                2 => 2.0 * PI,
                _ => 4.0 * PI,
            };
            surface * r.powi(self.n as i32 - 1) * d * end / (2.0 * PI).powi(self.n as i32)
        } else {
            (d / (2.0 * PI)).powi(self.n as i32)
        }
    }

    /// Distinct keys in increasing order.
    pub fn distinct_keys(&self) -> Vec<u64> {
        let mut k: Vec<u64> = (0..self.len()).map(|i| self.key(i)).collect();
        k.sort_unstable();
        k.dedup();
        k
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub grid: ModeGrid,
    pub values: Vec<Complex64>,
    pub mass: f64,
}

impl SpectralField {
    pub fn from_fn<F: Fn(usize) -> Complex64>(grid: ModeGrid, f: F) -> Self {
        let values: Vec<Complex64> = (0..grid.len()).map(f).collect();
        let mass = values[grid.zero_index()].re;
        Self { grid, values, mass }
    }

    pub fn zeros(grid: ModeGrid) -> Self {
        Self::from_fn(grid, |_| Complex64::new(0.0, 0.0))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::from_fn(self.grid, |i| self.values[i] * c)
    }

    pub fn sub(&self, other: &SpectralField) -> Self {
        assert_eq!(self.grid.len(), other.grid.len(), "fields live on different grids");
        Self::from_fn(self.grid, |i| self.values[i] - other.values[i])
    }

    /// Largest `|û(-ξ) - conj(û(ξ))|` over pairs that both lie on the grid.
    pub fn hermitian_defect(&self) -> f64 {
        if self.grid.radial {
            return self.values.iter().fold(0.0, |m, v| m.max(v.im.abs()));
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.grid.len() {
            let j = self.grid.lattice(i);
            if let Some(k) = self.grid.index_of([-j[0], -j[1], -j[2]]) {
                worst = worst.max((self.values[k] - self.values[i].conj()).norm());
            }
        }
        worst
    }
}

/// Initial data with `û₀(0) = mass`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialData {
    /// `û₀ = U₀ e^{-w²|ξ|²/2}`.
    Gaussian { width: f64, mass: f64 },
    /// Indicator of `[-h, h]^n` scaled to mass U₀: `û₀ = U₀ Π sin(hξ_d)/(hξ_d)`.
    Box { half_width: f64, mass: f64 },
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

impl InitialData {
    pub fn mass(&self) -> f64 {
        match self {
            InitialData::Gaussian { mass, .. } | InitialData::Box { mass, .. } => *mass,
        }
    }

    pub fn fourier(&self, xi: &[f64; 3], n: usize) -> f64 {
        match self {
            InitialData::Gaussian { width, mass } => {
                let r2: f64 = xi[..n].iter().map(|x| x * x).sum();
                mass * (-0.5 * width * width * r2).exp()
            }
            InitialData::Box { half_width, mass } => {
                mass * xi[..n].iter().map(|x| sinc(half_width * x)).product::<f64>()
            }
        }
    }

    /// Data whose transform is `û₀(ξ / k)` (the mass-preserving dilation).
    pub fn dilated(&self, k: f64) -> Self {
        match *self {
            InitialData::Gaussian { width, mass } => InitialData::Gaussian {
                width: width / k,
                mass,
            },
            InitialData::Box { half_width, mass } => InitialData::Box {
                half_width: half_width / k,
                mass,
            },
        }
    }

    pub fn is_radial(&self) -> bool {
        matches!(self, InitialData::Gaussian { .. })
    }

    pub fn sample(&self, grid: &ModeGrid) -> Result<SpectralField> {
        if grid.radial && !self.is_radial() {
            return Err(Error::domain("box data is not radially symmetric"));
        }
        Ok(SpectralField::from_fn(*grid, |i| {
            Complex64::new(self.fourier(&grid.xi(i), grid.n), 0.0)
        }))
    }
}

/// Rejects kernels that fail the positive-definiteness sweep.
pub fn require_positive_definite(kernel: &MemoryKernel) -> Result<()> {
    let r = kernel.check_positive_definite(PD_OMEGA_MAX, PD_SAMPLES);
    if !r.certified {
        return Err(Error::refused(
            Hypothesis::PositiveDefinite,
            format!("{} has no closed-form Laplace transform to certify", kernel.description),
        ));
    }
    if !r.pass {
        return Err(Error::refused(
            Hypothesis::PositiveDefinite,
            format!(
                "{}: a0 + Re a~(i w) = {:.3e} at w = {:.3e}",
                kernel.description, r.min_value, r.argmin_omega
            ),
        ));
    }
    Ok(())
}

/// `z(key·dξ², t_i)` for every distinct key of `grid`, at the requested node
/// indices. Rows follow `grid.distinct_keys()`.
pub(crate) fn relaxation_table(
    kernel: &MemoryKernel,
    grid: &ModeGrid,
    node_idx: &[usize],
    time_grid: TimeGrid,
) -> Result<(Vec<u64>, Vec<Vec<f64>>)> {
    let keys = grid.distinct_keys();
    let d2 = grid.dxi() * grid.dxi();
    let lambdas: Vec<f64> = keys.iter().map(|&k| k as f64 * d2).collect();
    let solver = RelaxationSolver::new(kernel, time_grid)?;
    let rel = solver.solve_batch(&lambdas)?;
    let table = rel
        .into_iter()
        .map(|r| node_idx.iter().map(|&i| r.values[i]).collect())
        .collect();
    Ok((keys, table))
}

pub(crate) fn lookup(keys: &[u64], key: u64) -> usize {
    keys.binary_search(&key).expect("key present")
}

/// `û(ξ,t) = z(|ξ|²,t) û₀(ξ)` at each requested time.
pub fn evolve(
    kernel: &MemoryKernel,
    u0: &InitialData,
    grid: &ModeGrid,
    times: &[f64],
    time_grid: TimeGrid,
) -> Result<Vec<SpectralField>> {
    require_positive_definite(kernel)?;
    evolve_unchecked(kernel, u0, grid, times, time_grid)
}

pub(crate) fn evolve_unchecked(
    kernel: &MemoryKernel,
    u0: &InitialData,
    grid: &ModeGrid,
    times: &[f64],
    time_grid: TimeGrid,
) -> Result<Vec<SpectralField>> {
    let idx: Vec<usize> = times.iter().map(|&t| time_grid.index_of(t)).collect::<Result<_>>()?;
    let base = u0.sample(grid)?;
    let (keys, table) = relaxation_table(kernel, grid, &idx, time_grid)?;
    let row_of: Vec<usize> = (0..grid.len()).map(|i| lookup(&keys, grid.key(i))).collect();
    Ok((0..times.len())
        .map(|ti| {
            SpectralField::from_fn(*grid, |i| base.values[i] * table[row_of[i]][ti])
        })
        .collect())
}

/// `((2π)^{-n} ∫ (1+|ξ|²)^s |û|² dξ)^{1/2}` on the mode lattice.
pub fn hs_norm(field: &SpectralField, s: f64) -> f64 {
    let g = &field.grid;
    (0..g.len())
        .map(|i| g.weight(i) * (1.0 + g.xi_sq(i)).powf(s) * field.values[i].norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Real-space samples on the dual lattice `x = k dx`, `dx = 2π/(N dξ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    pub n: usize,
    pub points_per_axis: usize,
    pub dx: f64,
    pub values: Vec<f64>,
    /// Largest imaginary part discarded by the synthesis.
    pub max_imag: f64,
}

impl RealField {
    pub fn x(&self, idx: usize) -> [f64; 3] {
        let g = ModeGrid {
            n: self.n,
            modes_per_axis: self.points_per_axis,
            xi_max: 1.0,
            radial: false,
        };
        let j = g.lattice(idx);
        [j[0] as f64 * self.dx, j[1] as f64 * self.dx, j[2] as f64 * self.dx]
    }

    pub fn index_of(&self, j: [i64; 3]) -> Option<usize> {
        ModeGrid {
            n: self.n,
            modes_per_axis: self.points_per_axis,
            xi_max: 1.0,
            radial: false,
        }
        .index_of(j)
    }

    /// Trapezoid (plain lattice sum) of the samples.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.dx.powi(self.n as i32)
    }
}

/// Inverse transform of complex samples on a Cartesian grid (no symmetry check).
pub(crate) fn inverse_transform(grid: &ModeGrid, values: &[Complex64]) -> Vec<Complex64> {
    let nn = grid.modes_per_axis;
    let half = nn / 2;
    let mut data = values.to_vec();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_inverse(nn);
    let mut line = vec![Complex64::new(0.0, 0.0); nn];
    for axis in 0..grid.n {
        let stride = nn.pow((grid.n - 1 - axis) as u32);
        let outer = grid.len() / (nn * stride);
        for o in 0..outer {
            for inner in 0..stride {
                let base = o * nn * stride + inner;
                for p in 0..nn {
                    line[(p + half) % nn] = data[base + p * stride];
                }
                fft.process(&mut line);
                for q in 0..nn {
                    data[base + ((q + half) % nn) * stride] = line[q];
                }
            }
        }
    }
    let scale = (grid.dxi() / (2.0 * PI)).powi(grid.n as i32);
    data.iter_mut().for_each(|v| *v *= scale);
    data
}

/// `u(x) = (2π)^{-n} ∫ e^{ixξ} û(ξ) dξ` by inverse FFT.
pub fn synthesize(field: &SpectralField) -> Result<RealField> {
    let g = &field.grid;
    if g.radial {
        return Err(Error::domain("synthesis needs a Cartesian mode grid"));
    }
    let peak = field.values.iter().fold(0.0, |m: f64, v| m.max(v.norm()));
    let defect = field.hermitian_defect();
    if defect > 1e-8 * peak.max(1e-300) {
        return Err(Error::Symmetry(defect));
    }
    let data = inverse_transform(g, &field.values);
    Ok(RealField {
        n: g.n,
        points_per_axis: g.modes_per_axis,
        dx: 2.0 * PI / (g.modes_per_axis as f64 * g.dxi()),
        max_imag: data.iter().fold(0.0, |m, v| m.max(v.im.abs())),
        values: data.iter().map(|v| v.re).collect(),
    })
}

/// `mass · E_{1+β}(-|ξ|² t^{1+β})`.
pub fn limit_profile(beta: f64, grid: &ModeGrid, t: f64, mass: f64) -> Result<SpectralField> {
    if !(beta > -1.0 && beta <= 1.0) {
        return Err(Error::refused(
            Hypothesis::BetaRange,
            format!("limit profile needs beta in (-1, 1], got {beta}"),
        ));
    }
    if !(t > 0.0) {
        return Err(Error::domain("limit profile needs t > 0"));
    }
    let alpha = 1.0 + beta;
    let ml = MittagLefflerParams::new(alpha)?;
    let keys = grid.distinct_keys();
    let d2 = grid.dxi() * grid.dxi();
    let ta = t.powf(alpha);
    let vals: Vec<f64> = keys
        .iter()
        .map(|&k| ml.eval(-(k as f64) * d2 * ta))
        .collect::<Result<_>>()?;
    Ok(SpectralField::from_fn(*grid, |i| {
        Complex64::new(mass * vals[lookup(&keys, grid.key(i))], 0.0)
    }))
}

/// Exact relaxation for `a = cos t`, `a0 = 0`.
pub fn cosine_relaxation_exact(lambda: f64, t: f64) -> f64 {
    (1.0 + lambda * ((1.0 + lambda).sqrt() * t).cos()) / (1.0 + lambda)
}

/// Exact relaxation for `a = -e^{-t}`, `a0 = 1`.
pub fn neg_exponential_relaxation_exact(lambda: f64, t: f64) -> f64 {
    (1.0 + lambda * (-(1.0 + lambda) * t).exp()) / (1.0 + lambda)
}
