//! Isotropic viscoelastic velocity fields in 3-D.
//!
//! The gradient part `P v̂ = ξξᵀ/|ξ|² v̂` relaxes with the longitudinal kernel
//! `β = (4a + 2b)/3`, the divergence-free part `Q v̂ = (I - ξξᵀ/|ξ|²) v̂` with
//! the shear kernel `a`. At ξ = 0 we take `P = I`, `Q = 0`; both relaxations
//! equal 1 at λ = 0, so the choice does not affect `v̂(0,t) = V₀`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Hypothesis, Result};
use crate::kernels::{KernelFamily, MemoryKernel};
use crate::specfun::erfc;
use crate::spectral::{
    hs_norm, lookup, relaxation_table, require_positive_definite, InitialData, ModeGrid,
    SpectralField,
};
use crate::volterra::TimeGrid;

pub type Vec3 = [f64; 3];
pub type CVec3 = [Complex64; 3];
pub type Mat3 = [[f64; 3]; 3];

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq)]
pub struct ViscoKernelPair {
    pub shear: MemoryKernel,
    pub bulk: MemoryKernel,
}

impl ViscoKernelPair {
    pub fn new(shear: MemoryKernel, bulk: MemoryKernel) -> Self {
        Self { shear, bulk }
    }

    /// `β₀ = (4a₀ + 2b₀)/3`, `β = (4a + 2b)/3`.
    pub fn beta_kernel(&self) -> Result<MemoryKernel> {
        MemoryKernel::custom(
            (4.0 * self.shear.a0 + 2.0 * self.bulk.a0) / 3.0,
            KernelFamily::Sum(vec![
                (4.0 / 3.0, self.shear.family.clone()),
                (2.0 / 3.0, self.bulk.family.clone()),
            ]),
            format!("(4 [{}] + 2 [{}])/3", self.shear.description, self.bulk.description),
        )
    }

    /// Positive-definiteness of the shear and longitudinal kernels.
    pub fn check_hypotheses(&self) -> Result<MemoryKernel> {
        require_positive_definite(&self.shear)?;
        let beta = self.beta_kernel()?;
        require_positive_definite(&beta)?;
        Ok(beta)
    }

    /// `(A, B) = (a₀ + ∫a, β₀ + ∫β)`, refused unless both are finite and positive.
    pub fn limits(&self) -> Result<(f64, f64)> {
        let beta = self.beta_kernel()?;
        match (self.shear.a_infinity(), beta.a_infinity()) {
            (Some(a), Some(b)) if a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() => Ok((a, b)),
            (a, b) => Err(Error::refused(
                Hypothesis::FiniteLimit,
                format!("A = {a:?}, B = {b:?}; both must be finite and positive"),
            )),
        }
    }
}

/// `ξξᵀ/|ξ|²`, and `I` at the origin.
pub fn projector_p(xi: Vec3) -> Mat3 {
    let r2: f64 = xi.iter().map(|x| x * x).sum();
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = if r2 == 0.0 {
                (i == j) as u8 as f64
            } else {
                xi[i] * xi[j] / r2
            };
        }
    }
    m
}

/// `I - ξξᵀ/|ξ|²`, and `0` at the origin.
pub fn projector_q(xi: Vec3) -> Mat3 {
    let p = projector_p(xi);
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = (i == j) as u8 as f64 - p[i][j];
        }
    }
    m
}

fn apply(m: &Mat3, v: &CVec3) -> CVec3 {
    let mut out = [ZERO; 3];
    for i in 0..3 {
        out[i] = v[0] * m[i][0] + v[1] * m[i][1] + v[2] * m[i][2];
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorSpectralField {
    pub grid: ModeGrid,
    pub values: Vec<CVec3>,
    pub mass_vector: Vec3,
}

impl VectorSpectralField {
    pub fn from_fn<F: Fn(usize) -> CVec3>(grid: ModeGrid, f: F) -> Result<Self> {
        if grid.n != 3 || grid.radial {
            return Err(Error::domain("vector fields need a Cartesian 3-D mode grid"));
        }
        let values: Vec<CVec3> = (0..grid.len()).map(f).collect();
        let v0 = values[grid.zero_index()];
        Ok(Self {
            grid,
            values,
            mass_vector: [v0[0].re, v0[1].re, v0[2].re],
        })
    }

    fn map<F: Fn(usize, &CVec3) -> CVec3>(&self, f: F) -> Self {
        let values: Vec<CVec3> = self.values.iter().enumerate().map(|(i, v)| f(i, v)).collect();
        let v0 = values[self.grid.zero_index()];
        Self {
            grid: self.grid,
            values,
            mass_vector: [v0[0].re, v0[1].re, v0[2].re],
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.map(|i, v| [v[0] - other.values[i][0], v[1] - other.values[i][1], v[2] - other.values[i][2]])
    }

    pub fn component(&self, c: usize) -> SpectralField {
        SpectralField::from_fn(self.grid, |i| self.values[i][c])
    }

    /// `(Σ_c ‖v̂_c‖²_{H^s})^{1/2}`.
    pub fn hs_norm(&self, s: f64) -> f64 {
        (0..3).map(|c| hs_norm(&self.component(c), s).powi(2)).sum::<f64>().sqrt()
    }
}

pub fn project_p(field: &VectorSpectralField) -> VectorSpectralField {
    field.map(|i, v| apply(&projector_p(field.grid.xi(i)), v))
}

pub fn project_q(field: &VectorSpectralField) -> VectorSpectralField {
    field.map(|i, v| apply(&projector_q(field.grid.xi(i)), v))
}

/// Vector initial data built from a scalar profile `φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VectorInitialData {
    /// `φ(x) d`, with momentum `U₀ d`.
    Directional { profile: InitialData, direction: Vec3 },
    /// `c ∇φ`: curl-free, zero momentum.
    Gradient { profile: InitialData, amplitude: f64 },
    /// `∇ × (φ d)`: divergence-free, zero momentum.
    Rotational { profile: InitialData, axis: Vec3 },
}

impl VectorInitialData {
    pub fn momentum(&self) -> Vec3 {
        match self {
            VectorInitialData::Directional { profile, direction } => direction.map(|d| d * profile.mass()),
            _ => [0.0; 3],
        }
    }

    pub fn fourier(&self, xi: Vec3) -> CVec3 {
        match *self {
            VectorInitialData::Directional { profile, direction } => {
                let f = profile.fourier(&xi, 3);
                direction.map(|d| Complex64::new(d * f, 0.0))
            }
            VectorInitialData::Gradient { profile, amplitude } => {
                let f = amplitude * profile.fourier(&xi, 3);
                xi.map(|x| Complex64::new(0.0, x * f))
            }
            VectorInitialData::Rotational { profile, axis } => {
                let f = profile.fourier(&xi, 3);
                let c = [
                    xi[1] * axis[2] - xi[2] * axis[1],
                    xi[2] * axis[0] - xi[0] * axis[2],
                    xi[0] * axis[1] - xi[1] * axis[0],
                ];
                c.map(|x| Complex64::new(0.0, x * f))
            }
        }
    }

    pub fn sample(&self, grid: &ModeGrid) -> Result<VectorSpectralField> {
        VectorSpectralField::from_fn(*grid, |i| self.fourier(grid.xi(i)))
    }
}

/// `v̂(ξ,t) = z₁(|ξ|²,t) P v̂₀ + z(|ξ|²,t) Q v̂₀` at each requested time.
pub fn evolve_visco(
    pair: &ViscoKernelPair,
    v0: &VectorInitialData,
    grid: &ModeGrid,
    times: &[f64],
    time_grid: TimeGrid,
) -> Result<Vec<VectorSpectralField>> {
    let beta = pair.check_hypotheses()?;
    evolve_visco_unchecked(&pair.shear, &beta, v0, grid, times, time_grid)
}

fn evolve_visco_unchecked(
    shear: &MemoryKernel,
    beta: &MemoryKernel,
    v0: &VectorInitialData,
    grid: &ModeGrid,
    times: &[f64],
    time_grid: TimeGrid,
) -> Result<Vec<VectorSpectralField>> {
    let base = v0.sample(grid)?;
    let idx: Vec<usize> = times.iter().map(|&t| time_grid.index_of(t)).collect::<Result<_>>()?;
    let (keys, z_q) = relaxation_table(shear, grid, &idx, time_grid)?;
    let (_, z_p) = relaxation_table(beta, grid, &idx, time_grid)?;
    let split: Vec<(usize, CVec3, CVec3)> = (0..grid.len())
        .map(|i| {
            let xi = grid.xi(i);
            let v = &base.values[i];
            (lookup(&keys, grid.key(i)), apply(&projector_p(xi), v), apply(&projector_q(xi), v))
        })
        .collect();
    (0..times.len())
        .map(|ti| {
            VectorSpectralField::from_fn(*grid, |i| {
                let (row, p, q) = &split[i];
                let (a, b) = (z_p[*row][ti], z_q[*row][ti]);
                if a == b {
                    // P + Q = I, so skip the round-off of splitting
                    return base.values[i].map(|c| c * a);
                }
                [p[0] * a + q[0] * b, p[1] * a + q[1] * b, p[2] * a + q[2] * b]
            })
        })
        .collect()
}

/// `e^{-B|ξ|²t} P V₀ + e^{-A|ξ|²t} Q V₀`.
pub fn stokes_fundamental(a_lim: f64, b_lim: f64, grid: &ModeGrid, t: f64, v0: Vec3) -> Result<VectorSpectralField> {
    if !(a_lim > 0.0 && b_lim > 0.0 && t > 0.0) {
        return Err(Error::domain("stokes_fundamental needs A, B, t > 0"));
    }
    let v: CVec3 = v0.map(|x| Complex64::new(x, 0.0));
    VectorSpectralField::from_fn(*grid, |i| {
        let xi = grid.xi(i);
        let r2 = grid.xi_sq(i);
        let p = apply(&projector_p(xi), &v);
        let q = apply(&projector_q(xi), &v);
        let (eb, ea) = ((-b_lim * r2 * t).exp(), (-a_lim * r2 * t).exp());
        [p[0] * eb + q[0] * ea, p[1] * eb + q[1] * ea, p[2] * eb + q[2] * ea]
    })
}

/// `erf(r/√(4t)) / (4πr)`, whose transform is `e^{-|ξ|²t}/|ξ|²`.
pub fn stokes_potential(r: f64, t: f64) -> f64 {
    let s = (4.0 * t).sqrt();
    if r < 1e-8 * s {
        return 1.0 / (2.0 * PI.powf(1.5) * s);
    }
    (1.0 - erfc(r / s)) / (4.0 * PI * r)
}

/// Real-space `U(x,t)` with `Û = ξξᵀ/|ξ|² e^{-|ξ|²t}`, i.e. `U = -∇∇ᵀ` of
/// [`stokes_potential`], by fourth-order central differences with step `h`.
pub fn stokes_u_real(x: Vec3, t: f64, h: f64) -> Mat3 {
    let phi = |d: Vec3| {
        let y = [x[0] + d[0], x[1] + d[1], x[2] + d[2]];
        stokes_potential((y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt(), t)
    };
    let offsets = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let v = if i == j {
                let at = |k: f64| {
                    let mut d = [0.0; 3];
                    d[i] = k * h;
                    phi(d)
                };
                (-at(-2.0) + 16.0 * at(-1.0) - 30.0 * at(0.0) + 16.0 * at(1.0) - at(2.0)) / (12.0 * h * h)
            } else {
                let mut acc = 0.0;
                for (a, wa) in offsets {
                    for (b, wb) in offsets {
                        let mut d = [0.0; 3];
                        d[i] = a * h;
                        d[j] = b * h;
                        acc += wa * wb * phi(d);
                    }
                }
                acc / (144.0 * h * h)
            };
            m[i][j] = -v;
        }
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViscoRateReport {
    pub s: f64,
    pub a_lim: f64,
    pub b_lim: f64,
    /// `(t, distance, t^{3/4} distance)`.
    pub rows: Vec<(f64, f64, f64)>,
    /// Set when `V₀ = 0`, where the comparison target vanishes.
    pub degenerate_mass: bool,
}

impl ViscoRateReport {
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].2 < w[0].2)
    }
}

/// `t^{3/4} ‖v̂(·,t) − W(·,t)V₀‖_{H^s}` with `W` the compressible Stokes
/// fundamental solution. Each `t` is solved on the lattice `η = √t ξ`.
pub fn visco_asymptotics(
    pair: &ViscoKernelPair,
    v0: &VectorInitialData,
    t_list: &[f64],
    s: f64,
    grid: &ModeGrid,
    dt: f64,
) -> Result<ViscoRateReport> {
    let beta = pair.check_hypotheses()?;
    for k in [&pair.shear, &beta] {
        if !(k.family.abscissa() < 0.0) {
            return Err(Error::refused(
                Hypothesis::LaplaceExtension,
                format!("transform of {} does not extend past Re z = 0", k.description),
            ));
        }
    }
    let (a_lim, b_lim) = pair.limits()?;
    if t_list.iter().any(|&t| !(t > 0.0)) || t_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("t_list must be positive and increasing"));
    }
    let mass = v0.momentum();
    let tg = TimeGrid::with_step(1.0, dt)?;
    let mut rows = Vec::with_capacity(t_list.len());
    for &t in t_list {
        let k = t.sqrt();
        let v = evolve_visco_unchecked(
            &pair.shear.dilated(t, 1.0),
            &beta.dilated(t, 1.0),
            &dilate_vector(v0, k),
            grid,
            &[1.0],
            tg,
        )?
        .remove(0);
        let xi_grid = grid.scaled(1.0 / k);
        let v = VectorSpectralField { grid: xi_grid, ..v };
        let w = stokes_fundamental(a_lim, b_lim, &xi_grid, t, mass)?;
        let d = v.sub(&w).hs_norm(s);
        rows.push((t, d, t.powf(0.75) * d));
    }
    Ok(ViscoRateReport {
        s,
        a_lim,
        b_lim,
        rows,
        degenerate_mass: mass.iter().all(|&m| m == 0.0),
    })
}

/// Data with transform `v̂₀(η/k)`.
fn dilate_vector(v0: &VectorInitialData, k: f64) -> VectorInitialData {
    match *v0 {
        VectorInitialData::Directional { profile, direction } => VectorInitialData::Directional {
            profile: profile.dilated(k),
            direction,
        },
        VectorInitialData::Gradient { profile, amplitude } => VectorInitialData::Gradient {
            profile: profile.dilated(k),
            amplitude: amplitude / k,
        },
        VectorInitialData::Rotational { profile, axis } => VectorInitialData::Rotational {
            profile: profile.dilated(k),
            axis: axis.map(|a| a / k),
        },
    }
}
