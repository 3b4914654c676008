//! Memory kernels `(a0, a)` with closed-form primitives `A(t) = a0 + ∫_0^t a`,
//! Laplace transforms, positive-definiteness checks and regular-variation
//! index estimation.
//!
//! A family describes only the memory part `M(t) = ∫_0^t a`; the
//! instantaneous coefficient `a0` lives on [`MemoryKernel`].

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad;
use crate::specfun::{beta_fn, gamma};

#[derive(Debug, Clone, PartialEq)]
pub enum KernelFamily {
    /// No memory.
    Heat,
    /// `a ≡ c`, so `M = ct`.
    Wave { c: f64 },
    /// `a = c t^{β-1}`, `M = (c/β) t^β`. For β < 0 the primitive is the
    /// renormalised one (finite part), which needs c < 0.
    PowerLaw { beta: f64, c: f64 },
    /// `a = c e^{-μt}`.
    Exponential { mu: f64, c: f64 },
    /// `a = -e^{-t}`; with a0 = 1 this gives `A = e^{-t}`.
    NegExponential,
    /// `a = cos t`, `M = sin t`.
    Cosine,
    /// `M = t (ln(shift + t))^m`.
    LogModified { m: f64, shift: f64 },
    /// Weighted sum of memory parts.
    Sum(Vec<(f64, KernelFamily)>),
    /// `M'(t) = amplitude · M(time_scale · t)`.
    Dilated {
        inner: Box<KernelFamily>,
        time_scale: f64,
        amplitude: f64,
    },
}

/// `x - 1 + e^{-x}` without cancellation.
fn chi(x: f64) -> f64 {
    if x.abs() < 0.1 {
        let mut term = x * x / 2.0;
        let mut s = term;
        for n in 3..20 {
            term *= -x / n as f64;
            s += term;
        }
        s
    } else {
        x - 1.0 + (-x).exp()
    }
}

/// `x²/2 - 1 + e^{-x}(1 + x)` without cancellation.
fn psi(x: f64) -> f64 {
    if x.abs() < 0.1 {
        // Coefficient of x^n is (-1)^n (1 - n) / n!.
        let mut fact = 2.0;
        let mut pw = x * x;
        let mut s = 0.0;
        for n in 3..22 {
            fact *= n as f64;
            pw *= x;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * (1.0 - n as f64) * pw / fact;
        }
        s
    } else {
        x * x / 2.0 - 1.0 + (-x).exp() * (1.0 + x)
    }
}

/// `sin t - t cos t` without cancellation.
fn sin_minus_tcos(t: f64) -> f64 {
    if t.abs() < 0.1 {
        let mut s = 0.0;
        let mut pw = t;
        let mut fact = 1.0;
        for k in 1..10 {
            pw *= t * t;
            fact *= (2 * k) as f64 * (2 * k + 1) as f64;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            s += sign * pw * (2 * k) as f64 / fact;
        }
        s
    } else {
        t.sin() - t * t.cos()
    }
}

impl KernelFamily {
    /// Memory part `M(t) = ∫_0^t a`.
    pub fn memory(&self, t: f64) -> f64 {
        match self {
            KernelFamily::Heat => 0.0,
            KernelFamily::Wave { c } => c * t,
            KernelFamily::PowerLaw { beta, c } => c / beta * t.powf(*beta),
            KernelFamily::Exponential { mu, c } => -c / mu * (-mu * t).exp_m1(),
            KernelFamily::NegExponential => (-t).exp_m1(),
            KernelFamily::Cosine => t.sin(),
            KernelFamily::LogModified { m, shift } => t * (shift + t).ln().powf(*m),
            KernelFamily::Sum(parts) => parts.iter().map(|(w, f)| w * f.memory(t)).sum(),
            KernelFamily::Dilated {
                inner,
                time_scale,
                amplitude,
            } => amplitude * inner.memory(time_scale * t),
        }
    }

    /// Kernel density `a(t)`.
    pub fn density(&self, t: f64) -> f64 {
        match self {
            KernelFamily::Heat => 0.0,
            KernelFamily::Wave { c } => *c,
            KernelFamily::PowerLaw { beta, c } => c * t.powf(beta - 1.0),
            KernelFamily::Exponential { mu, c } => c * (-mu * t).exp(),
            KernelFamily::NegExponential => -(-t).exp(),
            KernelFamily::Cosine => t.cos(),
            KernelFamily::LogModified { m, shift } => {
                let l = (shift + t).ln();
                l.powf(*m) + m * t * l.powf(m - 1.0) / (shift + t)
            }
            KernelFamily::Sum(parts) => parts.iter().map(|(w, f)| w * f.density(t)).sum(),
            KernelFamily::Dilated {
                inner,
                time_scale,
                amplitude,
            } => amplitude * time_scale * inner.density(time_scale * t),
        }
    }

    /// Abscissa of convergence of the Laplace transform of `a`.
    pub fn abscissa(&self) -> f64 {
        match self {
            KernelFamily::Heat => f64::NEG_INFINITY,
            KernelFamily::Wave { .. } | KernelFamily::PowerLaw { .. } | KernelFamily::Cosine => 0.0,
            KernelFamily::LogModified { .. } => 0.0,
            KernelFamily::Exponential { mu, .. } => -mu,
            KernelFamily::NegExponential => -1.0,
            KernelFamily::Sum(parts) => parts
                .iter()
                .map(|(_, f)| f.abscissa())
                .fold(f64::NEG_INFINITY, f64::max),
            KernelFamily::Dilated {
                inner, time_scale, ..
            } => inner.abscissa() * time_scale,
        }
    }

    /// Closed-form `ã(s)`; `None` where no closed form is available.
    pub fn laplace(&self, s: Complex64) -> Option<Complex64> {
        Some(match self {
            KernelFamily::Heat => Complex64::new(0.0, 0.0),
            KernelFamily::Wave { c } => Complex64::from(*c) / s,
            KernelFamily::PowerLaw { beta, c } => {
                // Γ(β) is finite for β ∈ (-1, 0) ∪ (0, 1).
                let g = statrs::function::gamma::gamma(*beta);
                c * g * s.powf(-beta)
            }
            KernelFamily::Exponential { mu, c } => Complex64::from(*c) / (s + mu),
            KernelFamily::NegExponential => -1.0 / (s + 1.0),
            KernelFamily::Cosine => s / (s * s + 1.0),
            KernelFamily::LogModified { .. } => return None,
            KernelFamily::Sum(parts) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for (w, f) in parts {
                    acc += *w * f.laplace(s)?;
                }
                acc
            }
            KernelFamily::Dilated {
                inner,
                time_scale,
                amplitude,
            } => *amplitude * inner.laplace(s / *time_scale)?,
        })
    }

    /// Boundary value `lim_{h↓0} Re ã(h + iω)` of the absolutely continuous
    /// part. Cosine is handled analytically: its boundary measure is a pair
    /// of nonnegative point masses at ω = ±1 and zero elsewhere.
    fn boundary_re(&self, omega: f64, h: f64) -> Option<f64> {
        match self {
            KernelFamily::Cosine => Some(0.0),
            KernelFamily::Sum(parts) => {
                let mut acc = 0.0;
                for (w, f) in parts {
                    acc += w * f.boundary_re(omega, h)?;
                }
                Some(acc)
            }
            KernelFamily::Dilated {
                inner,
                time_scale,
                amplitude,
            } => Some(amplitude * inner.boundary_re(omega / time_scale, h / time_scale)?),
            _ => self.laplace(Complex64::new(h, omega)).map(|v| v.re),
        }
    }

    /// `(∫_0^t M, ∫_0^t σ M(σ) dσ)` in closed form.
    pub fn moments_from_zero(&self, t: f64) -> Option<(f64, f64)> {
        Some(match self {
            KernelFamily::Heat => (0.0, 0.0),
            KernelFamily::Wave { c } => (c * t * t / 2.0, c * t * t * t / 3.0),
            KernelFamily::PowerLaw { beta, c } => {
                let k = c / beta;
                (
                    k * t.powf(beta + 1.0) / (beta + 1.0),
                    k * t.powf(beta + 2.0) / (beta + 2.0),
                )
            }
            KernelFamily::Exponential { mu, c } => {
                let x = mu * t;
                (c / (mu * mu) * chi(x), c / (mu * mu * mu) * psi(x))
            }
            KernelFamily::NegExponential => (-chi(t), -psi(t)),
            KernelFamily::Cosine => {
                let s = (t / 2.0).sin();
                (2.0 * s * s, sin_minus_tcos(t))
            }
            KernelFamily::LogModified { .. } => return None,
            KernelFamily::Sum(parts) => {
                let (mut m0, mut m1) = (0.0, 0.0);
                for (w, f) in parts {
                    let (a, b) = f.moments_from_zero(t)?;
                    m0 += w * a;
                    m1 += w * b;
                }
                (m0, m1)
            }
            KernelFamily::Dilated {
                inner,
                time_scale,
                amplitude,
            } => {
                let (a, b) = inner.moments_from_zero(time_scale * t)?;
                (amplitude * a / time_scale, amplitude * b / (time_scale * time_scale))
            }
        })
    }

    /// `∫_0^t M(t - s) s^γ ds` in closed form, where available.
    pub fn power_moment(&self, gamma_exp: f64, t: f64) -> Option<f64> {
        let g = gamma_exp;
        Some(match self {
            KernelFamily::Heat => 0.0,
            KernelFamily::Wave { c } => c * t.powf(g + 2.0) / ((g + 1.0) * (g + 2.0)),
            KernelFamily::PowerLaw { beta, c } => {
                c / beta * beta_fn(beta + 1.0, g + 1.0) * t.powf(beta + g + 1.0)
            }
            KernelFamily::Sum(parts) => {
                let mut acc = 0.0;
                for (w, f) in parts {
                    acc += w * f.power_moment(g, t)?;
                }
                acc
            }
            KernelFamily::Dilated {
                inner,
                time_scale,
                amplitude,
            } => amplitude * time_scale.powf(-1.0 - g) * inner.power_moment(g, time_scale * t)?,
            _ => return None,
        })
    }

    /// Non-integer exponents β of `M ~ t^β` terms, which make the relaxation
    /// non-smooth at t = 0.
    pub fn singular_exponents(&self) -> Vec<f64> {
        match self {
            KernelFamily::PowerLaw { beta, .. } => vec![*beta],
            KernelFamily::Sum(parts) => {
                let mut v: Vec<f64> = parts.iter().flat_map(|(_, f)| f.singular_exponents()).collect();
                v.sort_by(|a, b| a.total_cmp(b));
                v.dedup();
                v
            }
            KernelFamily::Dilated { inner, .. } => inner.singular_exponents(),
            _ => Vec::new(),
        }
    }

    /// `M(∞)`: `None` when the limit does not exist.
    pub fn memory_limit(&self) -> Option<f64> {
        match self {
            KernelFamily::Heat => Some(0.0),
            KernelFamily::Wave { c } => Some(c.signum() * f64::INFINITY),
            KernelFamily::PowerLaw { beta, c } => Some(if *beta > 0.0 {
                c.signum() * f64::INFINITY
            } else {
                0.0
            }),
            KernelFamily::Exponential { mu, c } => Some(c / mu),
            KernelFamily::NegExponential => Some(-1.0),
            KernelFamily::Cosine => None,
            KernelFamily::LogModified { .. } => Some(f64::INFINITY),
            KernelFamily::Sum(parts) => {
                let mut acc = 0.0;
                for (w, f) in parts {
                    acc += w * f.memory_limit()?;
                }
                Some(acc)
            }
            KernelFamily::Dilated {
                inner, amplitude, ..
            } => inner.memory_limit().map(|v| amplitude * v),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemoryKernel {
    pub a0: f64,
    pub family: KernelFamily,
    /// Regular-variation index of `A` when known analytically.
    pub beta_nominal: Option<f64>,
    pub description: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositiveDefiniteReport {
    pub min_value: f64,
    pub argmin_omega: f64,
    pub pass: bool,
    /// False when the family has no closed-form transform to test.
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RvEstimate {
    pub beta: f64,
    pub converged: bool,
    /// Doubling-ratio estimates `log2(A(2t)/A(t))` on the tail (NaN where A ≤ 0).
    pub ratios: Vec<f64>,
}

/// Shift off the imaginary axis used when sampling `a0 + Re ã(h + iω)`.
pub const PD_SHIFT: f64 = 1e-8;
/// Values of the symbol down to this are accepted as nonnegative.
pub const PD_TOL: f64 = 1e-9;
/// Agreement required between the last three ratio estimates.
pub const RV_AGREEMENT: f64 = 0.02;

/// Geometric grid `10^{k/2}`, k = 4..=24, used by default for index estimation.
pub fn default_rv_grid() -> Vec<f64> {
    (4..=24).map(|k| 10f64.powf(k as f64 / 2.0)).collect()
}

/// Regular-variation index of `f` from doubling ratios on the tail of `t_grid`.
pub fn rv_index_of<F: Fn(f64) -> f64>(f: F, t_grid: &[f64]) -> Result<RvEstimate> {
    if t_grid.len() < 8 || t_grid.windows(2).any(|w| w[1] <= w[0]) || t_grid[0] <= 0.0 {
        return Err(Error::domain("t_grid must be increasing, positive, with at least 8 points"));
    }
    if t_grid[t_grid.len() - 1] / t_grid[0] < 1e4 {
        return Err(Error::domain("t_grid must span at least four decades"));
    }
    let tail = &t_grid[t_grid.len() / 2..];
    let vals: Vec<f64> = tail.iter().map(|&t| f(t)).collect();
    if vals.iter().all(|&v| v < 0.0) {
        return Err(Error::NotEventuallyPositive(format!(
            "A < 0 on the whole tail t in [{:e}, {:e}]",
            tail[0],
            tail[tail.len() - 1]
        )));
    }
    let ratios: Vec<f64> = tail
        .iter()
        .zip(&vals)
        .map(|(&t, &v)| {
            let v2 = f(2.0 * t);
            if v > 0.0 && v2 > 0.0 && v.is_finite() && v2.is_finite() {
                (v2 / v).log2()
            } else {
                f64::NAN
            }
        })
        .collect();
    let last3 = &ratios[ratios.len() - 3..];
    let converged = last3.iter().all(|r| r.is_finite()) && {
        let lo = last3.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = last3.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        hi - lo <= RV_AGREEMENT
    };
    Ok(RvEstimate {
        beta: ratios[ratios.len() - 1],
        converged,
        ratios,
    })
}

impl MemoryKernel {
    fn build(a0: f64, family: KernelFamily, beta_nominal: Option<f64>, description: String) -> Result<Self> {
        if !(a0 >= 0.0) || !a0.is_finite() {
            return Err(Error::domain(format!("a0 must be finite and >= 0, got {a0}")));
        }
        Ok(Self {
            a0,
            family,
            beta_nominal,
            description,
        })
    }

    pub fn heat(a0: f64) -> Result<Self> {
        if !(a0 > 0.0) {
            return Err(Error::domain("heat kernel needs a0 > 0"));
        }
        Self::build(a0, KernelFamily::Heat, Some(0.0), format!("heat(a0={a0})"))
    }

    pub fn wave(c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(Error::domain("wave kernel needs c > 0"));
        }
        Self::build(0.0, KernelFamily::Wave { c }, Some(1.0), format!("wave(c={c})"))
    }

    /// `a = c t^{β-1}` with β ∈ (-1, 0) ∪ (0, 1); for β < 0 `c` must be negative
    /// so that the renormalised primitive `(c/β) t^β` is positive.
    pub fn power_law(beta: f64, c: f64, a0: f64) -> Result<Self> {
        if !(beta > -1.0 && beta < 1.0) || beta == 0.0 {
            return Err(Error::domain(format!("power-law exponent must lie in (-1,0)u(0,1), got {beta}")));
        }
        if !(c / beta > 0.0) {
            return Err(Error::domain("power-law kernel needs c/beta > 0"));
        }
        let nominal = if beta < 0.0 && a0 > 0.0 { 0.0 } else { beta };
        Self::build(
            a0,
            KernelFamily::PowerLaw { beta, c },
            Some(nominal),
            format!("power_law(beta={beta}, c={c}, a0={a0})"),
        )
    }

    /// Power law with `A(t) = t^β / Γ(1 + β)`, whose relaxation is
    /// `E_{1+β}(-λ t^{1+β})`. β = 0 gives the heat kernel with a0 = 1.
    pub fn fractional(beta: f64) -> Result<Self> {
        if beta == 0.0 {
            return Self::heat(1.0);
        }
        if !(beta > -1.0 && beta < 1.0) {
            return Err(Error::domain(format!("fractional order must lie in (-1,1), got {beta}")));
        }
        let c = beta / gamma(1.0 + beta)?;
        let mut k = Self::power_law(beta, c, 0.0)?;
        k.description = format!("fractional(beta={beta})");
        Ok(k)
    }

    pub fn exponential(mu: f64, c: f64, a0: f64) -> Result<Self> {
        if !(mu > 0.0 && c > 0.0) {
            return Err(Error::domain("exponential kernel needs mu > 0 and c > 0"));
        }
        Self::build(
            a0,
            KernelFamily::Exponential { mu, c },
            Some(0.0),
            format!("exponential(mu={mu}, c={c}, a0={a0})"),
        )
    }

    /// `a = -e^{-t}`, `a0 = 1`, so `A = e^{-t}` (index -∞).
    pub fn neg_exponential() -> Self {
        Self {
            a0: 1.0,
            family: KernelFamily::NegExponential,
            beta_nominal: None,
            description: "neg_exponential".into(),
        }
    }

    /// `a = cos t`, `a0 = 0`, `A = sin t`; not regularly varying.
    pub fn cosine() -> Self {
        Self {
            a0: 0.0,
            family: KernelFamily::Cosine,
            beta_nominal: None,
            description: "cosine".into(),
        }
    }

    /// `A(t) = t (ln(shift + t))^m`; `shift = e` keeps the logarithm ≥ 1.
    pub fn log_modified(m: f64, shift: f64) -> Result<Self> {
        if !(shift >= 1.0) {
            return Err(Error::domain("log_modified needs shift >= 1"));
        }
        Self::build(
            0.0,
            KernelFamily::LogModified { m, shift },
            Some(1.0),
            format!("log_modified(m={m}, shift={shift})"),
        )
    }

    /// Arbitrary combination; no nominal index is attached.
    pub fn custom(a0: f64, family: KernelFamily, description: impl Into<String>) -> Result<Self> {
        Self::build(a0, family, None, description.into())
    }

    /// `A(t) = a0 + ∫_0^t a`.
    pub fn primitive_a(&self, t: f64) -> f64 {
        self.a0 + self.family.memory(t)
    }

    pub fn density(&self, t: f64) -> f64 {
        self.family.density(t)
    }

    /// `ã(s)` (without a0) for Re s above the abscissa of convergence.
    pub fn laplace_a(&self, s: Complex64) -> Result<Complex64> {
        let ab = self.family.abscissa();
        if !(s.re > ab) {
            return Err(Error::domain(format!(
                "Re s = {} is not above the abscissa {ab} of {}",
                s.re, self.description
            )));
        }
        self.family
            .laplace(s)
            .ok_or_else(|| Error::domain(format!("no closed-form transform for {}", self.description)))
    }

    /// Samples `a0 + Re ã(h + iω)` at ω = 0 and on a log grid in
    /// [1e-4, omega_max].
    pub fn check_positive_definite(&self, omega_max: f64, n_samples: usize) -> PositiveDefiniteReport {
        let n = n_samples.max(2);
        let lo = 1e-4f64.min(omega_max);
        let omegas = std::iter::once(0.0).chain((0..n).map(|i| {
            lo * (omega_max / lo).powf(i as f64 / (n - 1) as f64)
        }));
        let mut min_value = f64::INFINITY;
        let mut argmin = 0.0;
        for w in omegas {
            let Some(v) = self.family.boundary_re(w, PD_SHIFT) else {
                return PositiveDefiniteReport {
                    min_value: f64::NAN,
                    argmin_omega: f64::NAN,
                    pass: false,
                    certified: false,
                };
            };
            let v = self.a0 + v;
            if v < min_value {
                min_value = v;
                argmin = w;
            }
        }
        PositiveDefiniteReport {
            min_value,
            argmin_omega: argmin,
            pass: min_value >= -PD_TOL,
            certified: true,
        }
    }

    /// Default positive-definiteness sweep used by the solvers' guards.
    pub fn is_positive_definite(&self) -> bool {
        self.check_positive_definite(1e4, 4000).pass
    }

    pub fn rv_index_estimate(&self, t_grid: &[f64]) -> Result<RvEstimate> {
        rv_index_of(|t| self.primitive_a(t), t_grid)
    }

    /// `(∫ A, ∫ σ A)` over [t0, t1].
    pub fn quad_moments(&self, t0: f64, t1: f64) -> Result<(f64, f64)> {
        if !(t0 >= 0.0 && t1 > t0) {
            return Err(Error::domain("quad_moments needs 0 <= t0 < t1"));
        }
        let (c0, c1) = (self.a0 * (t1 - t0), self.a0 * (t1 * t1 - t0 * t0) / 2.0);
        if let (Some(p), Some(q)) = (
            self.family.moments_from_zero(t1),
            self.family.moments_from_zero(t0),
        ) {
            return Ok((c0 + p.0 - q.0, c1 + p.1 - q.1));
        }
        let m0 = quad::integrate(|s| self.family.memory(s), t0, t1, 0.0, 1e-13);
        let m1 = quad::integrate(|s| s * self.family.memory(s), t0, t1, 0.0, 1e-13);
        Ok((c0 + m0, c1 + m1))
    }

    /// `∫_0^t A(t - s) s^γ ds`.
    pub fn power_moment(&self, gamma_exp: f64, t: f64) -> f64 {
        let inst = self.a0 * t.powf(gamma_exp + 1.0) / (gamma_exp + 1.0);
        let mem = self.family.power_moment(gamma_exp, t).unwrap_or_else(|| {
            quad::integrate(
                |s| self.family.memory(t - s) * s.powf(gamma_exp),
                0.0,
                t,
                0.0,
                1e-13,
            )
        });
        inst + mem
    }

    /// `A_∞ = a0 + ∫_0^∞ a`, `None` if the limit does not exist.
    pub fn a_infinity(&self) -> Option<f64> {
        self.family.memory_limit().map(|m| self.a0 + m)
    }

    /// Kernel with `A'(τ) = amplitude · A(time_scale · τ)`.
    pub fn dilated(&self, time_scale: f64, amplitude: f64) -> MemoryKernel {
        MemoryKernel {
            a0: self.a0 * amplitude,
            family: KernelFamily::Dilated {
                inner: Box::new(self.family.clone()),
                time_scale,
                amplitude,
            },
            beta_nominal: self.beta_nominal,
            description: format!("{} dilated by T={time_scale:e}, amplitude={amplitude:e}", self.description),
        }
    }
}

/// Helper used by tests and the Laplace invariant: ∫_0^T e^{-st} a(t) dt for real s.
pub fn truncated_laplace(kernel: &MemoryKernel, s: f64, t_max: f64) -> f64 {
    let f = |t: f64| (-s * t).exp() * kernel.density(t);
    let mut pts = vec![0.0, 1e-6, 1e-3, 1.0];
    let mut x = 2.0;
    while x < t_max {
        pts.push(x);
        x += 2.0 * PI;
    }
    pts.push(t_max);
    quad::integrate_points(f, &pts, 1e-14, 1e-12)
}
