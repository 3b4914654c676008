//! Self-similar rescaling `u_{T,k}(x,t) = k(T)^n u(k(T)x, Tt)` and distances
//! to the Mittag-Leffler limit profiles.
//!
//! In Fourier space `û_{T,k}(η,t) = z(|η|²/k², Tt) û₀(η/k)`. Substituting
//! `s = Tσ` in the relaxation equation shows `z(ρ/k², Tt)` is the relaxation
//! at `ρ` for the dilated kernel `(T/k²) A(Tτ)` at time `t`, so every rescaled
//! field is computed on `[0, max t]` instead of `[0, T max t]`.

use crate::error::{Error, Hypothesis, Result};
use crate::kernels::{default_rv_grid, rv_index_of, MemoryKernel, RvEstimate};
use crate::spectral::{
    evolve_unchecked, hs_norm, limit_profile, require_positive_definite, InitialData, ModeGrid,
    SpectralField,
};
use crate::specfun::gamma;
use crate::volterra::TimeGrid;

/// Allowed gap between the claimed and the estimated index.
pub const BETA_MISMATCH_TOL: f64 = 0.05;
/// Relative size below which a rescaled field counts as a trivial limit.
pub const TRIVIAL_LIMIT_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalingVariant {
    Canonical,
    /// `C · k(t)`.
    RescaledByC(f64),
    /// `t^exponent`, for deliberately wrong scalings.
    Power { exponent: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFunction {
    pub kernel: MemoryKernel,
    pub beta: f64,
    pub variant: ScalingVariant,
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > -1.0 && beta <= 1.0 {
        Ok(())
    } else {
        Err(Error::refused(
            Hypothesis::BetaRange,
            format!("beta = {beta} is outside (-1, 1]"),
        ))
    }
}

impl ScalingFunction {
    /// `k(t) = sqrt(t A(t) Γ(1+β))`.
    pub fn canonical(kernel: MemoryKernel, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        Ok(Self {
            kernel,
            beta,
            variant: ScalingVariant::Canonical,
        })
    }

    pub fn rescaled_by(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::domain("scaling constant must be positive"));
        }
        Ok(Self {
            variant: ScalingVariant::RescaledByC(c),
            ..self.clone()
        })
    }

    pub fn power(kernel: MemoryKernel, beta: f64, exponent: f64) -> Result<Self> {
        check_beta(beta)?;
        Ok(Self {
            kernel,
            beta,
            variant: ScalingVariant::Power { exponent },
        })
    }

    /// The index `(1+β)/2` that `k` should have.
    pub fn alpha(&self) -> f64 {
        (1.0 + self.beta) / 2.0
    }

    pub fn k(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::domain("k(t) needs t > 0"));
        }
        if let ScalingVariant::Power { exponent } = self.variant {
            return Ok(t.powf(exponent));
        }
        let a = self.kernel.primitive_a(t);
        if !(a > 0.0) {
            return Err(Error::NotEventuallyPositive(format!(
                "A({t:e}) = {a:e} for {}",
                self.kernel.description
            )));
        }
        let k = (t * a * gamma(1.0 + self.beta)?).sqrt();
        Ok(match self.variant {
            ScalingVariant::RescaledByC(c) => c * k,
            _ => k,
        })
    }

    /// Doubling-ratio index of `k` itself.
    pub fn index_estimate(&self, t_grid: &[f64]) -> Result<RvEstimate> {
        rv_index_of(|t| self.k(t).unwrap_or(f64::NAN), t_grid)
    }

    /// Errors if `k` decreases anywhere on `ts` (taken in increasing order).
    pub fn check_monotone(&self, ts: &[f64]) -> Result<()> {
        let mut prev = f64::NEG_INFINITY;
        for &t in ts {
            let k = self.k(t)?;
            if k < prev {
                return Err(Error::domain(format!("k decreases near t = {t:e}")));
            }
            prev = k;
        }
        Ok(())
    }
}

pub fn scaling_k(sf: &ScalingFunction, t: f64) -> Result<f64> {
    sf.k(t)
}

/// `η ↦ û(η/k, T t)` on `grid` at the requested rescaled times, `k` given.
pub fn scaled_solution(
    kernel: &MemoryKernel,
    u0: &InitialData,
    big_t: f64,
    k: f64,
    grid: &ModeGrid,
    times: &[f64],
    time_grid: TimeGrid,
) -> Result<Vec<SpectralField>> {
    let dilated = kernel.dilated(big_t, big_t / (k * k));
    evolve_unchecked(&dilated, &u0.dilated(k), grid, times, time_grid)
}

/// `û_{T,k}(·,t)` on `grid` for each `t` in `times` (no hypothesis checks).
pub fn rescale_field(
    sf: &ScalingFunction,
    u0: &InitialData,
    big_t: f64,
    grid: &ModeGrid,
    times: &[f64],
    time_grid: TimeGrid,
) -> Result<Vec<SpectralField>> {
    scaled_solution(&sf.kernel, u0, big_t, sf.k(big_t)?, grid, times, time_grid)
}

/// Checks the hypotheses every convergence check needs and returns the
/// estimated index.
pub fn admissible_index(kernel: &MemoryKernel, claimed_beta: f64, s: f64, n: usize) -> Result<RvEstimate> {
    require_positive_definite(kernel)?;
    let grid = default_rv_grid();
    let est = kernel.rv_index_estimate(&grid).map_err(|e| {
        Error::refused(Hypothesis::RegularVariation, e.to_string())
    })?;
    if !est.converged {
        let a_ref = kernel.primitive_a(1.0);
        let t_last = grid[grid.len() - 1];
        let decays = a_ref > 0.0
            && grid[grid.len() / 2..]
                .iter()
                .all(|&t| kernel.primitive_a(t).abs() <= 1e-6 * a_ref);
        if decays {
            return Err(Error::refused(
                Hypothesis::BetaRange,
                format!(
                    "{}: A(t) decays faster than any power (index -inf), A({t_last:e}) = {:e}",
                    kernel.description,
                    kernel.primitive_a(t_last)
                ),
            ));
        }
        return Err(Error::refused(
            Hypothesis::RegularVariation,
            format!(
                "{}: doubling ratios of A do not settle (last {:?})",
                kernel.description,
                &est.ratios[est.ratios.len() - 3..]
            ),
        ));
    }
    check_beta(est.beta)?;
    check_beta(claimed_beta)?;
    if (est.beta - claimed_beta).abs() > BETA_MISMATCH_TOL {
        return Err(Error::refused(
            Hypothesis::RegularVariation,
            format!(
                "estimated index {:.4} differs from claimed beta {claimed_beta} by more than {BETA_MISMATCH_TOL}",
                est.beta
            ),
        ));
    }
    if claimed_beta != 0.0 && s >= -(n as f64) / 2.0 {
        return Err(Error::refused(
            Hypothesis::SobolevRange,
            format!("beta = {claimed_beta} != 0 needs s < -n/2 = {}, got s = {s}", -(n as f64) / 2.0),
        ));
    }
    if claimed_beta == 0.0 && s >= -(n as f64) / 2.0 {
        match kernel.a_infinity() {
            Some(a) if a > 0.0 && a.is_finite() => {}
            other => {
                return Err(Error::refused(
                    Hypothesis::FiniteLimit,
                    format!("s = {s} with beta = 0 needs 0 < A_inf < inf, got {other:?}"),
                ))
            }
        }
    }
    Ok(est)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub big_t: f64,
    pub t: f64,
    pub distance: f64,
    pub reference_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub s: f64,
    pub mass: f64,
    pub n: usize,
    pub beta_hat: f64,
    /// Sorted by `(T, t)`.
    pub rows: Vec<ConvergenceRow>,
    /// Slope of `ln(distance/reference)` against `ln T`, with its r².
    pub rate_fit: Option<(f64, f64)>,
}

impl ConvergenceReport {
    pub fn distances_at(&self, t: f64) -> Vec<f64> {
        self.rows.iter().filter(|r| r.t == t).map(|r| r.distance).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        let mut ts: Vec<f64> = self.rows.iter().map(|r| r.t).collect();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts
    }

    /// True iff the distance at every `t` strictly decreases along `T`.
    pub fn strictly_decreasing(&self) -> bool {
        self.times()
            .into_iter()
            .all(|t| self.distances_at(t).windows(2).all(|w| w[1] < w[0]))
    }
}

fn fit_line(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some((slope, r2))
}

fn rate_fit(rows: &[ConvergenceRow]) -> Option<(f64, f64)> {
    let usable: Vec<&ConvergenceRow> = rows
        .iter()
        .filter(|r| r.distance > 0.0 && r.reference_norm > 0.0)
        .collect();
    if usable.len() != rows.len() {
        return None;
    }
    let xs: Vec<f64> = usable.iter().map(|r| r.big_t.ln()).collect();
    let ys: Vec<f64> = usable.iter().map(|r| (r.distance / r.reference_norm).ln()).collect();
    fit_line(&xs, &ys)
}

/// Mode lattice plus time step for the rescaled solves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarnessGrids {
    pub modes: ModeGrid,
    pub dt: f64,
}

fn time_grid_for(times: &[f64], dt: f64) -> Result<TimeGrid> {
    if times.is_empty() || times.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::domain("t_list must be non-empty with t > 0"));
    }
    let t_end = times.iter().cloned().fold(0.0, f64::max);
    let tg = TimeGrid::with_step(t_end, dt)?;
    for &t in times {
        tg.index_of(t)?;
    }
    Ok(tg)
}

/// `‖û_{T,k}(·,t) − U₀ ŵ_{1+β}(·,t)‖_{H^s}` over the `(T, t)` ladder.
pub fn converge_to_limit(
    u0: &InitialData,
    sf: &ScalingFunction,
    t_big_list: &[f64],
    t_list: &[f64],
    s: f64,
    grids: HarnessGrids,
) -> Result<ConvergenceReport> {
    let n = grids.modes.n;
    let est = admissible_index(&sf.kernel, sf.beta, s, n)?;
    if t_big_list.is_empty() || t_big_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("T_list must be non-empty and increasing"));
    }
    sf.check_monotone(t_big_list)?;
    let tg = time_grid_for(t_list, grids.dt)?;
    let mass = u0.mass();
    let limits: Vec<SpectralField> = t_list
        .iter()
        .map(|&t| limit_profile(sf.beta, &grids.modes, t, mass))
        .collect::<Result<_>>()?;
    let reference: Vec<f64> = limits.iter().map(|l| hs_norm(l, s)).collect();
    let mut rows = Vec::with_capacity(t_big_list.len() * t_list.len());
    for &big_t in t_big_list {
        let fields = rescale_field(sf, u0, big_t, &grids.modes, t_list, tg)?;
        for (i, f) in fields.iter().enumerate() {
            rows.push(ConvergenceRow {
                big_t,
                t: t_list[i],
                distance: hs_norm(&f.sub(&limits[i]), s),
                reference_norm: reference[i],
            });
        }
    }
    rows.sort_by(|a, b| a.big_t.total_cmp(&b.big_t).then(a.t.total_cmp(&b.t)));
    Ok(ConvergenceReport {
        s,
        mass,
        n,
        beta_hat: est.beta,
        rate_fit: rate_fit(&rows),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrivialLimit {
    Zero,
    /// `û` flat, i.e. a multiple of `δ₀` in real space.
    Delta,
}

/// Classifies a rescaled field as (close to) `0` or `U₀δ₀`, relative to
/// `reference_norm`.
pub fn detect_trivial_limit(field: &SpectralField, s: f64, reference_norm: f64) -> Option<TrivialLimit> {
    let tol = TRIVIAL_LIMIT_FRACTION * reference_norm;
    // the origin is a single lattice point and carries no weight in the limit
    let origin = field.grid.zero_index();
    let off_origin = SpectralField::from_fn(field.grid, |i| {
        if i == origin {
            0.0.into()
        } else {
            field.values[i]
        }
    });
    if hs_norm(&off_origin, s) < tol {
        return Some(TrivialLimit::Zero);
    }
    let flat = SpectralField::from_fn(field.grid, |_| field.values[field.grid.zero_index()]);
    if hs_norm(&field.sub(&flat), s) < tol {
        return Some(TrivialLimit::Delta);
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateRow {
    pub t: f64,
    pub distance: f64,
    /// `t^{n/4} · distance`.
    pub scaled: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub s: f64,
    pub n: usize,
    pub a_infinity: f64,
    pub rows: Vec<RateRow>,
}

impl RateReport {
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].scaled < w[0].scaled)
    }
}

/// `t^{n/4} ‖û(·,t) − U₀ e^{−A_∞|ξ|²t}‖_{H^s}` in physical time.
///
/// Each `t` is solved with `T = t` and the lattice `grid` read as `η = kξ`,
/// so the relevant frequencies `|ξ| ~ 1/k(t)` stay resolved for every `t`.
pub fn leading_order_rate(
    kernel: &MemoryKernel,
    u0: &InitialData,
    t_list: &[f64],
    s: f64,
    grids: HarnessGrids,
) -> Result<RateReport> {
    let n = grids.modes.n;
    admissible_index(kernel, 0.0, s.min(-(n as f64)), n)?;
    let a_inf = match kernel.a_infinity() {
        Some(a) if a > 0.0 && a.is_finite() => a,
        other => {
            return Err(Error::refused(
                Hypothesis::FiniteLimit,
                format!("needs 0 < A_inf < inf, got {other:?}"),
            ))
        }
    };
    if t_list.windows(2).any(|w| w[1] <= w[0]) || t_list.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::domain("t_list must be positive and increasing"));
    }
    let sf = ScalingFunction::canonical(kernel.clone(), 0.0)?;
    let tg = TimeGrid::with_step(1.0, grids.dt)?;
    let mass = u0.mass();
    let mut rows = Vec::with_capacity(t_list.len());
    for &t in t_list {
        let k = sf.k(t)?;
        let scaled = scaled_solution(kernel, u0, t, k, &grids.modes, &[1.0], tg)?.remove(0);
        let xi_grid = grids.modes.scaled(1.0 / k);
        let u = SpectralField {
            grid: xi_grid,
            values: scaled.values,
            mass: scaled.mass,
        };
        let w = SpectralField::from_fn(xi_grid, |i| {
            (mass * (-a_inf * xi_grid.xi_sq(i) * t).exp()).into()
        });
        let distance = hs_norm(&u.sub(&w), s);
        rows.push(RateRow {
            t,
            distance,
            scaled: t.powf(n as f64 / 4.0) * distance,
        });
    }
    Ok(RateReport {
        s,
        n,
        a_infinity: a_inf,
        rows,
    })
}

/// Compares `û_{T,l}` for `l = C k` with `û_{T,k}(·/C)`, sup-relative to 1e-8.
pub fn scaling_equivalence_check(
    sf1: &ScalingFunction,
    sf2: &ScalingFunction,
    u0: &InitialData,
    big_t: f64,
    t: f64,
    grids: HarnessGrids,
) -> Result<bool> {
    let c = match (sf1.variant, sf2.variant) {
        (ScalingVariant::Canonical, ScalingVariant::RescaledByC(c)) => c,
        (ScalingVariant::Canonical, ScalingVariant::Canonical) => 1.0,
        _ => return Err(Error::domain("expected a canonical scaling and its C-rescaled variant")),
    };
    if sf1.kernel != sf2.kernel {
        return Err(Error::domain("scalings must share the kernel"));
    }
    let tg = time_grid_for(&[t], grids.dt)?;
    let f2 = rescale_field(sf2, u0, big_t, &grids.modes, &[t], tg)?.remove(0);
    let f1 = rescale_field(sf1, u0, big_t, &grids.modes.scaled(1.0 / c), &[t], tg)?.remove(0);
    let peak = f1.values.iter().fold(0.0, |m: f64, v| m.max(v.norm()));
    let worst = f1
        .values
        .iter()
        .zip(&f2.values)
        .fold(0.0, |m: f64, (a, b)| m.max((a - b).norm()));
    Ok(worst <= 1e-8 * peak)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Complex64;

    fn grids(n_modes: usize, xi_max: f64, dt: f64) -> HarnessGrids {
        HarnessGrids {
            modes: ModeGrid::new(1, n_modes, xi_max, false).unwrap(),
            dt,
        }
    }

    #[test]
    fn scaling_function_examples() {
        let wave = ScalingFunction::canonical(MemoryKernel::wave(1.0).unwrap(), 1.0).unwrap();
        assert!((wave.k(3.0).unwrap() - 3.0).abs() < 1e-14);
        let exp = MemoryKernel::exponential(1.0, 1.0, 0.0).unwrap();
        let sf = ScalingFunction::canonical(exp, 0.0).unwrap();
        assert!((sf.k(10.0).unwrap() - 3.162_205_875_761_787_7).abs() < 1e-14);
        let pl = MemoryKernel::power_law(0.5, 1.0, 0.0).unwrap();
        let sf = ScalingFunction::canonical(pl, 0.5).unwrap();
        let want = (2.0 * gamma(1.5).unwrap()).sqrt() * 7f64.powf(0.75);
        assert!((sf.k(7.0).unwrap() / want - 1.0).abs() < 1e-14);
        assert!((sf.rescaled_by(2.0).unwrap().k(7.0).unwrap() / want - 2.0).abs() < 1e-14);
        let est = sf.index_estimate(&default_rv_grid()).unwrap();
        assert!(est.converged && (est.beta - sf.alpha()).abs() < 0.02);
        assert!(ScalingFunction::canonical(MemoryKernel::heat(1.0).unwrap(), 1.5).is_err());
    }

    #[test]
    fn heat_is_a_fixed_point() {
        let sf = ScalingFunction::canonical(MemoryKernel::heat(1.0).unwrap(), 0.0).unwrap();
        let u0 = InitialData::Gaussian { width: 1.0, mass: 1.0 };
        let rep = converge_to_limit(&u0, &sf, &[10.0, 100.0], &[1.0], 0.0, grids(64, 8.0, 1e-4)).unwrap();
        // only the initial-data mismatch e^{-ξ²/(2T)} - 1 remains
        let g = ModeGrid::new(1, 64, 8.0, false).unwrap();
        for row in &rep.rows {
            let exact = SpectralField::from_fn(g, |i| {
                let x2 = g.xi_sq(i);
                Complex64::new((-x2).exp() * ((-x2 / (2.0 * row.big_t)).exp() - 1.0), 0.0)
            });
            assert!((row.distance - hs_norm(&exact, 0.0)).abs() < 1e-8);
        }
    }

    #[test]
    fn rescaled_mass_is_invariant() {
        let k = MemoryKernel::exponential(1.0, 1.0, 0.0).unwrap();
        let sf = ScalingFunction::canonical(k, 0.0).unwrap();
        let u0 = InitialData::Box { half_width: 1.0, mass: 2.5 };
        let g = ModeGrid::new(2, 8, 3.0, false).unwrap();
        let tg = TimeGrid::with_step(1.0, 1e-2).unwrap();
        for big_t in [1.0, 50.0, 1e4] {
            for f in rescale_field(&sf, &u0, big_t, &g, &[0.5, 1.0], tg).unwrap() {
                assert_eq!(f.values[g.zero_index()].re, 2.5);
            }
        }
    }

    #[test]
    fn refusals_name_the_hypothesis() {
        let u0 = InitialData::Gaussian { width: 1.0, mass: 1.0 };
        let g = grids(32, 6.0, 1e-2);
        let refused = |sf: &ScalingFunction, s: f64| match converge_to_limit(&u0, sf, &[10.0], &[1.0], s, g) {
            Err(Error::Refused { hypothesis, .. }) => Some(hypothesis),
            _ => None,
        };
        let cos = ScalingFunction::canonical(MemoryKernel::cosine(), 0.0).unwrap();
        assert_eq!(refused(&cos, 0.0), Some(Hypothesis::RegularVariation));
        let neg = ScalingFunction::canonical(MemoryKernel::neg_exponential(), 0.0).unwrap();
        assert_eq!(refused(&neg, 0.0), Some(Hypothesis::BetaRange));
        let wave = ScalingFunction::canonical(MemoryKernel::wave(1.0).unwrap(), 1.0).unwrap();
        assert_eq!(refused(&wave, 0.0), Some(Hypothesis::SobolevRange));
        let wrong = ScalingFunction::canonical(MemoryKernel::wave(1.0).unwrap(), 0.5).unwrap();
        assert_eq!(refused(&wrong, -1.0), Some(Hypothesis::RegularVariation));
        let bad = ScalingFunction::canonical(
            MemoryKernel::custom(
                0.0,
                crate::kernels::KernelFamily::Exponential { mu: 1.0, c: -1.0 },
                "1 - e^-t with a0 = 0, negated",
            )
            .unwrap(),
            0.0,
        )
        .unwrap();
        assert_eq!(refused(&bad, 0.0), Some(Hypothesis::PositiveDefinite));
    }

    #[test]
    fn equivalence_under_constant_factor() {
        let u0 = InitialData::Gaussian { width: 1.0, mass: 1.0 };
        let heat = ScalingFunction::canonical(MemoryKernel::heat(1.0).unwrap(), 0.0).unwrap();
        let g = grids(64, 8.0, 1e-3);
        assert!(scaling_equivalence_check(&heat, &heat, &u0, 100.0, 1.0, g).unwrap());
        let l = heat.rescaled_by(2.0).unwrap();
        assert!(scaling_equivalence_check(&heat, &l, &u0, 100.0, 1.0, g).unwrap());
        let tg = TimeGrid::with_step(1.0, 1e-4).unwrap();
        let f = rescale_field(&l, &u0, 1e8, &g.modes, &[1.0], tg).unwrap().remove(0);
        assert_eq!(f.mass, 1.0);
        for i in 0..g.modes.len() {
            let want = (-g.modes.xi_sq(i) / 4.0).exp();
            assert!((f.values[i].re - want).abs() < 1e-8);
        }
    }

    #[test]
    fn heat_rate_is_the_data_mismatch() {
        // u - w = U₀ e^{-A|ξ|²t} (û₀/U₀ - 1), which is not zero for Gaussian data
        let u0 = InitialData::Gaussian { width: 1.0, mass: 1.0 };
        let g = grids(64, 8.0, 1e-4);
        let rep = leading_order_rate(&MemoryKernel::heat(2.0).unwrap(), &u0, &[1.0, 10.0, 100.0], 0.0, g).unwrap();
        for row in &rep.rows {
            let xg = g.modes.scaled(1.0 / (2.0 * row.t).sqrt());
            let exact = SpectralField::from_fn(xg, |i| {
                let x2 = xg.xi_sq(i);
                Complex64::new((-2.0 * x2 * row.t).exp() * ((-x2 / 2.0).exp() - 1.0), 0.0)
            });
            assert!((row.distance - hs_norm(&exact, 0.0)).abs() < 1e-9, "{row:?}");
        }
        assert!(rep.strictly_decreasing());
        assert!(matches!(
            leading_order_rate(&MemoryKernel::neg_exponential(), &u0, &[1.0], 0.0, grids(64, 8.0, 1e-2)),
            Err(Error::Refused { .. })
        ));
    }
}
