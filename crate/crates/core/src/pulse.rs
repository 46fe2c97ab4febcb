//! Control waveforms derived from an invariant schedule.
//!
//! With `φ ≡ 0` the invariant equation fixes the Rabi frequency and the
//! detuning pointwise:
//!
//! ```text
//! Ω_R = γ̇ / sin β
//! Δ   = Ω_R cot γ cos β − β̇
//! ```
//!
//! Both quotients are 0/0 at the schedule's designed singular points. Near
//! those points the numerator and denominator are expanded as power series
//! about the singular point and the common power is cancelled, so the
//! waveforms stay exact and continuous through them.

use crate::error::{Error, Result};
use crate::parallel::{map_indices, Execution};
use crate::quad::adaptive_simpson;
use crate::schedule::SchedulePair;
use crate::series::{quotient, Quotient, Series, ORDER};

/// Distance (in normalized time) from a singular point inside which the series path is used.
pub const SERIES_WINDOW: f64 = 1e-2;

/// Step, as a fraction of `t_f`, for finite differences in the adiabaticity metric.
pub const FD_STEP: f64 = 1e-6;

/// Branch of the invariant eigenbasis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// Series of γ̇, sin γ, cos γ, sin β, cos β about a designated singular point.
struct LocalExpansion {
    gamma_dot: Series,
    sin_gamma: Series,
    cos_gamma: Series,
    sin_beta: Series,
    cos_beta: Series,
}

impl LocalExpansion {
    fn at(pair: &SchedulePair, anchor: f64) -> Self {
        let gamma = Series::from_coeffs(&pair.gamma.taylor_at(anchor, ORDER - 1));
        let beta = Series::from_coeffs(&pair.beta.taylor_at(anchor, ORDER - 1));
        let gamma_dot =
            Series::from_coeffs(&pair.gamma.derivative().taylor_at(anchor, ORDER - 1)).snapped();
        let (sin_gamma, cos_gamma) = gamma.sin_cos();
        let (sin_beta, cos_beta) = beta.sin_cos();
        Self {
            gamma_dot,
            sin_gamma,
            cos_gamma,
            sin_beta,
            cos_beta,
        }
    }
}

fn nearest_singular_point(pair: &SchedulePair, s: f64) -> Option<f64> {
    pair.singular_points()
        .into_iter()
        .filter(|p| (s - p).abs() < SERIES_WINDOW)
        .min_by(|a, b| (s - a).abs().total_cmp(&(s - b).abs()))
}

fn check_range(s: f64) -> Result<()> {
    if (0.0..=1.0).contains(&s) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("s = {s} outside [0, 1]")))
    }
}

fn finite(value: f64, s: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::DivergentPulse { s })
    }
}

/// `Ω_R(s) · t_f` from the closed form, before any antedated switch is applied.
fn omega_r_scaled(pair: &SchedulePair, s: f64) -> Result<f64> {
    if let Some(anchor) = nearest_singular_point(pair, s) {
        let local = LocalExpansion::at(pair, anchor);
        return match quotient(&local.gamma_dot, &local.sin_beta, s - anchor) {
            Quotient::Finite(v) => finite(v, s),
            Quotient::Divergent => Err(Error::DivergentPulse { s }),
        };
    }
    finite(
        pair.gamma.eval_derivative(1, s) / pair.beta.eval(s).sin(),
        s,
    )
}

/// `Ω_R cot γ cos β · t_f`, i.e. `Δ + β̇` in units of `1/t_f`.
fn detuning_core_scaled(pair: &SchedulePair, s: f64) -> Result<f64> {
    if let Some(anchor) = nearest_singular_point(pair, s) {
        let local = LocalExpansion::at(pair, anchor);
        let num = local.gamma_dot.mul(&local.cos_gamma).mul(&local.cos_beta);
        let den = local.sin_beta.mul(&local.sin_gamma);
        return match quotient(&num, &den, s - anchor) {
            Quotient::Finite(v) => finite(v, s),
            Quotient::Divergent => Err(Error::DivergentPulse { s }),
        };
    }
    let (g, b) = (pair.gamma.eval(s), pair.beta.eval(s));
    let omega = pair.gamma.eval_derivative(1, s) / b.sin();
    finite(omega * g.cos() / g.sin() * b.cos(), s)
}

/// Rabi frequency `Ω_R(s)` in angular frequency units.
pub fn omega_r_at(pair: &SchedulePair, s: f64) -> Result<f64> {
    check_range(s)?;
    Ok(omega_r_scaled(pair, s)? / pair.t_f)
}

/// Detuning `Δ(s)` in angular frequency units.
pub fn delta_at(pair: &SchedulePair, s: f64) -> Result<f64> {
    check_range(s)?;
    let core = detuning_core_scaled(pair, s)?;
    Ok((core - pair.beta.eval_derivative(1, s)) / pair.t_f)
}

/// Physical controls at `s`, honouring the antedated switch: past `t_a`
/// the drive is off and the detuning is held at `Δ(t_a)`.
pub fn controls_at(pair: &SchedulePair, s: f64) -> Result<(f64, f64)> {
    match pair.switch_s() {
        Some(s_a) if s > s_a => Ok((0.0, delta_at(pair, s_a)?)),
        _ => Ok((omega_r_at(pair, s)?, delta_at(pair, s)?)),
    }
}

/// One row of a [`PulseTable`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSample {
    pub t: f64,
    pub omega_r: f64,
    pub delta: f64,
    /// Invariant parameters; frozen at their switch values past `t_a`.
    pub gamma: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseTable {
    pub t_f: f64,
    pub t_a: Option<f64>,
    pub samples: Vec<PulseSample>,
    pub warnings: Vec<String>,
}

impl PulseTable {
    pub fn max_omega_r(&self) -> f64 {
        self.samples
            .iter()
            .map(|p| p.omega_r)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn synthesize(pair: &SchedulePair, n: usize) -> Result<PulseTable> {
    synthesize_with(pair, n, Execution::default())
}

/// Samples the controls on `n + 1` uniform points of `[0, t_f]`.
pub fn synthesize_with(pair: &SchedulePair, n: usize, mode: Execution) -> Result<PulseTable> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "need n >= 2 grid cells, got {n}"
        )));
    }
    let s_a = pair.switch_s();
    let samples = map_indices(n + 1, mode, |i| {
        let s = if i == n { 1.0 } else { i as f64 / n as f64 };
        let (omega_r, delta) = controls_at(pair, s)?;
        let frozen = s_a.filter(|&a| s > a).unwrap_or(s);
        Ok(PulseSample {
            t: s * pair.t_f,
            omega_r,
            delta,
            gamma: pair.gamma.eval(frozen),
            beta: pair.beta.eval(frozen),
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let mut warnings = Vec::new();
    if let Some(a) = s_a {
        let held = delta_at(pair, a)?;
        if held.abs() * pair.t_f < 1e-9 {
            warnings.push(format!(
                "detuning at the switch is {held:e}; population inversion is undefined"
            ));
        }
    }
    Ok(PulseTable {
        t_f: pair.t_f,
        t_a: pair.t_a,
        samples,
        warnings,
    })
}

/// `|Ω_R Δ̇ − Ω̇_R Δ| / Ω³` for arbitrary control evaluators at time `t`.
///
/// Time derivatives use central differences with step `dt`.
pub fn adiabaticity_ratio<F>(controls: F, t: f64, dt: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<(f64, f64)>,
{
    let (omega_r, delta) = controls(t)?;
    let (or_p, d_p) = controls(t + dt)?;
    let (or_m, d_m) = controls(t - dt)?;
    let omega = omega_r.hypot(delta);
    if omega < 1e-12 {
        return Err(Error::DegeneratePoint { s: t });
    }
    let omega_r_dot = (or_p - or_m) / (2.0 * dt);
    let delta_dot = (d_p - d_m) / (2.0 * dt);
    Ok(((omega_r * delta_dot - omega_r_dot * delta) / omega.powi(3)).abs())
}

/// Adiabaticity metric of the closed-form controls at interior point `s`.
pub fn adiabaticity_metric(pair: &SchedulePair, s: f64) -> Result<f64> {
    let h = FD_STEP;
    if !(s - h >= 0.0 && s + h <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "s = {s} is not an interior point"
        )));
    }
    let t_f = pair.t_f;
    let ratio = adiabaticity_ratio(
        |t| Ok((omega_r_at(pair, t / t_f)?, delta_at(pair, t / t_f)?)),
        s * t_f,
        h * t_f,
    );
    match ratio {
        Err(Error::DegeneratePoint { .. }) => Err(Error::DegeneratePoint { s }),
        other => other,
    }
}

/// Maximum of [`adiabaticity_metric`] over `n` interior points of the active passage.
pub fn max_adiabaticity_metric(pair: &SchedulePair, n: usize) -> Result<f64> {
    let end = pair.terminal_s();
    let lo = 10.0 * FD_STEP;
    let hi = end - 10.0 * FD_STEP;
    let values = map_indices(n, Execution::default(), |i| {
        let s = lo + (hi - lo) * i as f64 / (n - 1).max(1) as f64;
        adiabaticity_metric(pair, s)
    });
    values
        .into_iter()
        .try_fold(0.0_f64, |m, v| v.map(|v| m.max(v)))
}

/// `Ω̃ = (Δ + β̇) cos γ + β̇ + Ω_R sin γ cos β`, in units of `1/t_f`, with the
/// antedated switch applied.
fn phase_rate_scaled(pair: &SchedulePair, s: f64) -> Result<f64> {
    if let Some(a) = pair.switch_s() {
        if s > a {
            // Frozen invariant, diagonal Hamiltonian: only the held detuning contributes.
            return Ok(delta_at(pair, a)? * pair.t_f);
        }
    }
    let (g, b) = (pair.gamma.eval(s), pair.beta.eval(s));
    let beta_dot = pair.beta.eval_derivative(1, s);
    let core = detuning_core_scaled(pair, s)?;
    let omega_r = omega_r_scaled(pair, s)?;
    Ok(core * g.cos() + beta_dot + omega_r * g.sin() * b.cos())
}

/// Lewis–Riesenfeld phase `α±(t) = ∓½ ∫₀ᵗ Ω̃ dt'`.
pub fn lr_phase(pair: &SchedulePair, t: f64, branch: Branch) -> Result<f64> {
    let s = t / pair.t_f;
    check_range(s)?;
    let f = |x: f64| phase_rate_scaled(pair, x);
    let integral = match pair.switch_s() {
        Some(a) if s > a => {
            adaptive_simpson(&f, 0.0, a, 1e-11)? + (s - a) * phase_rate_scaled(pair, 1.0)?
        }
        _ => adaptive_simpson(&f, 0.0, s, 1e-11)?,
    };
    Ok(-0.5 * branch.sign() * integral)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::{antedated_pair, third_order_pair};
    use std::f64::consts::PI;

    #[test]
    fn third_order_endpoints_and_midpoint() {
        for t_f in [1.0, 2.5] {
            let p = third_order_pair(t_f).unwrap();
            assert!(omega_r_at(&p, 0.0).unwrap().abs() < 1e-12);
            assert!(omega_r_at(&p, 1.0).unwrap().abs() < 1e-12);
            let mid = 1.5 * PI / (PI / 8.0).sin() / t_f;
            assert!((omega_r_at(&p, 0.5).unwrap() - mid).abs() < 1e-12);
            assert!((mid * t_f - 12.314).abs() < 1e-3);
            assert!((delta_at(&p, 0.0).unwrap() + 4.5 * PI / t_f).abs() < 1e-12);
            assert!((delta_at(&p, 1.0).unwrap() - 4.5 * PI / t_f).abs() < 1e-12);
            assert!(delta_at(&p, 0.5).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn series_path_is_continuous_with_direct_path() {
        let p = third_order_pair(1.0).unwrap();
        for s in [SERIES_WINDOW * 0.999, SERIES_WINDOW * 1.001] {
            let direct_or = p.gamma.eval_derivative(1, s) / p.beta.eval(s).sin();
            assert!((omega_r_at(&p, s).unwrap() - direct_or).abs() < 1e-9);
        }
        // References from 50-digit evaluation of the closed form.
        assert_eq!(SERIES_WINDOW, 1e-2);
        let inside = delta_at(&p, SERIES_WINDOW - 1e-9).unwrap();
        let outside = delta_at(&p, SERIES_WINDOW + 1e-9).unwrap();
        assert!((inside + 13.924_110_548_814_053).abs() < 1e-12, "{inside}");
        assert!(
            (outside + 13.924_110_507_529_682).abs() < 1e-12,
            "{outside}"
        );
    }

    #[test]
    fn antedated_limits_are_finite_and_nonnegative() {
        let p = antedated_pair(1.0, 0.5, PI / 2.0).unwrap();
        let at_crossing = omega_r_at(&p, 11.0 / 16.0).unwrap();
        assert!(at_crossing.is_finite() && at_crossing > 0.0);
        // ratio of first Taylor coefficients of γ̇ and sin β
        let gamma_dd = p.gamma.eval_derivative(2, 11.0 / 16.0);
        let beta_d = p.beta.eval_derivative(1, 11.0 / 16.0);
        assert!((at_crossing - gamma_dd / beta_d).abs() < 1e-10);
        assert!(delta_at(&p, 0.5).unwrap().is_finite());
        for i in 0..=2000 {
            assert!(omega_r_at(&p, i as f64 / 2000.0).unwrap() >= -1e-9);
        }
    }

    #[test]
    fn uncompensated_schedule_diverges() {
        let p = third_order_pair(1.0).unwrap();
        let broken = SchedulePair::from_parts(p.gamma.clone(), p.beta.clone(), 1.0, None);
        // shifting β breaks cos β(0) = 0
        let shifted = SchedulePair::from_parts(
            broken.gamma,
            crate::poly::Polynomial::new(
                broken
                    .beta
                    .coeffs()
                    .iter()
                    .enumerate()
                    .map(|(i, c)| if i == 0 { c + 0.1 } else { *c })
                    .collect(),
            ),
            1.0,
            None,
        );
        assert!(matches!(
            delta_at(&shifted, 0.0),
            Err(Error::DivergentPulse { .. })
        ));
    }

    #[test]
    fn synthesize_grid_and_switch() {
        let p = third_order_pair(1.0).unwrap();
        let table = synthesize(&p, 2).unwrap();
        let ts: Vec<f64> = table.samples.iter().map(|x| x.t).collect();
        assert_eq!(ts, vec![0.0, 0.5, 1.0]);
        let table = synthesize(&p, 1000).unwrap();
        assert!((table.max_omega_r() - 1.5 * PI / (PI / 8.0).sin()).abs() < 1e-9);

        let a = antedated_pair(1.0, 0.5, PI / 2.0).unwrap();
        let table = synthesize(&a, 1000).unwrap();
        let held = delta_at(&a, 0.5).unwrap();
        for x in table.samples.iter().filter(|x| x.t > 0.5) {
            assert_eq!(x.omega_r, 0.0);
            assert_eq!(x.delta, held);
        }
        assert!(synthesize(&p, 1).is_err());
    }

    #[test]
    fn serial_and_parallel_synthesis_agree() {
        let p = antedated_pair(1.0, 1.0 / 3.0, PI).unwrap();
        let a = synthesize_with(&p, 500, Execution::Serial).unwrap();
        let b = synthesize_with(&p, 500, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn adiabaticity_static_and_ordering() {
        let r = adiabaticity_ratio(|_| Ok((0.0, 2.0)), 0.3, 1e-6).unwrap();
        assert_eq!(r, 0.0);
        assert!(matches!(
            adiabaticity_ratio(|_| Ok((0.0, 0.0)), 0.3, 1e-6),
            Err(Error::DegeneratePoint { .. })
        ));
        let usual = max_adiabaticity_metric(&third_order_pair(1.0).unwrap(), 400).unwrap();
        let ante =
            max_adiabaticity_metric(&antedated_pair(1.0, 0.5, PI / 2.0).unwrap(), 400).unwrap();
        assert!(usual < ante, "{usual} vs {ante}");
    }

    #[test]
    fn phase_sign_structure() {
        let p = third_order_pair(1.0).unwrap();
        assert_eq!(lr_phase(&p, 0.0, Branch::Plus).unwrap(), 0.0);
        for t in [0.2, 0.7, 1.0] {
            let plus = lr_phase(&p, t, Branch::Plus).unwrap();
            let minus = lr_phase(&p, t, Branch::Minus).unwrap();
            assert_eq!(plus, -minus);
            assert!(plus.is_finite());
        }
    }
}
