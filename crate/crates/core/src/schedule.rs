//! Invariant parameter schedules `γ(s)`, `β(s)` and their structural times.
//!
//! All polynomials are expressed in normalized time `s = t / t_f`. A
//! time-derivative condition of `v` per unit `t` becomes `v · t_f` per unit `s`,
//! which makes the coefficients independent of `t_f`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::OnceLock;

use crate::analysis;
use crate::error::{Error, Result};
use crate::poly::{fit, real_roots, Condition, Polynomial};

/// Smallest antedated time, as a fraction of `t_f`, accepted by [`antedated_pair`].
pub const ANTEDATE_MIN_FRACTION: f64 = 2.0 / 7.7;

/// Tolerance used when checking the defining conditions of a schedule.
pub const CONDITION_TOL: f64 = 1e-9;

/// Which boundary-condition family produced a [`SchedulePair`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    ThirdOrder,
    FourthOrder { gamma_mid: f64 },
    Antedated,
    Custom,
}

/// Designed invariant parameters together with the passage duration.
#[derive(Debug, Clone, PartialEq)]
pub struct SchedulePair {
    pub gamma: Polynomial,
    pub beta: Polynomial,
    pub t_f: f64,
    /// Antedated switch time, in time units.
    pub t_a: Option<f64>,
    /// `β̇(0)` in radians per unit time.
    pub beta_dot0: f64,
    /// Interior sign change of `γ̇`, in normalized time.
    pub crossing: Option<f64>,
    pub family: Family,
}

impl SchedulePair {
    /// Assembles a pair without any physicality checks.
    pub fn from_parts(gamma: Polynomial, beta: Polynomial, t_f: f64, t_a: Option<f64>) -> Self {
        let beta_dot0 = beta.eval_derivative(1, 0.0) / t_f;
        let crossing = t_a.and_then(|_| gamma_dot_zero_crossing(&gamma).ok());
        Self {
            gamma,
            beta,
            t_f,
            t_a,
            beta_dot0,
            crossing,
            family: Family::Custom,
        }
    }

    /// Antedated switch point in normalized time.
    pub fn switch_s(&self) -> Option<f64> {
        self.t_a.map(|t_a| t_a / self.t_f)
    }

    /// Normalized time at which the passage completes: `t_a / t_f` or 1.
    pub fn terminal_s(&self) -> f64 {
        self.switch_s().unwrap_or(1.0)
    }

    pub fn is_antedated(&self) -> bool {
        self.t_a.is_some()
    }

    /// `β̇(0)` in units of `π / 2t_f`.
    pub fn beta_dot0_units(&self) -> f64 {
        self.beta_dot0 * self.t_f / FRAC_PI_2
    }

    /// Points where `sin γ` or `sin β` vanishes by design.
    pub fn singular_points(&self) -> Vec<f64> {
        let mut pts = vec![0.0, 1.0];
        pts.extend(self.switch_s());
        pts.extend(self.crossing);
        pts
    }

    /// Same schedule in normalized time with a different duration.
    pub fn rescaled(&self, t_f: f64) -> Self {
        let factor = t_f / self.t_f;
        Self {
            t_f,
            t_a: self.t_a.map(|t| t * factor),
            beta_dot0: self.beta_dot0 / factor,
            ..self.clone()
        }
    }

    /// Largest violation of the defining conditions shared by every family.
    pub fn condition_violation(&self) -> f64 {
        let g = &self.gamma;
        [
            g.eval(0.0) - PI,
            g.eval(self.terminal_s()),
            g.eval_derivative(1, 0.0),
            g.eval_derivative(1, 1.0),
            self.beta.eval(0.0) + FRAC_PI_2,
        ]
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Converts `β̇(0)` from units of `π / 2t_f` to radians per unit time.
pub fn beta_dot0_from_units(units: f64, t_f: f64) -> f64 {
    units * FRAC_PI_2 / t_f
}

fn gamma_endpoint_conditions() -> [Condition; 4] {
    [
        Condition::value(0.0, PI),
        Condition::slope(0.0, 0.0),
        Condition::value(1.0, 0.0),
        Condition::slope(1.0, 0.0),
    ]
}

fn check_duration(t_f: f64) -> Result<()> {
    if t_f > 0.0 && t_f.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "t_f must be positive, got {t_f}"
        )))
    }
}

/// Cubic `γ` with `γ(0) = π`, `γ(1) = 0` and flat endpoints.
pub fn third_order_gamma() -> Result<Polynomial> {
    fit(&gamma_endpoint_conditions(), 3)
}

/// Cubic `β` with `β(0) = β(1) = −π/2` and `β'(0) = −β'(1) = 3π/2` per unit `s`.
pub fn third_order_beta() -> Result<Polynomial> {
    let slope = 3.0 * PI / 2.0;
    fit(
        &[
            Condition::value(0.0, -FRAC_PI_2),
            Condition::value(1.0, -FRAC_PI_2),
            Condition::slope(0.0, slope),
            Condition::slope(1.0, -slope),
        ],
        3,
    )
}

/// Quartic `γ` through the endpoint conditions and `γ(1/2) = gamma_mid`.
pub fn fourth_order_gamma(gamma_mid: f64) -> Result<Polynomial> {
    let mut conds = gamma_endpoint_conditions().to_vec();
    conds.push(Condition::value(0.5, gamma_mid));
    fit(&conds, 4)
}

/// Quartic `γ` through the endpoint conditions and `γ(s_a) = 0`.
pub fn antedated_gamma(s_a: f64) -> Result<Polynomial> {
    let mut conds = gamma_endpoint_conditions().to_vec();
    conds.push(Condition::value(s_a, 0.0));
    fit(&conds, 4)
}

/// Quintic `β` for an antedated passage.
///
/// `slope` is `β'(0) = −β'(1)` per unit `s`; `crossing` is where `β` passes
/// through zero together with `γ̇`.
pub fn antedated_beta(s_a: f64, crossing: f64, slope: f64) -> Result<Polynomial> {
    fit(
        &[
            Condition::value(0.0, -FRAC_PI_2),
            Condition::value(1.0, FRAC_PI_2),
            Condition::value(s_a, -FRAC_PI_2),
            Condition::value(crossing, 0.0),
            Condition::slope(0.0, slope),
            Condition::slope(1.0, -slope),
        ],
        5,
    )
}

pub fn third_order_pair(t_f: f64) -> Result<SchedulePair> {
    check_duration(t_f)?;
    Ok(SchedulePair {
        gamma: third_order_gamma()?,
        beta: third_order_beta()?,
        t_f,
        t_a: None,
        beta_dot0: 3.0 * PI / (2.0 * t_f),
        crossing: None,
        family: Family::ThirdOrder,
    })
}

/// Quartic-`γ` passage reusing the cubic `β`.
///
/// Fails with [`Error::UnphysicalSchedule`] below [`critical_gamma_mid`].
pub fn fourth_order_pair(t_f: f64, gamma_mid: f64) -> Result<SchedulePair> {
    check_duration(t_f)?;
    let critical = critical_gamma_mid();
    if gamma_mid < critical - 1e-6 {
        return Err(Error::UnphysicalSchedule(format!(
            "gamma_mid = {gamma_mid} is below the nonnegativity limit {critical}"
        )));
    }
    Ok(SchedulePair {
        gamma: fourth_order_gamma(gamma_mid)?,
        beta: third_order_beta()?,
        t_f,
        t_a: None,
        beta_dot0: 3.0 * PI / (2.0 * t_f),
        crossing: None,
        family: Family::FourthOrder { gamma_mid },
    })
}

/// Builds an antedated pair without range or physicality checks.
///
/// Only structural failures are reported: a singular fit or a quartic whose
/// derivative has no interior sign change.
pub fn build_antedated(t_f: f64, t_a: f64, beta_dot0: f64) -> Result<SchedulePair> {
    check_duration(t_f)?;
    let s_a = t_a / t_f;
    if !(s_a > 0.0 && s_a < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "t_a = {t_a} must lie strictly inside (0, t_f)"
        )));
    }
    let gamma = antedated_gamma(s_a)?;
    let crossing = gamma_dot_zero_crossing(&gamma)?;
    if crossing <= s_a {
        return Err(Error::UnphysicalSchedule(format!(
            "gamma derivative changes sign at s = {crossing}, before the switch at {s_a}"
        )));
    }
    let beta = antedated_beta(s_a, crossing, beta_dot0 * t_f)?;
    Ok(SchedulePair {
        gamma,
        beta,
        t_f,
        t_a: Some(t_a),
        beta_dot0,
        crossing: Some(crossing),
        family: Family::Antedated,
    })
}

/// Antedated passage whose invariant reaches its target at `t_a < t_f`.
pub fn antedated_pair(t_f: f64, t_a: f64, beta_dot0: f64) -> Result<SchedulePair> {
    check_duration(t_f)?;
    let s_a = t_a / t_f;
    if !(ANTEDATE_MIN_FRACTION - 1e-12..=0.5 + 1e-12).contains(&s_a) {
        return Err(Error::InvalidArgument(format!(
            "t_a / t_f = {s_a} outside [2/7.7, 1/2]"
        )));
    }
    if !(beta_dot0 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "beta_dot0 must be positive, got {beta_dot0}"
        )));
    }
    let pair = build_antedated(t_f, t_a, beta_dot0)?;
    let report = analysis::validate_schedule(&pair);
    if !report.is_physical() {
        return Err(Error::UnphysicalSchedule(report.messages.join("; ")));
    }
    Ok(pair)
}

/// Interior point where `γ̇` changes sign, in normalized time.
pub fn gamma_dot_zero_crossing(gamma: &Polynomial) -> Result<f64> {
    let slope = gamma.derivative();
    let edge = 1e-9;
    real_roots(&slope, 0.0, 1.0)
        .into_iter()
        .filter(|&s| s > edge && s < 1.0 - edge)
        .find(|&s| {
            let d = 1e-6;
            slope.eval(s - d) * slope.eval(s + d) < 0.0
        })
        .ok_or(Error::NoCrossing)
}

/// Grid used when testing a quartic for nonnegativity.
const NONNEG_GRID: usize = 10_000;

/// `γ(1) = γ̇(1) = 0`, so `γ = (s − 1)² q(s)` and the sign of `γ` near the
/// terminal point is the sign of `q`. Testing `q` resolves dips that sit
/// closer to `s = 1` than any grid spacing.
fn quartic_stays_nonnegative(gamma_mid: f64) -> bool {
    let Ok(g) = fourth_order_gamma(gamma_mid) else {
        return false;
    };
    let (once, _) = g.deflate(1.0);
    let (q, _) = once.deflate(1.0);
    q.min_on(0.0, 1.0, NONNEG_GRID).1 >= 0.0
}

/// Smallest `γ(1/2)` for which the quartic `γ` stays nonnegative on `[0, 1]`.
pub fn critical_gamma_mid() -> f64 {
    static CRITICAL: OnceLock<f64> = OnceLock::new();
    *CRITICAL.get_or_init(|| {
        let (mut lo, mut hi) = (0.0, FRAC_PI_2);
        debug_assert!(!quartic_stays_nonnegative(lo) && quartic_stays_nonnegative(hi));
        while hi - lo > 1e-9 {
            let mid = 0.5 * (lo + hi);
            if quartic_stays_nonnegative(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    })
}
