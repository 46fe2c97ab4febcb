//! Energy cost, schedule validation and the `β̇(0)` sweep.

use std::f64::consts::PI;

use crate::dynamics::{adiabatic_state, invariant_state, BlochVector, Weights};
use crate::error::{Error, Result};
use crate::parallel::{map_indices, Execution};
use crate::pulse::{self, omega_r_at};
use crate::quad::adaptive_simpson;
use crate::schedule::{self, beta_dot0_from_units, SchedulePair, ANTEDATE_MIN_FRACTION};

/// Grid size for the pointwise validation checks.
pub const VALIDATION_GRID: usize = 10_000;
/// Grid size for the adiabaticity maximum reported by validation.
pub const METRIC_GRID: usize = 2_000;
/// `|Δ| · t_f` above this is treated as a divergence.
pub const DELTA_FINITE_LIMIT: f64 = 1e3;

const COST_TOL: f64 = 1e-10;

/// Pulse area `∫ Ω_R dt` up to completion (`t_a` for antedated passages, else `t_f`).
pub fn energy_cost(pair: &SchedulePair) -> Result<f64> {
    let t_f = pair.t_f;
    let integrand = |s: f64| Ok(omega_r_at(pair, s)? * t_f);
    adaptive_simpson(&integrand, 0.0, pair.terminal_s(), COST_TOL)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub omega_r_nonnegative: bool,
    pub delta_finite: bool,
    /// `γ ∈ [−π, π]` on `[0, 1]`.
    pub gamma_range_ok: bool,
    pub max_adiabaticity_metric: f64,
    pub messages: Vec<String>,
}

impl ValidationReport {
    pub fn is_physical(&self) -> bool {
        self.omega_r_nonnegative && self.delta_finite && self.gamma_range_ok
    }
}

/// Grid checks of the closed-form controls on `[0, 1]`. Never fails; problems are reported.
pub fn validate_schedule(pair: &SchedulePair) -> ValidationReport {
    let mut messages = Vec::new();
    let mut omega_r_nonnegative = true;
    let mut delta_finite = true;
    let mut gamma_range_ok = true;

    let (s_min, g_min) = pair.gamma.min_on(0.0, 1.0, VALIDATION_GRID);
    let g_max = (0..=VALIDATION_GRID)
        .map(|i| pair.gamma.eval(i as f64 / VALIDATION_GRID as f64))
        .fold(f64::NEG_INFINITY, f64::max);
    if g_min < -PI - 1e-9 {
        gamma_range_ok = false;
        messages.push(format!("gamma = {g_min:.6} below -pi at s = {s_min:.6}"));
    }
    if g_max > PI + 1e-9 {
        gamma_range_ok = false;
        messages.push(format!("gamma = {g_max:.6} above pi"));
    }

    for i in 0..=VALIDATION_GRID {
        let s = i as f64 / VALIDATION_GRID as f64;
        match pulse::omega_r_at(pair, s) {
            Ok(v) if v * pair.t_f < -1e-9 => {
                if omega_r_nonnegative {
                    messages.push(format!("negative Rabi frequency at s = {s:.6}"));
                }
                omega_r_nonnegative = false;
            }
            Ok(_) => {}
            Err(e) => {
                if omega_r_nonnegative {
                    messages.push(format!("Rabi frequency: {e}"));
                }
                omega_r_nonnegative = false;
            }
        }
        match pulse::delta_at(pair, s) {
            Ok(v) if (v * pair.t_f).abs() < DELTA_FINITE_LIMIT => {}
            Ok(v) => {
                if delta_finite {
                    messages.push(format!("detuning {:.3e}/t_f at s = {s:.6}", v * pair.t_f));
                }
                delta_finite = false;
            }
            Err(e) => {
                if delta_finite {
                    messages.push(format!("detuning: {e}"));
                }
                delta_finite = false;
            }
        }
    }

    let max_adiabaticity_metric = match pulse::max_adiabaticity_metric(pair, METRIC_GRID) {
        Ok(v) => v,
        Err(e) => {
            messages.push(format!("adiabaticity metric: {e}"));
            f64::INFINITY
        }
    };

    ValidationReport {
        omega_r_nonnegative,
        delta_finite,
        gamma_range_ok,
        max_adiabaticity_metric,
        messages,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    /// `β̇(0)` in units of `π / 2t_f`.
    pub beta_dot0_units: f64,
    /// `None` when the schedule failed validation.
    pub cost: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub t_f: f64,
    pub t_a: f64,
    pub grid: Vec<SweepPoint>,
    /// `(β̇(0) in π/2t_f units, cost)` at the refined minimum.
    pub minimum: (f64, f64),
    pub infeasible_points: Vec<f64>,
}

fn sweep_point(t_f: f64, t_a: f64, units: f64) -> Option<f64> {
    let pair = schedule::build_antedated(t_f, t_a, beta_dot0_from_units(units, t_f)).ok()?;
    if !validate_schedule(&pair).is_physical() {
        return None;
    }
    energy_cost(&pair).ok()
}

fn cost_only(t_f: f64, t_a: f64, units: f64) -> f64 {
    schedule::build_antedated(t_f, t_a, beta_dot0_from_units(units, t_f))
        .and_then(|p| energy_cost(&p))
        .unwrap_or(f64::INFINITY)
}

pub fn sweep_beta_dot0(t_f: f64, t_a: f64, lo: f64, hi: f64, n: usize) -> Result<SweepResult> {
    sweep_beta_dot0_with(t_f, t_a, lo, hi, n, Execution::default())
}

/// Scans `β̇(0) ∈ [lo, hi]` (units of `π / 2t_f`) on `n` points for an
/// antedated passage, then refines the best bracket by golden-section search.
pub fn sweep_beta_dot0_with(
    t_f: f64,
    t_a: f64,
    lo: f64,
    hi: f64,
    n: usize,
    mode: Execution,
) -> Result<SweepResult> {
    if !(lo < hi) || n < 10 {
        return Err(Error::InvalidArgument(format!(
            "sweep needs lo < hi and n >= 10 (got [{lo}, {hi}], n = {n})"
        )));
    }
    let s_a = t_a / t_f;
    if !(ANTEDATE_MIN_FRACTION - 1e-12..=0.5 + 1e-12).contains(&s_a) {
        return Err(Error::InvalidArgument(format!(
            "t_a / t_f = {s_a} outside [2/7.7, 1/2]"
        )));
    }

    let units: Vec<f64> = (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect();
    let costs = map_indices(n, mode, |i| sweep_point(t_f, t_a, units[i]));
    let grid: Vec<SweepPoint> = units
        .iter()
        .zip(&costs)
        .map(|(&u, &c)| SweepPoint {
            beta_dot0_units: u,
            cost: c,
        })
        .collect();
    let infeasible_points = grid
        .iter()
        .filter(|p| p.cost.is_none())
        .map(|p| p.beta_dot0_units)
        .collect();

    // strict `<` keeps the smaller β̇(0) on ties
    let best = costs
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.map(|c| (i, c)))
        .fold(None, |acc: Option<(usize, f64)>, (i, c)| match acc {
            Some((_, bc)) if bc <= c => acc,
            _ => Some((i, c)),
        })
        .ok_or(Error::NoFeasiblePoint)?;

    let (i, grid_cost) = best;
    let a = units[i.saturating_sub(1)];
    let b = units[(i + 1).min(n - 1)];
    let (u_star, c_star) = golden_section(|u| cost_only(t_f, t_a, u), a, b, 1e-6);
    let minimum = if c_star <= grid_cost {
        (u_star, c_star)
    } else {
        (units[i], grid_cost)
    };

    Ok(SweepResult {
        t_f,
        t_a,
        grid,
        minimum,
        infeasible_points,
    })
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    [(x, fx), (c, fc), (d, fd)]
        .into_iter()
        .fold((x, fx), |best, cur| if cur.1 < best.1 { cur } else { best })
}

/// Costs of the three usual passages: third order and quartic `γ` with
/// `γ(t_f/2) ∈ {2π/5, 2π/6}`.
pub fn usual_passage_costs(t_f: f64) -> Result<[f64; 3]> {
    Ok([
        energy_cost(&schedule::third_order_pair(t_f)?)?,
        energy_cost(&schedule::fourth_order_pair(t_f, 2.0 * PI / 5.0)?)?,
        energy_cost(&schedule::fourth_order_pair(t_f, 2.0 * PI / 6.0)?)?,
    ])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassageRow {
    pub t: f64,
    pub iec_rho11: f64,
    pub iec_rho22: f64,
    pub iec_bloch: BlochVector,
    pub adiabatic_rho11: f64,
    pub adiabatic_rho22: f64,
    pub adiabatic_bloch: BlochVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PassageReport {
    pub rows: Vec<PassageRow>,
    /// Largest `|ρ^I₁₁ − ρ^ad₁₁|` over the grid.
    pub max_population_gap: f64,
    /// First grid time at which `ρ^I₁₁` is within the tolerance of its target.
    pub inversion_time: Option<f64>,
    pub max_iec_abs_y: f64,
    pub max_adiabatic_abs_y: f64,
}

/// Tolerance used for [`PassageReport::inversion_time`].
pub const INVERSION_TOL: f64 = 1e-6;

/// Analytic invariant-basis passage next to the adiabatic reference, on `n_grid + 1` points.
pub fn compare_passages(
    pairs: &[SchedulePair],
    w: Weights,
    n_grid: usize,
) -> Result<Vec<PassageReport>> {
    if n_grid < 2 {
        return Err(Error::InvalidArgument(format!(
            "need n_grid >= 2, got {n_grid}"
        )));
    }
    pairs.iter().map(|p| compare_one(p, w, n_grid)).collect()
}

fn compare_one(pair: &SchedulePair, w: Weights, n: usize) -> Result<PassageReport> {
    let rows = map_indices(n + 1, Execution::default(), |i| {
        let s = if i == n { 1.0 } else { i as f64 / n as f64 };
        let iec = invariant_state(pair, w, s);
        let ad = adiabatic_state(pair, w, s)?;
        Ok(PassageRow {
            t: s * pair.t_f,
            iec_rho11: iec.rho11(),
            iec_rho22: iec.rho22(),
            iec_bloch: iec.bloch(),
            adiabatic_rho11: ad.rho11(),
            adiabatic_rho22: ad.rho22(),
            adiabatic_bloch: ad.bloch(),
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let target = invariant_state(pair, w, pair.terminal_s()).rho11();
    let inversion_time = rows
        .iter()
        .find(|r| (r.iec_rho11 - target).abs() < INVERSION_TOL)
        .map(|r| r.t);
    let fold_max = |f: &dyn Fn(&PassageRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    Ok(PassageReport {
        max_population_gap: fold_max(&|r| (r.iec_rho11 - r.adiabatic_rho11).abs()),
        max_iec_abs_y: fold_max(&|r| r.iec_bloch.y.abs()),
        max_adiabatic_abs_y: fold_max(&|r| r.adiabatic_bloch.y.abs()),
        inversion_time,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::{
        antedated_pair, build_antedated, fourth_order_gamma, third_order_beta, third_order_pair,
    };
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn third_order_is_valid() {
        let r = validate_schedule(&third_order_pair(1.0).unwrap());
        assert!(r.is_physical(), "{:?}", r.messages);
        assert!(r.max_adiabaticity_metric.is_finite());
    }

    #[test]
    fn early_switch_breaks_gamma_range() {
        let p = build_antedated(1.0, 0.25, FRAC_PI_2).unwrap();
        let r = validate_schedule(&p);
        assert!(!r.gamma_range_ok);
    }

    #[test]
    fn quartic_below_limit_is_reported() {
        let p = SchedulePair::from_parts(
            fourth_order_gamma(2.0 * PI / 7.0).unwrap(),
            third_order_beta().unwrap(),
            1.0,
            None,
        );
        let r = validate_schedule(&p);
        assert!(!r.is_physical());
        assert!(!r.messages.is_empty());
    }

    #[test]
    fn cost_is_scale_free() {
        let a = energy_cost(&antedated_pair(1.0, 0.5, FRAC_PI_2).unwrap()).unwrap();
        let b = energy_cost(&antedated_pair(1e3, 500.0, FRAC_PI_2 / 1e3).unwrap()).unwrap();
        assert!((a - b).abs() < 1e-9);
        assert!(a > PI);
    }

    #[test]
    fn golden_section_parabola() {
        let (x, fx) = golden_section(|x| (x - 0.7).powi(2) + 1.0, 0.0, 2.0, 1e-8);
        assert!((x - 0.7).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_argument_checks() {
        assert!(sweep_beta_dot0(1.0, 0.5, 2.0, 1.0, 20).is_err());
        assert!(sweep_beta_dot0(1.0, 0.5, 1.0, 2.0, 5).is_err());
        assert!(sweep_beta_dot0(1.0, 0.1, 1.0, 2.0, 20).is_err());
    }

    #[test]
    fn comparison_geometry() {
        let w = Weights::default();
        let reports = compare_passages(&[third_order_pair(1.0).unwrap()], w, 200).unwrap();
        let r = &reports[0];
        assert_eq!(r.max_adiabatic_abs_y, 0.0);
        assert!(r.max_iec_abs_y > 0.1);
        assert!(r.max_population_gap < 0.05, "{}", r.max_population_gap);
    }
}
