//! Truncated power series in a local offset `h`, used to take exact limits of
//! quotients whose numerator and denominator vanish together.

use std::f64::consts::FRAC_PI_2;

/// Number of retained terms (orders `0..ORDER`).
pub const ORDER: usize = 12;

/// Leading coefficients below this magnitude are treated as exact zeros when
/// a series is anchored at a designated singular point.
pub const SNAP: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Series(pub [f64; ORDER]);

impl Series {
    pub fn zero() -> Self {
        Series([0.0; ORDER])
    }

    pub fn constant(c: f64) -> Self {
        let mut out = Self::zero();
        out.0[0] = c;
        out
    }

    pub fn from_coeffs(coeffs: &[f64]) -> Self {
        let mut out = Self::zero();
        for (dst, &src) in out.0.iter_mut().zip(coeffs) {
            *dst = src;
        }
        out
    }

    /// Same series with a constant term below [`SNAP`] set to exactly zero.
    pub fn snapped(mut self) -> Self {
        if self.0[0].abs() < SNAP {
            self.0[0] = 0.0;
        }
        self
    }

    pub fn mul(&self, other: &Series) -> Series {
        let mut out = Series::zero();
        for i in 0..ORDER {
            if self.0[i] == 0.0 {
                continue;
            }
            for j in 0..ORDER - i {
                out.0[i + j] += self.0[i] * other.0[j];
            }
        }
        out
    }

    pub fn scale(&self, k: f64) -> Series {
        Series(self.0.map(|c| c * k))
    }

    /// Index of the first non-zero coefficient, if any.
    pub fn leading_order(&self) -> Option<usize> {
        self.0.iter().position(|&c| c != 0.0)
    }

    pub fn eval(&self, h: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * h + c)
    }

    /// `(sin a(h), cos a(h))` for an angle series.
    ///
    /// When the constant term lies within [`SNAP`] of a multiple of π/2 it is
    /// replaced by that multiple, so the trigonometric factor that should vanish
    /// does so exactly.
    pub fn sin_cos(&self) -> (Series, Series) {
        let a0 = self.0[0];
        let quarter = (a0 / FRAC_PI_2).round();
        let (s0, c0) = if (a0 - quarter * FRAC_PI_2).abs() < SNAP {
            match (quarter as i64).rem_euclid(4) {
                0 => (0.0, 1.0),
                1 => (1.0, 0.0),
                2 => (0.0, -1.0),
                _ => (-1.0, 0.0),
            }
        } else {
            a0.sin_cos()
        };

        let mut u = self.clone();
        u.0[0] = 0.0;
        // sin u and cos u by accumulating u^k / k!.
        let mut sin_u = Series::zero();
        let mut cos_u = Series::constant(1.0);
        let mut power = Series::constant(1.0);
        for k in 1..ORDER {
            power = power.mul(&u).scale(1.0 / k as f64);
            if power.leading_order().is_none() {
                break;
            }
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            let target = if k % 2 == 1 { &mut sin_u } else { &mut cos_u };
            for (t, p) in target.0.iter_mut().zip(power.0.iter()) {
                *t += sign * p;
            }
        }

        let sin_a = Series::from_coeffs(
            &(0..ORDER)
                .map(|i| s0 * cos_u.0[i] + c0 * sin_u.0[i])
                .collect::<Vec<_>>(),
        );
        let cos_a = Series::from_coeffs(
            &(0..ORDER)
                .map(|i| c0 * cos_u.0[i] - s0 * sin_u.0[i])
                .collect::<Vec<_>>(),
        );
        (sin_a, cos_a)
    }
}

/// Outcome of evaluating a quotient of two series near their common anchor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quotient {
    Finite(f64),
    Divergent,
}

/// Evaluates `num(h) / den(h)` after cancelling the common power of `h`.
///
/// At `h = 0` this is the exact limit from the leading coefficients. A
/// denominator whose leading order exceeds the numerator's certifies a pole.
pub fn quotient(num: &Series, den: &Series, h: f64) -> Quotient {
    let Some(d) = den.leading_order() else {
        return Quotient::Divergent;
    };
    let n = num.leading_order().unwrap_or(ORDER);
    if n < d {
        return Quotient::Divergent;
    }
    let num_tail = Series::from_coeffs(&num.0[d..]);
    let den_tail = Series::from_coeffs(&den.0[d..]);
    Quotient::Finite(num_tail.eval(h) / den_tail.eval(h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sin_cos_matches_libm_away_from_snap() {
        let a = Series::from_coeffs(&[0.3, 1.2, -0.7, 0.25]);
        let (s, c) = a.sin_cos();
        for h in [-0.05, 0.0, 0.02, 0.07] {
            let angle = a.eval(h);
            assert!((s.eval(h) - angle.sin()).abs() < 1e-13);
            assert!((c.eval(h) - angle.cos()).abs() < 1e-13);
        }
    }

    #[test]
    fn snapped_multiples_of_half_pi_vanish_exactly() {
        let a = Series::from_coeffs(&[PI, 0.0, -3.0 * PI]);
        let (s, c) = a.sin_cos();
        assert_eq!(s.leading_order(), Some(2));
        assert_eq!(s.0[2], 3.0 * PI);
        assert_eq!(c.0[0], -1.0);

        let b = Series::from_coeffs(&[-PI / 2.0, 1.5 * PI]);
        let (s, c) = b.sin_cos();
        assert_eq!(s.0[0], -1.0);
        assert_eq!(c.leading_order(), Some(1));
        assert!((c.0[1] - 1.5 * PI).abs() < 1e-15);
    }

    #[test]
    fn quotient_limits() {
        // sin(h)/h → 1
        let h = Series::from_coeffs(&[0.0, 1.0]);
        let (sin_h, _) = h.sin_cos();
        assert_eq!(quotient(&sin_h, &h, 0.0), Quotient::Finite(1.0));
        assert!(
            matches!(quotient(&sin_h, &h, 1e-3), Quotient::Finite(v) if (v - (1e-3f64).sin() / 1e-3).abs() < 1e-15)
        );
        // 1/h diverges
        assert_eq!(
            quotient(&Series::constant(1.0), &h, 0.0),
            Quotient::Divergent
        );
        // h²/h → 0
        let h2 = h.mul(&h);
        assert_eq!(quotient(&h2, &h, 0.0), Quotient::Finite(0.0));
    }
}
