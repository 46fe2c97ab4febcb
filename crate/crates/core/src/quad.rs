//! Adaptive Simpson quadrature for fallible integrands.

use std::cell::Cell;

use crate::error::Result;

const MAX_DEPTH: u32 = 48;
/// Once this many evaluations are spent, remaining panels accept their
/// current estimate instead of subdividing (guards against noisy integrands).
const MAX_EVALS: usize = 1 << 20;

/// Integrates `f` over `[a, b]` to roughly `tol` absolute error.
pub fn adaptive_simpson<F>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a)?;
    let fb = f(b)?;
    let m = 0.5 * (a + b);
    let fm = f(m)?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let evals = Cell::new(3);
    recurse(f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH, &evals)
}

#[allow(clippy::too_many_arguments)]
fn recurse<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    evals: &Cell<usize>,
) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    evals.set(evals.get() + 2);
    if depth == 0 || evals.get() >= MAX_EVALS || delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    Ok(
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, evals)?
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, evals)?,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_smooth_functions() {
        let v = adaptive_simpson(&|x: f64| Ok(x.sin()), 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-11);
        let v = adaptive_simpson(&|x: f64| Ok((-x * x).exp()), -3.0, 1.0, 1e-12).unwrap();
        // √π/2 (erf(1) + erf(3))
        let expected = 0.886_226_925_452_758 * (0.842_700_792_949_714_9 + 0.999_977_909_503_001_4);
        assert!((v - expected).abs() < 1e-11);
    }

    #[test]
    fn noisy_integrand_terminates() {
        let noisy = |x: f64| Ok(1.0 + 1e-9 * ((x * 1e7).sin()).signum());
        let v = adaptive_simpson(&noisy, 0.0, 1.0, 1e-15).unwrap();
        assert!((v - 1.0).abs() < 1e-8);
    }

    #[test]
    fn empty_interval() {
        assert_eq!(adaptive_simpson(&|_| Ok(1.0), 0.3, 0.3, 1e-9).unwrap(), 0.0);
    }
}
