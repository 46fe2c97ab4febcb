//! Real polynomials in normalized time `s ∈ [0, 1]` and Hermite–Birkhoff interpolation.
//!
//! Every schedule in this crate is a low-degree polynomial carried in the
//! monomial basis. Interpolation conditions fix a value or a derivative at a
//! point; [`fit`] solves the resulting square system with partial pivoting.

use crate::error::{Error, Result};

/// Polynomial with real coefficients in ascending powers.
///
/// An empty coefficient list is the zero polynomial.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Number of stored coefficients minus one; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Horner evaluation.
    pub fn eval(&self, s: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    pub fn nth_derivative(&self, k: usize) -> Polynomial {
        (0..k).fold(self.clone(), |p, _| p.derivative())
    }

    /// Value of the `k`-th derivative at `s` without materializing intermediate polynomials.
    pub fn eval_derivative(&self, k: usize, s: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(k)
            .rev()
            .fold(0.0, |acc, (i, &c)| acc * s + c * falling_factorial(i, k))
    }

    /// Taylor coefficients of `p(s + h)` in powers of `h`, up to and including `order`.
    pub fn taylor_at(&self, s: f64, order: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(order + 1);
        let mut factorial = 1.0;
        for k in 0..=order {
            if k > 0 {
                factorial *= k as f64;
            }
            out.push(if k < self.coeffs.len() {
                self.eval_derivative(k, s) / factorial
            } else {
                0.0
            });
        }
        out
    }

    /// Synthetic division by `(s − root)`: returns the quotient and the remainder.
    pub fn deflate(&self, root: f64) -> (Polynomial, f64) {
        if self.coeffs.is_empty() {
            return (Polynomial::zero(), 0.0);
        }
        let mut quotient = vec![0.0; self.coeffs.len() - 1];
        let mut carry = 0.0;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            let value = c + carry * root;
            if i == 0 {
                return (Polynomial::new(quotient), value);
            }
            quotient[i - 1] = value;
            carry = value;
        }
        unreachable!()
    }

    /// Bound on the rounding error of [`Polynomial::eval`] at `s`.
    fn eval_error_bound(&self, s: f64) -> f64 {
        let magnitude: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c.abs() * s.abs().powi(i as i32))
            .sum();
        64.0 * f64::EPSILON * magnitude
    }

    /// Minimum over `[lo, hi]` and the abscissa where it is attained.
    ///
    /// Candidates are a uniform grid of `grid` cells, both endpoints, and every
    /// critical point located by [`real_roots`] on the derivative.
    pub fn min_on(&self, lo: f64, hi: f64, grid: usize) -> (f64, f64) {
        let grid = grid.max(1);
        let step = (hi - lo) / grid as f64;
        let candidates = (0..=grid)
            .map(|i| if i == grid { hi } else { lo + step * i as f64 })
            .chain(real_roots(&self.derivative(), lo, hi));
        candidates
            .map(|s| (s, self.eval(s)))
            .fold(
                (lo, f64::INFINITY),
                |best, cur| if cur.1 < best.1 { cur } else { best },
            )
    }
}

fn falling_factorial(i: usize, k: usize) -> f64 {
    (0..k).map(|j| (i - j) as f64).product()
}

/// A single interpolation constraint: the `derivative_order`-th derivative at `s` equals `value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Condition {
    pub s: f64,
    pub derivative_order: usize,
    pub value: f64,
}

impl Condition {
    pub fn value(s: f64, value: f64) -> Self {
        Self {
            s,
            derivative_order: 0,
            value,
        }
    }

    pub fn slope(s: f64, value: f64) -> Self {
        Self {
            s,
            derivative_order: 1,
            value,
        }
    }
}

/// Fits the unique polynomial of the given degree satisfying all conditions.
pub fn fit(conditions: &[Condition], degree: usize) -> Result<Polynomial> {
    let n = degree + 1;
    if conditions.len() != n {
        return Err(Error::ConditionCount {
            degree,
            expected: n,
            got: conditions.len(),
        });
    }
    for c in conditions {
        if !(0.0..=1.0).contains(&c.s) {
            return Err(Error::InvalidArgument(format!(
                "condition point s = {} outside [0, 1]",
                c.s
            )));
        }
        if c.derivative_order > degree {
            return Err(Error::InvalidArgument(format!(
                "derivative order {} exceeds degree {degree}",
                c.derivative_order
            )));
        }
    }

    let mut matrix: Vec<Vec<f64>> = conditions
        .iter()
        .map(|c| {
            (0..n)
                .map(|i| {
                    if i < c.derivative_order {
                        0.0
                    } else {
                        falling_factorial(i, c.derivative_order)
                            * c.s.powi((i - c.derivative_order) as i32)
                    }
                })
                .collect()
        })
        .collect();
    let rhs: Vec<f64> = conditions.iter().map(|c| c.value).collect();
    solve_dense(&mut matrix, rhs).map(Polynomial::new)
}

/// Gaussian elimination with partial pivoting; consumes the matrix.
fn solve_dense(a: &mut [Vec<f64>], mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    let scale = a
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    let tiny = 1e-12 * scale.max(f64::MIN_POSITIVE);

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty range");
        let pivot = a[pivot_row][col];
        if pivot.abs() <= tiny {
            return Err(Error::SingularSystem { column: col, pivot });
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }

    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Ok(x)
}

/// Number of grid cells used to bracket sign changes.
pub const ROOT_GRID_CELLS: usize = 4096;

/// Real roots in `[lo, hi]`, ascending.
///
/// Roots are bracketed by sign changes on a uniform grid and refined by
/// bisection to machine precision. Grid nodes whose value is within the
/// rounding bound of zero are reported as roots directly.
pub fn real_roots(p: &Polynomial, lo: f64, hi: f64) -> Vec<f64> {
    if !(lo < hi) || p.is_zero() {
        return Vec::new();
    }
    let n = ROOT_GRID_CELLS;
    let step = (hi - lo) / n as f64;
    let nodes: Vec<f64> = (0..=n)
        .map(|i| if i == n { hi } else { lo + step * i as f64 })
        .collect();
    let signs: Vec<i8> = nodes
        .iter()
        .map(|&s| {
            let v = p.eval(s);
            if v.abs() <= p.eval_error_bound(s) {
                0
            } else if v > 0.0 {
                1
            } else {
                -1
            }
        })
        .collect();

    let mut roots = Vec::new();
    for i in 0..=n {
        if signs[i] == 0 {
            // Collapse a run of near-zero nodes into one root.
            if i == 0 || signs[i - 1] != 0 {
                roots.push(nodes[i]);
            }
            continue;
        }
        if i < n && signs[i + 1] != 0 && signs[i] != signs[i + 1] {
            roots.push(bisect(p, nodes[i], nodes[i + 1], signs[i]));
        }
    }
    roots
}

fn bisect(p: &Polynomial, mut a: f64, mut b: f64, sign_a: i8) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let v = p.eval(mid);
        if v == 0.0 {
            return mid;
        }
        if (v > 0.0) == (sign_a > 0) {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}
