//! Two-level states, the analytic invariant-basis passage and its numerical check.
//!
//! The analytic state `ρ^I(s)` is diagonal in the instantaneous eigenbasis of
//! the invariant. [`evolve`] integrates `i dρ/dt = [H, ρ]` with classical RK4
//! so the analytic passage can be verified independently of the algebra that
//! produced the pulse.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::pulse::{self, Branch};
use crate::schedule::SchedulePair;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Dense complex 2×2 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix2(pub [[C64; 2]; 2]);

impl Matrix2 {
    pub fn zero() -> Self {
        Matrix2([[C64::new(0.0, 0.0); 2]; 2])
    }

    pub fn identity() -> Self {
        Self::diag(1.0, 1.0)
    }

    pub fn diag(a: f64, b: f64) -> Self {
        Matrix2([
            [C64::new(a, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(b, 0.0)],
        ])
    }

    pub fn pauli_x() -> Self {
        Matrix2([
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        ])
    }

    pub fn pauli_y() -> Self {
        Matrix2([[C64::new(0.0, 0.0), -I], [I, C64::new(0.0, 0.0)]])
    }

    pub fn pauli_z() -> Self {
        Self::diag(1.0, -1.0)
    }

    pub fn scale(&self, k: C64) -> Self {
        Matrix2(self.0.map(|row| row.map(|x| x * k)))
    }

    pub fn scale_re(&self, k: f64) -> Self {
        self.scale(C64::new(k, 0.0))
    }

    pub fn dagger(&self) -> Self {
        let m = &self.0;
        Matrix2([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn commutator(&self, other: &Matrix2) -> Matrix2 {
        *self * *other - *other * *self
    }

    pub fn frobenius(&self) -> f64 {
        self.0
            .iter()
            .flat_map(|r| r.iter())
            .map(|x| x.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn apply(&self, v: &[C64; 2]) -> [C64; 2] {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (*self - self.dagger()).frobenius() <= tol
    }
}

impl Add for Matrix2 {
    type Output = Matrix2;
    fn add(self, rhs: Matrix2) -> Matrix2 {
        let mut out = self;
        for (r, row) in out.0.iter_mut().enumerate() {
            for (c, x) in row.iter_mut().enumerate() {
                *x += rhs.0[r][c];
            }
        }
        out
    }
}

impl Sub for Matrix2 {
    type Output = Matrix2;
    fn sub(self, rhs: Matrix2) -> Matrix2 {
        self + rhs.scale_re(-1.0)
    }
}

impl Mul for Matrix2 {
    type Output = Matrix2;
    fn mul(self, rhs: Matrix2) -> Matrix2 {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = Matrix2::zero();
        for r in 0..2 {
            for c in 0..2 {
                out.0[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        out
    }
}

/// Mixture weights of the two invariant eigenstates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights {
    p_plus: f64,
    p_minus: f64,
}

impl Weights {
    pub fn new(p_plus: f64, p_minus: f64) -> Result<Self> {
        let in_range = |p: f64| (0.0..=1.0).contains(&p);
        if !in_range(p_plus) || !in_range(p_minus) || (p_plus + p_minus - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "weights ({p_plus}, {p_minus}) must lie in [0, 1] and sum to 1"
            )));
        }
        Ok(Self { p_plus, p_minus })
    }

    pub fn p_plus(&self) -> f64 {
        self.p_plus
    }

    pub fn p_minus(&self) -> f64 {
        self.p_minus
    }

    /// `p₊ − p₋`, the Bloch radius of every invariant-basis state.
    pub fn polarization(&self) -> f64 {
        self.p_plus - self.p_minus
    }
}

impl Default for Weights {
    fn default() -> Self {
        Self {
            p_plus: 0.2,
            p_minus: 0.8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }
}

/// Unit-trace positive semidefinite Hermitian 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(Matrix2);

impl DensityMatrix {
    /// Validates Hermiticity and trace to 1e-12 and positivity to −1e-10.
    pub fn new(m: Matrix2) -> Result<Self> {
        let rho = DensityMatrix(m);
        rho.check(1e-12)?;
        Ok(rho)
    }

    pub(crate) fn new_unchecked(m: Matrix2) -> Self {
        DensityMatrix(m)
    }

    pub fn check(&self, tol: f64) -> Result<()> {
        let m = &self.0;
        if !m.is_hermitian(tol) {
            return Err(Error::InvalidArgument(
                "density matrix is not Hermitian".into(),
            ));
        }
        if (m.trace() - 1.0).norm() > tol {
            return Err(Error::InvalidArgument(format!(
                "density matrix trace {} differs from 1",
                m.trace()
            )));
        }
        if self.min_eigenvalue() < -1e-10 {
            return Err(Error::InvalidArgument(format!(
                "density matrix has negative eigenvalue {}",
                self.min_eigenvalue()
            )));
        }
        Ok(())
    }

    pub fn from_bloch(b: BlochVector) -> Self {
        let m = Matrix2::identity()
            + Matrix2::pauli_x().scale_re(b.x)
            + Matrix2::pauli_y().scale_re(b.y)
            + Matrix2::pauli_z().scale_re(b.z);
        DensityMatrix(m.scale_re(0.5))
    }

    pub fn diag(rho11: f64, rho22: f64) -> Result<Self> {
        Self::new(Matrix2::diag(rho11, rho22))
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix(Matrix2::diag(0.5, 0.5))
    }

    pub fn matrix(&self) -> &Matrix2 {
        &self.0
    }

    pub fn rho11(&self) -> f64 {
        self.0 .0[0][0].re
    }

    pub fn rho22(&self) -> f64 {
        self.0 .0[1][1].re
    }

    pub fn rho12(&self) -> C64 {
        self.0 .0[0][1]
    }

    pub fn bloch(&self) -> BlochVector {
        let r12 = self.rho12();
        BlochVector {
            x: 2.0 * r12.re,
            y: -2.0 * r12.im,
            z: self.rho11() - self.rho22(),
        }
    }

    pub fn purity(&self) -> f64 {
        (self.0 * self.0).trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        0.5 * (1.0 - self.bloch().norm())
    }

    /// Frobenius distance.
    pub fn distance(&self, other: &DensityMatrix) -> f64 {
        (self.0 - other.0).frobenius()
    }
}

/// Uhlmann fidelity via the 2×2 closed form `tr(ρσ) + 2√(det ρ det σ)`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let overlap = (rho.0 * sigma.0).trace().re;
    let dets = rho.0.det().re.max(0.0) * sigma.0.det().re.max(0.0);
    (overlap + 2.0 * dets.sqrt()).clamp(0.0, 1.0)
}

/// `H(s) = ½[[Δ, Ω_R], [Ω_R, −Δ]]`, switched to the diagonal form past `t_a`.
pub fn hamiltonian_at(pair: &SchedulePair, s: f64) -> Result<Matrix2> {
    let (omega_r, delta) = pulse::controls_at(pair, s)?;
    Ok(hamiltonian_from(omega_r, delta))
}

fn hamiltonian_from(omega_r: f64, delta: f64) -> Matrix2 {
    Matrix2([
        [C64::new(delta, 0.0), C64::new(omega_r, 0.0)],
        [C64::new(omega_r, 0.0), C64::new(-delta, 0.0)],
    ])
    .scale_re(0.5)
}

fn invariant_from(gamma: f64, beta: f64) -> Matrix2 {
    let phase = C64::from_polar(1.0, beta);
    Matrix2([
        [C64::new(gamma.cos(), 0.0), phase * gamma.sin()],
        [phase.conj() * gamma.sin(), C64::new(-gamma.cos(), 0.0)],
    ])
    .scale_re(0.5)
}

/// Invariant `I(s) = ½[[cos γ, e^{iβ} sin γ], [e^{−iβ} sin γ, −cos γ]]` (unit amplitude).
pub fn invariant_at(pair: &SchedulePair, s: f64) -> Matrix2 {
    invariant_from(pair.gamma.eval(s), pair.beta.eval(s))
}

/// Normalized time at which the physical invariant is sampled: frozen past `t_a`.
fn physical_s(pair: &SchedulePair, s: f64) -> f64 {
    pair.switch_s().map_or(s, |a| s.min(a))
}

/// `‖i ∂I/∂t − [H, I]‖_F · t_f`.
///
/// Past the antedated switch the invariant is frozen at `I(t_a)` and the
/// switched Hamiltonian is used.
pub fn invariant_residual(pair: &SchedulePair, s: f64) -> Result<f64> {
    let h = hamiltonian_at(pair, s)?;
    if let Some(a) = pair.switch_s() {
        if s > a {
            let frozen = invariant_at(pair, a);
            return Ok(h.commutator(&frozen).frobenius() * pair.t_f);
        }
    }
    Ok(invariant_residual_against(pair, s, &h))
}

/// Residual of the pair's (unfrozen) invariant against an arbitrary Hamiltonian `h`.
pub fn invariant_residual_against(pair: &SchedulePair, s: f64, h: &Matrix2) -> f64 {
    let (g, b) = (pair.gamma.eval(s), pair.beta.eval(s));
    let g_dot = pair.gamma.eval_derivative(1, s);
    let b_dot = pair.beta.eval_derivative(1, s);
    let phase = C64::from_polar(1.0, b);
    let d_gamma = Matrix2([
        [C64::new(-g.sin(), 0.0), phase * g.cos()],
        [phase.conj() * g.cos(), C64::new(g.sin(), 0.0)],
    ])
    .scale_re(0.5);
    let d_beta = Matrix2([
        [C64::new(0.0, 0.0), I * phase * g.sin()],
        [-I * phase.conj() * g.sin(), C64::new(0.0, 0.0)],
    ])
    .scale_re(0.5);
    // ∂I/∂t in units of 1/t_f
    let d_invariant = d_gamma.scale_re(g_dot) + d_beta.scale_re(b_dot);
    let residual = d_invariant.scale(I) - h.scale_re(pair.t_f).commutator(&invariant_from(g, b));
    residual.frobenius()
}

/// Instantaneous eigenstate of the invariant.
///
/// `|φ₊⟩ = (cos(γ/2) e^{iβ}, sin(γ/2))`, `|φ₋⟩ = (sin(γ/2), −cos(γ/2) e^{−iβ})`.
pub fn invariant_eigenstate(pair: &SchedulePair, s: f64, branch: Branch) -> [C64; 2] {
    let s = physical_s(pair, s);
    let (g, b) = (pair.gamma.eval(s), pair.beta.eval(s));
    let (half_s, half_c) = (0.5 * g).sin_cos();
    match branch {
        Branch::Plus => [C64::from_polar(half_c, b), C64::new(half_s, 0.0)],
        Branch::Minus => [C64::new(half_s, 0.0), -C64::from_polar(half_c, -b)],
    }
}

/// Analytic mixed state `ρ^I(s) = ½I + ½(p₊ − p₋)(sin γ cos β σx − sin γ sin β σy + cos γ σz)`.
///
/// Constant past the antedated switch.
pub fn invariant_state(pair: &SchedulePair, w: Weights, s: f64) -> DensityMatrix {
    let s = physical_s(pair, s);
    let (g, b) = (pair.gamma.eval(s), pair.beta.eval(s));
    let d = w.polarization();
    DensityMatrix::from_bloch(BlochVector {
        x: d * g.sin() * b.cos(),
        y: -d * g.sin() * b.sin(),
        z: d * g.cos(),
    })
}

/// Adiabatically following state `½I + ½(p₊ − p₋)(sin θ σx + cos θ σz)`.
///
/// The mixing angle is `θ = atan2(Ω_R, Δ)`, which equals `arccos(Δ/Ω)` for `Ω_R ≥ 0`.
pub fn adiabatic_state(pair: &SchedulePair, w: Weights, s: f64) -> Result<DensityMatrix> {
    let (omega_r, delta) = pulse::controls_at(pair, s)?;
    if omega_r.hypot(delta) * pair.t_f < 1e-12 {
        return Err(Error::DegeneratePoint { s });
    }
    let theta = omega_r.atan2(delta);
    let d = w.polarization();
    Ok(DensityMatrix::from_bloch(BlochVector {
        x: d * theta.sin(),
        y: 0.0,
        z: d * theta.cos(),
    }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub rho: DensityMatrix,
    pub bloch: BlochVector,
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
}

/// Integration grid in normalized time, aligned with the antedated switch.
fn step_grid(pair: &SchedulePair, n_steps: usize) -> Vec<f64> {
    let mut nodes = Vec::with_capacity(n_steps + 1);
    match pair.switch_s() {
        Some(a) => {
            let first = ((n_steps as f64 * a).round() as usize).clamp(1, n_steps - 1);
            nodes.extend((0..first).map(|i| a * i as f64 / first as f64));
            let rest = n_steps - first;
            nodes.extend((0..rest).map(|i| a + (1.0 - a) * i as f64 / rest as f64));
        }
        None => nodes.extend((0..n_steps).map(|i| i as f64 / n_steps as f64)),
    }
    nodes.push(1.0);
    nodes
}

fn check_steps(n_steps: usize) -> Result<()> {
    if n_steps < 100 {
        return Err(Error::InvalidArgument(format!(
            "need n_steps >= 100, got {n_steps}"
        )));
    }
    Ok(())
}

/// Hamiltonian in units of `1/t_f` at a node of segment `[s0, s1]`.
///
/// The grid never straddles the switch, so the side is fixed by `s0`: a step
/// ending at `t_a` sees the driven Hamiltonian, one starting there the
/// switched one.
fn scaled_hamiltonian(pair: &SchedulePair, s: f64, s0: f64) -> Result<Matrix2> {
    let h = match pair.switch_s() {
        Some(a) if s0 >= a => hamiltonian_from(0.0, pulse::delta_at(pair, a)?),
        Some(a) => hamiltonian_at(pair, s.min(a))?,
        None => hamiltonian_at(pair, s)?,
    };
    Ok(h.scale_re(pair.t_f))
}

/// Fixed-step RK4 integration of `i dρ/dt = [H(t), ρ]` over `[0, t_f]`.
///
/// Each sample carries the Uhlmann fidelity to the population-inverted
/// diagonal of `rho0`, which is `ρ^I(t_f)` when `rho0 = ρ^I(0)`.
pub fn evolve(pair: &SchedulePair, rho0: DensityMatrix, n_steps: usize) -> Result<Trajectory> {
    check_steps(n_steps)?;
    let target = DensityMatrix::new_unchecked(Matrix2::diag(rho0.rho22(), rho0.rho11()));
    let sample = |s: f64, rho: DensityMatrix| TrajectorySample {
        t: s * pair.t_f,
        rho,
        bloch: rho.bloch(),
        fidelity: fidelity(&rho, &target),
    };

    let grid = step_grid(pair, n_steps);
    let mut rho = *rho0.matrix();
    let mut samples = Vec::with_capacity(grid.len());
    samples.push(sample(0.0, rho0));
    let rhs = |h: &Matrix2, r: &Matrix2| h.commutator(r).scale(-I);
    for w in grid.windows(2) {
        let (s0, s1) = (w[0], w[1]);
        let ds = s1 - s0;
        let h0 = scaled_hamiltonian(pair, s0, s0)?;
        let hm = scaled_hamiltonian(pair, 0.5 * (s0 + s1), s0)?;
        let h1 = scaled_hamiltonian(pair, s1, s0)?;
        let k1 = rhs(&h0, &rho);
        let k2 = rhs(&hm, &(rho + k1.scale_re(0.5 * ds)));
        let k3 = rhs(&hm, &(rho + k2.scale_re(0.5 * ds)));
        let k4 = rhs(&h1, &(rho + k3.scale_re(ds)));
        rho = rho + (k1 + k2.scale_re(2.0) + k3.scale_re(2.0) + k4).scale_re(ds / 6.0);

        let herm_drift = (rho - rho.dagger()).frobenius();
        let trace_drift = (rho.trace() - 1.0).norm();
        let drift = herm_drift.max(trace_drift);
        if drift > 1e-8 {
            return Err(Error::StepTooCoarse { drift });
        }
        samples.push(sample(s1, DensityMatrix::new_unchecked(rho)));
    }
    Ok(Trajectory { samples })
}

/// Fixed-step RK4 integration of `i d|ψ⟩/dt = H|ψ⟩` from `|φ_branch(0)⟩`.
pub fn evolve_pure(
    pair: &SchedulePair,
    branch: Branch,
    n_steps: usize,
) -> Result<Vec<(f64, [C64; 2])>> {
    check_steps(n_steps)?;
    let grid = step_grid(pair, n_steps);
    let mut psi = invariant_eigenstate(pair, 0.0, branch);
    let mut out = Vec::with_capacity(grid.len());
    out.push((0.0, psi));
    let rhs = |h: &Matrix2, v: &[C64; 2]| h.apply(v).map(|x| -I * x);
    let axpy = |v: &[C64; 2], k: &[C64; 2], a: f64| [v[0] + k[0] * a, v[1] + k[1] * a];
    for w in grid.windows(2) {
        let (s0, s1) = (w[0], w[1]);
        let ds = s1 - s0;
        let h0 = scaled_hamiltonian(pair, s0, s0)?;
        let hm = scaled_hamiltonian(pair, 0.5 * (s0 + s1), s0)?;
        let h1 = scaled_hamiltonian(pair, s1, s0)?;
        let k1 = rhs(&h0, &psi);
        let k2 = rhs(&hm, &axpy(&psi, &k1, 0.5 * ds));
        let k3 = rhs(&hm, &axpy(&psi, &k2, 0.5 * ds));
        let k4 = rhs(&h1, &axpy(&psi, &k3, ds));
        for i in 0..2 {
            psi[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (ds / 6.0);
        }
        let norm_drift = (psi[0].norm_sqr() + psi[1].norm_sqr() - 1.0).abs();
        if norm_drift > 1e-8 {
            return Err(Error::StepTooCoarse { drift: norm_drift });
        }
        out.push((s1 * pair.t_f, psi));
    }
    Ok(out)
}

/// `⟨a|b⟩`.
pub fn inner(a: &[C64; 2], b: &[C64; 2]) -> C64 {
    a[0].conj() * b[0] + a[1].conj() * b[1]
}

/// Largest Frobenius distance between a trajectory and the analytic passage.
pub fn max_error_vs_invariant(pair: &SchedulePair, w: Weights, traj: &Trajectory) -> f64 {
    traj.samples
        .iter()
        .map(|x| x.rho.distance(&invariant_state(pair, w, x.t / pair.t_f)))
        .fold(0.0, f64::max)
}
