use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{AxisHamiltonian, HamiltonianParams, OperatorSet};
use crate::error::{Error, Result};
use crate::states::{Axis, FockState, Modes, QuantumState};

/// Largest ‖ψ(T) − ψ(T)‖ allowed from the Krylov approximation per step.
const KRYLOV_TOL: f64 = 1e-13;
const KRYLOV_MAX_DIM: usize = 40;
const MAX_SUBSTEP_DEPTH: u32 = 12;

/// Hermitian matrix in its eigenbasis, for repeated exp(−iHt).
#[derive(Debug, Clone)]
pub struct Spectral {
    values: DVector<f64>,
    vectors: DMatrix<Complex64>,
}

impl Spectral {
    pub fn new(h: &DMatrix<Complex64>) -> Result<Self> {
        if !h.is_square() {
            return Err(Error::ShapeMismatch("Hamiltonian must be square".into()));
        }
        if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Integrator("Hamiltonian has non-finite entries".into()));
        }
        let eig = SymmetricEigen::new(h.clone());
        Ok(Spectral {
            values: eig.eigenvalues,
            vectors: eig.eigenvectors,
        })
    }

    pub fn dimension(&self) -> usize {
        self.values.len()
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.values
    }

    /// exp(−iHt) as a dense matrix.
    pub fn propagator(&self, t: f64) -> DMatrix<Complex64> {
        let v = &self.vectors;
        v * DMatrix::from_diagonal(&self.phases(t)) * v.adjoint()
    }

    /// exp(−iHt)·M for every column of M.
    pub fn apply(&self, t: f64, m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let mut rotated = self.vectors.adjoint() * m;
        let phases = self.phases(t);
        for (i, mut row) in rotated.row_iter_mut().enumerate() {
            row *= phases[i];
        }
        &self.vectors * rotated
    }

    fn phases(&self, t: f64) -> DVector<Complex64> {
        self.values.map(|l| Complex64::from_polar(1.0, -l * t))
    }
}

/// exp(−iHt)ψ for a Hamiltonian given on the full state layout.
pub fn evolve_const(h: &DMatrix<Complex64>, t: f64, psi: &FockState) -> Result<FockState> {
    if h.nrows() != psi.amplitudes().len() {
        return Err(Error::ShapeMismatch(format!(
            "Hamiltonian of dimension {} for a state of dimension {}",
            h.nrows(),
            psi.amplitudes().len()
        )));
    }
    check_duration(t)?;
    if t == 0.0 {
        return Ok(psi.clone());
    }
    let column = DMatrix::from_column_slice(psi.amplitudes().len(), 1, psi.amplitudes().as_slice());
    let out = Spectral::new(h)?.apply(t, &column);
    finish(psi, DVector::from_column_slice(out.as_slice()))
}

fn check_duration(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::invalid("t", format!("duration must be finite and ≥ 0, got {t}")));
    }
    Ok(())
}

fn finish(template: &FockState, amps: DVector<Complex64>) -> Result<FockState> {
    if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Integrator("propagation produced non-finite amplitudes".into()));
    }
    FockState::from_amplitudes(template.modes(), template.cutoff(), amps)
}

/// Rearranges a state into a (2N × N_other) matrix whose rows follow the
/// (level, n_axis) layout of an [`AxisHamiltonian`] block.
pub(crate) fn gather_axis(psi: &FockState, axis: Axis) -> DMatrix<Complex64> {
    let n = psi.cutoff();
    let amps = psi.amplitudes();
    match psi.modes() {
        Modes::One => DMatrix::from_column_slice(2 * n, 1, amps.as_slice()),
        Modes::Two => DMatrix::from_fn(2 * n, n, |r, other| {
            let (level, k) = (r / n, r % n);
            amps[match axis {
                Axis::X => level * n * n + k * n + other,
                Axis::Y => level * n * n + other * n + k,
            }]
        }),
    }
}

pub(crate) fn scatter_axis(template: &FockState, axis: Axis, m: &DMatrix<Complex64>) -> Result<FockState> {
    let n = template.cutoff();
    let mut amps = DVector::zeros(template.amplitudes().len());
    match template.modes() {
        Modes::One => amps.copy_from_slice(m.as_slice()),
        Modes::Two => {
            for r in 0..2 * n {
                let (level, k) = (r / n, r % n);
                for other in 0..n {
                    let i = match axis {
                        Axis::X => level * n * n + k * n + other,
                        Axis::Y => level * n * n + other * n + k,
                    };
                    amps[i] = m[(r, other)];
                }
            }
        }
    }
    finish(template, amps)
}

/// Multiplies column j (Fock level j of the spectator mode) by e^(−ijt).
fn spectator_phase(m: &mut DMatrix<Complex64>, modes: Modes, t: f64) {
    if modes == Modes::Two {
        for (j, mut col) in m.column_iter_mut().enumerate() {
            col *= Complex64::from_polar(1.0, -(j as f64) * t);
        }
    }
}

/// Propagates a state under a constant [`AxisHamiltonian`] whose
/// eigendecomposition is `spectral`.
pub fn evolve_axis(spectral: &Spectral, axis: Axis, t: f64, psi: &FockState) -> Result<FockState> {
    check_duration(t)?;
    psi.modes().check_axis(axis)?;
    if spectral.dimension() != 2 * psi.cutoff() {
        return Err(Error::ShapeMismatch("propagator does not match the state cutoff".into()));
    }
    let mut m = spectral.apply(t, &gather_axis(psi, axis));
    spectator_phase(&mut m, psi.modes(), t);
    scatter_axis(psi, axis, &m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RampShape {
    /// δ(t) = δ0 + (δτ − δ0)·t/τ.
    Linear,
    /// δ(t) = δ0 + (δτ − δ0)·(1 − cos(πt/τ))/2.
    Cosine,
}

/// Detuning sweep δ0 → δτ over `duration` (units of ν and 1/ν).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RampSpec {
    pub delta_start: f64,
    pub delta_end: f64,
    pub duration: f64,
    /// Initial number of piecewise-constant steps.
    pub steps: usize,
    pub shape: RampShape,
}

pub const MIN_RAMP_STEPS: usize = 100;

impl RampSpec {
    pub fn linear(delta_start: f64, delta_end: f64, duration: f64, steps: usize) -> Self {
        RampSpec {
            delta_start,
            delta_end,
            duration,
            steps,
            shape: RampShape::Linear,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.delta_start.is_finite() || !self.delta_end.is_finite() {
            return Err(Error::invalid("delta", "ramp endpoints must be finite"));
        }
        check_duration(self.duration)?;
        if self.steps < MIN_RAMP_STEPS {
            return Err(Error::invalid(
                "steps",
                format!("ramps need at least {MIN_RAMP_STEPS} steps, got {}", self.steps),
            ));
        }
        Ok(())
    }

    pub fn detuning(&self, t: f64) -> f64 {
        let s = if self.duration > 0.0 { t / self.duration } else { 1.0 };
        let f = match self.shape {
            RampShape::Linear => s,
            RampShape::Cosine => 0.5 * (1.0 - (std::f64::consts::PI * s).cos()),
        };
        self.delta_start + (self.delta_end - self.delta_start) * f
    }

    /// max |dδ/dt|.
    pub fn max_rate(&self) -> f64 {
        if self.duration == 0.0 {
            return 0.0;
        }
        let slope = (self.delta_end - self.delta_start).abs() / self.duration;
        match self.shape {
            RampShape::Linear => slope,
            RampShape::Cosine => 0.5 * std::f64::consts::PI * slope,
        }
    }

    /// max|dδ/dt| / Ω², which reduces to |δ0 − δτ|/(Ω²τ) for linear ramps.
    /// Adiabatic following needs this ≪ 1.
    pub fn adiabaticity(&self, omega: f64) -> f64 {
        if self.duration == 0.0 {
            return 0.0;
        }
        self.max_rate() / (omega * omega)
    }
}

/// Step-doubling policy for [`evolve_ramp`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePolicy {
    /// Largest infidelity allowed between N and 2N steps.
    pub tolerance: f64,
    /// How many times N may be doubled before giving up.
    pub max_doublings: u32,
}

impl Default for ConvergencePolicy {
    fn default() -> Self {
        ConvergencePolicy {
            tolerance: 1e-8,
            max_doublings: 5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RampOutcome {
    pub state: FockState,
    /// Step count of the returned state.
    pub steps: usize,
    /// Infidelity between the returned state and the one with half the steps.
    pub doubling_infidelity: f64,
    pub adiabaticity: f64,
}

/// Propagates through a detuning ramp with piecewise-constant midpoint
/// exponentials; `params.delta` is ignored. The step count is doubled until
/// two successive results agree within the policy tolerance.
pub fn evolve_ramp(
    params: &HamiltonianParams,
    ramp: &RampSpec,
    psi: &FockState,
    ops: &OperatorSet,
) -> Result<RampOutcome> {
    evolve_ramp_with(params, ramp, psi, ops, &ConvergencePolicy::default())
}

pub fn evolve_ramp_with(
    params: &HamiltonianParams,
    ramp: &RampSpec,
    psi: &FockState,
    ops: &OperatorSet,
    policy: &ConvergencePolicy,
) -> Result<RampOutcome> {
    params.validate()?;
    ramp.validate()?;
    if ops.cutoff() != psi.cutoff() {
        return Err(Error::ShapeMismatch("operator set does not match the state cutoff".into()));
    }
    psi.modes().check_axis(params.direction.axis)?;
    let adiabaticity = ramp.adiabaticity(params.omega);
    if ramp.duration == 0.0 {
        return Ok(RampOutcome {
            state: psi.clone(),
            steps: 0,
            doubling_infidelity: 0.0,
            adiabaticity,
        });
    }
    let coupling = ops.displacement(params.direction.recoil(params.eta))
        * Complex64::new(0.5 * params.omega, 0.0);
    let base = AxisHamiltonian::from_coupling(params.direction.axis, ops, &coupling, 0.0);
    let stepper = RampStepper {
        h0: base.block(),
        cutoff: ops.cutoff(),
        axis: params.direction.axis,
        ramp,
    };
    let mut steps = ramp.steps;
    let mut coarse = stepper.run(psi, steps)?;
    let mut infidelity = f64::INFINITY;
    for _ in 0..=policy.max_doublings {
        let fine = stepper.run(psi, 2 * steps)?;
        infidelity = 1.0 - coarse.fidelity(&fine)?;
        steps *= 2;
        if infidelity.abs() < policy.tolerance {
            return Ok(RampOutcome {
                state: fine,
                steps,
                doubling_infidelity: infidelity.max(0.0),
                adiabaticity,
            });
        }
        coarse = fine;
    }
    Err(Error::Convergence {
        steps: steps / 2,
        doubled: steps,
        infidelity,
        limit: policy.tolerance,
    })
}

struct RampStepper<'a> {
    h0: &'a DMatrix<Complex64>,
    cutoff: usize,
    axis: Axis,
    ramp: &'a RampSpec,
}

impl RampStepper<'_> {
    fn run(&self, psi: &FockState, steps: usize) -> Result<FockState> {
        let dt = self.ramp.duration / steps as f64;
        let mut m = gather_axis(psi, self.axis);
        let n = self.cutoff;
        for k in 0..steps {
            let delta = self.ramp.detuning((k as f64 + 0.5) * dt);
            // H(δ) = H(0) + δ·diag(+½ on g, −½ on e)
            let matvec = |v: &DVector<Complex64>| {
                let mut out = self.h0 * v;
                for i in 0..2 * n {
                    let shift = if i < n { 0.5 * delta } else { -0.5 * delta };
                    out[i] += v[i] * shift;
                }
                out
            };
            for mut col in m.column_iter_mut() {
                let v = col.clone_owned();
                col.copy_from(&krylov_expm(&matvec, &v, dt, 0)?);
            }
        }
        spectator_phase(&mut m, psi.modes(), self.ramp.duration);
        scatter_axis(psi, self.axis, &m)
    }
}

/// exp(−iH·dt)v by Lanczos with full reorthogonalization. Falls back to
/// two half steps when the Krylov space cannot reach the tolerance.
fn krylov_expm(
    matvec: &dyn Fn(&DVector<Complex64>) -> DVector<Complex64>,
    v: &DVector<Complex64>,
    dt: f64,
    depth: u32,
) -> Result<DVector<Complex64>> {
    let norm = v.norm();
    if norm == 0.0 {
        return Ok(v.clone());
    }
    let dim = v.len();
    let max_dim = KRYLOV_MAX_DIM.min(dim);
    let mut basis: Vec<DVector<Complex64>> = vec![v / Complex64::new(norm, 0.0)];
    let mut diag: Vec<f64> = Vec::new();
    let mut off: Vec<f64> = Vec::new();
    loop {
        let j = basis.len() - 1;
        let mut w = matvec(&basis[j]);
        diag.push(basis[j].dotc(&w).re);
        for _ in 0..2 {
            for b in &basis {
                let c = b.dotc(&w);
                w -= b * c;
            }
        }
        let beta = w.norm();
        let m = basis.len();
        let small = small_expm(&diag, &off, dt);
        // Residual estimate: β_m · |[exp(−iT dt) e1]_m|.
        let estimate = beta * small[m - 1].norm();
        let exhausted = beta <= 1e-14 * norm.max(1.0);
        if exhausted || estimate * norm < KRYLOV_TOL {
            let mut out = DVector::zeros(dim);
            for (b, c) in basis.iter().zip(small.iter()) {
                out += b * *c;
            }
            return Ok(out * Complex64::new(norm, 0.0));
        }
        if m == max_dim {
            if depth >= MAX_SUBSTEP_DEPTH {
                return Err(Error::Integrator(format!(
                    "Krylov exponential failed to converge (estimate {estimate:e} at dt {dt:e})"
                )));
            }
            let half = krylov_expm(matvec, v, 0.5 * dt, depth + 1)?;
            return krylov_expm(matvec, &half, 0.5 * dt, depth + 1);
        }
        off.push(beta);
        basis.push(w / Complex64::new(beta, 0.0));
    }
}

/// First column of exp(−iT·dt) for the real symmetric tridiagonal T.
fn small_expm(diag: &[f64], off: &[f64], dt: f64) -> Vec<Complex64> {
    let m = diag.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = diag[i];
        if i + 1 < m {
            t[(i, i + 1)] = off[i];
            t[(i + 1, i)] = off[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    (0..m)
        .map(|r| {
            (0..m)
                .map(|k| {
                    let q = eig.eigenvectors[(r, k)] * eig.eigenvectors[(0, k)];
                    Complex64::from_polar(q, -eig.eigenvalues[k] * dt)
                })
                .sum()
        })
        .collect()
}
