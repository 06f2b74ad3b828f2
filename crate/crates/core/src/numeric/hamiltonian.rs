use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::OperatorSet;
use crate::analytic::Direction;
use crate::error::{Error, Result};
use crate::states::{Axis, Modes};

/// Parameters of one laser configuration, all in units of ν.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianParams {
    pub omega: f64,
    pub delta: f64,
    pub eta: f64,
    pub direction: Direction,
}

impl HamiltonianParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega >= 0.0) || !self.omega.is_finite() {
            return Err(Error::invalid("omega", "must be finite and non-negative"));
        }
        if !self.delta.is_finite() {
            return Err(Error::invalid("delta", "must be finite"));
        }
        if !(self.eta > 0.0) || !self.eta.is_finite() {
            return Err(Error::invalid("eta", "must be finite and positive"));
        }
        Ok(())
    }
}

/// H/ν = n̂ − (δ/2)σz + (Ω/2)(σ₊D(s·iη) + σ₋D(−s·iη)) restricted to the
/// internal levels and the mode along the beam. In two dimensions the full
/// Hamiltonian is `axis ⊗ 1 + 1 ⊗ n̂_other`, and the two terms commute.
#[derive(Debug, Clone)]
pub struct AxisHamiltonian {
    axis: Axis,
    cutoff: usize,
    /// (2N × 2N) over (level, n_axis), level-major.
    block: DMatrix<Complex64>,
}

impl AxisHamiltonian {
    pub fn new(params: &HamiltonianParams, ops: &OperatorSet) -> Result<Self> {
        params.validate()?;
        let coupling = ops.displacement(params.direction.recoil(params.eta))
            * Complex64::new(0.5 * params.omega, 0.0);
        Ok(Self::from_coupling(params.direction.axis, ops, &coupling, params.delta))
    }

    /// Builds the block from a precomputed (Ω/2)·D(s·iη).
    pub(crate) fn from_coupling(
        axis: Axis,
        ops: &OperatorSet,
        coupling: &DMatrix<Complex64>,
        delta: f64,
    ) -> Self {
        let n = ops.cutoff();
        let mut block = DMatrix::zeros(2 * n, 2 * n);
        for k in 0..n {
            block[(k, k)] = Complex64::new(k as f64 + 0.5 * delta, 0.0);
            block[(n + k, n + k)] = Complex64::new(k as f64 - 0.5 * delta, 0.0);
        }
        block.view_mut((n, 0), (n, n)).copy_from(coupling);
        block.view_mut((0, n), (n, n)).copy_from(&coupling.adjoint());
        AxisHamiltonian {
            axis,
            cutoff: n,
            block,
        }
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn block(&self) -> &DMatrix<Complex64> {
        &self.block
    }

    /// Full Hamiltonian on the state-vector layout of a `modes` state.
    pub fn to_dense(&self, modes: Modes) -> Result<DMatrix<Complex64>> {
        modes.check_axis(self.axis)?;
        let n = self.cutoff;
        match modes {
            Modes::One => Ok(self.block.clone()),
            Modes::Two => {
                let dim = 2 * n * n;
                let mut h = DMatrix::zeros(dim, dim);
                // Basis index: level·N² + n_x·N + n_y.
                let index = |level: usize, axis_n: usize, other_n: usize| match self.axis {
                    Axis::X => level * n * n + axis_n * n + other_n,
                    Axis::Y => level * n * n + other_n * n + axis_n,
                };
                for other in 0..n {
                    for r in 0..2 * n {
                        for c in 0..2 * n {
                            let v = self.block[(r, c)];
                            if v != Complex64::new(0.0, 0.0) {
                                h[(index(r / n, r % n, other), index(c / n, c % n, other))] += v;
                            }
                        }
                    }
                    for level in 0..2 {
                        for k in 0..n {
                            let i = index(level, k, other);
                            h[(i, i)] += Complex64::new(other as f64, 0.0);
                        }
                    }
                }
                Ok(h)
            }
        }
    }
}

/// Dense Hamiltonian for a `modes` state; see [`AxisHamiltonian`].
pub fn build_hamiltonian(params: &HamiltonianParams, ops: &OperatorSet, modes: Modes) -> Result<DMatrix<Complex64>> {
    AxisHamiltonian::new(params, ops)?.to_dense(modes)
}
