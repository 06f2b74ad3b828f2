use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::analytic::{accumulate_outer, momentum_axes, position_axes};
use crate::error::{Error, Result};
use crate::states::wavefunction::{fock_wavefunctions, Quadrature};
use crate::states::{DensityGrid, FockState, GridKind, InternalLevel, Modes};

/// Grids coarser than this many points per unit of p̃ or x̃ get a warning
/// entry in their metadata.
const MIN_POINTS_PER_UNIT: f64 = 1.0;

fn coarse_warning(points: &[f64]) -> Option<String> {
    let spacing = points
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0, f64::max);
    (spacing > 1.0 / MIN_POINTS_PER_UNIT)
        .then(|| format!("grid spacing {spacing} exceeds one scaled unit"))
}

/// ρ(p̃, p̃′) = Σ_mn ψ_m(p̃) ρ_mn ψ_n(p̃′)* with internal levels traced out.
pub fn fock_to_momentum_grid(psi: &FockState, points: &[f64]) -> Result<DensityGrid> {
    if psi.modes() != Modes::One {
        return Err(Error::ShapeMismatch("momentum grid needs a one-mode state".into()));
    }
    let (rows, cols) = momentum_axes(points)?;
    let phi = fock_wavefunctions(Quadrature::Momentum, psi.cutoff(), points);
    let n = points.len();
    let mut values = vec![Complex64::new(0.0, 0.0); n * n];
    for level in InternalLevel::ALL {
        let block = DMatrix::from_column_slice(psi.cutoff(), 1, psi.level_block(level));
        let amp = &phi * block;
        accumulate_outer(&mut values, amp.as_slice(), 1.0);
    }
    let mut grid = DensityGrid::new(GridKind::MomentumCoherence, rows, cols, values)?;
    if let Some(w) = coarse_warning(points) {
        grid = grid.with_meta("warning", w);
    }
    Ok(grid)
}

/// P(x̃, ỹ) of a two-mode state, summed over internal levels.
pub fn position_density_2d_numeric(psi: &FockState, xs: &[f64], ys: &[f64]) -> Result<DensityGrid> {
    if psi.modes() != Modes::Two {
        return Err(Error::ShapeMismatch("position density needs a two-mode state".into()));
    }
    let (rows, cols) = position_axes(xs, ys)?;
    let n = psi.cutoff();
    let wx = fock_wavefunctions(Quadrature::Position, n, xs);
    let wy = fock_wavefunctions(Quadrature::Position, n, ys);
    let mut values = vec![Complex64::new(0.0, 0.0); xs.len() * ys.len()];
    for level in InternalLevel::ALL {
        // Row-major block c[n_x, n_y].
        let c = DMatrix::from_row_slice(n, n, psi.level_block(level));
        let amp = &wx * c * wy.transpose();
        for i in 0..xs.len() {
            for j in 0..ys.len() {
                values[i * ys.len() + j] += amp[(i, j)].norm_sqr();
            }
        }
    }
    let mut grid = DensityGrid::new(GridKind::PositionProbability, rows, cols, values)?;
    if let Some(w) = coarse_warning(xs).or_else(|| coarse_warning(ys)) {
        grid = grid.with_meta("warning", w);
    }
    Ok(grid)
}
