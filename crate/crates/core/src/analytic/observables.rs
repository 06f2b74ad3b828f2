use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::states::wavefunction::{coherent_wavefunction, Quadrature};
use crate::states::{
    AxisQuantity, DensityGrid, GridAxis, GridKind, InternalLevel, Modes, SuperpositionState,
};

pub(crate) fn momentum_axes(points: &[f64]) -> Result<(GridAxis, GridAxis)> {
    Ok((
        GridAxis::new("p", AxisQuantity::Momentum, points.to_vec())?,
        GridAxis::new("p_prime", AxisQuantity::Momentum, points.to_vec())?,
    ))
}

pub(crate) fn position_axes(xs: &[f64], ys: &[f64]) -> Result<(GridAxis, GridAxis)> {
    Ok((
        GridAxis::new("x", AxisQuantity::Position, xs.to_vec())?,
        GridAxis::new("y", AxisQuantity::Position, ys.to_vec())?,
    ))
}

/// ρ(p̃, p̃′) = Σ_level φ_level(p̃) φ_level(p̃′)* with
/// φ_level(p̃) = Σ_j c_j ⟨p̃|α_j⟩ over the components at that level.
pub fn momentum_density(state: &SuperpositionState, points: &[f64]) -> Result<DensityGrid> {
    if state.modes() != Modes::One {
        return Err(Error::ShapeMismatch("momentum density needs a one-mode state".into()));
    }
    let (rows, cols) = momentum_axes(points)?;
    let n = points.len();
    let mut values = vec![Complex64::new(0.0, 0.0); n * n];
    for level in InternalLevel::ALL {
        let branch = state.branch(level);
        if branch.is_empty() {
            continue;
        }
        let phi: Vec<Complex64> = points
            .iter()
            .map(|&p| {
                branch
                    .components()
                    .iter()
                    .map(|c| c.coeff * coherent_wavefunction(Quadrature::Momentum, c.alpha.x, p))
                    .sum()
            })
            .collect();
        accumulate_outer(&mut values, &phi, 1.0);
    }
    DensityGrid::new(GridKind::MomentumCoherence, rows, cols, values)
}

/// Σ_i w_i ρ_i(p̃, p̃′) for a classical ensemble of pure states.
pub fn mixture_momentum_density(parts: &[(f64, SuperpositionState)], points: &[f64]) -> Result<DensityGrid> {
    let grids = parts
        .iter()
        .map(|(w, s)| Ok((*w, momentum_density(s, points)?)))
        .collect::<Result<Vec<_>>>()?;
    DensityGrid::weighted_sum(&grids)
}

/// P(x̃, ỹ) summed over internal levels.
pub fn position_density_2d(state: &SuperpositionState, xs: &[f64], ys: &[f64]) -> Result<DensityGrid> {
    if state.modes() != Modes::Two {
        return Err(Error::ShapeMismatch("position density needs a two-mode state".into()));
    }
    let (rows, cols) = position_axes(xs, ys)?;
    let mut values = vec![Complex64::new(0.0, 0.0); xs.len() * ys.len()];
    for level in InternalLevel::ALL {
        let branch = state.branch(level);
        if branch.is_empty() {
            continue;
        }
        let mut amp = vec![Complex64::new(0.0, 0.0); xs.len() * ys.len()];
        for comp in branch.components() {
            let ay = comp.alpha.y.expect("two-mode component");
            let wy: Vec<Complex64> = ys
                .iter()
                .map(|&y| coherent_wavefunction(Quadrature::Position, ay, y))
                .collect();
            for (i, &x) in xs.iter().enumerate() {
                let wx = comp.coeff * coherent_wavefunction(Quadrature::Position, comp.alpha.x, x);
                for (j, w) in wy.iter().enumerate() {
                    amp[i * ys.len() + j] += wx * w;
                }
            }
        }
        for (v, a) in values.iter_mut().zip(&amp) {
            *v += a.norm_sqr();
        }
    }
    DensityGrid::new(GridKind::PositionProbability, rows, cols, values)
}

/// values[i, j] += w·φ_i·φ_j*
pub(crate) fn accumulate_outer(values: &mut [Complex64], phi: &[Complex64], weight: f64) {
    let n = phi.len();
    for i in 0..n {
        let pi = phi[i] * weight;
        for j in 0..n {
            values[i * n + j] += pi * phi[j].conj();
        }
    }
}
