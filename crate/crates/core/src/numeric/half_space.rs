use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::OperatorSet;
use crate::error::{Error, Result};
use crate::states::{FockState, InternalLevel, Modes};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// Internal rotation exp(−i·angle·σx ⊗ Θ) where Θ selects one side of
/// x̃ = `boundary` in the eigenbasis of x̂ = a + a†.
///
/// With `width = 0` Θ is a hard projector; otherwise each position
/// eigenvector gets the weight ½(1 + tanh(±(x_k − boundary)/width)).
#[derive(Debug, Clone)]
pub struct HalfSpaceRotation {
    /// V cos(angle·Θ) V†
    cos_part: DMatrix<Complex64>,
    /// V sin(angle·Θ) V†
    sin_part: DMatrix<Complex64>,
}

impl HalfSpaceRotation {
    pub fn new(angle: f64, side: Side, boundary: f64, width: f64, ops: &OperatorSet) -> Result<Self> {
        if !angle.is_finite() || !boundary.is_finite() {
            return Err(Error::invalid("angle", "rotation angle and boundary must be finite"));
        }
        if !(width >= 0.0) || !width.is_finite() {
            return Err(Error::invalid("width", "smoothing width must be finite and ≥ 0"));
        }
        let eig = SymmetricEigen::new(ops.position());
        let weights = eig.eigenvalues.map(|x| {
            let signed = match side {
                Side::Right => x - boundary,
                Side::Left => boundary - x,
            };
            if width == 0.0 {
                if signed > 0.0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                0.5 * (1.0 + (signed / width).tanh())
            }
        });
        let v = &eig.eigenvectors;
        let spectral = |f: &dyn Fn(f64) -> f64| {
            let d = weights.map(|w| Complex64::new(f(angle * w), 0.0));
            v * DMatrix::from_diagonal(&d) * v.adjoint()
        };
        Ok(HalfSpaceRotation {
            cos_part: spectral(&f64::cos),
            sin_part: spectral(&f64::sin),
        })
    }

    /// Dense matrix on the one-mode layout (g block first).
    pub fn matrix(&self) -> DMatrix<Complex64> {
        let n = self.cos_part.nrows();
        let mut u = DMatrix::zeros(2 * n, 2 * n);
        let minus_i_sin = &self.sin_part * Complex64::new(0.0, -1.0);
        u.view_mut((0, 0), (n, n)).copy_from(&self.cos_part);
        u.view_mut((n, n), (n, n)).copy_from(&self.cos_part);
        u.view_mut((0, n), (n, n)).copy_from(&minus_i_sin);
        u.view_mut((n, 0), (n, n)).copy_from(&minus_i_sin);
        u
    }

    /// Applies the rotation to a one-mode state.
    pub fn apply(&self, psi: &FockState) -> Result<FockState> {
        if psi.modes() != Modes::One || psi.cutoff() != self.cos_part.nrows() {
            return Err(Error::ShapeMismatch(
                "half-space rotation needs a one-mode state of matching cutoff".into(),
            ));
        }
        let n = psi.cutoff();
        let g = DMatrix::from_column_slice(n, 1, psi.level_block(InternalLevel::Ground));
        let e = DMatrix::from_column_slice(n, 1, psi.level_block(InternalLevel::Excited));
        let mi = Complex64::new(0.0, -1.0);
        let new_g = &self.cos_part * &g + &self.sin_part * &e * mi;
        let new_e = &self.cos_part * &e + &self.sin_part * &g * mi;
        let mut out = psi.clone();
        out.level_block_mut(InternalLevel::Ground).copy_from_slice(new_g.as_slice());
        out.level_block_mut(InternalLevel::Excited).copy_from_slice(new_e.as_slice());
        Ok(out)
    }
}

/// Projects a state onto one side of `boundary` in the x̃ quadrature of
/// `axis` (hard step in the position eigenbasis).
pub fn project_half_space(
    psi: &FockState,
    axis: crate::states::Axis,
    side: Side,
    boundary: f64,
    ops: &OperatorSet,
) -> Result<FockState> {
    psi.modes().check_axis(axis)?;
    if ops.cutoff() != psi.cutoff() {
        return Err(Error::ShapeMismatch("operator set does not match the state cutoff".into()));
    }
    let eig = SymmetricEigen::new(ops.position());
    let step = eig.eigenvalues.map(|x| {
        let inside = match side {
            Side::Right => x > boundary,
            Side::Left => x < boundary,
        };
        Complex64::new(if inside { 1.0 } else { 0.0 }, 0.0)
    });
    let v = &eig.eigenvectors;
    let single = v * DMatrix::from_diagonal(&step) * v.adjoint();
    // Gathered rows are (level, n_axis), level-major.
    let n = ops.cutoff();
    let mut projector = DMatrix::zeros(2 * n, 2 * n);
    projector.view_mut((0, 0), (n, n)).copy_from(&single);
    projector.view_mut((n, n), (n, n)).copy_from(&single);
    let m = super::propagate::gather_axis(psi, axis);
    super::propagate::scatter_axis(psi, axis, &(projector * m))
}

/// Dense matrix of [`HalfSpaceRotation`] with a hard step.
pub fn half_space_rotation(angle: f64, side: Side, boundary: f64, ops: &OperatorSet) -> Result<DMatrix<Complex64>> {
    Ok(HalfSpaceRotation::new(angle, side, boundary, 0.0, ops)?.matrix())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic;
    use crate::states::{QuantumState, SuperpositionState};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unitarity_error(u: &DMatrix<Complex64>) -> f64 {
        let id = DMatrix::<Complex64>::identity(u.nrows(), u.ncols());
        (u.adjoint() * u - id).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn projection_splits_separated_packets() {
        use crate::states::{Amplitudes, Axis, CoherentComponent};
        let n = 40;
        let ops = OperatorSet::new(n).unwrap();
        let one = c(1.0, 0.0);
        let s = SuperpositionState::new(
            Modes::Two,
            vec![
                CoherentComponent::new(InternalLevel::Ground, one, Amplitudes::two(c(2.5, 0.0), c(0.0, -1.0))),
                CoherentComponent::new(InternalLevel::Ground, one, Amplitudes::two(c(-2.5, 0.0), c(0.0, -1.0))),
            ],
        )
        .unwrap()
        .normalized()
        .unwrap();
        let psi = FockState::from_superposition(&s, n).unwrap();
        let right = project_half_space(&psi, Axis::X, Side::Right, 0.0, &ops).unwrap();
        let expected = FockState::from_superposition(&s.scaled(c(1.0, 0.0)), n).unwrap();
        assert!((right.norm_sqr() - 0.5).abs() < 1e-4);
        let left = project_half_space(&psi, Axis::X, Side::Left, 0.0, &ops).unwrap();
        assert!((left.plus(&right).unwrap().fidelity(&expected).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn zero_angle_is_identity() {
        let ops = OperatorSet::new(20).unwrap();
        let u = half_space_rotation(0.0, Side::Right, 0.0, &ops).unwrap();
        assert!((u - DMatrix::identity(40, 40)).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn rotation_is_unitary() {
        let ops = OperatorSet::new(60).unwrap();
        for (side, width) in [(Side::Right, 0.0), (Side::Left, 0.0), (Side::Right, 0.7)] {
            let r = HalfSpaceRotation::new(1.3, side, 2.5, width, &ops).unwrap();
            assert!(unitarity_error(&r.matrix()) < 1e-10);
        }
    }

    #[test]
    fn packet_inside_selected_half_is_rotated() {
        let eta = 2.5;
        let n = 80;
        let ops = OperatorSet::new(n).unwrap();
        let angle = 0.8;
        let packet = SuperpositionState::coherent(InternalLevel::Excited, c(eta, 0.0));
        let psi = FockState::from_superposition(&packet, n).unwrap();
        let rot = HalfSpaceRotation::new(angle, Side::Right, eta, 0.0, &ops).unwrap();

        let expected = analytic::rotate_component(&packet, InternalLevel::Excited, angle);
        let expected = FockState::from_superposition(&expected, n).unwrap();
        // Packet centred at x̃ = 2η = 5, boundary at 2.5.
        assert!(rot.apply(&psi).unwrap().fidelity(&expected).unwrap() >= 0.99);

        let far = SuperpositionState::coherent(InternalLevel::Excited, c(0.0, 0.0));
        let psi = FockState::from_superposition(&far, n).unwrap();
        assert!(rot.apply(&psi).unwrap().fidelity(&psi).unwrap() >= 0.99);
    }
}
