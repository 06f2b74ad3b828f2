use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Single-mode ladder operators on the truncated Fock space {|0⟩ … |N−1⟩}.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    cutoff: usize,
    annihilation: DMatrix<Complex64>,
}

impl OperatorSet {
    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff < 2 {
            return Err(Error::invalid("cutoff", "operator matrices need N ≥ 2"));
        }
        let mut a = DMatrix::zeros(cutoff, cutoff);
        for n in 1..cutoff {
            a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
        }
        Ok(OperatorSet {
            cutoff,
            annihilation: a,
        })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn annihilation(&self) -> &DMatrix<Complex64> {
        &self.annihilation
    }

    pub fn creation(&self) -> DMatrix<Complex64> {
        self.annihilation.adjoint()
    }

    pub fn number(&self) -> DMatrix<Complex64> {
        DMatrix::from_diagonal(&self.number_diagonal().map(|n| Complex64::new(n, 0.0)))
    }

    pub fn number_diagonal(&self) -> DVector<f64> {
        DVector::from_fn(self.cutoff, |n, _| n as f64)
    }

    /// x̂ = a + a†, so that ⟨α|x̂|α⟩ = 2 Re α.
    pub fn position(&self) -> DMatrix<Complex64> {
        &self.annihilation + self.annihilation.adjoint()
    }

    /// D(β) = exp(βa† − β*a), exponentiated through the eigenbasis of the
    /// Hermitian generator i(βa† − β*a).
    pub fn displacement(&self, beta: Complex64) -> DMatrix<Complex64> {
        let generator = self.creation() * beta - &self.annihilation * beta.conj();
        let hermitian = generator * Complex64::new(0.0, 1.0);
        let eig = SymmetricEigen::new(hermitian);
        let phases = eig.eigenvalues.map(|l| Complex64::from_polar(1.0, -l));
        let v = &eig.eigenvectors;
        v * DMatrix::from_diagonal(&phases) * v.adjoint()
    }
}

/// σ₊ = |e⟩⟨g| in the (g, e) ordering.
pub fn sigma_plus() -> Matrix2<Complex64> {
    Matrix2::new(ZERO, ZERO, ONE, ZERO)
}

pub fn sigma_minus() -> Matrix2<Complex64> {
    sigma_plus().adjoint()
}

/// σz = |e⟩⟨e| − |g⟩⟨g|.
pub fn sigma_z() -> Matrix2<Complex64> {
    Matrix2::new(-ONE, ZERO, ZERO, ONE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{fock_expand, CoherentComponent, InternalLevel};

    #[test]
    fn ladder_elements() {
        let ops = OperatorSet::new(6).unwrap();
        assert_eq!(ops.creation()[(1, 0)], ONE);
        let comm = ops.annihilation() * ops.creation() - ops.creation() * ops.annihilation();
        for i in 0..5 {
            for j in 0..5 {
                let expected = if i == j { ONE } else { ZERO };
                assert!((comm[(i, j)] - expected).norm() < 1e-14);
            }
        }
        assert!(OperatorSet::new(1).is_err());
    }

    #[test]
    fn displacement_vacuum_element() {
        let ops = OperatorSet::new(40).unwrap();
        let beta = Complex64::new(0.3, -0.8);
        let d = ops.displacement(beta);
        assert!((d[(0, 0)].re - (-0.5 * beta.norm_sqr()).exp()).abs() < 1e-12);
    }

    #[test]
    fn displacement_column_is_coherent_state() {
        let ops = OperatorSet::new(60).unwrap();
        let beta = Complex64::new(0.0, 0.5);
        let d = ops.displacement(beta);
        let c = CoherentComponent::one_mode(InternalLevel::Ground, ONE, beta);
        let expected = fock_expand(&c, 60).unwrap();
        for n in 0..60 {
            assert!((d[(n, 0)] - expected.amplitudes()[n]).norm() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn displacement_inverse_away_from_cutoff() {
        let n = 60;
        let ops = OperatorSet::new(n).unwrap();
        let beta = Complex64::new(0.4, 1.1);
        let prod = ops.displacement(beta) * ops.displacement(-beta);
        let keep = n - n / 10;
        for i in 0..keep {
            for j in 0..keep {
                let expected = if i == j { ONE } else { ZERO };
                assert!((prod[(i, j)] - expected).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn position_expectation() {
        let ops = OperatorSet::new(50).unwrap();
        let alpha = Complex64::new(1.2, 0.4);
        let c = CoherentComponent::one_mode(InternalLevel::Ground, ONE, alpha);
        let v = fock_expand(&c, 50).unwrap().level_block(InternalLevel::Ground).to_vec();
        let v = DVector::from_vec(v);
        let x = v.dotc(&(ops.position() * &v));
        assert!((x.re - 2.4).abs() < 1e-10);
    }
}
