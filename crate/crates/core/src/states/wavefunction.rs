//! Position and momentum wavefunctions in scaled units.
//!
//! Both backends evaluate observables through this module so that they share
//! one phase convention: ⟨p̃|n⟩ = (−i)^n h_n(p̃) and ⟨x̃|n⟩ = h_n(x̃), where
//! h_n(u) = (2^n n! √(2π))^(−1/2) e^(−u²/4) H_n(u/√2) is normalized to
//! ∫|h_n|² du = 1.

use nalgebra::DMatrix;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    /// x̃ = x/x0.
    Position,
    /// p̃ = p/p0.
    Momentum,
}

/// (2π)^(−1/4)
const GAUSS_NORM: f64 = 0.631_618_777_746_064_7;

/// Matrix of ψ_n(u_i), rows indexed by grid point and columns by n < `count`.
pub fn fock_wavefunctions(quadrature: Quadrature, count: usize, points: &[f64]) -> DMatrix<Complex64> {
    let mut out = DMatrix::<Complex64>::zeros(points.len(), count);
    if count == 0 {
        return out;
    }
    // Normalized recurrence in X = u/√2:
    //   φ_{n+1} = √(2/(n+1)) X φ_n − √(n/(n+1)) φ_{n−1}
    for (i, &u) in points.iter().enumerate() {
        let x = u / std::f64::consts::SQRT_2;
        let mut prev = 0.0;
        let mut cur = GAUSS_NORM * (-0.25 * u * u).exp();
        for n in 0..count {
            out[(i, n)] = Complex64::new(cur, 0.0) * phase(quadrature, n);
            let nf = n as f64;
            let next = (2.0 / (nf + 1.0)).sqrt() * x * cur - (nf / (nf + 1.0)).sqrt() * prev;
            prev = cur;
            cur = next;
        }
    }
    out
}

fn phase(quadrature: Quadrature, n: usize) -> Complex64 {
    match quadrature {
        Quadrature::Position => Complex64::new(1.0, 0.0),
        Quadrature::Momentum => match n % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, -1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, 1.0),
        },
    }
}

/// ⟨u|α⟩ for a coherent state, in the same convention as
/// [`fock_wavefunctions`].
pub fn coherent_wavefunction(quadrature: Quadrature, alpha: Complex64, u: f64) -> Complex64 {
    let exponent = match quadrature {
        Quadrature::Position => -0.25 * u * u + alpha * u - 0.5 * alpha * alpha,
        Quadrature::Momentum => {
            -0.25 * u * u - Complex64::new(0.0, 1.0) * alpha * u + 0.5 * alpha * alpha
        }
    } - 0.5 * alpha.norm_sqr();
    exponent.exp() * GAUSS_NORM
}
