//! Reference computations shared by the integration and acceptance tests.
//! Everything here works in a plain Fock basis with dense matrices and does
//! not call into the library's propagators.

#![allow(dead_code)]

use ioncat::states::{InternalLevel, SuperpositionState};
use ioncat::Complex64;
use nalgebra::{DMatrix, DVector};

pub const ORACLE_CUTOFF: usize = 140;

pub fn coherent_vector(alpha: Complex64, cutoff: usize) -> DVector<Complex64> {
    let mut v = DVector::zeros(cutoff);
    let mut term = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 0..cutoff {
        v[n] = term;
        term *= alpha / ((n + 1) as f64).sqrt();
    }
    v
}

/// exp(i·shift·(a + a†)), which is the displacement D(i·shift).
pub fn imaginary_displacement(shift: f64, cutoff: usize) -> DMatrix<Complex64> {
    let mut x = DMatrix::<f64>::zeros(cutoff, cutoff);
    for n in 1..cutoff {
        let s = (n as f64).sqrt();
        x[(n - 1, n)] = s;
        x[(n, n - 1)] = s;
    }
    let eig = x.symmetric_eigen();
    let v = eig.eigenvectors.map(|r| Complex64::new(r, 0.0));
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from_polar(1.0, shift * l)));
    &v * phases * v.adjoint()
}

/// Ion state as a pair of motional wavefunctions.
#[derive(Clone, Debug)]
pub struct Spinor {
    pub ground: DVector<Complex64>,
    pub excited: DVector<Complex64>,
}

impl Spinor {
    pub fn from_state(state: &SuperpositionState, cutoff: usize) -> Spinor {
        let mut ground = DVector::zeros(cutoff);
        let mut excited = DVector::zeros(cutoff);
        for c in state.components() {
            let v = coherent_vector(c.alpha.x, cutoff) * c.coeff;
            match c.level {
                InternalLevel::Ground => ground += v,
                InternalLevel::Excited => excited += v,
            }
        }
        Spinor { ground, excited }
    }

    pub fn cutoff(&self) -> usize {
        self.ground.len()
    }

    pub fn wait(&self, t: f64) -> Spinor {
        let phase = |v: &DVector<Complex64>| {
            DVector::from_iterator(v.len(), v.iter().enumerate().map(|(n, a)| a * Complex64::from_polar(1.0, -(n as f64) * t)))
        };
        Spinor {
            ground: phase(&self.ground),
            excited: phase(&self.excited),
        }
    }

    /// Strong-excitation pulse of the given area along ±x (`sign` = ±1).
    pub fn pulse(&self, area: f64, sign: f64, eta: f64) -> Spinor {
        let a = Complex64::new((0.5 * area).cos(), 0.0);
        let b = Complex64::new(0.0, -(0.5 * area).sin());
        let up = imaginary_displacement(sign * eta, self.cutoff());
        let down = imaginary_displacement(-sign * eta, self.cutoff());
        Spinor {
            ground: &self.ground * a - down * &self.excited * b.conj(),
            excited: up * &self.ground * b + &self.excited * a.conj(),
        }
    }

    pub fn ground_population(&self) -> f64 {
        self.ground.norm_squared() / (self.ground.norm_squared() + self.excited.norm_squared())
    }
}

/// P_g after a quarter-period wait and π/2 pulses along −x then +x.
pub fn purity_oracle(input: &SuperpositionState, eta: f64) -> f64 {
    use std::f64::consts::FRAC_PI_2;
    Spinor::from_state(input, ORACLE_CUTOFF)
        .wait(FRAC_PI_2)
        .pulse(FRAC_PI_2, -1.0, eta)
        .pulse(FRAC_PI_2, 1.0, eta)
        .ground_population()
}

/// Largest coefficient mismatch between two superpositions after pairing
/// components with equal level and amplitude. Unpaired components count
/// with their full magnitude.
pub fn component_mismatch(actual: &SuperpositionState, expected: &SuperpositionState) -> f64 {
    let a = actual.merged(1e-12);
    let b = expected.merged(1e-12);
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for c in a.components() {
        let hit = b.components().iter().enumerate().position(|(k, d)| {
            !used[k] && d.level == c.level && c.alpha.distance(&d.alpha) < 1e-12
        });
        match hit {
            Some(k) => {
                used[k] = true;
                worst = worst.max((c.coeff - b.components()[k].coeff).norm());
            }
            None => worst = worst.max(c.coeff.norm()),
        }
    }
    for (k, d) in b.components().iter().enumerate() {
        if !used[k] {
            worst = worst.max(d.coeff.norm());
        }
    }
    worst
}
