use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::states::{FockState, InternalLevel, Modes, QuantumState};

/// e^(−i n̂ t) with n̂ the total phonon number.
pub fn free_evolve(psi: &FockState, t: f64) -> Result<FockState> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::invalid("t", format!("wait time must be finite and ≥ 0, got {t}")));
    }
    let n = psi.cutoff();
    let block = psi.block_len();
    let mut out = psi.clone();
    for (i, z) in out.amplitudes_mut().iter_mut().enumerate() {
        let k = i % block;
        let quanta = match psi.modes() {
            Modes::One => k,
            Modes::Two => k / n + k % n,
        };
        *z *= Complex64::from_polar(1.0, -(quanta as f64) * t);
    }
    Ok(out)
}

/// |g⟩ → −i|e⟩, |e⟩ → −i|g⟩ with the motion untouched.
pub fn carrier_flip(psi: &FockState) -> FockState {
    let mut out = psi.clone();
    let minus_i = Complex64::new(0.0, -1.0);
    let g: Vec<Complex64> = psi.level_block(InternalLevel::Ground).to_vec();
    let e: Vec<Complex64> = psi.level_block(InternalLevel::Excited).to_vec();
    for (dst, v) in out.level_block_mut(InternalLevel::Ground).iter_mut().zip(&e) {
        *dst = v * minus_i;
    }
    for (dst, v) in out.level_block_mut(InternalLevel::Excited).iter_mut().zip(&g) {
        *dst = v * minus_i;
    }
    out
}

pub fn level_probabilities(psi: &FockState) -> Result<[f64; 2]> {
    let total = psi.norm_sqr();
    if !(total > 0.0) {
        return Err(Error::ZeroNorm);
    }
    Ok(InternalLevel::ALL.map(|l| psi.level_population(l) / total))
}

/// Ideal projective measurement; returns the probability and the
/// renormalized projected state.
pub fn measure_internal(psi: &FockState, outcome: InternalLevel) -> Result<(f64, FockState)> {
    let [pg, pe] = level_probabilities(psi)?;
    let probability = match outcome {
        InternalLevel::Ground => pg,
        InternalLevel::Excited => pe,
    };
    if !(probability > 0.0) {
        return Err(Error::ZeroProbability {
            level: outcome,
            probability,
        });
    }
    let projected = psi.without_level(outcome.flipped()).normalized()?;
    Ok((probability, projected))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic;
    use crate::states::{Amplitudes, CoherentComponent, SuperpositionState};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn operations_match_analytic_backend() {
        let s = SuperpositionState::new(
            Modes::Two,
            vec![
                CoherentComponent::new(InternalLevel::Ground, c(0.6, 0.0), Amplitudes::two(c(1.0, 0.2), c(0.0, -1.0))),
                CoherentComponent::new(InternalLevel::Excited, c(0.0, 0.8), Amplitudes::two(c(-0.4, 0.0), c(0.5, 0.5))),
            ],
        )
        .unwrap()
        .normalized()
        .unwrap();
        let n = 30;
        let fock = |s: &SuperpositionState| FockState::from_superposition(s, n).unwrap();
        let psi = fock(&s);

        let waited = free_evolve(&psi, 1.1).unwrap();
        let expected = fock(&analytic::free_evolve(&s, 1.1).unwrap());
        assert!((waited.amplitudes() - expected.amplitudes()).norm() < 1e-12);

        let flipped = carrier_flip(&psi);
        let expected = fock(&analytic::carrier_flip(&s));
        assert!((flipped.amplitudes() - expected.amplitudes()).norm() < 1e-14);

        let [pg, pe] = level_probabilities(&psi).unwrap();
        let [ag, ae] = analytic::level_probabilities(&s).unwrap();
        assert!((pg - ag).abs() < 1e-10 && (pe - ae).abs() < 1e-10);
        assert!((pg + pe - 1.0).abs() < 1e-12);

        let (p, post) = measure_internal(&psi, InternalLevel::Excited).unwrap();
        assert!((p - pe).abs() < 1e-15);
        assert_eq!(post.level_population(InternalLevel::Ground), 0.0);
    }

    #[test]
    fn impossible_outcome() {
        let psi = FockState::ground(Modes::One, 5).unwrap();
        assert!(matches!(
            measure_internal(&psi, InternalLevel::Excited),
            Err(Error::ZeroProbability { .. })
        ));
    }
}
