use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::states::{Axis, CoherentComponent, InternalLevel, QuantumState, SuperpositionState};

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::invalid("t", format!("wait time must be finite and ≥ 0, got {t}")));
    }
    Ok(())
}

/// Trap evolution for time `t` on every mode: α → e^(−it)α. Internal
/// levels pick up no phase in the rotating frame.
pub fn free_evolve(state: &SuperpositionState, t: f64) -> Result<SuperpositionState> {
    check_time(t)?;
    let phase = Complex64::from_polar(1.0, -t);
    Ok(map_components(state, |c| CoherentComponent {
        alpha: c.alpha.map_all(|a| a * phase),
        ..c
    }))
}

/// Trap evolution on one axis only.
pub fn free_evolve_axis(state: &SuperpositionState, t: f64, axis: Axis) -> Result<SuperpositionState> {
    check_time(t)?;
    state.modes().check_axis(axis)?;
    let phase = Complex64::from_polar(1.0, -t);
    Ok(map_components(state, |c| CoherentComponent {
        alpha: c.alpha.map_axis(axis, |a| a * phase),
        ..c
    }))
}

/// Resonant carrier π rotation with no motional recoil:
/// |g⟩ → −i|e⟩ and |e⟩ → −i|g⟩.
pub fn carrier_flip(state: &SuperpositionState) -> SuperpositionState {
    let minus_i = Complex64::new(0.0, -1.0);
    map_components(state, |c| CoherentComponent {
        level: c.level.flipped(),
        coeff: c.coeff * minus_i,
        ..c
    })
}

/// Applies exp(−i·angle·σx) to the internal state of every component
/// accepted by `select`, leaving the others untouched. The caller
/// guarantees that selected and unselected components do not overlap in
/// space, otherwise the map is not unitary.
pub fn rotate_where(
    state: &SuperpositionState,
    angle: f64,
    select: impl Fn(&CoherentComponent) -> bool,
) -> SuperpositionState {
    let (s, c) = angle.sin_cos();
    let mut out = Vec::with_capacity(2 * state.len());
    for comp in state.components() {
        if !select(comp) {
            out.push(*comp);
            continue;
        }
        if c != 0.0 {
            out.push(CoherentComponent {
                coeff: comp.coeff * c,
                ..*comp
            });
        }
        if s != 0.0 {
            out.push(CoherentComponent {
                level: comp.level.flipped(),
                coeff: comp.coeff * Complex64::new(0.0, -s),
                ..*comp
            });
        }
    }
    SuperpositionState::from_parts_unchecked(state.modes(), out)
}

/// |level⟩ → cos(angle)|level⟩ − i sin(angle)|other⟩ on the components at
/// `level`.
pub fn rotate_component(state: &SuperpositionState, level: InternalLevel, angle: f64) -> SuperpositionState {
    rotate_where(state, angle, |c| c.level == level)
}

/// Ideal projective measurement of the internal level. Returns the outcome
/// probability and the renormalized post-measurement state.
pub fn measure_internal(
    state: &SuperpositionState,
    outcome: InternalLevel,
) -> Result<(f64, SuperpositionState)> {
    let total = state.norm_sqr();
    if !(total > 0.0) {
        return Err(Error::ZeroNorm);
    }
    let branch = state.branch(outcome);
    let probability = (branch.norm_sqr() / total).clamp(0.0, 1.0);
    if !(probability > 0.0) {
        return Err(Error::ZeroProbability {
            level: outcome,
            probability,
        });
    }
    Ok((probability, branch.normalized()?))
}

/// Probability of each internal level without projecting.
pub fn level_probabilities(state: &SuperpositionState) -> Result<[f64; 2]> {
    let total = state.norm_sqr();
    if !(total > 0.0) {
        return Err(Error::ZeroNorm);
    }
    Ok(InternalLevel::ALL.map(|l| state.branch(l).norm_sqr() / total))
}

fn map_components(
    state: &SuperpositionState,
    f: impl Fn(CoherentComponent) -> CoherentComponent,
) -> SuperpositionState {
    SuperpositionState::from_parts_unchecked(
        state.modes(),
        state.components().iter().map(|c| f(*c)).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{apply_kick, pulse_coeffs, Direction};
    use std::f64::consts::{FRAC_PI_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn same(a: &SuperpositionState, b: &SuperpositionState) -> bool {
        a.distance_sqr(b).unwrap() < 1e-24
    }

    #[test]
    fn free_evolution_quarter_period() {
        let eta = 0.7;
        let s = SuperpositionState::coherent(InternalLevel::Excited, c(0.0, eta));
        let t = free_evolve(&s, FRAC_PI_2).unwrap();
        assert!((t.components()[0].alpha.x - c(eta, 0.0)).norm() < 1e-15);
        let t = free_evolve(&t, FRAC_PI_2).unwrap();
        assert!((t.components()[0].alpha.x - c(0.0, -eta)).norm() < 1e-15);
        let full = free_evolve(&s, 2.0 * PI).unwrap();
        assert!(same(&full, &s));
        assert!(free_evolve(&s, -1.0).is_err());
    }

    #[test]
    fn carrier_flip_examples() {
        let cat = SuperpositionState::cat(InternalLevel::Excited, c(0.0, 0.5)).unwrap();
        let flipped = carrier_flip(&cat);
        let expected = SuperpositionState::cat(InternalLevel::Ground, c(0.0, 0.5))
            .unwrap()
            .scaled(c(0.0, -1.0));
        assert!(same(&flipped, &expected));
        assert!(same(&carrier_flip(&flipped), &cat.scaled(c(-1.0, 0.0))));
    }

    #[test]
    fn rotation_of_selected_level() {
        let s = SuperpositionState::coherent(InternalLevel::Excited, c(0.7, 0.0));
        assert!(same(&rotate_component(&s, InternalLevel::Excited, 0.0), &s));
        let r = rotate_component(&s, InternalLevel::Excited, PI);
        assert!(same(&r, &s.scaled(c(-1.0, 0.0))));
        let r = rotate_component(&s, InternalLevel::Ground, 0.4);
        assert!(same(&r, &s));
    }

    #[test]
    fn split_state_rotation_matches_closed_form() {
        // ½(|g⟩|0⟩ − i|e⟩|η⟩) → ½[|g⟩|0⟩ − i(cos a|e⟩ − i sin a|g⟩)|η⟩]
        let eta = 2.5;
        let a = 0.9;
        let s = SuperpositionState::new(
            crate::states::Modes::One,
            vec![
                CoherentComponent::one_mode(InternalLevel::Ground, c(0.5, 0.0), c(0.0, 0.0)),
                CoherentComponent::one_mode(InternalLevel::Excited, c(0.0, -0.5), c(eta, 0.0)),
            ],
        )
        .unwrap();
        let r = rotate_component(&s, InternalLevel::Excited, a);
        let expected = SuperpositionState::new(
            crate::states::Modes::One,
            vec![
                CoherentComponent::one_mode(InternalLevel::Ground, c(0.5, 0.0), c(0.0, 0.0)),
                CoherentComponent::one_mode(InternalLevel::Excited, c(0.0, -0.5 * a.cos()), c(eta, 0.0)),
                CoherentComponent::one_mode(InternalLevel::Ground, c(-0.5 * a.sin(), 0.0), c(eta, 0.0)),
            ],
        )
        .unwrap();
        assert!(same(&r, &expected));
    }

    #[test]
    fn measurement_after_two_half_pulses() {
        let eta = 0.5_f64;
        let s = SuperpositionState::ground(crate::states::Modes::One);
        let s = apply_kick(&s, &pulse_coeffs(FRAC_PI_2), Direction::MINUS_X, eta).unwrap();
        let s = apply_kick(&s, &pulse_coeffs(FRAC_PI_2), Direction::PLUS_X, eta).unwrap();
        let (p, projected) = measure_internal(&s, InternalLevel::Excited).unwrap();
        let expected = 0.25 * (2.0 + 2.0 * (-2.0 * eta * eta).exp());
        assert!((p - expected).abs() < 1e-14);
        let cat = SuperpositionState::cat(InternalLevel::Excited, c(0.0, eta)).unwrap();
        assert!((projected.fidelity(&cat).unwrap() - 1.0).abs() < 1e-14);

        let g = SuperpositionState::ground(crate::states::Modes::One);
        let (p, post) = measure_internal(&g, InternalLevel::Ground).unwrap();
        assert_eq!(p, 1.0);
        assert!(same(&post, &g));
        assert!(matches!(
            measure_internal(&g, InternalLevel::Excited),
            Err(Error::ZeroProbability { .. })
        ));
    }
}
