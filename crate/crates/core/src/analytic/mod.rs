//! Closed-form backend valid in the strong-excitation limit Ω ≫ ν.
//!
//! Laser events are instantaneous kicks acting on a
//! [`SuperpositionState`](crate::states::SuperpositionState); the motion
//! only evolves between them.

mod kick;
mod observables;
mod ops;

use num_complex::Complex64;

pub use kick::{
    adiabatic_coeffs, apply_kick, linear_ramp_phase, mixing_angle, pulse_coeffs, AdiabaticSpec,
    Direction, KickCoefficients, Sign, PHASE_QUADRATURE_TOL,
};
pub use observables::{mixture_momentum_density, momentum_density, position_density_2d};
pub(crate) use observables::{accumulate_outer, momentum_axes, position_axes};
pub use ops::{
    carrier_flip, free_evolve, free_evolve_axis, level_probabilities, measure_internal,
    rotate_component, rotate_where,
};

/// ⟨α|β⟩ = exp(−(|α|² + |β|²)/2 + α*β).
pub fn coherent_overlap(alpha: Complex64, beta: Complex64) -> Complex64 {
    (-0.5 * (alpha.norm_sqr() + beta.norm_sqr()) + alpha.conj() * beta).exp()
}
