//! Truncated-Fock-space backend: the full trapped-ion Hamiltonian,
//! propagated exactly for square pulses and by midpoint exponentials for
//! detuning ramps.

mod half_space;
mod hamiltonian;
mod observables;
mod operators;
mod ops;
mod propagate;

pub use half_space::{half_space_rotation, project_half_space, HalfSpaceRotation, Side};
pub use hamiltonian::{build_hamiltonian, AxisHamiltonian, HamiltonianParams};
pub use observables::{fock_to_momentum_grid, position_density_2d_numeric};
pub use operators::{sigma_minus, sigma_plus, sigma_z, OperatorSet};
pub use ops::{carrier_flip, free_evolve, level_probabilities, measure_internal};
pub use propagate::{
    evolve_axis, evolve_const, evolve_ramp, evolve_ramp_with, ConvergencePolicy, RampOutcome,
    RampShape, RampSpec, Spectral, MIN_RAMP_STEPS,
};
