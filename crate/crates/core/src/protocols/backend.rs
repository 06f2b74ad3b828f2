use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::analytic::{self, AdiabaticSpec, Direction, KickCoefficients};
use crate::error::{Error, Result};
use crate::numeric::{
    self, AxisHamiltonian, ConvergencePolicy, HalfSpaceRotation, HamiltonianParams, OperatorSet, RampSpec, Side,
    Spectral, MIN_RAMP_STEPS,
};
use crate::states::{
    Axis, DensityGrid, FockState, InternalLevel, Modes, QuantumState, SuperpositionState,
    MERGE_TOLERANCE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Analytic,
    Numeric,
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendKind::Analytic => "analytic",
            BackendKind::Numeric => "numeric",
        })
    }
}

/// Diagnostics of one detuning ramp.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RampDiagnostics {
    /// Dynamical phase ε accumulated along the upper dressed state.
    pub dynamical_phase: f64,
    /// max|dδ/dt|/Ω².
    pub adiabaticity: f64,
    /// Infidelity between the last two step counts (numeric only).
    pub doubling_infidelity: f64,
    pub steps: usize,
}

/// A backend-specific final or intermediate state.
#[derive(Debug, Clone)]
pub enum StateSnapshot {
    Analytic(SuperpositionState),
    Numeric(FockState),
}

impl StateSnapshot {
    pub fn modes(&self) -> Modes {
        match self {
            StateSnapshot::Analytic(s) => s.modes(),
            StateSnapshot::Numeric(s) => s.modes(),
        }
    }

    /// Fock representation at `cutoff` (numeric states are re-truncated or
    /// zero-padded).
    pub fn to_fock(&self, cutoff: usize) -> Result<FockState> {
        match self {
            StateSnapshot::Analytic(s) => FockState::from_superposition(s, cutoff),
            StateSnapshot::Numeric(s) => s.with_cutoff(cutoff),
        }
    }

    /// Smallest cutoff that represents the state faithfully.
    pub fn natural_cutoff(&self) -> usize {
        match self {
            StateSnapshot::Analytic(s) => crate::states::default_truncation(s.max_amplitude()),
            StateSnapshot::Numeric(s) => s.cutoff(),
        }
    }

    /// |⟨a|b⟩|², evaluated in closed form for two analytic states and in a
    /// shared Fock basis otherwise.
    pub fn fidelity(&self, other: &StateSnapshot) -> Result<f64> {
        if let (StateSnapshot::Analytic(a), StateSnapshot::Analytic(b)) = (self, other) {
            return a.fidelity(b);
        }
        let cutoff = self.natural_cutoff().max(other.natural_cutoff());
        self.to_fock(cutoff)?.fidelity(&other.to_fock(cutoff)?)
    }
}

/// The operations every protocol is written against. Times are in units
/// of 1/ν and detunings in units of ν.
pub trait Backend: Sync {
    type State: QuantumState + Clone + Send + Sync;

    fn kind(&self) -> BackendKind;
    fn eta(&self) -> f64;
    /// Ω/ν.
    fn omega(&self) -> f64;
    /// Laser time taken by a square pulse of the given area.
    fn pulse_duration(&self, area: f64) -> f64;

    fn initial(&self, modes: Modes) -> Result<Self::State>;
    fn from_superposition(&self, state: &SuperpositionState) -> Result<Self::State>;
    fn snapshot(&self, state: &Self::State) -> StateSnapshot;

    fn pulse(&self, state: &Self::State, area: f64, direction: Direction) -> Result<Self::State>;
    fn ramp(
        &self,
        state: &Self::State,
        direction: Direction,
        delta_start: f64,
        delta_end: f64,
        duration: f64,
    ) -> Result<(Self::State, RampDiagnostics)>;
    fn wait(&self, state: &Self::State, t: f64) -> Result<Self::State>;
    fn carrier_flip(&self, state: &Self::State) -> Self::State;
    /// exp(−i·angle·σx) on the part of the state with x̃ on `side` of
    /// `boundary`.
    fn rotate_half_space(&self, state: &Self::State, angle: f64, side: Side, boundary: f64) -> Result<Self::State>;
    /// The part of the state with x̃ along `axis` on `side` of `boundary`.
    fn project_half_space(&self, state: &Self::State, axis: Axis, side: Side, boundary: f64) -> Result<Self::State>;

    /// [P_g, P_e].
    fn probabilities(&self, state: &Self::State) -> Result<[f64; 2]>;
    /// Projects onto `level`; returns the outcome probability and the
    /// normalized post-measurement state.
    fn measure(&self, state: &Self::State, level: InternalLevel) -> Result<(f64, Self::State)>;

    fn momentum_grid(&self, state: &Self::State, points: &[f64]) -> Result<DensityGrid>;
    fn position_grid(&self, state: &Self::State, xs: &[f64], ys: &[f64]) -> Result<DensityGrid>;
    fn mean_phonons(&self, state: &Self::State, axis: Axis) -> f64;
    /// Population in the top levels of a truncated basis; 0 when there is
    /// no truncation.
    fn truncation_leak(&self, state: &Self::State) -> f64;
    /// Drops redundant terms; a no-op for dense states.
    fn simplify(&self, state: Self::State) -> Self::State;
    /// Largest coherent amplitude, when the representation knows it.
    fn max_amplitude(&self, _state: &Self::State) -> Option<f64> {
        None
    }
}

/// Ideal instantaneous kicks on coherent-state superpositions.
#[derive(Debug, Clone)]
pub struct AnalyticBackend {
    eta: f64,
    omega: f64,
    /// Replace the dressed-state angles at ramp endpoints by their Δ/Ω → ∞
    /// limits.
    pub limit_angles: bool,
}

impl AnalyticBackend {
    /// `omega` only enters the ramp phases and the validity indicators.
    pub fn new(eta: f64, omega: f64) -> Result<Self> {
        check_positive("eta", eta)?;
        check_positive("omega_ratio", omega)?;
        Ok(AnalyticBackend {
            eta,
            omega,
            limit_angles: true,
        })
    }

    pub fn with_limit_angles(mut self, on: bool) -> Self {
        self.limit_angles = on;
        self
    }
}

impl Backend for AnalyticBackend {
    type State = SuperpositionState;

    fn kind(&self) -> BackendKind {
        BackendKind::Analytic
    }

    fn eta(&self) -> f64 {
        self.eta
    }

    fn omega(&self) -> f64 {
        self.omega
    }

    fn pulse_duration(&self, _area: f64) -> f64 {
        0.0
    }

    fn initial(&self, modes: Modes) -> Result<SuperpositionState> {
        Ok(SuperpositionState::ground(modes))
    }

    fn from_superposition(&self, state: &SuperpositionState) -> Result<SuperpositionState> {
        Ok(state.clone())
    }

    fn snapshot(&self, state: &SuperpositionState) -> StateSnapshot {
        StateSnapshot::Analytic(state.clone())
    }

    fn pulse(&self, state: &SuperpositionState, area: f64, direction: Direction) -> Result<SuperpositionState> {
        analytic::apply_kick(state, &KickCoefficients::pulse(area), direction, self.eta)
    }

    fn ramp(
        &self,
        state: &SuperpositionState,
        direction: Direction,
        delta_start: f64,
        delta_end: f64,
        duration: f64,
    ) -> Result<(SuperpositionState, RampDiagnostics)> {
        let mut spec = AdiabaticSpec::linear(self.omega, delta_start, delta_end, duration)?;
        if self.limit_angles {
            spec = spec.with_limit_angles(delta_start, delta_end);
        }
        let out = analytic::apply_kick(state, &KickCoefficients::adiabatic(&spec), direction, self.eta)?;
        let ramp = RampSpec::linear(delta_start, delta_end, duration, MIN_RAMP_STEPS);
        Ok((
            out,
            RampDiagnostics {
                dynamical_phase: spec.phase,
                adiabaticity: ramp.adiabaticity(self.omega),
                doubling_infidelity: 0.0,
                steps: 0,
            },
        ))
    }

    fn wait(&self, state: &SuperpositionState, t: f64) -> Result<SuperpositionState> {
        analytic::free_evolve(state, t)
    }

    fn carrier_flip(&self, state: &SuperpositionState) -> SuperpositionState {
        analytic::carrier_flip(state)
    }

    fn rotate_half_space(
        &self,
        state: &SuperpositionState,
        angle: f64,
        side: Side,
        boundary: f64,
    ) -> Result<SuperpositionState> {
        check_finite("angle", angle)?;
        check_finite("boundary", boundary)?;
        Ok(analytic::rotate_where(state, angle, |c| {
            on_side(c.alpha.get(Axis::X).unwrap_or_default().re, side, boundary)
        }))
    }

    fn project_half_space(
        &self,
        state: &SuperpositionState,
        axis: Axis,
        side: Side,
        boundary: f64,
    ) -> Result<SuperpositionState> {
        state.modes().check_axis(axis)?;
        let kept = state
            .components()
            .iter()
            .filter(|c| on_side(c.alpha.get(axis).unwrap_or_default().re, side, boundary))
            .copied()
            .collect();
        Ok(SuperpositionState::from_parts_unchecked(state.modes(), kept))
    }

    fn probabilities(&self, state: &SuperpositionState) -> Result<[f64; 2]> {
        analytic::level_probabilities(state)
    }

    fn measure(&self, state: &SuperpositionState, level: InternalLevel) -> Result<(f64, SuperpositionState)> {
        analytic::measure_internal(state, level)
    }

    fn momentum_grid(&self, state: &SuperpositionState, points: &[f64]) -> Result<DensityGrid> {
        analytic::momentum_density(state, points)
    }

    fn position_grid(&self, state: &SuperpositionState, xs: &[f64], ys: &[f64]) -> Result<DensityGrid> {
        analytic::position_density_2d(state, xs, ys)
    }

    fn mean_phonons(&self, state: &SuperpositionState, axis: Axis) -> f64 {
        state.mean_phonons(axis)
    }

    fn truncation_leak(&self, _state: &SuperpositionState) -> f64 {
        0.0
    }

    fn simplify(&self, state: SuperpositionState) -> SuperpositionState {
        let merged = state.merged(MERGE_TOLERANCE);
        let largest = merged.components().iter().map(|c| c.coeff.norm()).fold(0.0, f64::max);
        let kept = merged
            .components()
            .iter()
            .filter(|c| c.coeff.norm() > ROUNDOFF_FLOOR * largest)
            .copied()
            .collect();
        SuperpositionState::from_parts_unchecked(merged.modes(), kept)
    }

    fn max_amplitude(&self, state: &SuperpositionState) -> Option<f64> {
        Some(state.max_amplitude())
    }
}

/// Terms this much smaller than the largest one are left over from paths
/// that cancel exactly and are dropped.
const ROUNDOFF_FLOOR: f64 = 1e-13;

/// 2α ≥ boundary in x̃ units (⟨x̃⟩ = 2 Re α).
fn on_side(re_alpha: f64, side: Side, boundary: f64) -> bool {
    let x = 2.0 * re_alpha;
    match side {
        Side::Right => x > boundary,
        Side::Left => x < boundary,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct SpectralKey {
    direction: Direction,
    delta_bits: u64,
}

/// Full Hamiltonian in a truncated Fock basis with `cutoff` levels per
/// mode.
#[derive(Debug)]
pub struct NumericBackend {
    eta: f64,
    omega: f64,
    ops: OperatorSet,
    /// Initial step count of every ramp.
    pub ramp_steps: usize,
    pub policy: ConvergencePolicy,
    /// Smoothing width of the half-space rotation (0 = hard step).
    pub edge_width: f64,
    cache: Mutex<HashMap<SpectralKey, Arc<Spectral>>>,
}

impl NumericBackend {
    pub fn new(eta: f64, omega: f64, cutoff: usize) -> Result<Self> {
        check_positive("eta", eta)?;
        check_positive("omega_ratio", omega)?;
        Ok(NumericBackend {
            eta,
            omega,
            ops: OperatorSet::new(cutoff)?,
            ramp_steps: 2 * MIN_RAMP_STEPS,
            policy: ConvergencePolicy::default(),
            edge_width: 0.0,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn with_ramp_steps(mut self, steps: usize) -> Result<Self> {
        if steps < MIN_RAMP_STEPS {
            return Err(Error::invalid(
                "ramp_steps",
                format!("ramps need at least {MIN_RAMP_STEPS} steps"),
            ));
        }
        self.ramp_steps = steps;
        Ok(self)
    }

    pub fn with_edge_width(mut self, width: f64) -> Result<Self> {
        if !(width >= 0.0) || !width.is_finite() {
            return Err(Error::invalid("edge_width", "must be finite and ≥ 0"));
        }
        self.edge_width = width;
        Ok(self)
    }

    pub fn cutoff(&self) -> usize {
        self.ops.cutoff()
    }

    /// Same settings with a different cutoff and an empty propagator cache.
    pub fn resized(&self, cutoff: usize) -> Result<Self> {
        Ok(NumericBackend {
            ops: OperatorSet::new(cutoff)?,
            cache: Mutex::new(HashMap::new()),
            ..*self
        })
    }

    pub fn operators(&self) -> &OperatorSet {
        &self.ops
    }

    fn params(&self, direction: Direction, delta: f64) -> HamiltonianParams {
        HamiltonianParams {
            omega: self.omega,
            delta,
            eta: self.eta,
            direction,
        }
    }

    fn spectral(&self, direction: Direction, delta: f64) -> Result<Arc<Spectral>> {
        let key = SpectralKey {
            direction,
            delta_bits: delta.to_bits(),
        };
        if let Some(s) = self.cache.lock().expect("spectral cache poisoned").get(&key) {
            return Ok(Arc::clone(s));
        }
        let h = AxisHamiltonian::new(&self.params(direction, delta), &self.ops)?;
        let s = Arc::new(Spectral::new(h.block())?);
        self.cache
            .lock()
            .expect("spectral cache poisoned")
            .insert(key, Arc::clone(&s));
        Ok(s)
    }
}

impl Backend for NumericBackend {
    type State = FockState;

    fn kind(&self) -> BackendKind {
        BackendKind::Numeric
    }

    fn eta(&self) -> f64 {
        self.eta
    }

    fn omega(&self) -> f64 {
        self.omega
    }

    fn pulse_duration(&self, area: f64) -> f64 {
        area.abs() / self.omega
    }

    fn initial(&self, modes: Modes) -> Result<FockState> {
        FockState::ground(modes, self.cutoff())
    }

    fn from_superposition(&self, state: &SuperpositionState) -> Result<FockState> {
        FockState::from_superposition(state, self.cutoff())
    }

    fn snapshot(&self, state: &FockState) -> StateSnapshot {
        StateSnapshot::Numeric(state.clone())
    }

    fn pulse(&self, state: &FockState, area: f64, direction: Direction) -> Result<FockState> {
        check_finite("area", area)?;
        let spectral = self.spectral(direction, 0.0)?;
        numeric::evolve_axis(&spectral, direction.axis, self.pulse_duration(area), state)
    }

    fn ramp(
        &self,
        state: &FockState,
        direction: Direction,
        delta_start: f64,
        delta_end: f64,
        duration: f64,
    ) -> Result<(FockState, RampDiagnostics)> {
        let spec = RampSpec::linear(delta_start, delta_end, duration, self.ramp_steps);
        let outcome = numeric::evolve_ramp_with(&self.params(direction, 0.0), &spec, state, &self.ops, &self.policy)?;
        Ok((
            outcome.state,
            RampDiagnostics {
                dynamical_phase: analytic::linear_ramp_phase(self.omega, delta_start, delta_end, duration),
                adiabaticity: outcome.adiabaticity,
                doubling_infidelity: outcome.doubling_infidelity,
                steps: outcome.steps,
            },
        ))
    }

    fn wait(&self, state: &FockState, t: f64) -> Result<FockState> {
        numeric::free_evolve(state, t)
    }

    fn carrier_flip(&self, state: &FockState) -> FockState {
        numeric::carrier_flip(state)
    }

    fn rotate_half_space(&self, state: &FockState, angle: f64, side: Side, boundary: f64) -> Result<FockState> {
        HalfSpaceRotation::new(angle, side, boundary, self.edge_width, &self.ops)?.apply(state)
    }

    fn project_half_space(&self, state: &FockState, axis: Axis, side: Side, boundary: f64) -> Result<FockState> {
        numeric::project_half_space(state, axis, side, boundary, &self.ops)
    }

    fn probabilities(&self, state: &FockState) -> Result<[f64; 2]> {
        numeric::level_probabilities(state)
    }

    fn measure(&self, state: &FockState, level: InternalLevel) -> Result<(f64, FockState)> {
        numeric::measure_internal(state, level)
    }

    fn momentum_grid(&self, state: &FockState, points: &[f64]) -> Result<DensityGrid> {
        numeric::fock_to_momentum_grid(state, points)
    }

    fn position_grid(&self, state: &FockState, xs: &[f64], ys: &[f64]) -> Result<DensityGrid> {
        numeric::position_density_2d_numeric(state, xs, ys)
    }

    fn mean_phonons(&self, state: &FockState, axis: Axis) -> f64 {
        state.mean_phonons(axis)
    }

    fn truncation_leak(&self, state: &FockState) -> f64 {
        state.truncation_leak()
    }

    fn simplify(&self, state: FockState) -> FockState {
        state
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(Error::invalid(name, format!("must be finite and positive, got {value}")));
    }
    Ok(())
}

pub(crate) fn check_finite(name: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::invalid(name, "must be finite"));
    }
    Ok(())
}
