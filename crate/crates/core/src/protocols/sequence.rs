use serde::{Deserialize, Serialize};

use super::backend::{Backend, RampDiagnostics};
use crate::analytic::Direction;
use crate::error::Result;
use crate::states::{Axis, InternalLevel, Modes};
#[cfg(test)]
use crate::states::QuantumState;

/// How a nominal free-evolution time between two laser interactions is
/// realized when the interactions themselves take time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WaitTiming {
    /// The wait runs from the end of one pulse to the start of the next.
    Exact,
    /// The nominal time separates pulse centres: half of each adjacent
    /// pulse duration is taken off the wait (never below zero).
    #[default]
    PulseCentred,
}

/// A state moving through a laser sequence, with the bookkeeping needed
/// for the validity indicators.
pub(crate) struct Sequence<'a, B: Backend> {
    backend: &'a B,
    pub state: B::State,
    modes: Modes,
    timing: WaitTiming,
    /// Nominal laser-on time Σ area/Ω + Σ ramp durations.
    laser_time: f64,
    max_phonons: f64,
    max_leak: f64,
    max_amplitude: Option<f64>,
    /// Backend duration of the most recent laser interaction.
    previous: f64,
    pub ramps: Vec<RampDiagnostics>,
}

impl<'a, B: Backend> Sequence<'a, B> {
    pub fn new(backend: &'a B, state: B::State, modes: Modes, timing: WaitTiming) -> Self {
        let mut seq = Sequence {
            backend,
            state,
            modes,
            timing,
            laser_time: 0.0,
            max_phonons: 0.0,
            max_leak: 0.0,
            max_amplitude: None,
            previous: 0.0,
            ramps: Vec::new(),
        };
        seq.track();
        seq
    }

    fn track(&mut self) {
        let axes: &[Axis] = match self.modes {
            Modes::One => &[Axis::X],
            Modes::Two => &[Axis::X, Axis::Y],
        };
        for &axis in axes {
            self.max_phonons = self.max_phonons.max(self.backend.mean_phonons(&self.state, axis));
        }
        self.max_leak = self.max_leak.max(self.backend.truncation_leak(&self.state));
        if let Some(a) = self.backend.max_amplitude(&self.state) {
            self.max_amplitude = Some(self.max_amplitude.map_or(a, |m| m.max(a)));
        }
    }

    pub fn pulse(&mut self, area: f64, direction: Direction) -> Result<()> {
        let next = self.backend.pulse(&self.state, area, direction)?;
        self.state = self.backend.simplify(next);
        self.laser_time += area.abs() / self.backend.omega();
        self.previous = self.backend.pulse_duration(area);
        self.track();
        Ok(())
    }

    pub fn ramp(&mut self, direction: Direction, delta_start: f64, delta_end: f64, duration: f64) -> Result<()> {
        let (next, diag) = self
            .backend
            .ramp(&self.state, direction, delta_start, delta_end, duration)?;
        self.state = self.backend.simplify(next);
        self.ramps.push(diag);
        self.laser_time += duration;
        self.previous = duration;
        self.track();
        Ok(())
    }

    /// Free evolution for a nominal time `t` before an interaction lasting
    /// `next` (backend time).
    pub fn wait(&mut self, t: f64, next: f64) -> Result<()> {
        let actual = match self.timing {
            WaitTiming::Exact => t,
            WaitTiming::PulseCentred => (t - 0.5 * (self.previous + next)).max(0.0),
        };
        self.state = self.backend.wait(&self.state, actual)?;
        self.previous = 0.0;
        Ok(())
    }

    /// An instantaneous operation that is neither a pulse nor a wait.
    pub fn apply(&mut self, f: impl FnOnce(&B::State) -> Result<B::State>) -> Result<()> {
        self.state = self.backend.simplify(f(&self.state)?);
        self.previous = 0.0;
        self.track();
        Ok(())
    }

    /// Projects onto `level` and continues with the normalized branch.
    pub fn measure(&mut self, level: InternalLevel) -> Result<f64> {
        let (p, post) = self.backend.measure(&self.state, level)?;
        self.state = post;
        Ok(p)
    }

    /// ν·τ·max(n̄, η²) with τ the total laser-on time.
    pub fn motion_indicator(&self) -> f64 {
        let eta = self.backend.eta();
        self.laser_time * self.max_phonons.max(eta * eta)
    }

    pub fn max_leak(&self) -> f64 {
        self.max_leak
    }

    /// Largest |α| seen so far (analytic backend only).
    pub fn max_amplitude(&self) -> Option<f64> {
        self.max_amplitude
    }

    pub fn max_adiabaticity(&self) -> Option<f64> {
        self.ramps.iter().map(|r| r.adiabaticity).reduce(f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::backend::{AnalyticBackend, NumericBackend};
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn centred_waits_absorb_half_pulses() {
        let b = NumericBackend::new(0.3, 2.0, 20).unwrap();
        let psi = b.initial(Modes::One).unwrap();
        let mut centred = Sequence::new(&b, psi.clone(), Modes::One, WaitTiming::PulseCentred);
        centred.pulse(FRAC_PI_2, Direction::PLUS_X).unwrap();
        centred.wait(FRAC_PI_2, b.pulse_duration(FRAC_PI_2)).unwrap();

        let mut exact = Sequence::new(&b, psi, Modes::One, WaitTiming::Exact);
        exact.pulse(FRAC_PI_2, Direction::PLUS_X).unwrap();
        exact.wait(FRAC_PI_2 - FRAC_PI_2 / 2.0, 0.0).unwrap();
        assert!((centred.state.fidelity(&exact.state).unwrap() - 1.0).abs() < 1e-12);

        // A wait shorter than the pulses is clamped to zero.
        let before = centred.state.clone();
        centred.pulse(PI, Direction::PLUS_X).unwrap();
        let after_pulse = centred.state.clone();
        centred.wait(0.1, b.pulse_duration(PI)).unwrap();
        assert_eq!(centred.state.amplitudes(), after_pulse.amplitudes());
        assert_ne!(before.amplitudes(), after_pulse.amplitudes());
    }

    #[test]
    fn motion_indicator_uses_nominal_laser_time() {
        let eta = 0.5;
        let b = AnalyticBackend::new(eta, 100.0).unwrap();
        let mut seq = Sequence::new(&b, b.initial(Modes::One).unwrap(), Modes::One, WaitTiming::Exact);
        seq.pulse(PI, Direction::PLUS_X).unwrap();
        // n̄ = η² after one kick.
        assert!((seq.motion_indicator() - PI / 100.0 * eta * eta).abs() < 1e-15);
    }
}
