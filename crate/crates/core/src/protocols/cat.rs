use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::Serialize;

use super::backend::{AnalyticBackend, Backend, StateSnapshot};
use super::detect::detect_peaks;
use super::report::{Outcome, ProtocolReport, Protocol, Snapshot};
use super::sequence::{Sequence, WaitTiming};
use super::GridOptions;
use crate::analytic::Direction;
use crate::error::{Error, Result};
use crate::numeric::Side;
use crate::states::{Axis, DensityGrid, InternalLevel, Modes};

/// Detuning ratio below which the ideal adiabatic kick is a poor model.
pub const MIN_DETUNING_RATIO: f64 = 5.0;

/// The paper's snapshot times for the circulating packets.
pub const DEFAULT_SNAPSHOT_TIMES: [f64; 5] = [0.0, FRAC_PI_4, FRAC_PI_2, 3.0 * FRAC_PI_4, 40.0 * PI];

/// π/2(−), [π(+), π(−)]×n, π/2(+) along x, back to back.
pub(crate) fn pulse_cat_steps<B: Backend>(seq: &mut Sequence<'_, B>, n: usize) -> Result<()> {
    seq.pulse(FRAC_PI_2, Direction::MINUS_X)?;
    for _ in 0..n {
        seq.pulse(PI, Direction::PLUS_X)?;
        seq.pulse(PI, Direction::MINUS_X)?;
    }
    seq.pulse(FRAC_PI_2, Direction::PLUS_X)
}

/// Each pulse of [`pulse_cat_steps`] replaced by detuning ramps: a π/2
/// pulse by one ramp ending on resonance or starting from it, a π pulse by
/// the pair (0 → Δ, −Δ → 0).
fn adiabatic_cat_steps<B: Backend>(seq: &mut Sequence<'_, B>, n: usize, detuning: f64, duration: f64) -> Result<()> {
    seq.ramp(Direction::MINUS_X, -detuning, 0.0, duration)?;
    for _ in 0..n {
        for direction in [Direction::PLUS_X, Direction::MINUS_X] {
            seq.ramp(direction, 0.0, detuning, duration)?;
            seq.ramp(direction, -detuning, 0.0, duration)?;
        }
    }
    seq.ramp(Direction::PLUS_X, 0.0, detuning, duration)
}

pub(crate) fn twin<B: Backend>(backend: &B) -> Result<AnalyticBackend> {
    AnalyticBackend::new(backend.eta(), backend.omega())
}

pub(crate) fn common_params<B: Backend>(report: &mut ProtocolReport, backend: &B) {
    report.param("eta", backend.eta());
    report.param("omega_ratio", backend.omega());
}

pub(crate) fn tag(grid: DensityGrid, report: &ProtocolReport) -> DensityGrid {
    grid.with_meta("protocol", report.protocol)
        .with_meta("backend", report.backend)
        .with_meta("eta", report.parameters["eta"].clone())
        .with_meta("omega_ratio", report.parameters["omega_ratio"].clone())
}

/// Measures e; on a zero-probability outcome the report is marked failed.
fn post_select<B: Backend>(seq: &mut Sequence<'_, B>, backend: &B, report: &mut ProtocolReport) -> Result<bool> {
    let [pg, pe] = backend.probabilities(&seq.state)?;
    report.probabilities.insert("g".into(), pg);
    report.probabilities.insert("e".into(), pe);
    if pe == 0.0 {
        report.outcome = Outcome::Failed;
        report.warnings.push("excited-state outcome has zero probability".into());
        return Ok(false);
    }
    seq.measure(InternalLevel::Excited)?;
    Ok(true)
}

fn fill_validity<B: Backend>(seq: &Sequence<'_, B>, report: &mut ProtocolReport, cutoff: Option<usize>) {
    report.validity.motion = seq.motion_indicator();
    report.validity.adiabaticity = seq.max_adiabaticity();
    if let Some(n) = cutoff {
        report.validity.cutoff = Some(n);
        report.validity.truncation_leak = Some(seq.max_leak());
    }
    if let Some(a) = seq.max_amplitude() {
        report.diagnostics.insert("alpha_max".into(), a);
    }
    if report.validity.motion >= 1.0 {
        report.warnings.push(format!(
            "motion during the laser interactions is not negligible (ντ·max(n̄, η²) = {:.3})",
            report.validity.motion
        ));
    }
}

/// Cat state K(|(2n+1)iη⟩ + |−(2n+1)iη⟩)|e⟩ from 2n+2 pulses and an
/// e-measurement. The momentum grid is centred on ±2(2n+1)η.
pub fn prepare_cat_pulses<B: Backend>(
    backend: &B,
    n: usize,
    grid: &GridOptions,
    cutoff: Option<usize>,
) -> Result<ProtocolReport> {
    let mut report = ProtocolReport::new(Protocol::Cat1dPulses, backend.kind());
    common_params(&mut report, backend);
    report.param("n", n);
    let separation = (2 * n + 1) as f64 * backend.eta();

    let mut seq = Sequence::new(backend, backend.initial(Modes::One)?, Modes::One, WaitTiming::Exact);
    pulse_cat_steps(&mut seq, n)?;
    let kept = post_select(&mut seq, backend, &mut report)?;
    fill_validity(&seq, &mut report, cutoff);
    if !kept {
        return Ok(report);
    }

    let analytic = twin(backend)?;
    let mut ideal = Sequence::new(&analytic, analytic.initial(Modes::One)?, Modes::One, WaitTiming::Exact);
    pulse_cat_steps(&mut ideal, n)?;
    ideal.measure(InternalLevel::Excited)?;
    let fidelity = backend.snapshot(&seq.state).fidelity(&StateSnapshot::Analytic(ideal.state))?;
    report.diagnostics.insert("target_fidelity".into(), fidelity);

    let points = grid.axis(separation)?;
    let density = tag(backend.momentum_grid(&seq.state, &points)?, &report);
    let peaks = detect_peaks(&density, 2.0 * separation);
    report.flags.insert("four_peaks".into(), peaks.four_peaks);
    report.flags.insert("central_peak".into(), peaks.central_peak);
    report.grids.push(("momentum".into(), density));
    report.final_state = Some(backend.snapshot(&seq.state));
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdiabaticOptions {
    pub n: usize,
    /// Δ/Ω.
    pub delta_over_omega: f64,
    /// Ω·τ for each ramp.
    pub tau: f64,
}

impl Default for AdiabaticOptions {
    fn default() -> Self {
        AdiabaticOptions {
            n: 2,
            delta_over_omega: 10.0,
            tau: 40.0,
        }
    }
}

/// Cat state from detuning ramps instead of pulses; every ramp sweeps
/// between resonance and ±Δ in time τ.
pub fn prepare_cat_adiabatic<B: Backend>(
    backend: &B,
    options: &AdiabaticOptions,
    grid: &GridOptions,
    cutoff: Option<usize>,
) -> Result<ProtocolReport> {
    super::backend::check_positive("delta_over_omega", options.delta_over_omega)?;
    super::backend::check_positive("tau", options.tau)?;
    let mut report = ProtocolReport::new(Protocol::Cat1dAdiabatic, backend.kind());
    common_params(&mut report, backend);
    report.param("n", options.n);
    report.param("delta_over_omega", options.delta_over_omega);
    report.param("tau", options.tau);
    if options.delta_over_omega < MIN_DETUNING_RATIO {
        report.warnings.push(format!(
            "Δ/Ω = {} is below {MIN_DETUNING_RATIO}; the ramps do not start and end far from resonance",
            options.delta_over_omega
        ));
    }
    let omega = backend.omega();
    let detuning = options.delta_over_omega * omega;
    let duration = options.tau / omega;
    let separation = (2 * options.n + 1) as f64 * backend.eta();

    let mut seq = Sequence::new(backend, backend.initial(Modes::One)?, Modes::One, WaitTiming::Exact);
    adiabatic_cat_steps(&mut seq, options.n, detuning, duration)?;
    let phase_sum: f64 = seq.ramps.iter().map(|r| r.dynamical_phase).sum();
    let max_doubling = seq.ramps.iter().map(|r| r.doubling_infidelity).fold(0.0, f64::max);
    report.diagnostics.insert("ramps".into(), seq.ramps.len() as f64);
    report.diagnostics.insert("dynamical_phase_sum".into(), phase_sum);
    report.diagnostics.insert("max_doubling_infidelity".into(), max_doubling);
    let kept = post_select(&mut seq, backend, &mut report)?;
    fill_validity(&seq, &mut report, cutoff);
    if let Some(a) = report.validity.adiabaticity {
        report.flags.insert("adiabatic".into(), a <= 1.0);
        if a > 1.0 {
            report
                .warnings
                .push(format!("ramps are too fast to be adiabatic (max|dδ/dt|/Ω² = {a:.3})"));
        }
    }
    if !kept {
        return Ok(report);
    }

    let analytic = twin(backend)?;
    let mut ideal = Sequence::new(&analytic, analytic.initial(Modes::One)?, Modes::One, WaitTiming::Exact);
    adiabatic_cat_steps(&mut ideal, options.n, detuning, duration)?;
    ideal.measure(InternalLevel::Excited)?;
    let fidelity = backend.snapshot(&seq.state).fidelity(&StateSnapshot::Analytic(ideal.state))?;
    report.diagnostics.insert("target_fidelity".into(), fidelity);

    let points = grid.axis(separation)?;
    let density = tag(backend.momentum_grid(&seq.state, &points)?, &report);
    let peaks = detect_peaks(&density, 2.0 * separation);
    report.flags.insert("four_peaks".into(), peaks.four_peaks);
    report.flags.insert("central_peak".into(), peaks.central_peak);
    report.grids.push(("momentum".into(), density));
    report.final_state = Some(backend.snapshot(&seq.state));
    Ok(report)
}

/// Centroid trajectory of one packet.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PacketTrack {
    pub label: String,
    pub times: Vec<f64>,
    /// (x̃, ỹ) at each time.
    pub centroids: Vec<[f64; 2]>,
}

impl PacketTrack {
    /// Sign of the angular motion between consecutive samples less than
    /// half a period apart: +1 counterclockwise, −1 clockwise, 0 when
    /// undetermined or mixed.
    pub fn rotation_sense(&self) -> i32 {
        let mut sense = 0;
        for k in 1..self.times.len() {
            let dt = self.times[k] - self.times[k - 1];
            if !(dt > 0.0 && dt < PI) {
                continue;
            }
            let [x0, y0] = self.centroids[k - 1];
            let [x1, y1] = self.centroids[k];
            let s = (x0 * y1 - y0 * x1).signum() as i32;
            if sense == 0 {
                sense = s;
            } else if s != sense {
                return 0;
            }
        }
        sense
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cat2dOptions {
    pub n: usize,
    /// Free-evolution times after the last pulse, in 1/ν.
    pub times: Vec<f64>,
    pub timing: WaitTiming,
}

impl Default for Cat2dOptions {
    fn default() -> Self {
        Cat2dOptions {
            n: 2,
            times: DEFAULT_SNAPSHOT_TIMES.to_vec(),
            timing: WaitTiming::default(),
        }
    }
}

/// Label of a snapshot taken at free-evolution time `t`.
pub fn snapshot_label(t: f64) -> String {
    format!("vt{t:.6}")
}

/// Two packets ±2(2n+1)η on the x axis with momentum −2(2n+1)η along y,
/// so that they run around the same circle in opposite senses.
///
/// The x cat is prepared and post-selected as in one dimension, left to
/// rotate for a quarter period, and then 2n+1 π pulses along ±y move both
/// halves by −(2n+1)iη and leave the ion in g.
pub fn prepare_cat_2d<B: Backend>(
    backend: &B,
    options: &Cat2dOptions,
    grid: &GridOptions,
    cutoff: Option<usize>,
) -> Result<ProtocolReport> {
    if options.times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
        return Err(Error::invalid("times", "snapshot times must be finite and non-negative"));
    }
    let mut report = ProtocolReport::new(Protocol::Cat2d, backend.kind());
    common_params(&mut report, backend);
    report.param("n", options.n);
    report.param("times", &options.times);
    report.param("timing", options.timing);
    let eta = backend.eta();
    let separation = (2 * options.n + 1) as f64 * eta;
    let radius = 2.0 * separation;

    let mut seq = Sequence::new(backend, backend.initial(Modes::Two)?, Modes::Two, options.timing);
    pulse_cat_steps(&mut seq, options.n)?;
    let kept = post_select(&mut seq, backend, &mut report)?;
    if !kept {
        fill_validity(&seq, &mut report, cutoff);
        return Ok(report);
    }
    seq.wait(FRAC_PI_2, backend.pulse_duration(PI))?;
    for k in 0..2 * options.n + 1 {
        let direction = if k % 2 == 0 { Direction::PLUS_Y } else { Direction::MINUS_Y };
        seq.pulse(PI, direction)?;
    }
    fill_validity(&seq, &mut report, cutoff);
    let [final_g, _] = backend.probabilities(&seq.state)?;
    report.diagnostics.insert("final_g".into(), final_g);
    report.diagnostics.insert("radius".into(), radius);

    let start = seq.state.clone();
    let right = backend.project_half_space(&start, Axis::X, Side::Right, 0.0)?;
    let left = backend.project_half_space(&start, Axis::X, Side::Left, 0.0)?;
    let xs = grid.axis(separation)?;
    let mut tracks = [
        PacketTrack { label: "right".into(), times: Vec::new(), centroids: Vec::new() },
        PacketTrack { label: "left".into(), times: Vec::new(), centroids: Vec::new() },
    ];
    let mut radius_error: f64 = 0.0;
    let mut grids_by_time = Vec::new();
    for &t in &options.times {
        let label = snapshot_label(t);
        let state = backend.wait(&start, t)?;
        let density = tag(backend.position_grid(&state, &xs, &xs)?, &report).with_meta("time", t);
        for (track, part) in tracks.iter_mut().zip([&right, &left]) {
            let moved = backend.wait(part, t)?;
            let (x, y) = backend.position_grid(&moved, &xs, &xs)?.centroid()?;
            track.times.push(t);
            track.centroids.push([x, y]);
            radius_error = radius_error.max((x.hypot(y) / radius - 1.0).abs());
        }
        report.snapshots.push(Snapshot {
            label: label.clone(),
            time: t,
            state: backend.snapshot(&state),
        });
        grids_by_time.push((t, density.clone()));
        report.grids.push((label, density));
    }
    report.diagnostics.insert("radius_error".into(), radius_error);
    let senses = [tracks[0].rotation_sense(), tracks[1].rotation_sense()];
    report
        .flags
        .insert("counter_rotating".into(), senses[0] != 0 && senses[0] == -senses[1]);

    // Free evolution has period 2π: any later multiple should reproduce
    // the first snapshot.
    if let Some((t0, first)) = grids_by_time.first() {
        for (t, g) in &grids_by_time[1..] {
            let periods = (t - t0) / (2.0 * PI);
            if periods >= 1.0 && (periods - periods.round()).abs() < 1e-9 {
                report.diagnostics.insert("revival_deviation".into(), g.max_abs_diff(first)?);
            }
        }
    }
    report.tracks = tracks.to_vec();
    report.final_state = Some(backend.snapshot(&start));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::backend::NumericBackend;
    use crate::states::{default_truncation, QuantumState, SuperpositionState};
    use num_complex::Complex64;

    fn grid() -> GridOptions {
        GridOptions { points: 121, extent: None }
    }

    #[test]
    fn pulse_cat_matches_closed_form() {
        for n in 0..4 {
            for eta in [0.3, 1.0, 2.5] {
                let b = AnalyticBackend::new(eta, 100.0).unwrap();
                let r = prepare_cat_pulses(&b, n, &grid(), None).unwrap();
                let x = (-2.0 * eta * eta).exp();
                if n == 0 {
                    assert!((r.probability("e").unwrap() - 0.25 * (2.0 + 2.0 * x)).abs() < 1e-12);
                }
                let a = (2 * n + 1) as f64 * eta;
                let cat = SuperpositionState::cat(InternalLevel::Excited, Complex64::new(0.0, a)).unwrap();
                let StateSnapshot::Analytic(s) = r.final_state.clone().unwrap() else { panic!() };
                assert!((s.fidelity(&cat).unwrap() - 1.0).abs() < 1e-12, "n={n} eta={eta}");
                assert_eq!(r.diagnostics["target_fidelity"], 1.0);
                assert!((r.diagnostics["alpha_max"] - (2 * n + 2) as f64 * eta).abs() < 1e-12);
                let total: f64 = r.probabilities.values().sum();
                assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn analytic_cat_has_four_peaks() {
        let b = AnalyticBackend::new(0.5, 100.0).unwrap();
        let r = prepare_cat_pulses(&b, 2, &grid(), None).unwrap();
        assert_eq!(r.flag("four_peaks"), Some(true));
        assert_eq!(r.flag("central_peak"), Some(false));
    }

    #[test]
    fn analytic_output_does_not_depend_on_omega() {
        let r1 = prepare_cat_pulses(&AnalyticBackend::new(0.5, 1.0).unwrap(), 1, &grid(), None).unwrap();
        let r2 = prepare_cat_pulses(&AnalyticBackend::new(0.5, 300.0).unwrap(), 1, &grid(), None).unwrap();
        assert_eq!(r1.probabilities, r2.probabilities);
        assert_eq!(r1.grid("momentum").unwrap().values(), r2.grid("momentum").unwrap().values());
    }

    #[test]
    fn numeric_cat_tracks_analytic_in_strong_regime() {
        let eta = 0.5;
        let n = 1;
        let cutoff = default_truncation((2 * n + 2) as f64 * eta);
        let b = NumericBackend::new(eta, 300.0, cutoff).unwrap();
        let r = prepare_cat_pulses(&b, n, &grid(), Some(cutoff)).unwrap();
        assert!(r.diagnostics["target_fidelity"] > 0.99);
        assert!(r.validity.truncation_leak.unwrap() < 1e-8);
    }

    #[test]
    fn adiabatic_limit_reproduces_pulse_cat_separation() {
        for n in 0..3 {
            let b = AnalyticBackend::new(0.5, 100.0).unwrap();
            let r = prepare_cat_adiabatic(
                &b,
                &AdiabaticOptions { n, ..Default::default() },
                &grid(),
                None,
            )
            .unwrap();
            let StateSnapshot::Analytic(s) = r.final_state.clone().unwrap() else { panic!() };
            let a = (2 * n + 1) as f64 * 0.5;
            assert_eq!(s.len(), 2);
            for c in s.components() {
                assert_eq!(c.level, InternalLevel::Excited);
                let alpha = c.alpha.get(Axis::X).unwrap();
                assert!(alpha.re.abs() < 1e-12 && (alpha.im.abs() - a).abs() < 1e-12);
                assert!((c.coeff.norm() - s.components()[0].coeff.norm()).abs() < 1e-12);
            }
            assert_eq!(r.diagnostics["ramps"], (4 * n + 2) as f64);
            assert_eq!(r.flag("adiabatic"), Some(true));
        }
    }

    #[test]
    fn adiabatic_warnings() {
        let b = AnalyticBackend::new(0.5, 100.0).unwrap();
        let opts = AdiabaticOptions { n: 0, delta_over_omega: 2.0, tau: 1.0 };
        let r = prepare_cat_adiabatic(&b, &opts, &grid(), None).unwrap();
        assert_eq!(r.flag("adiabatic"), Some(false));
        assert_eq!(r.warnings.len(), 2);
    }

    #[test]
    fn circulating_packets_analytic() {
        let b = AnalyticBackend::new(0.5, 300.0).unwrap();
        let r = prepare_cat_2d(&b, &Cat2dOptions::default(), &GridOptions { points: 161, extent: None }, None).unwrap();
        assert!((r.diagnostics["final_g"] - 1.0).abs() < 1e-12);
        assert_eq!(r.flag("counter_rotating"), Some(true));
        assert!(r.diagnostics["radius_error"] < 0.01);
        assert!(r.diagnostics["revival_deviation"] < 1e-6);
        let right = &r.tracks[0];
        // Clockwise: (R, 0) → (0, −R) after a quarter period.
        let [x, y] = right.centroids[2];
        assert!(x.abs() < 0.05 && (y + 5.0).abs() < 0.05, "{x} {y}");
        assert_eq!(r.grids.len(), 5);
        assert_eq!(r.grids[1].0, "vt0.785398");
    }
}
