use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::backend::{check_finite, Backend};
use super::cat::{common_params, tag, twin};
use super::report::{visibility, MixtureEnsemble, Protocol, ProtocolReport, Scan, Snapshot};
use super::sequence::{Sequence, WaitTiming};
use super::GridOptions;
use crate::analytic::Direction;
use crate::error::{Error, Result};
use crate::numeric::Side;
use crate::states::{Axis, DensityGrid, InternalLevel, Modes, SuperpositionState};

/// Inputs to the purity test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PurityInput {
    /// K(|η⟩ + |−η⟩)|e⟩.
    Cat,
    /// ½|η⟩⟨η| ⊗ |e⟩⟨e| + ½|−η⟩⟨−η| ⊗ |e⟩⟨e|.
    Mixture,
}

impl PurityInput {
    pub fn ensemble(self, eta: f64) -> Result<MixtureEnsemble> {
        let alpha = Complex64::new(eta, 0.0);
        match self {
            PurityInput::Cat => MixtureEnsemble::pure(SuperpositionState::cat(InternalLevel::Excited, alpha)?),
            PurityInput::Mixture => MixtureEnsemble::new(vec![
                (0.5, SuperpositionState::coherent(InternalLevel::Excited, alpha)),
                (0.5, SuperpositionState::coherent(InternalLevel::Excited, -alpha)),
            ]),
        }
    }
}

/// Wait a quarter period, then π/2(−) and π/2(+) along x, and read out
/// the internal level. Each member of the ensemble is run separately and
/// the outcome probabilities are averaged with the ensemble weights.
pub fn purity_probe<B: Backend>(
    backend: &B,
    input: &MixtureEnsemble,
    timing: WaitTiming,
    grid: &GridOptions,
) -> Result<ProtocolReport> {
    let mut report = ProtocolReport::new(Protocol::Purity, backend.kind());
    common_params(&mut report, backend);
    report.param("weights", input.members().iter().map(|(w, _)| *w).collect::<Vec<_>>());
    report.param("timing", timing);

    let mut pg = 0.0;
    let mut pe = 0.0;
    let mut input_grids = Vec::new();
    let amplitude = input
        .members()
        .iter()
        .map(|(_, s)| s.max_amplitude())
        .fold(0.0, f64::max);
    let points = grid.axis(amplitude)?;
    for (k, (weight, member)) in input.members().iter().enumerate() {
        if member.modes() != Modes::One {
            return Err(Error::ShapeMismatch("the purity test needs one-mode states".into()));
        }
        let start = backend.from_superposition(member)?;
        input_grids.push((*weight, backend.momentum_grid(&start, &points)?));
        let mut seq = Sequence::new(backend, start, Modes::One, timing);
        seq.wait(FRAC_PI_2, backend.pulse_duration(FRAC_PI_2))?;
        seq.pulse(FRAC_PI_2, Direction::MINUS_X)?;
        seq.pulse(FRAC_PI_2, Direction::PLUS_X)?;
        let [g, e] = backend.probabilities(&seq.state)?;
        pg += weight * g;
        pe += weight * e;
        report.diagnostics.insert(format!("member_{k}_g"), g);
        report.validity.motion = report.validity.motion.max(seq.motion_indicator());
        if let Some(leak) = backend_leak(&seq) {
            report.validity.truncation_leak = Some(report.validity.truncation_leak.unwrap_or(0.0).max(leak));
        }
        if input.is_pure() {
            report.final_state = Some(backend.snapshot(&seq.state));
        }
    }
    report.probabilities.insert("g".into(), pg);
    report.probabilities.insert("e".into(), pe);
    let density = tag(DensityGrid::weighted_sum(&input_grids)?, &report);
    report.grids.push(("input_momentum".into(), density));
    Ok(report)
}

fn backend_leak<B: Backend>(seq: &Sequence<'_, B>) -> Option<f64> {
    Some(seq.max_leak()).filter(|&l| l > 0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RamseyOptions {
    /// Intermediate π-pulse pairs that widen the packet separation.
    pub n: usize,
    /// Phases of the right-packet rotation.
    pub alphas: Vec<f64>,
    /// Rotation edge in x̃; defaults to the midpoint between the packets.
    pub boundary: Option<f64>,
    pub timing: WaitTiming,
}

impl Default for RamseyOptions {
    fn default() -> Self {
        RamseyOptions {
            n: 0,
            alphas: uniform_phases(21),
            boundary: None,
            timing: WaitTiming::default(),
        }
    }
}

/// `points` phases evenly spaced on [0, 2π].
pub fn uniform_phases(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points).map(|k| 2.0 * PI * k as f64 / (points - 1) as f64).collect(),
    }
}

/// Pulses that split the packets: π/2(+), then n pairs [π(−), π(+)].
fn split_pulses(n: usize) -> Vec<(f64, Direction)> {
    let mut pulses = vec![(FRAC_PI_2, Direction::PLUS_X)];
    for _ in 0..n {
        pulses.push((PI, Direction::MINUS_X));
        pulses.push((PI, Direction::PLUS_X));
    }
    pulses
}

/// After half a period the packets are mirrored, so the intermediate
/// pulses are replayed in reverse order with opposite directions, and a
/// final π/2(−) closes the interferometer.
fn recombine_pulses(n: usize) -> Vec<(f64, Direction)> {
    let split = split_pulses(n);
    let mut pulses: Vec<_> = split[1..].iter().rev().map(|&(a, d)| (a, d.reversed())).collect();
    pulses.push((FRAC_PI_2, Direction::MINUS_X));
    pulses
}

/// Midpoint in x̃ between the mean g and e packet positions.
fn packet_midpoint(state: &SuperpositionState) -> Result<(f64, f64)> {
    let mean_x = |level| {
        let (w, x) = state
            .components()
            .iter()
            .filter(|c| c.level == level)
            .fold((0.0, 0.0), |(w, x), c| {
                let p = c.coeff.norm_sqr();
                (w + p, x + p * 2.0 * c.alpha.get(Axis::X).unwrap_or_default().re)
            });
        (w > 0.0).then(|| x / w)
    };
    match (mean_x(InternalLevel::Ground), mean_x(InternalLevel::Excited)) {
        (Some(g), Some(e)) => Ok((0.5 * (g + e), e)),
        _ => Err(Error::invalid("boundary", "the split state does not populate both levels")),
    }
}

fn run_to_split<'a, B: Backend>(backend: &'a B, n: usize, timing: WaitTiming) -> Result<Sequence<'a, B>> {
    let mut seq = Sequence::new(backend, backend.initial(Modes::One)?, Modes::One, timing);
    for (area, direction) in split_pulses(n) {
        seq.pulse(area, direction)?;
    }
    // The rotation itself is instantaneous.
    seq.wait(FRAC_PI_2, 0.0)?;
    Ok(seq)
}

fn ramsey_point<B: Backend>(
    backend: &B,
    n: usize,
    alpha: f64,
    boundary: f64,
    timing: WaitTiming,
) -> Result<(f64, f64, f64)> {
    let mut seq = run_to_split(backend, n, timing)?;
    seq.apply(|s| backend.rotate_half_space(s, alpha, Side::Right, boundary))?;
    let recombine = recombine_pulses(n);
    seq.wait(FRAC_PI_2, backend.pulse_duration(recombine[0].0))?;
    for (area, direction) in recombine {
        seq.pulse(area, direction)?;
    }
    let [_, pe] = backend.probabilities(&seq.state)?;
    Ok((pe, seq.motion_indicator(), seq.max_leak()))
}

/// Excited-state probability after splitting the packets, rotating the
/// internal state of the right one by `alpha` and recombining. Ideally
/// P_e = cos²(α/2).
pub fn ramsey_scan<B: Backend>(backend: &B, options: &RamseyOptions) -> Result<ProtocolReport> {
    if options.alphas.is_empty() {
        return Err(Error::invalid("alphas", "the phase sweep is empty"));
    }
    for &a in &options.alphas {
        check_finite("alphas", a)?;
    }
    let mut report = ProtocolReport::new(Protocol::Ramsey, backend.kind());
    common_params(&mut report, backend);
    report.param("n", options.n);
    report.param("alphas", &options.alphas);
    report.param("timing", options.timing);

    let analytic = twin(backend)?;
    let ideal_split = run_to_split(&analytic, options.n, WaitTiming::Exact)?;
    let (midpoint, right_packet) = packet_midpoint(&ideal_split.state)?;
    let boundary = options.boundary.unwrap_or(midpoint);
    check_finite("boundary", boundary)?;
    report.param("boundary", boundary);
    if (right_packet - boundary).abs() < 2.0 {
        report.warnings.push(format!(
            "packets sit within two widths of the rotation edge at x̃ = {boundary:.3}"
        ));
    }

    let split = run_to_split(backend, options.n, options.timing)?;
    report.snapshots.push(Snapshot {
        label: "split".into(),
        time: 0.0,
        state: backend.snapshot(&split.state),
    });

    let points: Vec<(f64, f64, f64)> = options
        .alphas
        .par_iter()
        .map(|&alpha| ramsey_point(backend, options.n, alpha, boundary, options.timing))
        .collect::<Result<_>>()?;
    let results: Vec<f64> = points.iter().map(|p| p.0).collect();
    report.validity.motion = points.iter().map(|p| p.1).fold(0.0, f64::max);
    let leak = points.iter().map(|p| p.2).fold(0.0, f64::max);
    if leak > 0.0 {
        report.validity.truncation_leak = Some(leak);
    }
    let deviation = options
        .alphas
        .iter()
        .zip(&results)
        .map(|(a, p)| (p - (0.5 * a).cos().powi(2)).abs())
        .fold(0.0, f64::max);
    report.diagnostics.insert("visibility".into(), visibility(&results));
    report.diagnostics.insert("max_deviation".into(), deviation);
    report.scan = Some(Scan {
        parameter: "alpha".into(),
        observable: "P_e".into(),
        values: options.alphas.clone(),
        results,
    });
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::backend::{AnalyticBackend, NumericBackend};
    use crate::states::default_truncation;

    fn grid() -> GridOptions {
        GridOptions { points: 81, extent: None }
    }

    #[test]
    fn mixture_probability_includes_overlap() {
        for eta in [0.5, 1.5, 2.5, 4.0] {
            let b = AnalyticBackend::new(eta, 100.0).unwrap();
            let mix = PurityInput::Mixture.ensemble(eta).unwrap();
            let r = purity_probe(&b, &mix, WaitTiming::Exact, &grid()).unwrap();
            let expected = 0.5 * (1.0 + (-2.0 * eta * eta).exp());
            assert!((r.probability("g").unwrap() - expected).abs() < 1e-12);
            assert!((r.probability("g").unwrap() + r.probability("e").unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cat_probability_tends_to_three_quarters() {
        for eta in [0.5, 1.5, 2.5] {
            let b = AnalyticBackend::new(eta, 100.0).unwrap();
            let cat = PurityInput::Cat.ensemble(eta).unwrap();
            let r = purity_probe(&b, &cat, WaitTiming::Exact, &grid()).unwrap();
            let x = (-2.0 * eta * eta).exp();
            let expected = (6.0 + 8.0 * x + 2.0 * x.powi(4)) / (4.0 * (2.0 + 2.0 * x));
            assert!((r.probability("g").unwrap() - expected).abs() < 1e-12, "eta={eta}");
        }
    }

    #[test]
    fn split_boundary_is_halfway() {
        for n in 0..3 {
            let b = AnalyticBackend::new(2.5, 100.0).unwrap();
            let seq = run_to_split(&b, n, WaitTiming::Exact).unwrap();
            let (mid, right) = packet_midpoint(&seq.state).unwrap();
            assert!(right > mid);
            assert!((mid - 2.5).abs() < 1e-9, "n={n} mid={mid}");
        }
    }

    #[test]
    fn analytic_fringe_is_cosine_squared() {
        for n in 0..2 {
            let b = AnalyticBackend::new(2.5, 100.0).unwrap();
            let opts = RamseyOptions { n, ..Default::default() };
            let r = ramsey_scan(&b, &opts).unwrap();
            assert!(r.diagnostics["max_deviation"] < 5e-2, "n={n}");
            let scan = r.scan.unwrap();
            assert!((scan.results[0] - 1.0).abs() < 1e-9);
            assert!(scan.results[10] < 5e-2);
        }
    }

    #[test]
    fn numeric_fringe_at_strong_excitation() {
        let eta = 2.5;
        let cutoff = default_truncation(2.0 * eta);
        let b = NumericBackend::new(eta, 100.0, cutoff).unwrap();
        let opts = RamseyOptions { alphas: uniform_phases(5), ..Default::default() };
        let r = ramsey_scan(&b, &opts).unwrap();
        assert!(r.diagnostics["visibility"] > 0.9);
    }

    #[test]
    fn empty_sweep_is_rejected() {
        let b = AnalyticBackend::new(2.5, 100.0).unwrap();
        let opts = RamseyOptions { alphas: vec![], ..Default::default() };
        assert!(ramsey_scan(&b, &opts).is_err());
    }
}
