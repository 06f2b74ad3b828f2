//! Backend-agnostic drivers for the cat-state and interferometry
//! experiments. Each driver takes a [`Backend`] and returns a
//! [`ProtocolReport`].

mod backend;
mod cat;
mod detect;
mod interferometry;
mod report;
mod sequence;

use serde::{Deserialize, Serialize};

pub use backend::{AnalyticBackend, Backend, BackendKind, NumericBackend, RampDiagnostics, StateSnapshot};
pub use cat::{
    prepare_cat_2d, prepare_cat_adiabatic, prepare_cat_pulses, snapshot_label, AdiabaticOptions, Cat2dOptions,
    PacketTrack, DEFAULT_SNAPSHOT_TIMES, MIN_DETUNING_RATIO,
};
pub use detect::{detect_peaks, local_maxima, Peak, PeakSummary, PEAK_RADIUS, PEAK_THRESHOLD};
pub use interferometry::{purity_probe, ramsey_scan, uniform_phases, PurityInput, RamseyOptions};
pub use report::{
    compare_backends, visibility, Comparison, MixtureEnsemble, Outcome, Protocol, ProtocolReport, Scan, Snapshot,
    Validity,
};
pub use sequence::WaitTiming;

use crate::error::Result;
use crate::states::{default_grid_extent, uniform_axis, DEFAULT_GRID_POINTS};

/// Sampling of momentum or position grids. Without an explicit extent the
/// grid spans ±(2|α| + 6) around the largest packet amplitude |α|.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridOptions {
    pub points: usize,
    pub extent: Option<f64>,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions {
            points: DEFAULT_GRID_POINTS,
            extent: None,
        }
    }
}

impl GridOptions {
    pub fn axis(&self, amplitude: f64) -> Result<Vec<f64>> {
        uniform_axis(self.extent.unwrap_or_else(|| default_grid_extent(amplitude)), self.points)
    }
}

/// Probability changes below this under a 25% larger cutoff count as
/// converged.
pub const TRUNCATION_TOLERANCE: f64 = 1e-6;

/// Reruns a numeric protocol with the cutoff raised by 25% and records the
/// largest change in any outcome probability or scan value.
pub fn check_truncation(
    backend: &NumericBackend,
    report: &mut ProtocolReport,
    run: impl Fn(&NumericBackend) -> Result<ProtocolReport>,
) -> Result<f64> {
    let larger = backend.resized((backend.cutoff() as f64 * 1.25).ceil() as usize)?;
    let other = run(&larger)?;
    let mut shift: f64 = 0.0;
    for (key, p) in &report.probabilities {
        if let Some(q) = other.probability(key) {
            shift = shift.max((p - q).abs());
        }
    }
    if let (Some(a), Some(b)) = (&report.scan, &other.scan) {
        for (p, q) in a.results.iter().zip(&b.results) {
            shift = shift.max((p - q).abs());
        }
    }
    report.validity.truncation_shift = Some(shift);
    let converged = shift < TRUNCATION_TOLERANCE;
    report.flags.insert("truncation_converged".into(), converged);
    if !converged {
        report.warnings.push(format!(
            "raising the cutoff from {} to {} changes probabilities by {shift:.2e}",
            backend.cutoff(),
            larger.cutoff()
        ));
    }
    Ok(shift)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::default_truncation;

    #[test]
    fn truncation_check_on_converged_run() {
        let eta = 0.5;
        let cutoff = default_truncation(4.0 * eta);
        let b = NumericBackend::new(eta, 100.0, cutoff).unwrap();
        let grid = GridOptions { points: 41, extent: None };
        let mut r = prepare_cat_pulses(&b, 1, &grid, Some(cutoff)).unwrap();
        let shift = check_truncation(&b, &mut r, |nb| prepare_cat_pulses(nb, 1, &grid, Some(nb.cutoff()))).unwrap();
        assert!(shift < TRUNCATION_TOLERANCE);
        assert_eq!(r.flag("truncation_converged"), Some(true));
    }

    #[test]
    fn identical_runs_compare_perfectly() {
        let b = AnalyticBackend::new(0.5, 100.0).unwrap();
        let grid = GridOptions { points: 41, extent: None };
        let a = prepare_cat_pulses(&b, 2, &grid, None).unwrap();
        let c = compare_backends(&a, &a).unwrap();
        assert!((c.final_fidelity.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(c.max_grid_deviation, Some(0.0));
        assert!(c.probability_deltas.values().all(|d| *d == 0.0));
    }
}
