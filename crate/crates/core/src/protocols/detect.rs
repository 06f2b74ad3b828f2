use serde::Serialize;

use crate::states::DensityGrid;

/// Local maxima below this fraction of the global max of |Re ρ| are noise.
pub const PEAK_THRESHOLD: f64 = 0.2;

/// How far (in p̃ units) a maximum may sit from its expected centre.
pub const PEAK_RADIUS: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Peak {
    pub row: f64,
    pub col: f64,
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeakSummary {
    /// One maximum near each of (±c, ±c).
    pub four_peaks: bool,
    /// A maximum near the origin.
    pub central_peak: bool,
    pub peaks: Vec<Peak>,
}

/// Local maxima of |Re ρ| (8-neighbourhood, grid edges excluded) above
/// `threshold` times the global maximum.
pub fn local_maxima(grid: &DensityGrid, threshold: f64) -> Vec<Peak> {
    let (rows, cols) = grid.shape();
    let height = |i: usize, j: usize| grid.get(i, j).re.abs();
    let global = grid.values().iter().map(|z| z.re.abs()).fold(0.0, f64::max);
    if global == 0.0 || rows < 3 || cols < 3 {
        return Vec::new();
    }
    let mut peaks = Vec::new();
    for i in 1..rows - 1 {
        for j in 1..cols - 1 {
            let h = height(i, j);
            if h < threshold * global {
                continue;
            }
            let is_max = (i - 1..=i + 1)
                .flat_map(|a| (j - 1..=j + 1).map(move |b| (a, b)))
                .filter(|&(a, b)| (a, b) != (i, j))
                .all(|(a, b)| height(a, b) <= h);
            if is_max {
                peaks.push(Peak {
                    row: grid.rows.values[i],
                    col: grid.cols.values[j],
                    height: h,
                });
            }
        }
    }
    peaks
}

/// Looks for the cat signature of a momentum coherence grid: maxima at the
/// four corners (±centre, ±centre), and separately one near the origin.
pub fn detect_peaks(grid: &DensityGrid, centre: f64) -> PeakSummary {
    let peaks = local_maxima(grid, PEAK_THRESHOLD);
    let near = |r: f64, c: f64| {
        peaks
            .iter()
            .any(|p| (p.row - r).hypot(p.col - c) <= PEAK_RADIUS)
    };
    let four_peaks = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
        .iter()
        .all(|&(sr, sc)| near(sr * centre, sc * centre));
    PeakSummary {
        four_peaks,
        central_peak: near(0.0, 0.0),
        peaks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{mixture_momentum_density, momentum_density};
    use crate::states::{uniform_axis, InternalLevel, SuperpositionState};
    use num_complex::Complex64;

    #[test]
    fn cat_has_four_peaks_and_mixture_two() {
        let eta = 2.5;
        let points = uniform_axis(10.0, 161).unwrap();
        let alpha = Complex64::new(0.0, eta);
        let cat = SuperpositionState::cat(InternalLevel::Excited, alpha).unwrap();
        let summary = detect_peaks(&momentum_density(&cat, &points).unwrap(), 2.0 * eta);
        assert!(summary.four_peaks);
        assert!(!summary.central_peak);
        assert_eq!(summary.peaks.len(), 4);

        let parts = vec![
            (0.5, SuperpositionState::coherent(InternalLevel::Excited, alpha)),
            (0.5, SuperpositionState::coherent(InternalLevel::Excited, -alpha)),
        ];
        let mixed = mixture_momentum_density(&parts, &points).unwrap();
        let summary = detect_peaks(&mixed, 2.0 * eta);
        assert!(!summary.four_peaks);
        assert_eq!(summary.peaks.len(), 2);
    }

    #[test]
    fn vacuum_has_only_a_central_peak() {
        let points = uniform_axis(6.0, 61).unwrap();
        let vac = SuperpositionState::coherent(InternalLevel::Ground, Complex64::new(0.0, 0.0));
        let summary = detect_peaks(&momentum_density(&vac, &points).unwrap(), 3.0);
        assert!(summary.central_peak);
        assert!(!summary.four_peaks);
    }
}
