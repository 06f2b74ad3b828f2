use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::{BackendChoice, ExperimentConfig};
use super::output::{emit_grid, emit_scan, sha256_file, write_json};
use crate::error::Result;
use crate::protocols::{
    check_truncation, compare_backends, prepare_cat_2d, prepare_cat_adiabatic, prepare_cat_pulses, purity_probe,
    ramsey_scan, AdiabaticOptions, AnalyticBackend, Backend, BackendKind, Cat2dOptions, Comparison, GridOptions,
    NumericBackend, Protocol, ProtocolReport, RamseyOptions,
};
use crate::states::default_truncation;

/// Largest coherent amplitude |α| a protocol reaches, used to size the
/// Fock space.
pub fn amplitude_bound(protocol: Protocol, eta: f64, n: usize) -> f64 {
    let k = (2 * n + 1) as f64;
    match protocol {
        Protocol::Cat1dPulses | Protocol::Cat1dAdiabatic | Protocol::Cat2d => (k + 1.0) * eta,
        Protocol::Purity => 3.0 * eta,
        Protocol::Ramsey => 2.0 * k * eta,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WrittenFile {
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub version: &'static str,
    pub config: ExperimentConfig,
    pub started: String,
    pub finished: String,
    pub files: Vec<WrittenFile>,
    /// Warnings raised by any backend, prefixed with its name.
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub reports: Vec<ProtocolReport>,
    #[serde(skip)]
    pub comparison: Option<Comparison>,
}

impl RunManifest {
    pub fn report(&self, backend: BackendKind) -> Option<&ProtocolReport> {
        self.reports.iter().find(|r| r.backend == backend)
    }
}

fn grid_options(cfg: &ExperimentConfig) -> GridOptions {
    GridOptions {
        points: cfg.output.grid_points.unwrap_or(crate::states::DEFAULT_GRID_POINTS),
        extent: cfg.output.grid_extent,
    }
}

/// Runs the protocol of a resolved config on one backend.
pub fn run_protocol<B: Backend>(backend: &B, cfg: &ExperimentConfig, cutoff: Option<usize>) -> Result<ProtocolReport> {
    let grid = grid_options(cfg);
    let n = cfg.n.unwrap_or(0);
    let timing = cfg.wait_timing.unwrap_or_default();
    match cfg.protocol {
        Protocol::Cat1dPulses => prepare_cat_pulses(backend, n, &grid, cutoff),
        Protocol::Cat1dAdiabatic => {
            let defaults = AdiabaticOptions::default();
            let options = AdiabaticOptions {
                n,
                delta_over_omega: cfg.delta_over_omega.unwrap_or(defaults.delta_over_omega),
                tau: cfg.tau.unwrap_or(defaults.tau),
            };
            prepare_cat_adiabatic(backend, &options, &grid, cutoff)
        }
        Protocol::Cat2d => {
            let options = Cat2dOptions {
                n,
                times: cfg.output.snapshot_times.clone().unwrap_or_default(),
                timing,
            };
            prepare_cat_2d(backend, &options, &grid, cutoff)
        }
        Protocol::Purity => {
            let input = cfg.input.unwrap_or(crate::protocols::PurityInput::Cat);
            purity_probe(backend, &input.ensemble(backend.eta())?, timing, &grid)
        }
        Protocol::Ramsey => {
            let options = RamseyOptions {
                n,
                alphas: cfg.alphas.clone().unwrap_or_default(),
                boundary: cfg.boundary,
                timing,
            };
            ramsey_scan(backend, &options)
        }
    }
}

/// The numeric backend a resolved config asks for.
pub fn numeric_backend(cfg: &ExperimentConfig) -> Result<NumericBackend> {
    let eta = cfg.eta.unwrap_or(0.5);
    let cutoff = cfg
        .numeric
        .truncation
        .unwrap_or_else(|| default_truncation(amplitude_bound(cfg.protocol, eta, cfg.n.unwrap_or(0))));
    let mut backend = NumericBackend::new(eta, cfg.omega_ratio.unwrap_or(100.0), cutoff)?;
    if let Some(steps) = cfg.numeric.ramp_steps {
        backend = backend.with_ramp_steps(steps)?;
    }
    if let Some(width) = cfg.numeric.edge_width {
        backend = backend.with_edge_width(width)?;
    }
    Ok(backend)
}

fn run_numeric(cfg: &ExperimentConfig) -> Result<ProtocolReport> {
    let backend = numeric_backend(cfg)?;
    let mut report = run_protocol(&backend, cfg, Some(backend.cutoff()))?;
    if cfg.numeric.check_truncation {
        check_truncation(&backend, &mut report, |larger| run_protocol(larger, cfg, Some(larger.cutoff())))?;
    }
    Ok(report)
}

fn record(files: &mut Vec<WrittenFile>, path: &Path) -> Result<()> {
    files.push(WrittenFile {
        path: path.to_path_buf(),
        sha256: sha256_file(path)?,
        bytes: fs::metadata(path)?.len(),
    });
    Ok(())
}

/// Resolves the config, runs the requested backends and writes every
/// report, grid and scan plus `manifest.json` into the output directory.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunManifest> {
    let started = chrono::Utc::now().to_rfc3339();
    let cfg = config.resolved()?;
    let dir = cfg.output.directory.clone().unwrap_or_else(|| PathBuf::from(super::DEFAULT_OUTPUT_DIR));
    fs::create_dir_all(&dir)?;

    let mut reports = Vec::new();
    if matches!(cfg.backend, BackendChoice::Analytic | BackendChoice::Both) {
        let backend = AnalyticBackend::new(cfg.eta.unwrap_or(0.5), cfg.omega_ratio.unwrap_or(100.0))?;
        reports.push(run_protocol(&backend, &cfg, None)?);
    }
    if matches!(cfg.backend, BackendChoice::Numeric | BackendChoice::Both) {
        reports.push(run_numeric(&cfg)?);
    }
    let comparison = match reports.as_slice() {
        [a, b] => Some(compare_backends(a, b)?),
        _ => None,
    };

    let protocol = cfg.protocol.name();
    let mut files = Vec::new();
    let mut warnings = Vec::new();
    for report in &reports {
        let stem = format!("{protocol}_{}", report.backend);
        let path = dir.join(format!("{stem}_report.json"));
        write_json(report, &path)?;
        record(&mut files, &path)?;
        for (name, grid) in &report.grids {
            let path = dir.join(format!("{stem}_{name}.csv"));
            emit_grid(grid, &path)?;
            record(&mut files, &path)?;
        }
        if report.scan.is_some() {
            for path in emit_scan(report, &dir.join(format!("{stem}_scan.csv")), comparison.as_ref())? {
                record(&mut files, &path)?;
            }
        }
        warnings.extend(report.warnings.iter().map(|w| format!("{}: {w}", report.backend)));
    }
    if let Some(c) = &comparison {
        let path = dir.join(format!("{protocol}_comparison.json"));
        write_json(c, &path)?;
        record(&mut files, &path)?;
    }

    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        started,
        finished: chrono::Utc::now().to_rfc3339(),
        files,
        warnings,
        reports,
        comparison,
    };
    write_json(&manifest, &dir.join("manifest.json"))?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(protocol: Protocol, dir: &Path) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(protocol);
        c.output.directory = Some(dir.to_path_buf());
        c.output.grid_points = Some(31);
        c
    }

    #[test]
    fn analytic_run_writes_reproducible_files() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let mut ca = config(Protocol::Cat1dPulses, a.path());
        ca.backend = BackendChoice::Analytic;
        let mut cb = ca.clone();
        cb.output.directory = Some(b.path().to_path_buf());
        let ma = run_experiment(&ca).unwrap();
        let mb = run_experiment(&cb).unwrap();
        assert_eq!(ma.files.len(), 2);
        for (x, y) in ma.files.iter().zip(&mb.files) {
            assert_eq!(x.sha256, y.sha256);
            assert_eq!(x.path.file_name(), y.path.file_name());
        }
        assert!(a.path().join("manifest.json").exists());
        assert!(a.path().join("cat1d-pulses_analytic_momentum.csv").exists());
    }

    #[test]
    fn both_backends_are_compared() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = config(Protocol::Purity, dir.path());
        c.eta = Some(1.0);
        let m = run_experiment(&c).unwrap();
        let cmp = m.comparison.as_ref().unwrap();
        assert!(cmp.probability_deltas.values().all(|d| d.abs() < 0.05));
        assert!(dir.path().join("purity_comparison.json").exists());
        assert!(m.report(BackendKind::Numeric).is_some());
    }

    #[test]
    fn amplitude_bounds() {
        assert_eq!(amplitude_bound(Protocol::Cat2d, 0.5, 2), 3.0);
        assert_eq!(amplitude_bound(Protocol::Ramsey, 2.5, 0), 5.0);
    }
}
