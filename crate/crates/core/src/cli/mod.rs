//! Command-line front end: JSON experiment configs, output files and the
//! `ioncat` argument parser.

pub mod config;
pub mod output;
pub mod run;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;

pub use config::{BackendChoice, ExperimentConfig, NumericControls, OutputControls, DEFAULT_OUTPUT_DIR};
pub use output::{emit_grid, emit_scan, grid_to_csv, parse_grid};
pub use run::{amplitude_bound, numeric_backend, run_experiment, run_protocol, RunManifest, WrittenFile};

use crate::error::Result;
use crate::protocols::{Protocol, PurityInput, WaitTiming};

#[derive(Debug, Parser)]
#[command(name = "ioncat", version, about = "Trapped-ion cat states and interferometry beyond the Lamb-Dicke regime")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run an experiment described by a JSON config file.
    Run {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Cat state from a train of resonant pulses.
    #[command(name = "cat1d-pulses")]
    Cat1dPulses(Overrides),
    /// Cat state from detuning ramps.
    #[command(name = "cat1d-adiabatic")]
    Cat1dAdiabatic(Overrides),
    /// Counter-rotating packets in two dimensions.
    Cat2d(Overrides),
    /// Distinguish a cat from the matching mixture.
    Purity(Overrides),
    /// Phase scan of the ion interferometer.
    Ramsey(Overrides),
}

fn parse_named<T: DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

/// A comma-separated list given as one argument.
type ValueList = Vec<f64>;

fn parse_list(s: &str) -> std::result::Result<ValueList, String> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}")))
        .collect()
}

/// Command-line values; each one replaces the matching config field.
#[derive(Debug, Default, Clone, Args)]
pub struct Overrides {
    #[arg(long, value_enum)]
    pub backend: Option<BackendChoice>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Ω/ν.
    #[arg(long)]
    pub omega_ratio: Option<f64>,
    #[arg(long)]
    pub delta_over_omega: Option<f64>,
    /// Ω·τ per ramp.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Comma-separated rotation phases.
    #[arg(long, value_parser = parse_list)]
    pub alphas: Option<ValueList>,
    /// `cat` or `mixture`.
    #[arg(long, value_parser = parse_named::<PurityInput>)]
    pub input: Option<PurityInput>,
    #[arg(long, allow_hyphen_values = true)]
    pub boundary: Option<f64>,
    /// `exact` or `pulse-centred`.
    #[arg(long, value_parser = parse_named::<WaitTiming>)]
    pub wait_timing: Option<WaitTiming>,
    #[arg(long)]
    pub truncation: Option<usize>,
    #[arg(long)]
    pub ramp_steps: Option<usize>,
    #[arg(long)]
    pub edge_width: Option<f64>,
    #[arg(long)]
    pub check_truncation: bool,
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub grid_points: Option<usize>,
    #[arg(long)]
    pub grid_extent: Option<f64>,
    /// Comma-separated cat2d snapshot times.
    #[arg(long, value_parser = parse_list)]
    pub snapshot_times: Option<ValueList>,
}

impl Overrides {
    pub fn apply(self, cfg: &mut ExperimentConfig) {
        macro_rules! set {
            ($($field:ident),*) => { $( if self.$field.is_some() { cfg.$field = self.$field; } )* };
        }
        set!(eta, n, omega_ratio, delta_over_omega, tau, alphas, input, boundary, wait_timing);
        if let Some(b) = self.backend {
            cfg.backend = b;
        }
        if self.truncation.is_some() {
            cfg.numeric.truncation = self.truncation;
        }
        if self.ramp_steps.is_some() {
            cfg.numeric.ramp_steps = self.ramp_steps;
        }
        if self.edge_width.is_some() {
            cfg.numeric.edge_width = self.edge_width;
        }
        cfg.numeric.check_truncation |= self.check_truncation;
        if self.output.is_some() {
            cfg.output.directory = self.output;
        }
        if self.grid_points.is_some() {
            cfg.output.grid_points = self.grid_points;
        }
        if self.grid_extent.is_some() {
            cfg.output.grid_extent = self.grid_extent;
        }
        if self.snapshot_times.is_some() {
            cfg.output.snapshot_times = self.snapshot_times;
        }
    }
}

impl Command {
    pub fn into_config(self) -> Result<ExperimentConfig> {
        let (mut cfg, overrides) = match self {
            Command::Run { config, overrides } => (ExperimentConfig::load(&config)?, overrides),
            Command::Cat1dPulses(o) => (ExperimentConfig::new(Protocol::Cat1dPulses), o),
            Command::Cat1dAdiabatic(o) => (ExperimentConfig::new(Protocol::Cat1dAdiabatic), o),
            Command::Cat2d(o) => (ExperimentConfig::new(Protocol::Cat2d), o),
            Command::Purity(o) => (ExperimentConfig::new(Protocol::Purity), o),
            Command::Ramsey(o) => (ExperimentConfig::new(Protocol::Ramsey), o),
        };
        overrides.apply(&mut cfg);
        Ok(cfg)
    }
}

fn summarize(manifest: &RunManifest) {
    for report in &manifest.reports {
        println!("{} [{}]: {:?}", report.protocol, report.backend, report.outcome);
        for (k, v) in &report.probabilities {
            println!("  P_{k} = {v:.6}");
        }
        for (k, v) in &report.diagnostics {
            println!("  {k} = {v:.6}");
        }
        for (k, v) in &report.flags {
            println!("  {k}: {v}");
        }
    }
    if let Some(c) = &manifest.comparison {
        if let Some(f) = c.final_fidelity {
            println!("backend fidelity = {f:.6}");
        }
    }
    for w in &manifest.warnings {
        eprintln!("warning: {w}");
    }
    println!("wrote {} files", manifest.files.len() + 1);
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match cli.command.into_config().and_then(|cfg| run_experiment(&cfg)) {
        Ok(manifest) => {
            summarize(&manifest);
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_replace_config_fields() {
        let cli = Cli::try_parse_from([
            "ioncat",
            "ramsey",
            "--eta",
            "1.5",
            "--alphas",
            "0,1.5",
            "--boundary",
            "-0.5",
            "--wait-timing",
            "exact",
            "--backend",
            "analytic",
        ])
        .unwrap();
        let cfg = cli.command.into_config().unwrap();
        assert_eq!(cfg.eta, Some(1.5));
        assert_eq!(cfg.alphas, Some(vec![0.0, 1.5]));
        assert_eq!(cfg.boundary, Some(-0.5));
        assert_eq!(cfg.wait_timing, Some(WaitTiming::Exact));
        assert_eq!(cfg.backend, BackendChoice::Analytic);
    }

    #[test]
    fn bad_arguments_exit_with_two() {
        assert_eq!(main_with_args(["ioncat", "purity", "--input", "soup"]), 2);
        assert_eq!(main_with_args(["ioncat", "cat2d", "--eta", "-1", "-o", "/nonexistent/x"]), 2);
    }
}
