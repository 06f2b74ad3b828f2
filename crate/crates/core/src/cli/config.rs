use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocols::{uniform_phases, Protocol, PurityInput, WaitTiming, DEFAULT_SNAPSHOT_TIMES};
use crate::states::DEFAULT_GRID_POINTS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BackendChoice {
    Analytic,
    Numeric,
    #[default]
    Both,
}

/// Controls that change how the numeric backend computes, not what.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericControls {
    /// Fock levels per mode; default from the largest amplitude reached.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ramp_steps: Option<usize>,
    /// Smoothing of the half-space rotation edge in x̃ units.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_width: Option<f64>,
    /// Rerun with 25% more levels and report the probability shift.
    #[serde(default)]
    pub check_truncation: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputControls {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directory: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    /// Half-width of the grids in p/p0 or x/x0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_extent: Option<f64>,
    /// Free-evolution times of the cat2d snapshots, in 1/ν.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_times: Option<Vec<f64>>,
}

/// One experiment. Fields left out take the defaults of the protocol;
/// [`ExperimentConfig::resolved`] fills them in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub protocol: Protocol,
    #[serde(default)]
    pub backend: BackendChoice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Ω/ν.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_over_omega: Option<f64>,
    /// Ω·τ per ramp.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PurityInput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wait_timing: Option<WaitTiming>,
    #[serde(default)]
    pub numeric: NumericControls,
    #[serde(default)]
    pub output: OutputControls,
}

/// Per-protocol defaults, taken from the published figure parameters.
struct Defaults {
    eta: f64,
    n: usize,
    omega_ratio: f64,
}

fn defaults(protocol: Protocol) -> Defaults {
    match protocol {
        Protocol::Cat1dPulses | Protocol::Cat1dAdiabatic => Defaults {
            eta: 0.5,
            n: 2,
            omega_ratio: 100.0,
        },
        Protocol::Cat2d => Defaults {
            eta: 0.5,
            n: 2,
            omega_ratio: 300.0,
        },
        Protocol::Purity => Defaults {
            eta: 2.5,
            n: 0,
            omega_ratio: 100.0,
        },
        Protocol::Ramsey => Defaults {
            eta: 2.5,
            n: 0,
            omega_ratio: 100.0,
        },
    }
}

pub const DEFAULT_OUTPUT_DIR: &str = "ioncat-out";

impl ExperimentConfig {
    pub fn new(protocol: Protocol) -> Self {
        ExperimentConfig {
            protocol,
            backend: BackendChoice::default(),
            eta: None,
            n: None,
            omega_ratio: None,
            delta_over_omega: None,
            tau: None,
            alphas: None,
            input: None,
            boundary: None,
            wait_timing: None,
            numeric: NumericControls::default(),
            output: OutputControls::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(path, e.into_inner().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    /// Copy with every protocol parameter set, after validation.
    pub fn resolved(&self) -> Result<ExperimentConfig> {
        let p = self.protocol;
        let d = defaults(p);
        let mut out = self.clone();
        out.eta = Some(self.eta.unwrap_or(d.eta));
        out.omega_ratio = Some(self.omega_ratio.unwrap_or(d.omega_ratio));
        out.wait_timing = Some(self.wait_timing.unwrap_or_default());
        out.output.grid_points = Some(self.output.grid_points.unwrap_or(DEFAULT_GRID_POINTS));
        out.output.directory = Some(
            self.output
                .directory
                .clone()
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
        );

        let uses = |name: &str| match name {
            "n" => p != Protocol::Purity,
            "delta_over_omega" | "tau" | "ramp_steps" => p == Protocol::Cat1dAdiabatic,
            "alphas" | "boundary" | "edge_width" => p == Protocol::Ramsey,
            "input" => p == Protocol::Purity,
            "snapshot_times" => p == Protocol::Cat2d,
            _ => true,
        };
        let given = [
            ("n", self.n.is_some()),
            ("delta_over_omega", self.delta_over_omega.is_some()),
            ("tau", self.tau.is_some()),
            ("alphas", self.alphas.is_some()),
            ("boundary", self.boundary.is_some()),
            ("input", self.input.is_some()),
            ("ramp_steps", self.numeric.ramp_steps.is_some()),
            ("edge_width", self.numeric.edge_width.is_some()),
            ("snapshot_times", self.output.snapshot_times.is_some()),
        ];
        for (name, present) in given {
            if present && !uses(name) {
                return Err(Error::config(name, format!("not used by protocol {p}")));
            }
        }
        if uses("n") {
            out.n = Some(self.n.unwrap_or(d.n));
        }
        match p {
            Protocol::Cat1dAdiabatic => {
                out.delta_over_omega = Some(self.delta_over_omega.unwrap_or(10.0));
                out.tau = Some(self.tau.unwrap_or(40.0));
            }
            Protocol::Ramsey => {
                out.alphas = Some(self.alphas.clone().unwrap_or_else(|| uniform_phases(21)));
            }
            Protocol::Purity => out.input = Some(self.input.unwrap_or(PurityInput::Cat)),
            Protocol::Cat2d => {
                out.output.snapshot_times = Some(
                    self.output
                        .snapshot_times
                        .clone()
                        .unwrap_or_else(|| DEFAULT_SNAPSHOT_TIMES.to_vec()),
                );
            }
            Protocol::Cat1dPulses => {}
        }
        out.validate()?;
        Ok(out)
    }

    fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: Option<f64>| match v {
            Some(x) if !(x > 0.0) || !x.is_finite() => {
                Err(Error::config(name, format!("must be positive and finite, got {x}")))
            }
            _ => Ok(()),
        };
        positive("eta", self.eta)?;
        positive("omega_ratio", self.omega_ratio)?;
        positive("delta_over_omega", self.delta_over_omega)?;
        positive("tau", self.tau)?;
        positive("output.grid_extent", self.output.grid_extent)?;
        if let Some(b) = self.boundary {
            if !b.is_finite() {
                return Err(Error::config("boundary", "must be finite"));
            }
        }
        if let Some(w) = self.numeric.edge_width {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::config("numeric.edge_width", "must be finite and non-negative"));
            }
        }
        if let Some(alphas) = &self.alphas {
            if alphas.is_empty() {
                return Err(Error::config("alphas", "the phase sweep is empty"));
            }
            if let Some(i) = alphas.iter().position(|a| !a.is_finite()) {
                return Err(Error::config(format!("alphas[{i}]"), "must be finite"));
            }
        }
        if let Some(times) = &self.output.snapshot_times {
            if times.is_empty() {
                return Err(Error::config("output.snapshot_times", "needs at least one time"));
            }
            if let Some(i) = times.iter().position(|t| !(*t >= 0.0) || !t.is_finite()) {
                return Err(Error::config(
                    format!("output.snapshot_times[{i}]"),
                    "must be finite and non-negative",
                ));
            }
        }
        if let Some(points) = self.output.grid_points {
            if points < 3 {
                return Err(Error::config("output.grid_points", "need at least 3 points"));
            }
        }
        if let Some(n) = self.numeric.truncation {
            if n < 2 {
                return Err(Error::config("numeric.truncation", "need at least 2 Fock levels"));
            }
        }
        if let Some(steps) = self.numeric.ramp_steps {
            if steps < crate::numeric::MIN_RAMP_STEPS {
                return Err(Error::config(
                    "numeric.ramp_steps",
                    format!("need at least {} steps", crate::numeric::MIN_RAMP_STEPS),
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_figure_defaults() {
        let c = ExperimentConfig::from_json(r#"{"protocol": "cat2d"}"#).unwrap();
        let r = c.resolved().unwrap();
        assert_eq!(r.eta, Some(0.5));
        assert_eq!(r.omega_ratio, Some(300.0));
        assert_eq!(r.n, Some(2));
        assert_eq!(r.output.snapshot_times.as_ref().unwrap().len(), 5);
        assert_eq!(r.resolved().unwrap(), r);
    }

    #[test]
    fn unknown_keys_report_their_path() {
        let err = ExperimentConfig::from_json(r#"{"protocol": "ramsey", "numeric": {"cutof": 3}}"#).unwrap_err();
        match err {
            Error::Config { path, .. } => assert_eq!(path, "numeric.cutof"),
            other => panic!("{other:?}"),
        }
        assert_eq!(err_code(r#"{"protocol": ""}"#), 2);
        assert_eq!(err_code(r#"{"protocol": "ramsey", "eta": "x"}"#), 2);
    }

    fn err_code(json: &str) -> i32 {
        ExperimentConfig::from_json(json).unwrap_err().exit_code()
    }

    #[test]
    fn parameters_are_validated() {
        let mut c = ExperimentConfig::new(Protocol::Ramsey);
        c.eta = Some(-1.0);
        assert!(matches!(c.resolved(), Err(Error::Config { path, .. }) if path == "eta"));
        let mut c = ExperimentConfig::new(Protocol::Ramsey);
        c.alphas = Some(vec![]);
        assert!(c.resolved().is_err());
        let mut c = ExperimentConfig::new(Protocol::Ramsey);
        c.tau = Some(40.0);
        assert!(matches!(c.resolved(), Err(Error::Config { path, .. }) if path == "tau"));
    }

    #[test]
    fn resolved_config_round_trips_through_json() {
        for p in Protocol::ALL {
            let r = ExperimentConfig::new(p).resolved().unwrap();
            let text = serde_json::to_string(&r).unwrap();
            assert_eq!(ExperimentConfig::from_json(&text).unwrap(), r);
        }
    }
}
