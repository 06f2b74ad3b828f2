use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::backend::{BackendKind, StateSnapshot};
use super::cat::PacketTrack;
use crate::error::{Error, Result};
use crate::states::{DensityGrid, QuantumState, SuperpositionState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    Cat1dPulses,
    Cat1dAdiabatic,
    Cat2d,
    Purity,
    Ramsey,
}

impl Protocol {
    pub const ALL: [Protocol; 5] = [
        Protocol::Cat1dPulses,
        Protocol::Cat1dAdiabatic,
        Protocol::Cat2d,
        Protocol::Purity,
        Protocol::Ramsey,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Protocol::Cat1dPulses => "cat1d-pulses",
            Protocol::Cat1dAdiabatic => "cat1d-adiabatic",
            Protocol::Cat2d => "cat2d",
            Protocol::Purity => "purity",
            Protocol::Ramsey => "ramsey",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Protocol::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let known: Vec<_> = Protocol::ALL.iter().map(|p| p.name()).collect();
                Error::invalid("protocol", format!("unknown protocol {s:?}; expected one of {}", known.join(", ")))
            })
    }
}

/// Whether post-selection kept the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Succeeded,
    /// Fluorescence was observed and the motional state discarded.
    Failed,
}

/// Indicators of how well the run satisfies the assumptions of the ideal
/// kick picture.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Validity {
    /// ν·τ·max(n̄, η²) summed over laser interactions; should be ≪ 1.
    pub motion: f64,
    /// Largest max|dδ/dt|/Ω² over all ramps; should be ≪ 1.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adiabaticity: Option<f64>,
    /// Largest population found in the top Fock levels.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation_leak: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
    /// Largest probability change when the cutoff is raised by 25%.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation_shift: Option<f64>,
}

/// A state recorded at a labelled point of the protocol.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub label: String,
    /// Free-evolution time since the snapshot series started (1/ν).
    pub time: f64,
    pub state: StateSnapshot,
}

/// A sampled observable as a function of one swept parameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scan {
    pub parameter: String,
    pub observable: String,
    pub values: Vec<f64>,
    pub results: Vec<f64>,
}

impl Scan {
    /// (max − min)/(max + min) of the results.
    pub fn visibility(&self) -> f64 {
        visibility(&self.results)
    }
}

pub fn visibility(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if max + min == 0.0 {
        0.0
    } else {
        (max - min) / (max + min)
    }
}

/// Result of one protocol run on one backend.
#[derive(Debug, Clone, Serialize)]
pub struct ProtocolReport {
    pub protocol: Protocol,
    pub backend: BackendKind,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub outcome: Outcome,
    /// Named outcome probabilities, e.g. "e" and "g".
    pub probabilities: BTreeMap<String, f64>,
    pub diagnostics: BTreeMap<String, f64>,
    pub flags: BTreeMap<String, bool>,
    pub validity: Validity,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan: Option<Scan>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub tracks: Vec<PacketTrack>,
    #[serde(skip)]
    pub final_state: Option<StateSnapshot>,
    #[serde(skip)]
    pub snapshots: Vec<Snapshot>,
    /// Named observable grids, in emission order.
    #[serde(skip)]
    pub grids: Vec<(String, DensityGrid)>,
}

impl ProtocolReport {
    pub(crate) fn new(protocol: Protocol, backend: BackendKind) -> Self {
        ProtocolReport {
            protocol,
            backend,
            parameters: BTreeMap::new(),
            outcome: Outcome::Succeeded,
            probabilities: BTreeMap::new(),
            diagnostics: BTreeMap::new(),
            flags: BTreeMap::new(),
            validity: Validity::default(),
            warnings: Vec::new(),
            scan: None,
            tracks: Vec::new(),
            final_state: None,
            snapshots: Vec::new(),
            grids: Vec::new(),
        }
    }

    pub(crate) fn param(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("protocol parameters serialize");
        self.parameters.insert(key.to_string(), v);
    }

    pub fn probability(&self, key: &str) -> Option<f64> {
        self.probabilities.get(key).copied()
    }

    pub fn grid(&self, name: &str) -> Option<&DensityGrid> {
        self.grids.iter().find(|(n, _)| n == name).map(|(_, g)| g)
    }

    pub fn flag(&self, name: &str) -> Option<bool> {
        self.flags.get(name).copied()
    }
}

/// Classical mixture Σ w_k |ψ_k⟩⟨ψ_k| of pure states.
#[derive(Debug, Clone)]
pub struct MixtureEnsemble {
    members: Vec<(f64, SuperpositionState)>,
}

const WEIGHT_TOLERANCE: f64 = 1e-12;

impl MixtureEnsemble {
    /// Weights must be non-negative and sum to 1; states are normalized.
    pub fn new(members: Vec<(f64, SuperpositionState)>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::invalid("mixture", "needs at least one member"));
        }
        if members.iter().any(|(w, _)| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::invalid("mixture", "weights must be finite and non-negative"));
        }
        let total: f64 = members.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(Error::invalid("mixture", format!("weights sum to {total}, not 1")));
        }
        let members = members
            .into_iter()
            .map(|(w, s)| Ok((w, s.normalized()?)))
            .collect::<Result<_>>()?;
        Ok(MixtureEnsemble { members })
    }

    pub fn pure(state: SuperpositionState) -> Result<Self> {
        Self::new(vec![(1.0, state)])
    }

    pub fn members(&self) -> &[(f64, SuperpositionState)] {
        &self.members
    }

    pub fn is_pure(&self) -> bool {
        self.members.len() == 1
    }
}

/// Differences between two runs of the same protocol.
#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub protocol: Protocol,
    pub backends: [BackendKind; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub final_fidelity: Option<f64>,
    pub snapshot_fidelities: BTreeMap<String, f64>,
    /// Largest pointwise |difference| over all grids present in both runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_grid_deviation: Option<f64>,
    /// b − a for every probability present in both runs.
    pub probability_deltas: BTreeMap<String, f64>,
    /// max |Δ| over the swept observable.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scan_max_delta: Option<f64>,
}

pub fn compare_backends(a: &ProtocolReport, b: &ProtocolReport) -> Result<Comparison> {
    if a.protocol != b.protocol {
        return Err(Error::ProtocolMismatch(format!(
            "cannot compare {} with {}",
            a.protocol, b.protocol
        )));
    }
    let physical = |r: &ProtocolReport| {
        r.parameters
            .iter()
            .filter(|(k, _)| !NON_PHYSICAL.contains(&k.as_str()))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect::<BTreeMap<_, _>>()
    };
    if physical(a) != physical(b) {
        return Err(Error::ProtocolMismatch(format!(
            "{} runs differ in their physical parameters",
            a.protocol
        )));
    }

    let final_fidelity = match (&a.final_state, &b.final_state) {
        (Some(x), Some(y)) => Some(x.fidelity(y)?),
        _ => None,
    };
    let mut snapshot_fidelities = BTreeMap::new();
    for sa in &a.snapshots {
        if let Some(sb) = b.snapshots.iter().find(|s| s.label == sa.label) {
            snapshot_fidelities.insert(sa.label.clone(), sa.state.fidelity(&sb.state)?);
        }
    }
    let mut max_grid_deviation: Option<f64> = None;
    for (name, ga) in &a.grids {
        if let Some(gb) = b.grid(name) {
            let d = ga.max_abs_diff(gb)?;
            max_grid_deviation = Some(max_grid_deviation.map_or(d, |m| m.max(d)));
        }
    }
    let probability_deltas = a
        .probabilities
        .iter()
        .filter_map(|(k, pa)| b.probability(k).map(|pb| (k.clone(), pb - pa)))
        .collect();
    let scan_max_delta = match (&a.scan, &b.scan) {
        (Some(x), Some(y)) => {
            if x.values != y.values {
                return Err(Error::ProtocolMismatch("scans sample different parameter values".into()));
            }
            Some(
                x.results
                    .iter()
                    .zip(&y.results)
                    .map(|(p, q)| (p - q).abs())
                    .fold(0.0, f64::max),
            )
        }
        _ => None,
    };
    Ok(Comparison {
        protocol: a.protocol,
        backends: [a.backend, b.backend],
        final_fidelity,
        snapshot_fidelities,
        max_grid_deviation,
        probability_deltas,
        scan_max_delta,
    })
}

/// Parameters that only affect how a backend computes, not what.
const NON_PHYSICAL: [&str; 3] = ["cutoff", "ramp_steps", "edge_width"];
