//! Quantum-state types shared by the analytic and numeric backends.
//!
//! Units: frequencies in units of the trap frequency ν, times in 1/ν, ħ = 1.
//! Position grids use x̃ = x/x0 with x0 = (2mν)^(-1/2) and momentum grids use
//! p̃ = p/p0 with p0 = (mν/2)^(1/2). For a coherent amplitude α this gives
//! ⟨x̃⟩ = 2 Re α and ⟨p̃⟩ = 2 Im α, and the photon recoil factor e^(±i k x̂)
//! is the displacement D(±iη).

mod fock;
mod grid;
pub mod wavefunction;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analytic::coherent_overlap;
use crate::error::{Error, Result};

pub use fock::{fock_expand, FockState};
pub use grid::{uniform_axis, AxisQuantity, DensityGrid, GridAxis, GridKind};

/// Components with the same level whose amplitudes differ by less than this
/// are merged by [`SuperpositionState::merged`].
pub const MERGE_TOLERANCE: f64 = 1e-12;

/// Default number of points per grid axis.
pub const DEFAULT_GRID_POINTS: usize = 201;

/// Fraction of the highest Fock levels inspected by the leak check.
pub const LEAK_FRACTION: f64 = 0.05;

/// Default population allowed in the top Fock levels.
pub const DEFAULT_LEAK_THRESHOLD: f64 = 1e-6;

/// Internal level of the ion. The auxiliary monitor level is never
/// represented; detection is modeled as an ideal projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum InternalLevel {
    #[serde(rename = "g")]
    Ground,
    #[serde(rename = "e")]
    Excited,
}

impl InternalLevel {
    pub const ALL: [InternalLevel; 2] = [InternalLevel::Ground, InternalLevel::Excited];

    /// Block index in Fock-space layouts (g = 0, e = 1).
    pub fn index(self) -> usize {
        match self {
            InternalLevel::Ground => 0,
            InternalLevel::Excited => 1,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            InternalLevel::Ground => InternalLevel::Excited,
            InternalLevel::Excited => InternalLevel::Ground,
        }
    }
}

impl fmt::Display for InternalLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InternalLevel::Ground => "g",
            InternalLevel::Excited => "e",
        })
    }
}

impl FromStr for InternalLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "g" | "ground" => Ok(InternalLevel::Ground),
            "e" | "excited" => Ok(InternalLevel::Excited),
            other => Err(Error::invalid("level", format!("unknown level `{other}`"))),
        }
    }
}

/// Motional axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
        })
    }
}

/// Number of motional modes carried by a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Modes {
    One,
    Two,
}

impl Modes {
    pub fn count(self) -> usize {
        match self {
            Modes::One => 1,
            Modes::Two => 2,
        }
    }

    pub fn has(self, axis: Axis) -> bool {
        matches!((self, axis), (_, Axis::X) | (Modes::Two, Axis::Y))
    }

    pub(crate) fn check_axis(self, axis: Axis) -> Result<()> {
        if self.has(axis) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!(
                "axis {axis} is not present in a {}-mode state",
                self.count()
            )))
        }
    }
}

/// Coherent amplitudes of one component, one per motional mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Amplitudes {
    pub x: Complex64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Complex64>,
}

impl Amplitudes {
    pub fn one(x: Complex64) -> Self {
        Amplitudes { x, y: None }
    }

    pub fn two(x: Complex64, y: Complex64) -> Self {
        Amplitudes { x, y: Some(y) }
    }

    pub fn modes(&self) -> Modes {
        if self.y.is_some() {
            Modes::Two
        } else {
            Modes::One
        }
    }

    pub fn get(&self, axis: Axis) -> Option<Complex64> {
        match axis {
            Axis::X => Some(self.x),
            Axis::Y => self.y,
        }
    }

    /// Replaces the amplitude on `axis`; no-op for an absent axis.
    pub fn map_axis(mut self, axis: Axis, f: impl FnOnce(Complex64) -> Complex64) -> Self {
        match axis {
            Axis::X => self.x = f(self.x),
            Axis::Y => self.y = self.y.map(f),
        }
        self
    }

    pub fn map_all(self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Amplitudes {
            x: f(self.x),
            y: self.y.map(f),
        }
    }

    /// Product of per-mode coherent overlaps ⟨self|other⟩.
    pub fn overlap(&self, other: &Amplitudes) -> Complex64 {
        let mut value = coherent_overlap(self.x, other.x);
        if let (Some(a), Some(b)) = (self.y, other.y) {
            value *= coherent_overlap(a, b);
        }
        value
    }

    pub fn max_abs(&self) -> f64 {
        self.x.norm().max(self.y.map_or(0.0, |y| y.norm()))
    }

    /// Largest per-mode distance; infinite when the mode counts differ.
    pub fn distance(&self, other: &Amplitudes) -> f64 {
        let dy = match (self.y, other.y) {
            (Some(a), Some(b)) => (a - b).norm(),
            (None, None) => 0.0,
            _ => f64::INFINITY,
        };
        (self.x - other.x).norm().max(dy)
    }
}

/// One term c·|level⟩|α⟩ of a superposition of coherent states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentComponent {
    pub level: InternalLevel,
    pub coeff: Complex64,
    pub alpha: Amplitudes,
}

impl CoherentComponent {
    pub fn new(level: InternalLevel, coeff: Complex64, alpha: Amplitudes) -> Self {
        CoherentComponent {
            level,
            coeff,
            alpha,
        }
    }

    pub fn one_mode(level: InternalLevel, coeff: Complex64, alpha: Complex64) -> Self {
        Self::new(level, coeff, Amplitudes::one(alpha))
    }
}

/// Operations common to both state representations.
pub trait QuantumState: Sized {
    fn norm_sqr(&self) -> f64;

    /// ⟨self|other⟩. Fails when the two states do not share a shape.
    fn inner_product(&self, other: &Self) -> Result<Complex64>;

    fn scaled(&self, factor: Complex64) -> Self;

    /// Unit-norm copy pointing in the same direction. A zero-norm state is an
    /// error because it can only arise from a measurement branch of
    /// probability zero.
    fn normalized(&self) -> Result<Self> {
        let norm_sqr = self.norm_sqr();
        if !(norm_sqr > 0.0) || !norm_sqr.is_finite() {
            return Err(Error::ZeroNorm);
        }
        Ok(self.scaled(Complex64::new(norm_sqr.sqrt().recip(), 0.0)))
    }

    /// |⟨a|b⟩|² / (⟨a|a⟩⟨b|b⟩).
    fn fidelity(&self, other: &Self) -> Result<f64> {
        let denom = self.norm_sqr() * other.norm_sqr();
        if !(denom > 0.0) {
            return Err(Error::ZeroNorm);
        }
        Ok(self.inner_product(other)?.norm_sqr() / denom)
    }

    /// ‖self − other‖².
    fn distance_sqr(&self, other: &Self) -> Result<f64> {
        let cross = self.inner_product(other)?.re;
        Ok((self.norm_sqr() + other.norm_sqr() - 2.0 * cross).max(0.0))
    }
}

/// Normalizes either state representation.
pub fn normalize<S: QuantumState>(state: &S) -> Result<S> {
    state.normalized()
}

pub fn inner_product<S: QuantumState>(a: &S, b: &S) -> Result<Complex64> {
    a.inner_product(b)
}

/// Finite superposition Σ c_j |level_j⟩|α_j⟩; the analytic backend's state.
///
/// Components are not orthogonal, so norms and inner products go through
/// coherent overlaps. Duplicate amplitudes are allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperpositionState {
    modes: Modes,
    components: Vec<CoherentComponent>,
}

impl SuperpositionState {
    /// Ion in |g⟩ and the motional vacuum.
    pub fn ground(modes: Modes) -> Self {
        let alpha = match modes {
            Modes::One => Amplitudes::one(Complex64::new(0.0, 0.0)),
            Modes::Two => Amplitudes::two(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
        };
        SuperpositionState {
            modes,
            components: vec![CoherentComponent::new(
                InternalLevel::Ground,
                Complex64::new(1.0, 0.0),
                alpha,
            )],
        }
    }

    pub fn new(modes: Modes, components: Vec<CoherentComponent>) -> Result<Self> {
        for (i, c) in components.iter().enumerate() {
            if c.alpha.modes() != modes {
                return Err(Error::ShapeMismatch(format!(
                    "component {i} has {} modes, state has {}",
                    c.alpha.modes().count(),
                    modes.count()
                )));
            }
            if !c.coeff.re.is_finite() || !c.coeff.im.is_finite() {
                return Err(Error::invalid("coeff", format!("component {i} is not finite")));
            }
            let a = c.alpha;
            let finite = |z: Complex64| z.re.is_finite() && z.im.is_finite();
            if !finite(a.x) || !a.y.map_or(true, finite) {
                return Err(Error::invalid("alpha", format!("component {i} is not finite")));
            }
        }
        Ok(SuperpositionState { modes, components })
    }

    /// Normalized K(|α⟩ + |−α⟩) on one mode at the given level.
    pub fn cat(level: InternalLevel, alpha: Complex64) -> Result<Self> {
        let one = Complex64::new(1.0, 0.0);
        Self::new(
            Modes::One,
            vec![
                CoherentComponent::one_mode(level, one, alpha),
                CoherentComponent::one_mode(level, one, -alpha),
            ],
        )?
        .normalized()
    }

    /// Single coherent state c|level⟩|α⟩ on one mode.
    pub fn coherent(level: InternalLevel, alpha: Complex64) -> Self {
        SuperpositionState {
            modes: Modes::One,
            components: vec![CoherentComponent::one_mode(
                level,
                Complex64::new(1.0, 0.0),
                alpha,
            )],
        }
    }

    pub(crate) fn from_parts_unchecked(modes: Modes, components: Vec<CoherentComponent>) -> Self {
        SuperpositionState { modes, components }
    }

    pub fn modes(&self) -> Modes {
        self.modes
    }

    pub fn components(&self) -> &[CoherentComponent] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Components at one internal level (not renormalized).
    pub fn branch(&self, level: InternalLevel) -> SuperpositionState {
        SuperpositionState {
            modes: self.modes,
            components: self
                .components
                .iter()
                .filter(|c| c.level == level)
                .copied()
                .collect(),
        }
    }

    /// Largest coherent amplitude over all components and modes.
    pub fn max_amplitude(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.alpha.max_abs())
            .fold(0.0, f64::max)
    }

    /// ⟨a†a⟩ on `axis` (normalized expectation).
    pub fn mean_phonons(&self, axis: Axis) -> f64 {
        let mut num = 0.0;
        for a in &self.components {
            for b in &self.components {
                if a.level != b.level {
                    continue;
                }
                let (Some(za), Some(zb)) = (a.alpha.get(axis), b.alpha.get(axis)) else {
                    continue;
                };
                num += (a.coeff.conj() * b.coeff * a.alpha.overlap(&b.alpha) * za.conj() * zb).re;
            }
        }
        let norm = self.norm_sqr();
        if norm > 0.0 {
            num / norm
        } else {
            0.0
        }
    }

    /// Combines components with the same level and amplitudes closer than
    /// `tol`, dropping exact zeros. Never changes the represented vector
    /// beyond the merge tolerance.
    pub fn merged(&self, tol: f64) -> SuperpositionState {
        let mut out: Vec<CoherentComponent> = Vec::with_capacity(self.components.len());
        for c in &self.components {
            if let Some(existing) = out
                .iter_mut()
                .find(|o| o.level == c.level && o.alpha.distance(&c.alpha) < tol)
            {
                existing.coeff += c.coeff;
            } else {
                out.push(*c);
            }
        }
        out.retain(|c| c.coeff.norm_sqr() > 0.0);
        SuperpositionState {
            modes: self.modes,
            components: out,
        }
    }

    /// Component-wise sum of two states with the same mode count.
    pub fn plus(&self, other: &SuperpositionState) -> Result<SuperpositionState> {
        if self.modes != other.modes {
            return Err(Error::ShapeMismatch("mode counts differ".into()));
        }
        let mut components = self.components.clone();
        components.extend_from_slice(&other.components);
        Ok(SuperpositionState {
            modes: self.modes,
            components,
        })
    }
}

impl QuantumState for SuperpositionState {
    fn norm_sqr(&self) -> f64 {
        // The diagonal is real; symmetric pairs contribute 2 Re.
        let mut total = 0.0;
        for (i, a) in self.components.iter().enumerate() {
            total += a.coeff.norm_sqr();
            for b in &self.components[i + 1..] {
                if a.level == b.level {
                    total += 2.0 * (a.coeff.conj() * b.coeff * a.alpha.overlap(&b.alpha)).re;
                }
            }
        }
        total.max(0.0)
    }

    fn inner_product(&self, other: &Self) -> Result<Complex64> {
        if self.modes != other.modes {
            return Err(Error::ShapeMismatch(format!(
                "inner product of {}-mode and {}-mode states",
                self.modes.count(),
                other.modes.count()
            )));
        }
        let mut total = Complex64::new(0.0, 0.0);
        for a in &self.components {
            for b in &other.components {
                if a.level == b.level {
                    total += a.coeff.conj() * b.coeff * a.alpha.overlap(&b.alpha);
                }
            }
        }
        Ok(total)
    }

    fn scaled(&self, factor: Complex64) -> Self {
        SuperpositionState {
            modes: self.modes,
            components: self
                .components
                .iter()
                .map(|c| CoherentComponent {
                    coeff: c.coeff * factor,
                    ..*c
                })
                .collect(),
        }
    }
}

/// Fock cutoff N = ceil(|α|² + 8|α| + 20) for the largest amplitude a
/// protocol reaches; the Poisson tail above N stays below 1e−8.
pub fn default_truncation(alpha_max: f64) -> usize {
    let a = alpha_max.abs();
    (a * a + 8.0 * a + 20.0).ceil() as usize
}

/// Half-width 2|α| + 6 of the default plotting window, in x̃ or p̃ units.
pub fn default_grid_extent(alpha_max: f64) -> f64 {
    2.0 * alpha_max.abs() + 6.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identical_components_collapse_to_one_direction() {
        let s = SuperpositionState::new(
            Modes::One,
            vec![
                CoherentComponent::one_mode(InternalLevel::Ground, c(1.0, 0.0), c(0.0, 0.0)),
                CoherentComponent::one_mode(InternalLevel::Ground, c(1.0, 0.0), c(0.0, 0.0)),
            ],
        )
        .unwrap();
        let n = s.normalized().unwrap();
        assert_relative_eq!(n.norm_sqr(), 1.0, epsilon = 1e-12);
        for comp in n.components() {
            assert_relative_eq!(comp.coeff.re, 0.5, epsilon = 1e-15);
        }
    }

    #[test]
    fn cat_normalization_constant() {
        let eta = 0.5;
        let k = SuperpositionState::cat(InternalLevel::Excited, c(0.0, eta)).unwrap();
        let expected = (2.0 + 2.0 * (-2.0_f64 * 0.25).exp()).powf(-0.5);
        assert_relative_eq!(k.components()[0].coeff.re, expected, epsilon = 1e-14);
        // Far-separated limit.
        let k = SuperpositionState::cat(InternalLevel::Excited, c(0.0, 30.0)).unwrap();
        assert_relative_eq!(k.components()[0].coeff.re, 0.5_f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn zero_norm_is_an_error() {
        let s = SuperpositionState::new(Modes::One, vec![]).unwrap();
        assert!(matches!(s.normalized(), Err(Error::ZeroNorm)));
        let s = SuperpositionState::new(
            Modes::One,
            vec![
                CoherentComponent::one_mode(InternalLevel::Ground, c(1.0, 0.0), c(0.3, 0.1)),
                CoherentComponent::one_mode(InternalLevel::Ground, c(-1.0, 0.0), c(0.3, 0.1)),
            ],
        )
        .unwrap();
        assert!(matches!(s.normalized(), Err(Error::ZeroNorm)));
    }

    #[test]
    fn orthogonal_internal_levels() {
        let a = SuperpositionState::coherent(InternalLevel::Ground, c(0.7, -0.2));
        let b = SuperpositionState::coherent(InternalLevel::Excited, c(0.7, -0.2));
        assert_eq!(a.inner_product(&b).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn mode_mismatch_is_rejected() {
        let a = SuperpositionState::ground(Modes::One);
        let b = SuperpositionState::ground(Modes::Two);
        assert!(matches!(a.inner_product(&b), Err(Error::ShapeMismatch(_))));
        let bad = SuperpositionState::new(
            Modes::Two,
            vec![CoherentComponent::one_mode(InternalLevel::Ground, c(1.0, 0.0), c(0.0, 0.0))],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn vacuum_overlap_with_displaced_state() {
        let eta = 0.5;
        let a = SuperpositionState::coherent(InternalLevel::Ground, c(0.0, 0.0));
        let b = SuperpositionState::coherent(InternalLevel::Ground, c(0.0, 2.0 * eta));
        assert_relative_eq!(a.inner_product(&b).unwrap().re, (-0.5_f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn mean_phonons_of_coherent_state() {
        let s = SuperpositionState::coherent(InternalLevel::Ground, c(1.2, -0.7));
        assert_relative_eq!(s.mean_phonons(Axis::X), 1.2 * 1.2 + 0.7 * 0.7, epsilon = 1e-12);
    }

    #[test]
    fn merging_preserves_vector() {
        let s = SuperpositionState::new(
            Modes::One,
            vec![
                CoherentComponent::one_mode(InternalLevel::Ground, c(0.3, 0.0), c(1.0, 0.0)),
                CoherentComponent::one_mode(InternalLevel::Excited, c(0.1, 0.2), c(1.0, 0.0)),
                CoherentComponent::one_mode(InternalLevel::Ground, c(0.4, 0.1), c(1.0, 0.0)),
            ],
        )
        .unwrap();
        let m = s.merged(MERGE_TOLERANCE);
        assert_eq!(m.len(), 2);
        assert!(s.distance_sqr(&m).unwrap() < 1e-28);
    }

    #[test]
    fn truncation_rule() {
        assert_eq!(default_truncation(0.0), 20);
        assert_eq!(default_truncation(3.0), 53);
        assert_eq!(default_grid_extent(2.5), 11.0);
    }
}
