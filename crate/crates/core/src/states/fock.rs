use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{Axis, CoherentComponent, InternalLevel, Modes, QuantumState, SuperpositionState};
use crate::error::{Error, Result};

/// State vector over {|g⟩, |e⟩} ⊗ truncated Fock space (one or two modes).
///
/// Layout is level-major: index = level·N + n for one mode and
/// level·N² + n_x·N + n_y for two modes.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    modes: Modes,
    cutoff: usize,
    amps: DVector<Complex64>,
}

impl FockState {
    pub fn dimension(modes: Modes, cutoff: usize) -> usize {
        2 * cutoff.pow(modes.count() as u32)
    }

    pub fn zeros(modes: Modes, cutoff: usize) -> Result<Self> {
        if cutoff == 0 {
            return Err(Error::invalid("cutoff", "Fock cutoff must be at least 1"));
        }
        Ok(FockState {
            modes,
            cutoff,
            amps: DVector::zeros(Self::dimension(modes, cutoff)),
        })
    }

    /// |g⟩ ⊗ motional vacuum.
    pub fn ground(modes: Modes, cutoff: usize) -> Result<Self> {
        let mut s = Self::zeros(modes, cutoff)?;
        s.amps[0] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn from_amplitudes(modes: Modes, cutoff: usize, amps: DVector<Complex64>) -> Result<Self> {
        let dim = Self::dimension(modes, cutoff);
        if cutoff == 0 || amps.len() != dim {
            return Err(Error::ShapeMismatch(format!(
                "expected {dim} amplitudes for cutoff {cutoff}, got {}",
                amps.len()
            )));
        }
        Ok(FockState {
            modes,
            cutoff,
            amps,
        })
    }

    /// Fock expansion of every component of a superposition, summed.
    pub fn from_superposition(state: &SuperpositionState, cutoff: usize) -> Result<Self> {
        let mut out = Self::zeros(state.modes(), cutoff)?;
        for c in state.components() {
            out.amps += fock_expand(c, cutoff)?.amps;
        }
        Ok(out)
    }

    pub fn modes(&self) -> Modes {
        self.modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut DVector<Complex64> {
        &mut self.amps
    }

    /// Number of amplitudes per internal level.
    pub fn block_len(&self) -> usize {
        self.cutoff.pow(self.modes.count() as u32)
    }

    pub fn level_block(&self, level: InternalLevel) -> &[Complex64] {
        let len = self.block_len();
        let start = level.index() * len;
        &self.amps.as_slice()[start..start + len]
    }

    pub(crate) fn level_block_mut(&mut self, level: InternalLevel) -> &mut [Complex64] {
        let len = self.block_len();
        let start = level.index() * len;
        &mut self.amps.as_mut_slice()[start..start + len]
    }

    /// Amplitude of |level⟩|n⟩ (one mode) or |level⟩|n_x, n_y⟩.
    pub fn amplitude(&self, level: InternalLevel, n: &[usize]) -> Option<Complex64> {
        let offset = match (self.modes, n) {
            (Modes::One, [k]) if *k < self.cutoff => *k,
            (Modes::Two, [kx, ky]) if *kx < self.cutoff && *ky < self.cutoff => {
                kx * self.cutoff + ky
            }
            _ => return None,
        };
        Some(self.amps[level.index() * self.block_len() + offset])
    }

    pub fn level_population(&self, level: InternalLevel) -> f64 {
        self.level_block(level).iter().map(|z| z.norm_sqr()).sum()
    }

    /// Occupation of Fock level `n` on `axis`, summed over everything else.
    fn axis_populations(&self, axis: Axis) -> Vec<f64> {
        let n = self.cutoff;
        let mut pops = vec![0.0; n];
        for level in InternalLevel::ALL {
            let block = self.level_block(level);
            match (self.modes, axis) {
                (Modes::One, _) => {
                    for (k, z) in block.iter().enumerate() {
                        pops[k] += z.norm_sqr();
                    }
                }
                (Modes::Two, Axis::X) => {
                    for (idx, z) in block.iter().enumerate() {
                        pops[idx / n] += z.norm_sqr();
                    }
                }
                (Modes::Two, Axis::Y) => {
                    for (idx, z) in block.iter().enumerate() {
                        pops[idx % n] += z.norm_sqr();
                    }
                }
            }
        }
        pops
    }

    /// ⟨a†a⟩ on one axis, normalized.
    pub fn mean_phonons(&self, axis: Axis) -> f64 {
        let pops = self.axis_populations(axis);
        let total: f64 = pops.iter().sum();
        if total == 0.0 {
            return 0.0;
        }
        pops.iter()
            .enumerate()
            .map(|(k, p)| k as f64 * p)
            .sum::<f64>()
            / total
    }

    /// Normalized population in the highest ⌈5%⌉ of Fock levels on any axis.
    pub fn truncation_leak(&self) -> f64 {
        let top = ((self.cutoff as f64 * super::LEAK_FRACTION).ceil() as usize).max(1);
        let total = self.norm_sqr();
        if total == 0.0 {
            return 0.0;
        }
        let axes: &[Axis] = match self.modes {
            Modes::One => &[Axis::X],
            Modes::Two => &[Axis::X, Axis::Y],
        };
        axes.iter()
            .map(|&axis| {
                let pops = self.axis_populations(axis);
                pops[self.cutoff - top..].iter().sum::<f64>() / total
            })
            .fold(0.0, f64::max)
    }

    pub fn is_under_truncated(&self, threshold: f64) -> bool {
        self.truncation_leak() > threshold
    }

    /// Reduced motional density matrix ρ_mn = Σ_level c_(level,m) c*_(level,n)
    /// of a one-mode state.
    pub fn motional_density_matrix(&self) -> Result<DMatrix<Complex64>> {
        if self.modes != Modes::One {
            return Err(Error::ShapeMismatch(
                "motional density matrix requires a one-mode state".into(),
            ));
        }
        let n = self.cutoff;
        let mut rho = DMatrix::zeros(n, n);
        for level in InternalLevel::ALL {
            let v = DVector::from_column_slice(self.level_block(level));
            rho += &v * v.adjoint();
        }
        Ok(rho)
    }

    /// Copy with the given level block zeroed out.
    pub fn without_level(&self, level: InternalLevel) -> FockState {
        let mut out = self.clone();
        out.level_block_mut(level).fill(Complex64::new(0.0, 0.0));
        out
    }

    /// Re-embeds the state into a different cutoff, dropping or zero-padding
    /// the highest levels.
    pub fn with_cutoff(&self, cutoff: usize) -> Result<FockState> {
        let mut out = FockState::zeros(self.modes, cutoff)?;
        let keep = cutoff.min(self.cutoff);
        for level in InternalLevel::ALL {
            match self.modes {
                Modes::One => {
                    for k in 0..keep {
                        out.amps[level.index() * cutoff + k] =
                            self.amps[level.index() * self.cutoff + k];
                    }
                }
                Modes::Two => {
                    for kx in 0..keep {
                        for ky in 0..keep {
                            out.amps[level.index() * cutoff * cutoff + kx * cutoff + ky] = self
                                .amps[level.index() * self.block_len() + kx * self.cutoff + ky];
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    pub(crate) fn check_same_shape(&self, other: &FockState) -> Result<()> {
        if self.modes != other.modes || self.cutoff != other.cutoff {
            return Err(Error::ShapeMismatch(format!(
                "Fock states differ in shape: {} modes / N={} vs {} modes / N={}",
                self.modes.count(),
                self.cutoff,
                other.modes.count(),
                other.cutoff
            )));
        }
        Ok(())
    }

    pub fn plus(&self, other: &FockState) -> Result<FockState> {
        self.check_same_shape(other)?;
        Ok(FockState {
            amps: &self.amps + &other.amps,
            ..self.clone()
        })
    }
}

impl QuantumState for FockState {
    fn norm_sqr(&self) -> f64 {
        self.amps.norm_squared()
    }

    fn inner_product(&self, other: &Self) -> Result<Complex64> {
        self.check_same_shape(other)?;
        Ok(self.amps.dotc(&other.amps))
    }

    fn scaled(&self, factor: Complex64) -> Self {
        FockState {
            amps: &self.amps * factor,
            ..self.clone()
        }
    }
}

/// Truncated coherent-state amplitudes e^(−|α|²/2) α^n / √(n!) for n < N.
fn coherent_amplitudes(alpha: Complex64, cutoff: usize) -> Vec<Complex64> {
    let mut amps = Vec::with_capacity(cutoff);
    let mut cur = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 0..cutoff {
        amps.push(cur);
        cur = cur * alpha / ((n + 1) as f64).sqrt();
    }
    amps
}

/// Expands one coherent component in the truncated Fock basis at its own
/// internal level. Population beyond the cutoff is simply lost; check it with
/// [`FockState::truncation_leak`].
pub fn fock_expand(component: &CoherentComponent, cutoff: usize) -> Result<FockState> {
    let modes = component.alpha.modes();
    let mut out = FockState::zeros(modes, cutoff)?;
    let xs = coherent_amplitudes(component.alpha.x, cutoff);
    let block = out.level_block_mut(component.level);
    match component.alpha.y {
        None => {
            for (dst, a) in block.iter_mut().zip(&xs) {
                *dst = component.coeff * a;
            }
        }
        Some(y) => {
            let ys = coherent_amplitudes(y, cutoff);
            for (kx, ax) in xs.iter().enumerate() {
                for (ky, ay) in ys.iter().enumerate() {
                    block[kx * cutoff + ky] = component.coeff * ax * ay;
                }
            }
        }
    }
    Ok(out)
}
